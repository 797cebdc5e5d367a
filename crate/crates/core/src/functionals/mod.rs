//! Per-recording statistical functionals over low-level descriptor tracks.

mod assemble;
mod matrix;
mod registry;

pub use assemble::{assemble_vector, Descriptors, PITCH_LLDS, SPECTRAL_LLDS};
pub use matrix::{format_value, read_matrix, write_matrix, FeatureMatrix, FeatureVector};
pub use registry::{normalize_name, FeatureRegistry, Functional, RegistryEntry, Scope, FEATURE_COUNT, REGISTRY_VERSION};

/// Means closer to zero than this make the coefficient of variation
/// meaningless; the SD itself is reported instead.
pub const SD_NORM_GUARD: f64 = 1e-8;

pub fn func_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

pub fn func_sd(values: &[f64], population: bool) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = func_mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / if population { n } else { n - 1 } as f64).sqrt()
}

/// SD over |mean|; the bool is set when the near-zero-mean guard applied.
pub fn func_sd_norm(values: &[f64], population: bool) -> (f64, bool) {
    if values.is_empty() {
        return (0.0, false);
    }
    let m = func_mean(values);
    let sd = func_sd(values, population);
    if m.abs() < SD_NORM_GUARD {
        (sd, true)
    } else {
        (sd / m.abs(), false)
    }
}

/// Linear-interpolation percentile of sorted data at rank `(n - 1) q`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percentiles {
    pub p20: f64,
    pub p50: f64,
    pub p80: f64,
    pub range_20_80: f64,
}

pub fn func_percentiles(values: &[f64]) -> Percentiles {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let (p20, p50, p80) = (percentile_sorted(&s, 0.2), percentile_sorted(&s, 0.5), percentile_sorted(&s, 0.8));
    Percentiles { p20, p50, p80, range_20_80: p80 - p20 }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Slopes {
    pub rising_mean: f64,
    pub rising_sd: f64,
    pub falling_mean: f64,
    pub falling_sd: f64,
}

/// Splits every contour into maximal strictly rising and strictly falling
/// runs; each run contributes `(end - start) / duration`. Flat steps end a run.
pub fn func_slopes(contours: &[Vec<f64>], hop_s: f64, population: bool) -> Slopes {
    let mut rising = Vec::new();
    let mut falling = Vec::new();
    for c in contours {
        let mut i = 0;
        while i + 1 < c.len() {
            let sign = (c[i + 1] - c[i]).signum();
            if c[i + 1] == c[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i + 1 < c.len() && c[i + 1] != c[i] && (c[i + 1] - c[i]).signum() == sign {
                i += 1;
            }
            let slope = (c[i] - c[start]) / ((i - start) as f64 * hop_s);
            if sign > 0.0 {
                rising.push(slope);
            } else {
                falling.push(slope);
            }
        }
    }
    Slopes {
        rising_mean: func_mean(&rising),
        rising_sd: func_sd(&rising, population),
        falling_mean: func_mean(&falling),
        falling_sd: func_sd(&falling, population),
    }
}

/// Local maxima whose prominence reaches a quarter of the track's range,
/// per second. The first and last frames never count.
pub fn func_peaks_per_second(track: &[f64], duration_s: f64) -> f64 {
    if track.len() < 3 || duration_s <= 0.0 {
        return 0.0;
    }
    let (lo, hi) = track.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let min_prominence = 0.25 * (hi - lo);
    if min_prominence <= 0.0 {
        return 0.0;
    }
    let n = track.len();
    let mut count = 0;
    let mut i = 1;
    while i + 1 < n {
        // a plateau counts once, at its first sample
        let mut j = i;
        while j + 1 < n && track[j + 1] == track[i] {
            j += 1;
        }
        if track[i] > track[i - 1] && j + 1 < n && track[j + 1] < track[i] {
            let peak = track[i];
            let left = track[..i].iter().rev().take_while(|&&x| x <= peak).fold(peak, |m, &x| m.min(x));
            let right = track[j + 1..].iter().take_while(|&&x| x <= peak).fold(peak, |m, &x| m.min(x));
            if peak - left.max(right) >= min_prominence {
                count += 1;
            }
        }
        i = j + 1;
    }
    count as f64 / duration_s
}

/// Equivalent continuous level, `10 log10(mean power)` in dB re full scale,
/// floored at -100 dB.
pub fn equivalent_sound_level(samples: &[f64]) -> f64 {
    let p = func_mean(&samples.iter().map(|x| x * x).collect::<Vec<_>>());
    if p > 0.0 {
        (10.0 * p.log10()).max(-100.0)
    } else {
        -100.0
    }
}
