use crate::audio::AudioBuffer;
use crate::config::Config;
use crate::dsp::{autocorrelation, parabolic_peak, FrameGrid, Window};

use super::hz_to_semitones;

/// Per-frame pitch contour on the long (60 ms by default) Gaussian grid.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    /// Hz on voiced frames, 0 elsewhere.
    pub f0_hz: Vec<f64>,
    pub voiced: Vec<bool>,
    pub grid: FrameGrid,
    pub duration_s: f64,
}

impl F0Track {
    pub fn len(&self) -> usize {
        self.voiced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voiced.is_empty()
    }

    pub fn hop_s(&self) -> f64 {
        self.grid.hop_s
    }

    /// Semitones re 27.5 Hz; `None` on unvoiced frames.
    pub fn f0_st(&self) -> Vec<Option<f64>> {
        self.f0_hz
            .iter()
            .zip(&self.voiced)
            .map(|(&f, &v)| v.then(|| hz_to_semitones(f)))
            .collect()
    }

    pub fn center_s(&self, i: usize) -> f64 {
        self.grid.center_s(i)
    }

    /// Index of the frame whose center is nearest to `t_s`.
    pub fn frame_at(&self, t_s: f64) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        let i = ((t_s - self.grid.frame_len_s / 2.0) / self.grid.hop_s).round();
        Some(i.clamp(0.0, (self.len() - 1) as f64) as usize)
    }

    pub fn voiced_at(&self, t_s: f64) -> bool {
        self.frame_at(t_s).is_some_and(|i| self.voiced[i])
    }

    pub fn voiced_count(&self) -> usize {
        self.voiced.iter().filter(|&&v| v).count()
    }

    /// Voiced frames rescinded when they form runs shorter than `min_frames`.
    pub(crate) fn prune_short_runs(&mut self, min_frames: usize) {
        let mut i = 0;
        while i < self.voiced.len() {
            if !self.voiced[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < self.voiced.len() && self.voiced[i] {
                i += 1;
            }
            if i - start < min_frames {
                for j in start..i {
                    self.voiced[j] = false;
                    self.f0_hz[j] = 0.0;
                }
            }
        }
    }
}

/// Autocorrelation of a mean-removed, windowed frame divided by the window's
/// own autocorrelation, both normalized at lag 0. Periodic signals score
/// close to 1 at multiples of their period regardless of window taper.
pub fn normalized_acf(frame: &[f64], window: &[f64], window_acf: &[f64]) -> Option<Vec<f64>> {
    let mean = frame.iter().sum::<f64>() / frame.len() as f64;
    let xw: Vec<f64> = frame.iter().zip(window).map(|(x, w)| (x - mean) * w).collect();
    let acf = autocorrelation(&xw);
    if acf[0] <= 0.0 {
        return None;
    }
    Some(
        acf.iter()
            .zip(window_acf)
            .map(|(r, rw)| {
                if *rw > 1e-9 * window_acf[0] {
                    (r / acf[0]) / (rw / window_acf[0])
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// Local maxima of `r` in `[min_lag, max_lag]` with positive correlation, as
/// parabolically refined `(lag, value)` pairs in ascending lag order.
fn acf_peaks(r: &[f64], min_lag: usize, max_lag: usize) -> Vec<(f64, f64)> {
    let hi = max_lag.min(r.len().saturating_sub(2));
    let lo = min_lag.max(1);
    if lo >= hi {
        return Vec::new();
    }
    (lo..=hi)
        .filter(|&k| r[k] > r[k - 1] && r[k] >= r[k + 1] && r[k] > 0.0)
        .map(|k| {
            let (d, v) = parabolic_peak(r[k - 1], r[k], r[k + 1]);
            (k as f64 + d, v)
        })
        .collect()
}

/// Picks the pitch lag from autocorrelation peaks: start at the strongest
/// peak, then move to a peak at a half or third of its lag while that one
/// reaches `octave_ratio` times the current value. A single-period peak beats
/// its multiple-period echoes this way. Smaller fractions `1/d` (`d >= 4`)
/// additionally need the whole comb `k/d` of the lag, `k < d`, to qualify, so
/// a lone formant-ringing peak cannot capture the pitch.
fn choose_lag(peaks: &[(f64, f64)], octave_ratio: f64) -> Option<(f64, f64)> {
    let mut best = peaks.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1))?;
    let shortest = peaks.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let near = |target: f64, floor: f64| {
        let tolerance = (OCTAVE_TOLERANCE * target).max(1.0);
        peaks
            .iter()
            .copied()
            .filter(|p| (p.0 - target).abs() <= tolerance && p.1 >= floor)
            .max_by(|a, b| a.1.total_cmp(&b.1))
    };
    'search: loop {
        let floor = octave_ratio * best.1;
        for divisor in [3.0, 2.0] {
            if let Some(next) = near(best.0 / divisor, floor) {
                best = next;
                continue 'search;
            }
        }
        let most = (best.0 / shortest + 0.5).floor() as usize;
        for divisor in 4..=most {
            let step = best.0 / divisor as f64;
            if let Some(next) = near(step, floor) {
                if (2..divisor).all(|k| near(k as f64 * step, floor).is_some()) {
                    best = next;
                    continue 'search;
                }
            }
        }
        return Some(best);
    }
}

/// Relative lag mismatch tolerated when matching a half-period candidate.
const OCTAVE_TOLERANCE: f64 = 0.05;

/// Median of the nonzero entries of `f0[lo..hi]`.
fn local_reference(f0: &[f64], lo: usize, hi: usize) -> Option<f64> {
    let mut v: Vec<f64> = f0[lo..hi].iter().copied().filter(|&f| f > 0.0).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

/// Re-picks every voiced frame's candidate nearest (in log frequency) to the
/// median of its neighbours, when one lies within `RELOCK_RATIO` of it.
/// Isolated octave and formant-ringing errors are outvoted this way.
fn relock(f0: &[f64], peaks: &[Vec<(f64, f64)>], rate: f64, threshold: f64) -> Vec<f64> {
    (0..f0.len())
        .map(|i| {
            if f0[i] == 0.0 {
                return 0.0;
            }
            let lo = i.saturating_sub(CONTINUITY_FRAMES);
            let hi = (i + CONTINUITY_FRAMES + 1).min(f0.len());
            let Some(reference) = local_reference(f0, lo, hi) else {
                return f0[i];
            };
            peaks[i]
                .iter()
                .filter(|p| p.1 >= threshold)
                .map(|p| rate / p.0)
                .map(|f| (f, (f / reference).ln().abs()))
                .filter(|(_, d)| *d <= RELOCK_RATIO.ln())
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map_or(f0[i], |(f, _)| f)
        })
        .collect()
}

/// Half-width, in frames, of the neighbourhood used by `relock`.
const CONTINUITY_FRAMES: usize = 10;
const RELOCK_RATIO: f64 = 1.2;
const RELOCK_PASSES: usize = 2;

/// Frame-wise pitch by normalized autocorrelation, relocked toward the local
/// median, median-smoothed over three frames, with voiced runs shorter than
/// `voicing.min_frames` removed.
pub fn estimate_f0(buf: &AudioBuffer, cfg: &Config) -> F0Track {
    let rate = buf.sample_rate();
    let pc = &cfg.pitch;
    let grid = FrameGrid::new(pc.frame_ms / 1000.0, cfg.hop_ms / 1000.0, Window::Gaussian);
    let n = grid.frame_samples(rate);
    let window = Window::Gaussian.coefficients(n);
    let window_acf = autocorrelation(&window);
    let min_lag = (rate as f64 / pc.max_hz).floor() as usize;
    let max_lag = (rate as f64 / pc.min_hz).ceil() as usize;

    let peaks: Vec<Vec<(f64, f64)>> = grid
        .frame_starts(buf.len(), rate)
        .map(|s| {
            let frame = &buf.samples()[s..s + n];
            let rms = (frame.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
            if rms < pc.silence_rms {
                return Vec::new();
            }
            normalized_acf(frame, &window, &window_acf)
                .map(|r| acf_peaks(&r, min_lag, max_lag))
                .unwrap_or_default()
        })
        .collect();
    let in_range = |f: f64| (pc.min_hz..=pc.max_hz).contains(&f);
    let mut raw: Vec<f64> = peaks
        .iter()
        .map(|p| match choose_lag(p, pc.octave_ratio) {
            Some((lag, value)) if value >= pc.voicing_threshold && in_range(rate as f64 / lag) => {
                rate as f64 / lag
            }
            _ => 0.0,
        })
        .collect();
    for _ in 0..RELOCK_PASSES {
        raw = relock(&raw, &peaks, rate as f64, pc.voicing_threshold);
    }

    let smoothed: Vec<f64> = (0..raw.len())
        .map(|i| {
            if raw[i] == 0.0 {
                return 0.0;
            }
            let mut win: Vec<f64> = [i.wrapping_sub(1), i, i + 1]
                .into_iter()
                .filter_map(|j| raw.get(j).copied())
                .filter(|&f| f > 0.0)
                .collect();
            if win.len() < 3 {
                return raw[i];
            }
            win.sort_by(f64::total_cmp);
            win[1]
        })
        .collect();

    let mut track = F0Track {
        voiced: smoothed.iter().map(|&f| f > 0.0).collect(),
        f0_hz: smoothed,
        grid,
        duration_s: buf.duration_s(),
    };
    track.prune_short_runs(cfg.min_voiced_frames);
    track
}
