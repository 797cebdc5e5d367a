use crate::dsp::{linfit, Spectrum};
use crate::error::Result;

/// Clamp used when a band in a level ratio holds no energy.
pub const EMPTY_BAND_DB: f64 = 60.0;

const MAG_FLOOR: f64 = 1e-12;

fn db(mag: f64) -> f64 {
    20.0 * mag.max(MAG_FLOOR).log10()
}

/// Regression slope (dB per Hz) of the log-magnitude spectrum over
/// 0-500 Hz and 500-1500 Hz.
pub fn spectral_slopes(spec: &Spectrum) -> Result<(f64, f64)> {
    let fit = |lo: f64, hi: f64| {
        let bins: Vec<usize> = spec.bins_in(lo, hi).collect();
        let xs: Vec<f64> = bins.iter().map(|&k| spec.freq(k)).collect();
        let ys: Vec<f64> = bins.iter().map(|&k| db(spec.magnitudes[k])).collect();
        linfit(&xs, &ys).map(|(slope, _)| slope)
    };
    Ok((fit(0.0, 500.0)?, fit(500.0, 1500.0)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRatios {
    pub alpha_db: f64,
    pub hammarberg_db: f64,
    /// A band held no energy and its ratio was clamped.
    pub empty_band: bool,
}

fn clamped_ratio_db(num: f64, den: f64, scale: f64) -> (f64, bool) {
    match (num > 0.0, den > 0.0) {
        (true, true) => (scale * (num / den).log10(), false),
        (true, false) => (EMPTY_BAND_DB, true),
        (false, true) => (-EMPTY_BAND_DB, true),
        (false, false) => (0.0, true),
    }
}

/// Alpha ratio (energy 50-1000 Hz over 1-5 kHz) and Hammarberg index (peak
/// level 0-2 kHz minus peak level 2-5 kHz), both in dB.
pub fn alpha_hammarberg(spec: &Spectrum) -> BandRatios {
    let (alpha_db, e1) = clamped_ratio_db(spec.band_power(50.0, 1000.0), spec.band_power(1000.0, 5000.0), 10.0);
    let peak = |lo: f64, hi: f64| spec.bins_in(lo, hi).map(|k| spec.magnitudes[k]).fold(0.0, f64::max);
    let (hammarberg_db, e2) = clamped_ratio_db(peak(0.0, 2000.0), peak(2000.0, 5000.0), 20.0);
    BandRatios {
        alpha_db,
        hammarberg_db,
        empty_band: e1 || e2,
    }
}

/// Squared change between consecutive L1-normalized magnitude spectra;
/// the first frame is 0.
pub fn spectral_flux(spectra: &[Spectrum]) -> Vec<f64> {
    let normalized: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| {
            let total: f64 = s.magnitudes.iter().sum();
            if total > 0.0 {
                s.magnitudes.iter().map(|m| m / total).collect()
            } else {
                vec![0.0; s.magnitudes.len()]
            }
        })
        .collect();
    let mut flux = Vec::with_capacity(spectra.len());
    for (t, cur) in normalized.iter().enumerate() {
        flux.push(if t == 0 {
            0.0
        } else {
            cur.iter().zip(&normalized[t - 1]).map(|(a, b)| (a - b).powi(2)).sum()
        });
    }
    flux
}
