use crate::audio::AudioBuffer;
use crate::dsp::{autocorrelation, parabolic_peak, Window};
use crate::error::{Error, Result};

use super::F0Track;

pub const HNR_MIN_DB: f64 = -20.0;
pub const HNR_MAX_DB: f64 = 40.0;

/// Per-frame HNR in dB; `None` on unvoiced frames.
#[derive(Debug, Clone, PartialEq)]
pub struct HnrTrack {
    pub hnr_db: Vec<Option<f64>>,
}

impl HnrTrack {
    pub fn voiced_values(&self) -> Vec<f64> {
        self.hnr_db.iter().flatten().copied().collect()
    }
}

/// `10 log10(r / (1 - r))`, clamped to the reported range.
pub fn hnr_from_r(r: f64) -> f64 {
    if r <= 0.0 {
        return HNR_MIN_DB;
    }
    if r >= 1.0 {
        return HNR_MAX_DB;
    }
    (10.0 * (r / (1.0 - r)).log10()).clamp(HNR_MIN_DB, HNR_MAX_DB)
}

/// Reads the normalized autocorrelation peak nearest the frame's pitch lag.
pub fn hnr(buf: &AudioBuffer, track: &F0Track) -> Result<HnrTrack> {
    if track.voiced_count() == 0 {
        return Err(Error::NoVoicedContent);
    }
    let rate = buf.sample_rate();
    let n = track.grid.frame_samples(rate);
    let hop = track.grid.hop_samples(rate);
    let window = Window::Gaussian.coefficients(n);
    let window_acf = autocorrelation(&window);
    let hnr_db = (0..track.len())
        .map(|i| {
            if !track.voiced[i] {
                return None;
            }
            let frame = &buf.samples()[i * hop..i * hop + n];
            let mean = frame.iter().sum::<f64>() / n as f64;
            let xw: Vec<f64> = frame.iter().zip(&window).map(|(x, w)| (x - mean) * w).collect();
            let guess = (rate as f64 / track.f0_hz[i]).round() as usize;
            let lo = guess.saturating_sub(3).max(1);
            let hi = (guess + 3).min(n - 3);
            let r0: f64 = xw.iter().map(|x| x * x).sum();
            if r0 <= 0.0 || lo > hi {
                return None;
            }
            // normalized autocorrelation on lo-1..=hi+1 only
            let r = |k: usize| -> f64 {
                let raw: f64 = xw[..n - k].iter().zip(&xw[k..]).map(|(a, b)| a * b).sum();
                let rw = window_acf[k];
                if rw > 1e-9 * window_acf[0] {
                    (raw / r0) / (rw / window_acf[0])
                } else {
                    0.0
                }
            };
            let vals: Vec<f64> = (lo - 1..=hi + 1).map(r).collect();
            let j = (1..vals.len() - 1).fold(1, |b, j| if vals[j] > vals[b] { j } else { b });
            let (_, peak) = parabolic_peak(vals[j - 1], vals[j], vals[j + 1]);
            Some(hnr_from_r(peak))
        })
        .collect();
    Ok(HnrTrack { hnr_db })
}
