use crate::dsp::Spectrum;

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale, applied to power.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    /// Per band: first bin and weights from there on.
    bands: Vec<(usize, Vec<f64>)>,
}

impl MelFilterbank {
    pub fn new(n_bands: usize, low_hz: f64, high_hz: f64, bin_hz: f64, n_bins: usize) -> MelFilterbank {
        let (m_lo, m_hi) = (hz_to_mel(low_hz), hz_to_mel(high_hz));
        let edges: Vec<f64> = (0..n_bands + 2)
            .map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (n_bands + 1) as f64))
            .collect();
        let bands = (0..n_bands)
            .map(|b| {
                let (lo, mid, hi) = (edges[b], edges[b + 1], edges[b + 2]);
                let first = (lo / bin_hz).ceil() as usize;
                let last = ((hi / bin_hz).floor() as usize).min(n_bins - 1);
                let weights = (first..=last)
                    .map(|k| {
                        let f = k as f64 * bin_hz;
                        if f <= mid {
                            (f - lo) / (mid - lo)
                        } else {
                            (hi - f) / (hi - mid)
                        }
                        .max(0.0)
                    })
                    .collect();
                (first, weights)
            })
            .collect();
        MelFilterbank { bands }
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn band_energies(&self, spec: &Spectrum) -> Vec<f64> {
        self.bands
            .iter()
            .map(|(first, w)| {
                w.iter()
                    .zip(&spec.magnitudes[*first..])
                    .map(|(w, m)| w * m * m)
                    .sum()
            })
            .collect()
    }
}

/// Sum of band energies raised to 0.3.
pub fn loudness(band_energies: &[f64]) -> f64 {
    band_energies.iter().map(|e| e.max(0.0).powf(0.3)).sum()
}

const LOG_FLOOR: f64 = 1e-30;

/// Orthonormal DCT-II of log band energies; returns coefficients `1..=count`.
pub fn mfcc_from_energies(band_energies: &[f64], count: usize) -> Vec<f64> {
    let n = band_energies.len();
    let logs: Vec<f64> = band_energies.iter().map(|e| e.max(LOG_FLOOR).ln()).collect();
    let scale = (2.0 / n as f64).sqrt();
    (1..=count)
        .map(|k| {
            scale
                * logs
                    .iter()
                    .enumerate()
                    .map(|(i, l)| l * (std::f64::consts::PI * k as f64 * (i as f64 + 0.5) / n as f64).cos())
                    .sum::<f64>()
        })
        .collect()
}
