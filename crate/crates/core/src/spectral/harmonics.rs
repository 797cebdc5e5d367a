use crate::dsp::Spectrum;
use crate::error::{Error, Result};

/// Level (dB of FFT magnitude) of the harmonic near `k * f0_hz`, read as the
/// parabolically interpolated peak within a quarter of f0 of its nominal bin.
pub fn harmonic_level_db(spec: &Spectrum, f0_hz: f64, k: usize) -> f64 {
    let center = k as f64 * f0_hz;
    let range = spec.bins_in(center - 0.25 * f0_hz, center + 0.25 * f0_hz);
    let last = spec.magnitudes.len() - 1;
    let mut best = *range.start();
    for i in range {
        if spec.magnitudes[i] > spec.magnitudes[best] {
            best = i;
        }
    }
    let m = &spec.magnitudes;
    let db = |x: f64| 20.0 * x.max(1e-12).log10();
    if best == 0 || best >= last {
        return db(m[best]);
    }
    // interpolating on the dB scale suits the window's main lobe shape
    let (_, v) = crate::dsp::parabolic_peak(db(m[best - 1]), db(m[best]), db(m[best + 1]));
    v
}

/// H1 and H2 levels in dB.
pub fn harmonics(spec: &Spectrum, f0_hz: f64) -> Result<(f64, f64)> {
    let nyquist = spec.freq(spec.magnitudes.len() - 1);
    if !(f0_hz > 0.0) || 2.0 * f0_hz > nyquist / 2.0 {
        return Err(Error::HarmonicOutOfRange { f0_hz });
    }
    Ok((harmonic_level_db(spec, f0_hz, 1), harmonic_level_db(spec, f0_hz, 2)))
}
