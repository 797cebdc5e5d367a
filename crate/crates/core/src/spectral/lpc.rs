//! Linear prediction and resonance extraction.

use num_complex::Complex;

use crate::error::{Error, Result};

/// Predictor `[1, a1, ..., ap]` of `A(z) = 1 + sum a_k z^-k` and the final
/// prediction-error power, by the Levinson-Durbin recursion on `acf[0..=p]`.
pub fn levinson(acf: &[f64], order: usize) -> Option<(Vec<f64>, f64)> {
    if acf.len() <= order || acf[0] <= 0.0 {
        return None;
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = acf[0];
    for i in 1..=order {
        let acc: f64 = (1..i).map(|j| a[j] * acf[i - j]).sum::<f64>() + acf[i];
        let k = -acc / err;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= 0.0 {
            return None;
        }
    }
    Some((a, err))
}

fn horner(coeffs: &[f64], z: Complex<f64>) -> Complex<f64> {
    coeffs.iter().fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Roots of the monic polynomial `z^n + c[1] z^(n-1) + ... + c[n]`
/// (`c[0]` must be 1), by simultaneous Aberth-Ehrlich iteration.
pub fn poly_roots(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let deriv: Vec<f64> = c[..n].iter().enumerate().map(|(i, &ci)| ci * (n - i) as f64).collect();
    let bound = 1.0 + c[1..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let radius = bound.min(1.5);
    let mut z: Vec<Complex<f64>> = (0..n)
        .map(|k| Complex::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let p = horner(c, z[i]);
            let dp = horner(&deriv, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex<f64> = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm());
            }
        }
        if moved < 1e-14 {
            break;
        }
    }
    z
}

/// A resonance from one complex pole: center frequency and -3 dB bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub freq_hz: f64,
    pub bandwidth_hz: f64,
}

/// Resonances of the all-pole model `1 / A(z)`, ascending in frequency.
pub fn resonances(a: &[f64], rate: f64) -> Vec<Resonance> {
    let mut out: Vec<Resonance> = poly_roots(a)
        .into_iter()
        .filter(|r| r.im > 0.0)
        .map(|r| Resonance {
            freq_hz: r.arg() * rate / (2.0 * std::f64::consts::PI),
            bandwidth_hz: -r.norm().ln() * rate / std::f64::consts::PI,
        })
        .collect();
    out.sort_by(|x, y| x.freq_hz.total_cmp(&y.freq_hz));
    out
}

/// Power gain `err / |A(e^jw)|^2` of the model at `freq_hz`.
pub fn envelope_power(a: &[f64], err: f64, freq_hz: f64, rate: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * freq_hz / rate;
    let resp: Complex<f64> = a
        .iter()
        .enumerate()
        .map(|(k, &ak)| Complex::from_polar(ak, -w * k as f64))
        .sum();
    err / resp.norm_sqr()
}

/// The three lowest admissible resonances.
pub fn pick_formants(
    candidates: &[Resonance],
    min_hz: f64,
    max_hz: f64,
    max_bandwidth_hz: f64,
) -> Result<[Resonance; 3]> {
    let valid: Vec<Resonance> = candidates
        .iter()
        .copied()
        .filter(|r| r.freq_hz >= min_hz && r.freq_hz <= max_hz && r.bandwidth_hz > 0.0 && r.bandwidth_hz < max_bandwidth_hz)
        .collect();
    if valid.len() < 3 {
        return Err(Error::FormantDropout);
    }
    Ok([valid[0], valid[1], valid[2]])
}
