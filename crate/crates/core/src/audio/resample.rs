//! Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel.

use std::f64::consts::PI;

use super::AudioBuffer;

const TAPS_PER_PHASE: usize = 64;
const KAISER_BETA: f64 = 8.6;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// One filter per output phase; phase `p` evaluates the kernel at input
/// offsets relative to the fractional position `p / up`.
fn design_bank(up: usize, down: usize) -> Vec<[f64; TAPS_PER_PHASE]> {
    // Cutoff in cycles per input sample.
    let cutoff = 0.5 * (up as f64 / down as f64).min(1.0);
    let half = TAPS_PER_PHASE as f64 / 2.0;
    let i0_beta = bessel_i0(KAISER_BETA);
    (0..up)
        .map(|p| {
            let frac = p as f64 / up as f64;
            let mut taps = [0.0; TAPS_PER_PHASE];
            for (k, tap) in taps.iter_mut().enumerate() {
                // Input sample index relative to floor(t) is k - (half - 1).
                let d = frac - (k as f64 - (half - 1.0));
                let ratio = d / half;
                let w = if ratio.abs() < 1.0 {
                    bessel_i0(KAISER_BETA * (1.0 - ratio * ratio).sqrt()) / i0_beta
                } else {
                    0.0
                };
                *tap = 2.0 * cutoff * sinc(2.0 * cutoff * d) * w;
            }
            let dc: f64 = taps.iter().sum();
            if dc.abs() > 1e-12 {
                taps.iter_mut().for_each(|t| *t /= dc);
            }
            taps
        })
        .collect()
}

/// Converts `buf` to `target_rate`. Same-rate input is returned unchanged.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> AudioBuffer {
    assert!(target_rate > 0, "target rate must be positive");
    let from = buf.sample_rate();
    if from == target_rate {
        return buf.clone();
    }
    let g = gcd(from as u64, target_rate as u64);
    let up = (target_rate as u64 / g) as usize;
    let down = (from as u64 / g) as usize;
    let bank = design_bank(up, down);

    let input = buf.samples();
    let n_out = (input.len() * up).div_ceil(down);
    let offset = TAPS_PER_PHASE as isize / 2 - 1;
    let out = (0..n_out)
        .map(|n| {
            let pos = n * down;
            let base = (pos / up) as isize;
            let taps = &bank[pos % up];
            let start = base - offset;
            if start >= 0 && start as usize + TAPS_PER_PHASE <= input.len() {
                let seg = &input[start as usize..start as usize + TAPS_PER_PHASE];
                return taps.iter().zip(seg).map(|(t, x)| t * x).sum();
            }
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let idx = start + k as isize;
                if idx >= 0 && (idx as usize) < input.len() {
                    acc += t * input[idx as usize];
                }
            }
            acc
        })
        .collect();
    AudioBuffer::new(out, target_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{magnitude_spectrum, Window};

    fn tone(freq: f64, rate: u32, secs: f64, amp: f64) -> AudioBuffer {
        let n = (secs * rate as f64) as usize;
        AudioBuffer::new(
            (0..n)
                .map(|i| amp * (2.0 * PI * freq * i as f64 / rate as f64).sin())
                .collect(),
            rate,
        )
    }

    /// Independent FFT-peak oracle on a 4096-sample analysis window.
    fn peak_hz(buf: &AudioBuffer) -> f64 {
        let start = buf.len() / 2 - 2048;
        let frame = Window::Hann.apply(&buf.samples()[start..start + 4096]);
        let spec = magnitude_spectrum(&frame, 4096, buf.sample_rate() as f64);
        let (k, _) = spec
            .magnitudes
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (k, &m)| if m > acc.1 { (k, m) } else { acc });
        k as f64 * spec.bin_hz
    }

    #[test]
    fn identity_is_bit_exact() {
        let b = tone(440.0, 16000, 0.5, 0.7);
        assert_eq!(resample(&b, 16000), b);
    }

    #[test]
    fn downsample_48k_keeps_1khz_peak() {
        let out = resample(&tone(1000.0, 48000, 1.0, 0.5), 16000);
        assert_eq!(out.sample_rate(), 16000);
        assert_eq!(out.len(), 16000);
        assert!((peak_hz(&out) - 1000.0).abs() <= 16000.0 / 4096.0);
    }

    #[test]
    fn upsample_8k_doubles_length() {
        let input = tone(1000.0, 8000, 1.0, 0.5);
        let out = resample(&input, 16000);
        assert_eq!(out.len(), 2 * input.len());
        assert!((peak_hz(&out) - 1000.0).abs() <= 16000.0 / 4096.0);
        // Passband amplitude preserved away from the edges.
        let mid = &out.samples()[4000..12000];
        let peak = mid.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        assert!((peak - 0.5).abs() < 0.01, "peak {peak}");
    }

    #[test]
    fn rejects_alias_above_target_nyquist() {
        // 10 kHz at 48 kHz must be removed when going to 16 kHz.
        let out = resample(&tone(10_000.0, 48000, 0.5, 0.5), 16000);
        let mid = &out.samples()[1000..7000];
        let rms = (mid.iter().map(|s| s * s).sum::<f64>() / mid.len() as f64).sqrt();
        assert!(rms < 1e-3, "alias rms {rms}");
    }

    #[test]
    fn non_integer_ratio() {
        let out = resample(&tone(1000.0, 44100, 1.0, 0.5), 16000);
        assert_eq!(out.len(), 16000);
        assert!((peak_hz(&out) - 1000.0).abs() <= 16000.0 / 4096.0);
    }

    #[test]
    fn linear_in_gain() {
        let x = tone(700.0, 22050, 0.3, 0.8);
        let y = resample(&x, 16000);
        for gain in [0.0, 0.25, 0.6, 1.0] {
            let ys = resample(&x.scaled(gain), 16000);
            for (a, b) in ys.samples().iter().zip(y.samples()) {
                assert!((a - gain * b).abs() < 1e-6);
            }
        }
    }
}
