//! Shared numeric kernels: framing, windows, spectra, autocorrelation and
//! least-squares line fits.

mod window;

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex;
use realfft::RealFftPlanner;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub use window::Window;

thread_local! {
    static PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
    static SCRATCH: RefCell<Vec<Complex<f64>>> = const { RefCell::new(Vec::new()) };
}

fn with_scratch<R>(need: usize, f: impl FnOnce(&mut [Complex<f64>]) -> R) -> R {
    SCRATCH.with(|s| {
        let mut s = s.borrow_mut();
        if s.len() < need {
            s.resize(need, Complex::new(0.0, 0.0));
        }
        f(&mut s[..need])
    })
}

/// Forward real FFT of `input` zero-padded to `size`: bins `0..=size / 2`.
pub(crate) fn rfft(input: &[f64], size: usize) -> Vec<Complex<f64>> {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(size));
    let mut buf = vec![0.0; size];
    let n = input.len().min(size);
    buf[..n].copy_from_slice(&input[..n]);
    let mut out = fft.make_output_vec();
    with_scratch(fft.get_scratch_len(), |scratch| {
        fft.process_with_scratch(&mut buf, &mut out, scratch)
            .expect("buffer lengths match the plan");
    });
    out
}

/// Inverse of [`rfft`] for a spectrum of `size / 2 + 1` bins, scaled by
/// `1 / size`. The imaginary parts of the DC and Nyquist bins are ignored.
pub(crate) fn irfft(spec: &mut [Complex<f64>], size: usize) -> Vec<f64> {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(size));
    spec[0].im = 0.0;
    spec[size / 2].im = 0.0;
    let mut out = fft.make_output_vec();
    with_scratch(fft.get_scratch_len(), |scratch| {
        fft.process_with_scratch(spec, &mut out, scratch)
            .expect("buffer lengths match the plan");
    });
    let scale = 1.0 / size as f64;
    out.iter_mut().for_each(|x| *x *= scale);
    out
}

/// Frame length, hop and window of a framing scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameGrid {
    pub frame_len_s: f64,
    pub hop_s: f64,
    pub window: Window,
}

impl FrameGrid {
    pub fn new(frame_len_s: f64, hop_s: f64, window: Window) -> FrameGrid {
        assert!(
            hop_s > 0.0 && hop_s <= frame_len_s,
            "need 0 < hop <= frame length"
        );
        FrameGrid {
            frame_len_s,
            hop_s,
            window,
        }
    }

    pub fn frame_samples(&self, rate: u32) -> usize {
        ((self.frame_len_s * rate as f64).round() as usize).max(1)
    }

    pub fn hop_samples(&self, rate: u32) -> usize {
        ((self.hop_s * rate as f64).round() as usize).max(1)
    }

    /// `1 + floor((len - frame) / hop)`, or 0 when the signal is too short.
    pub fn frame_count(&self, len: usize, rate: u32) -> usize {
        let f = self.frame_samples(rate);
        if len < f {
            0
        } else {
            1 + (len - f) / self.hop_samples(rate)
        }
    }

    /// Start sample of every frame.
    pub fn frame_starts(&self, len: usize, rate: u32) -> impl Iterator<Item = usize> {
        let hop = self.hop_samples(rate);
        (0..self.frame_count(len, rate)).map(move |i| i * hop)
    }

    /// Time of the center of frame `i`, in seconds.
    pub fn center_s(&self, i: usize) -> f64 {
        i as f64 * self.hop_s + self.frame_len_s / 2.0
    }
}

/// Splits `buf` into windowed frames.
pub fn frame_signal(buf: &AudioBuffer, grid: &FrameGrid) -> Result<Vec<Vec<f64>>> {
    let rate = buf.sample_rate();
    let n = grid.frame_samples(rate);
    if buf.len() < n {
        return Err(Error::SignalTooShort {
            len: buf.len(),
            frame: n,
        });
    }
    let w = grid.window.coefficients(n);
    Ok(grid
        .frame_starts(buf.len(), rate)
        .map(|s| {
            buf.samples()[s..s + n]
                .iter()
                .zip(&w)
                .map(|(x, w)| x * w)
                .collect()
        })
        .collect())
}

/// Next power of two at or above `frame_len`, never below 1024.
pub fn fft_size_for(frame_len: usize) -> usize {
    frame_len.next_power_of_two().max(1024)
}

/// One-sided magnitude spectrum, `fft_size / 2 + 1` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub magnitudes: Vec<f64>,
    pub bin_hz: f64,
}

impl Spectrum {
    pub fn fft_size(&self) -> usize {
        (self.magnitudes.len() - 1) * 2
    }

    pub fn freq(&self, k: usize) -> f64 {
        k as f64 * self.bin_hz
    }

    /// Time-domain energy implied by Parseval's identity.
    pub fn energy(&self) -> f64 {
        let n = self.fft_size();
        let last = self.magnitudes.len() - 1;
        let sum: f64 = self
            .magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let w = if k == 0 || k == last { 1.0 } else { 2.0 };
                w * m * m
            })
            .sum();
        sum / n as f64
    }

    /// Power (|X|^2) summed over `[lo_hz, hi_hz)`, each bin treated as covering
    /// `bin_hz` centered on its frequency and weighted by its overlap.
    pub fn band_power(&self, lo_hz: f64, hi_hz: f64) -> f64 {
        let half = self.bin_hz / 2.0;
        self.magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let f = self.freq(k);
                let overlap = (hi_hz.min(f + half) - lo_hz.max(f - half)).max(0.0);
                m * m * overlap / self.bin_hz
            })
            .sum()
    }

    /// Bin indices whose centers lie in `[lo_hz, hi_hz]`.
    pub fn bins_in(&self, lo_hz: f64, hi_hz: f64) -> std::ops::RangeInclusive<usize> {
        let lo = (lo_hz / self.bin_hz).ceil().max(0.0) as usize;
        let hi = ((hi_hz / self.bin_hz).floor() as usize).min(self.magnitudes.len() - 1);
        lo..=hi
    }
}

/// Magnitude spectrum of `frame` zero-padded to `fft_size`.
pub fn magnitude_spectrum(frame: &[f64], fft_size: usize, sample_rate: f64) -> Spectrum {
    assert!(fft_size.is_power_of_two() && fft_size >= frame.len());
    let bins = rfft(frame, fft_size);
    Spectrum {
        magnitudes: bins.iter().map(|c| c.norm_sqr().sqrt()).collect(),
        bin_hz: sample_rate / fft_size as f64,
    }
}

/// Linear autocorrelation `acf[k] = sum_i x[i] x[i + k]` for every lag below
/// the frame length, computed through a zero-padded FFT.
pub fn autocorrelation(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    if n == 0 {
        return Vec::new();
    }
    let size = (2 * n).next_power_of_two();
    let mut spec = rfft(frame, size);
    spec.iter_mut().for_each(|c| *c = Complex::new(c.norm_sqr(), 0.0));
    let mut acf = irfft(&mut spec, size);
    acf.truncate(n);
    acf
}

/// `acf[k]` for `k` in `0..=max_lag` only, by direct summation; cheaper than
/// the FFT route when few lags are needed.
pub fn autocorrelation_lags(frame: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|k| {
            if k >= frame.len() {
                return 0.0;
            }
            frame[..frame.len() - k].iter().zip(&frame[k..]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Normalized sinc, `sin(pi t) / (pi t)`.
pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-12 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Zero-phase Hann-windowed-sinc low-pass. `cutoff` is a fraction of the
/// sample rate; the kernel reaches `span` cycles of the cutoff each side.
pub fn lowpass(x: &[f64], cutoff: f64, span: f64) -> Vec<f64> {
    let half = (span / cutoff).ceil() as i64;
    let taps: Vec<f64> = (-half..=half)
        .map(|i| {
            let w = 0.5 + 0.5 * (PI * i as f64 / (half as f64 + 1.0)).cos();
            2.0 * cutoff * sinc(2.0 * cutoff * i as f64) * w
        })
        .collect();
    if x.is_empty() {
        return Vec::new();
    }
    let size = (x.len() + taps.len() - 1).next_power_of_two();
    let mut spec = rfft(x, size);
    let kernel = rfft(&taps, size);
    spec.iter_mut().zip(&kernel).for_each(|(s, k)| *s *= k);
    let y = irfft(&mut spec, size);
    let half = half as usize;
    y[half..half + x.len()].to_vec()
}

/// Least-squares line `y = slope * x + intercept`.
pub fn linfit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.is_empty() {
        return Err(Error::DegenerateAbscissa);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let spread = xs.iter().fold(0.0f64, |m, x| m.max((x - mx).abs()));
    if spread <= 1e-12 * mx.abs().max(1.0) {
        return Err(Error::DegenerateAbscissa);
    }
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Vertex offset in (-0.5, 0.5) of the parabola through three equally spaced
/// samples, and the interpolated peak value.
pub fn parabolic_peak(left: f64, mid: f64, right: f64) -> (f64, f64) {
    let denom = left - 2.0 * mid + right;
    if denom.abs() < 1e-300 {
        return (0.0, mid);
    }
    let delta = (0.5 * (left - right) / denom).clamp(-0.5, 0.5);
    (delta, mid - 0.25 * (left - right) * delta)
}
