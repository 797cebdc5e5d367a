//! Spectral, cepstral and formant low-level descriptors.
//!
//! Frame-level spectral shape (loudness, MFCC, slopes, band ratios, flux)
//! runs on the short analysis grid. Formants and harmonic levels are taken
//! per voiced pitch frame, centered on the pitch grid.

mod harmonics;
mod lpc;
mod mel;
mod shape;

use crate::audio::{resample, AudioBuffer};
use crate::config::Config;
use crate::dsp::{autocorrelation_lags, fft_size_for, magnitude_spectrum, FrameGrid, Spectrum, Window};
use crate::error::{Error, Result};
use crate::voicing::F0Track;

pub use harmonics::{harmonic_level_db, harmonics};
pub use lpc::{envelope_power, levinson, pick_formants, poly_roots, resonances, Resonance};
pub use mel::{hz_to_mel, loudness, mel_to_hz, mfcc_from_energies, MelFilterbank};
pub use shape::{alpha_hammarberg, spectral_flux, spectral_slopes, BandRatios, EMPTY_BAND_DB};

pub const MFCC_COUNT: usize = 4;
const LPC_WINDOW: Window = Window::Gaussian;

/// FFT length used for pitch-synchronous harmonic analysis.
const HARMONIC_FFT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTracks {
    pub loudness: Vec<f64>,
    /// `mfcc[k][t]` is coefficient `k + 1` at frame `t`.
    pub mfcc: [Vec<f64>; MFCC_COUNT],
    pub slope_0_500: Vec<f64>,
    pub slope_500_1500: Vec<f64>,
    pub alpha_ratio: Vec<f64>,
    pub hammarberg: Vec<f64>,
    pub flux: Vec<f64>,
    /// Frames whose band ratios hit the empty-band clamp.
    pub empty_band_frames: usize,
    pub grid: FrameGrid,
}

impl SpectralTracks {
    pub fn len(&self) -> usize {
        self.loudness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loudness.is_empty()
    }

    pub fn center_s(&self, t: usize) -> f64 {
        self.grid.center_s(t)
    }
}

pub fn spectral_grid(cfg: &Config) -> FrameGrid {
    FrameGrid::new(cfg.spectral.frame_ms / 1000.0, cfg.hop_ms / 1000.0, Window::Hamming)
}

fn frame_spectra(buf: &AudioBuffer, grid: &FrameGrid) -> Result<Vec<Spectrum>> {
    let frames = crate::dsp::frame_signal(buf, grid)?;
    let size = fft_size_for(grid.frame_samples(buf.sample_rate()));
    Ok(frames
        .iter()
        .map(|f| magnitude_spectrum(f, size, buf.sample_rate() as f64))
        .collect())
}

fn bank(cfg_bands: usize, lo: f64, hi: f64, spec: &Spectrum) -> MelFilterbank {
    MelFilterbank::new(cfg_bands, lo, hi, spec.bin_hz, spec.magnitudes.len())
}

/// Per-frame loudness on the short grid.
pub fn loudness_track(spectra: &[Spectrum], cfg: &Config) -> Vec<f64> {
    let Some(first) = spectra.first() else {
        return Vec::new();
    };
    let sc = &cfg.spectral;
    let fb = bank(sc.loudness_bands, sc.loudness_low_hz, sc.loudness_high_hz, first);
    spectra.iter().map(|s| loudness(&fb.band_energies(s))).collect()
}

/// MFCC 1-4 per frame.
pub fn mfcc_track(spectra: &[Spectrum], cfg: &Config) -> [Vec<f64>; MFCC_COUNT] {
    let mut out: [Vec<f64>; MFCC_COUNT] = Default::default();
    let Some(first) = spectra.first() else {
        return out;
    };
    let sc = &cfg.spectral;
    let fb = bank(sc.mel_bands, sc.mel_low_hz, sc.mel_high_hz, first);
    for s in spectra {
        for (k, c) in mfcc_from_energies(&fb.band_energies(s), MFCC_COUNT).into_iter().enumerate() {
            out[k].push(c);
        }
    }
    out
}

pub fn spectral_tracks(buf: &AudioBuffer, cfg: &Config) -> Result<SpectralTracks> {
    let grid = spectral_grid(cfg);
    let spectra = frame_spectra(buf, &grid)?;
    let mut slope_0_500 = Vec::with_capacity(spectra.len());
    let mut slope_500_1500 = Vec::with_capacity(spectra.len());
    let mut alpha_ratio = Vec::with_capacity(spectra.len());
    let mut hammarberg = Vec::with_capacity(spectra.len());
    let mut empty_band_frames = 0;
    for s in &spectra {
        let (lo, hi) = spectral_slopes(s)?;
        slope_0_500.push(lo);
        slope_500_1500.push(hi);
        let r = alpha_hammarberg(s);
        alpha_ratio.push(r.alpha_db);
        hammarberg.push(r.hammarberg_db);
        empty_band_frames += usize::from(r.empty_band);
    }
    Ok(SpectralTracks {
        loudness: loudness_track(&spectra, cfg),
        mfcc: mfcc_track(&spectra, cfg),
        slope_0_500,
        slope_500_1500,
        alpha_ratio,
        hammarberg,
        flux: spectral_flux(&spectra),
        empty_band_frames,
        grid,
    })
}

/// One resolved formant: center, bandwidth, and level relative to H1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Formant {
    pub freq_hz: f64,
    pub bandwidth_hz: f64,
    pub amp_rel_db: f64,
}

/// Per pitch frame: F1-F3 where measurable.
#[derive(Debug, Clone, PartialEq)]
pub struct FormantTrack {
    pub frames: Vec<Option<[Formant; 3]>>,
    pub dropouts: usize,
}

/// Per pitch frame: harmonic levels and differences in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFrame {
    pub h1: f64,
    pub h2: f64,
    pub h1_h2: f64,
    /// Absent when the frame's formants dropped out.
    pub h1_a3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTrack {
    pub frames: Vec<Option<HarmonicFrame>>,
}

/// Samples of a window of `len` centered at `center_s`, zero outside the signal.
fn centered(buf: &AudioBuffer, center_s: f64, len: usize) -> Vec<f64> {
    let x = buf.samples();
    let start = (center_s * buf.sample_rate() as f64).round() as i64 - (len / 2) as i64;
    (0..len as i64)
        .map(|j| {
            let i = start + j;
            if i >= 0 && (i as usize) < x.len() {
                x[i as usize]
            } else {
                0.0
            }
        })
        .collect()
}

struct LpcFrame {
    formants: [Resonance; 3],
    a: Vec<f64>,
    err: f64,
}

fn lpc_frame(frame: &[f64], cfg: &Config, rate: f64) -> Result<LpcFrame> {
    let fc = &cfg.formant;
    let mut pre = Vec::with_capacity(frame.len());
    pre.push(frame[0]);
    for w in frame.windows(2) {
        pre.push(w[1] - fc.preemphasis * w[0]);
    }
    let windowed = LPC_WINDOW.apply(&pre);
    let acf = autocorrelation_lags(&windowed, fc.lpc_order);
    let (a, err) = levinson(&acf, fc.lpc_order).ok_or(Error::FormantDropout)?;
    let formants = pick_formants(&resonances(&a, rate), fc.min_hz, fc.max_hz, fc.max_bandwidth_hz)?;
    Ok(LpcFrame { formants, a, err })
}

/// Formants and harmonic levels on every voiced pitch frame.
///
/// LPC runs on a copy resampled to twice `formant.max_hz`, so the poles are
/// spent below the formant ceiling rather than on the noise above it.
///
/// Formant levels come from the LPC envelope with pre-emphasis undone,
/// rescaled from a power density to the peak an isolated harmonic of the same
/// local power would reach in the harmonic-analysis spectrum, so that A1-A3
/// and H1 share one scale.
pub fn formants_and_harmonics(buf: &AudioBuffer, track: &F0Track, cfg: &Config) -> (FormantTrack, HarmonicTrack) {
    let rate = buf.sample_rate() as f64;
    let lpc_rate_hz = ((2.0 * cfg.formant.max_hz).round() as u32).min(buf.sample_rate());
    let lpc_buf = if lpc_rate_hz == buf.sample_rate() { buf.clone() } else { resample(buf, lpc_rate_hz) };
    let lpc_rate = lpc_rate_hz as f64;
    let lpc_len = ((cfg.formant.frame_ms / 1000.0) * lpc_rate).round() as usize;
    let lpc_window_energy: f64 = LPC_WINDOW.coefficients(lpc_len).iter().map(|w| w * w).sum();
    let h_len = track.grid.frame_samples(buf.sample_rate());
    let h_window_sum: f64 = Window::Hamming.coefficients(h_len).iter().sum();
    let alpha = cfg.formant.preemphasis;

    let mut formants = Vec::with_capacity(track.len());
    let mut harmonics_out = Vec::with_capacity(track.len());
    let mut dropouts = 0;
    for i in 0..track.len() {
        if !track.voiced[i] {
            formants.push(None);
            harmonics_out.push(None);
            continue;
        }
        let c = track.center_s(i);
        let f0 = track.f0_hz[i];
        let hspec = magnitude_spectrum(&Window::Hamming.apply(&centered(buf, c, h_len)), HARMONIC_FFT, rate);
        let h = harmonics(&hspec, f0).ok();
        let lpc = lpc_frame(&centered(&lpc_buf, c, lpc_len), cfg, lpc_rate);
        let level_db = |lf: &LpcFrame, f: f64| {
            let w = 2.0 * std::f64::consts::PI * f / lpc_rate;
            let pre_gain = 1.0 + alpha * alpha - 2.0 * alpha * w.cos();
            let p = envelope_power(&lf.a, lf.err, f, lpc_rate) / pre_gain;
            10.0 * (p * f0 * h_window_sum * h_window_sum / (lpc_window_energy * lpc_rate)).max(1e-24).log10()
        };
        let frame_formants = match (&lpc, h) {
            (Ok(lf), Some((h1, _))) => Some(lf.formants.map(|r| Formant {
                freq_hz: r.freq_hz,
                bandwidth_hz: r.bandwidth_hz,
                amp_rel_db: level_db(lf, r.freq_hz) - h1,
            })),
            _ => {
                dropouts += 1;
                None
            }
        };
        harmonics_out.push(h.map(|(h1, h2)| HarmonicFrame {
            h1,
            h2,
            h1_h2: h1 - h2,
            h1_a3: frame_formants.map(|f| -f[2].amp_rel_db),
        }));
        formants.push(frame_formants);
    }
    (
        FormantTrack { frames: formants, dropouts },
        HarmonicTrack { frames: harmonics_out },
    )
}
