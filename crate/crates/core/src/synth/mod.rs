//! Parametric source-filter vowel synthesizer.
//!
//! Every signal property an extractor is asked to recover is fixed by
//! construction: pulse times and amplitudes are drawn explicitly, the vocal
//! tract is a cascade of second-order resonators, and the noise floor is
//! scaled against the separately synthesized harmonic part.

mod cohort;

use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::audio::{AudioBuffer, Vowel, WORKING_RATE};
use crate::error::{Error, Result};

pub use cohort::{
    synth_cohort, write_recordings, CohortProfiles, CohortSpec, Profile, SynthRecording, SynthRequest, VOWEL_FORMANTS,
};

/// Corner of each of the two one-pole source low-passes (-12 dB/octave above).
const SOURCE_CORNER_HZ: f64 = 100.0;
const FADE_S: f64 = 0.005;
/// Half-width, in samples, of the band-limited impulse kernel.
const IMPULSE_HALF: i64 = 16;
const PERTURBATION_FLOOR: f64 = 0.1;

fn default_amplitude() -> f64 {
    0.5
}

/// Synthesizer parameters. JSON field names match these identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub f0_hz: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub jitter_pct: f64,
    #[serde(default)]
    pub shimmer_pct: f64,
    /// Harmonic-to-noise energy ratio; `None` synthesizes no noise.
    #[serde(default)]
    pub hnr_db: Option<f64>,
    /// `(center_hz, bandwidth_hz)`, at most three.
    #[serde(default)]
    pub formants: Vec<(f64, f64)>,
    /// `(start_s, length_s)` silent gaps.
    #[serde(default)]
    pub breaks: Vec<(f64, f64)>,
    #[serde(default)]
    pub seed: u64,
    /// Peak absolute amplitude of the output.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Sinusoidal amplitude modulation rate; 0 disables.
    #[serde(default)]
    pub am_rate_hz: f64,
    /// Modulation depth in [0, 1).
    #[serde(default)]
    pub am_depth: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            f0_hz: 120.0,
            duration_s: 2.0,
            jitter_pct: 0.0,
            shimmer_pct: 0.0,
            hnr_db: None,
            formants: vec![(500.0, 80.0), (1500.0, 120.0), (2500.0, 160.0)],
            breaks: Vec::new(),
            seed: 0,
            amplitude: default_amplitude(),
            am_rate_hz: 0.0,
            am_depth: 0.0,
        }
    }
}

impl SynthSpec {
    /// Spec with the built-in formant template of `vowel`.
    pub fn vowel(vowel: Vowel, f0_hz: f64, duration_s: f64) -> SynthSpec {
        SynthSpec {
            f0_hz,
            duration_s,
            formants: cohort::formants_for(vowel).to_vec(),
            ..SynthSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(55.0..=1000.0).contains(&self.f0_hz) {
            return bad(format!("f0_hz {} outside [55, 1000]", self.f0_hz));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration_s {} must be positive", self.duration_s));
        }
        if !(self.jitter_pct >= 0.0 && self.jitter_pct < 50.0) {
            return bad(format!("jitter_pct {} outside [0, 50)", self.jitter_pct));
        }
        if !(self.shimmer_pct >= 0.0 && self.shimmer_pct < 100.0) {
            return bad(format!("shimmer_pct {} outside [0, 100)", self.shimmer_pct));
        }
        if self.hnr_db.is_some_and(|h| !h.is_finite()) {
            return bad("hnr_db must be finite".into());
        }
        if self.formants.len() > 3 {
            return bad(format!("{} formants given, at most 3", self.formants.len()));
        }
        let nyquist = WORKING_RATE as f64 / 2.0;
        for &(f, b) in &self.formants {
            if !(f > 0.0 && f < nyquist && b > 0.0) {
                return bad(format!("formant ({f}, {b}) must have 0 < f < {nyquist} and b > 0"));
            }
        }
        let mut breaks = self.breaks.clone();
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prev_end = 0.0;
        for &(start, len) in &breaks {
            if !(start >= 0.0 && len > 0.0 && start + len <= self.duration_s + 1e-12) {
                return bad(format!("break ({start}, {len}) not inside [0, {}]", self.duration_s));
            }
            if start < prev_end {
                return bad(format!("break at {start} overlaps the previous break"));
            }
            prev_end = start + len;
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return bad(format!("amplitude {} outside (0, 1]", self.amplitude));
        }
        if !(self.am_rate_hz >= 0.0 && (0.0..1.0).contains(&self.am_depth)) {
            return bad("am_rate_hz must be >= 0 and am_depth in [0, 1)".into());
        }
        Ok(())
    }

    fn sorted_breaks(&self) -> Vec<(f64, f64)> {
        let mut b = self.breaks.clone();
        b.sort_by(|x, y| x.0.total_cmp(&y.0));
        b
    }
}

/// What an extractor should recover from a synthesized signal.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub spec: SynthSpec,
    pub expected_segments: usize,
    pub expected_segments_per_second: f64,
    pub expected_mean_segment_s: f64,
    /// Pulse instants (s) and amplitudes actually used.
    pub pulse_times: Vec<f64>,
    pub pulse_amps: Vec<f64>,
    /// Harmonic and noise energies over the output, before peak scaling.
    pub harmonic_energy: f64,
    pub noise_energy: f64,
}

impl GroundTruth {
    fn new(spec: &SynthSpec) -> GroundTruth {
        let segments = spec.breaks.len() + 1;
        let voiced: f64 = spec.duration_s - spec.breaks.iter().map(|b| b.1).sum::<f64>();
        GroundTruth {
            spec: spec.clone(),
            expected_segments: segments,
            expected_segments_per_second: segments as f64 / spec.duration_s,
            expected_mean_segment_s: voiced / segments as f64,
            pulse_times: Vec::new(),
            pulse_amps: Vec::new(),
            harmonic_energy: 0.0,
            noise_energy: 0.0,
        }
    }

    /// Realized local jitter of the pulse train outside breaks, as a ratio.
    pub fn realized_jitter(&self) -> f64 {
        let periods: Vec<f64> = self.pulse_times.windows(2).map(|w| w[1] - w[0]).collect();
        local_perturbation(&periods)
    }

    /// Realized local shimmer of the pulse amplitudes, as a ratio.
    pub fn realized_shimmer(&self) -> f64 {
        local_perturbation(&self.pulse_amps)
    }

    /// Level in dB of the combined source, tract and radiation response at
    /// `freq_hz`, on an arbitrary but fixed reference.
    pub fn spectral_level_db(&self, freq_hz: f64) -> f64 {
        20.0 * transfer(&self.spec.formants, freq_hz).norm().log10()
    }
}

fn local_perturbation(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let diffs: f64 = xs.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (xs.len() - 1) as f64;
    diffs / (xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Klatt-style resonator with unity DC gain.
#[derive(Clone, Copy)]
struct Resonator {
    a: f64,
    b: f64,
    c: f64,
}

impl Resonator {
    fn new(freq: f64, bw: f64, rate: f64) -> Resonator {
        let c = -(-2.0 * PI * bw / rate).exp();
        let b = 2.0 * (-PI * bw / rate).exp() * (2.0 * PI * freq / rate).cos();
        Resonator { a: 1.0 - b - c, b, c }
    }

    fn run(&self, x: &mut [f64]) {
        let (mut y1, mut y2) = (0.0, 0.0);
        for s in x.iter_mut() {
            let y = self.a * *s + self.b * y1 + self.c * y2;
            y2 = y1;
            y1 = y;
            *s = y;
        }
    }

    fn response(&self, z_inv: Complex<f64>) -> Complex<f64> {
        self.a / (1.0 - self.b * z_inv - self.c * z_inv * z_inv)
    }
}

fn source_pole(rate: f64) -> f64 {
    (-2.0 * PI * SOURCE_CORNER_HZ / rate).exp()
}

/// Frequency response of source shaping, resonators and radiation.
fn transfer(formants: &[(f64, f64)], freq_hz: f64) -> Complex<f64> {
    let rate = WORKING_RATE as f64;
    let z_inv = Complex::from_polar(1.0, -2.0 * PI * freq_hz / rate);
    let p = source_pole(rate);
    let one_pole = (1.0 - p) / (1.0 - p * z_inv);
    let mut h = one_pole * one_pole * (1.0 - z_inv);
    for &(f, b) in formants {
        h *= Resonator::new(f, b, rate).response(z_inv);
    }
    h
}

/// Gain envelope: 1 in voiced regions, 0 inside breaks, linear fades of
/// `FADE_S` just outside each break.
fn gate(spec: &SynthSpec, n: usize, rate: f64) -> Vec<f64> {
    let breaks = spec.sorted_breaks();
    (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let mut g: f64 = 1.0;
            for &(start, len) in &breaks {
                let end = start + len;
                if t >= start && t < end {
                    return 0.0;
                }
                if t < start && start - t < FADE_S {
                    g = g.min((start - t) / FADE_S);
                }
                if t >= end && t - end < FADE_S {
                    g = g.min((t - end) / FADE_S);
                }
            }
            if spec.am_rate_hz > 0.0 && spec.am_depth > 0.0 {
                g *= (1.0 + spec.am_depth * (2.0 * PI * spec.am_rate_hz * t).sin()) / (1.0 + spec.am_depth);
            }
            g
        })
        .collect()
}

/// `1 + sd * z` for standard normal `z`, floored so a period or amplitude
/// never collapses.
fn perturbed(rng: &mut impl Rng, sd: f64) -> f64 {
    (1.0 + sd * rng.sample::<f64, _>(StandardNormal)).max(PERTURBATION_FLOOR)
}

/// Synthesizes a sustained vowel at the working rate.
///
/// Period and amplitude perturbations are independent zero-mean Gaussian
/// noise with relative SD `jitter_pct / 100` and `shimmer_pct / 100`. The
/// expected local (cycle-to-cycle) perturbation is then `2 / sqrt(pi)` times
/// that SD; `GroundTruth` reports the realized value.
pub fn synth_vowel(spec: &SynthSpec) -> Result<(AudioBuffer, GroundTruth)> {
    spec.validate()?;
    let rate = WORKING_RATE as f64;
    let n = (spec.duration_s * rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut truth = GroundTruth::new(spec);

    // Pulse train with band-limited fractional-delay impulses.
    let t0 = 1.0 / spec.f0_hz;
    let mut source = vec![0.0; n];
    let mut t = 0.5 * t0;
    let hann_half = IMPULSE_HALF as f64;
    while t < spec.duration_s {
        let amp = perturbed(&mut rng, spec.shimmer_pct / 100.0);
        let pos = t * rate;
        let center = pos.floor() as i64;
        for k in (center - IMPULSE_HALF + 1)..=(center + IMPULSE_HALF) {
            if k < 0 || k as usize >= n {
                continue;
            }
            let d = k as f64 - pos;
            let w = 0.5 + 0.5 * (PI * d / hann_half).cos();
            let s = if d.abs() < 1e-12 { 1.0 } else { (PI * d).sin() / (PI * d) };
            source[k as usize] += amp * s * w;
        }
        truth.pulse_times.push(t);
        truth.pulse_amps.push(amp);
        t += t0 * perturbed(&mut rng, spec.jitter_pct / 100.0);
    }

    // Source roll-off: two one-pole low-passes.
    let p = source_pole(rate);
    for _ in 0..2 {
        let mut y = 0.0;
        for s in source.iter_mut() {
            y = (1.0 - p) * *s + p * y;
            *s = y;
        }
    }
    for &(f, b) in &spec.formants {
        Resonator::new(f, b, rate).run(&mut source);
    }
    // Lip radiation (first difference).
    let mut prev = 0.0;
    for s in source.iter_mut() {
        let x = *s;
        *s = x - prev;
        prev = x;
    }

    let g = gate(spec, n, rate);
    let harmonic: Vec<f64> = source.iter().zip(&g).map(|(s, g)| s * g).collect();
    let harmonic_energy: f64 = harmonic.iter().map(|x| x * x).sum();

    let mut out = harmonic;
    let mut noise_energy = 0.0;
    if let Some(hnr_db) = spec.hnr_db {
        let raw: Vec<f64> = (0..n)
            .map(|i| g[i] * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let raw_energy: f64 = raw.iter().map(|x| x * x).sum();
        if raw_energy > 0.0 && harmonic_energy > 0.0 {
            let target = harmonic_energy / 10f64.powf(hnr_db / 10.0);
            let scale = (target / raw_energy).sqrt();
            for (o, r) in out.iter_mut().zip(&raw) {
                *o += scale * r;
            }
            noise_energy = target;
        }
    }

    // Keep pulses that fall in fully voiced regions for the realized values.
    let keep: Vec<bool> = truth
        .pulse_times
        .iter()
        .map(|&t| {
            let i = ((t * rate) as usize).min(n.saturating_sub(1));
            n > 0 && g[i] > 0.0
        })
        .collect();
    let mut k = keep.iter();
    truth.pulse_times.retain(|_| *k.next().unwrap());
    let mut k = keep.iter();
    truth.pulse_amps.retain(|_| *k.next().unwrap());

    let peak = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = if peak > 0.0 { spec.amplitude / peak } else { 0.0 };
    out.iter_mut().for_each(|x| *x *= scale);
    truth.harmonic_energy = harmonic_energy * scale * scale;
    truth.noise_energy = noise_energy * scale * scale;
    Ok((AudioBuffer::new(out, WORKING_RATE), truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let spec = SynthSpec {
            jitter_pct: 1.0,
            shimmer_pct: 3.0,
            hnr_db: Some(15.0),
            seed: 7,
            ..SynthSpec::default()
        };
        let (a, _) = synth_vowel(&spec).unwrap();
        let (b, _) = synth_vowel(&spec).unwrap();
        assert_eq!(a, b);
        let (c, _) = synth_vowel(&SynthSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn peak_amplitude_and_length() {
        let (buf, _) = synth_vowel(&SynthSpec::default()).unwrap();
        assert_eq!(buf.len(), 32000);
        let peak = buf.samples().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((peak - 0.5).abs() < 1e-12);
    }

    #[test]
    fn energy_accounting_matches_hnr() {
        for hnr in [0.0, 5.0, 10.0, 20.0] {
            let spec = SynthSpec {
                hnr_db: Some(hnr),
                breaks: vec![(0.5, 0.3)],
                seed: 3,
                ..SynthSpec::default()
            };
            let (_, truth) = synth_vowel(&spec).unwrap();
            let measured = 10.0 * (truth.harmonic_energy / truth.noise_energy).log10();
            assert!((measured - hnr).abs() < 1.0, "{measured} vs {hnr}");
        }
    }

    #[test]
    fn gaussian_noise_realizes_requested_perturbation() {
        let spec = SynthSpec {
            jitter_pct: 2.0,
            shimmer_pct: 5.0,
            duration_s: 10.0,
            seed: 11,
            ..SynthSpec::default()
        };
        let (_, truth) = synth_vowel(&spec).unwrap();
        let local = 2.0 / std::f64::consts::PI.sqrt();
        assert!((truth.realized_jitter() * 100.0 - 2.0 * local).abs() < 0.2);
        // amplitudes are 1 +- 0.05, so the mean is ~1
        assert!((truth.realized_shimmer() * 100.0 - 5.0 * local).abs() < 0.5);
    }

    #[test]
    fn breaks_are_silent_and_voiced_time_adds_up() {
        let spec = SynthSpec {
            duration_s: 3.0,
            breaks: vec![(1.0, 0.3), (2.0, 0.3)],
            hnr_db: Some(20.0),
            ..SynthSpec::default()
        };
        let (buf, truth) = synth_vowel(&spec).unwrap();
        let rate = buf.sample_rate() as f64;
        for &(start, len) in &spec.breaks {
            let a = (start * rate) as usize + 1;
            let b = ((start + len) * rate) as usize - 1;
            assert!(buf.samples()[a..b].iter().all(|&x| x == 0.0));
        }
        let nonzero = buf.samples().iter().filter(|x| **x != 0.0).count() as f64 / rate;
        assert!((nonzero - 2.4).abs() < 0.011);
        assert_eq!(truth.expected_segments, 3);
        assert!((truth.expected_mean_segment_s - 0.8).abs() < 1e-12);
        assert!((truth.expected_segments_per_second - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        let overlapping = SynthSpec {
            breaks: vec![(0.5, 0.4), (0.8, 0.2)],
            ..SynthSpec::default()
        };
        assert!(matches!(synth_vowel(&overlapping), Err(Error::InvalidSpec(_))));
        let low = SynthSpec { f0_hz: 40.0, ..SynthSpec::default() };
        assert!(low.validate().is_err());
        let outside = SynthSpec { breaks: vec![(1.9, 0.2)], ..SynthSpec::default() };
        assert!(outside.validate().is_err());
        let four = SynthSpec {
            formants: vec![(500.0, 80.0); 4],
            ..SynthSpec::default()
        };
        assert!(four.validate().is_err());
    }

    #[test]
    fn json_uses_field_names() {
        let json = r#"{"f0_hz": 150, "duration_s": 1.5, "breaks": [[0.5, 0.2]], "seed": 4}"#;
        let spec: SynthSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.f0_hz, 150.0);
        assert_eq!(spec.breaks, vec![(0.5, 0.2)]);
        assert_eq!(spec.amplitude, 0.5);
        assert!(spec.formants.is_empty());
    }
}
