use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::registry::{FeatureRegistry, Functional, Scope};
use super::{func_mean, func_percentiles, func_peaks_per_second, func_sd, func_sd_norm, func_slopes};

/// Descriptors sampled on the pitch grid, defined on voiced frames only.
pub const PITCH_LLDS: &[&str] = &[
    "f0_st",
    "jitter",
    "shimmer",
    "hnr",
    "h1_h2",
    "h1_a3",
    "f1_freq",
    "f1_bandwidth",
    "f1_amplitude",
    "f2_freq",
    "f2_bandwidth",
    "f2_amplitude",
    "f3_freq",
    "f3_bandwidth",
    "f3_amplitude",
];

/// Descriptors sampled on every frame of the short spectral grid.
pub const SPECTRAL_LLDS: &[&str] = &[
    "loudness",
    "flux",
    "mfcc1",
    "mfcc2",
    "mfcc3",
    "mfcc4",
    "alpha_ratio",
    "hammarberg",
    "slope_0_500",
    "slope_500_1500",
];

/// Every low-level track of one recording, keyed by descriptor id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Descriptors {
    pub duration_s: f64,
    pub pitch_hop_s: f64,
    /// `None` where the descriptor is undefined (unvoiced or unmeasurable).
    pub pitch: BTreeMap<String, Vec<Option<f64>>>,
    pub spectral_hop_s: f64,
    pub spectral: BTreeMap<String, Vec<f64>>,
    /// Voicing of each spectral frame.
    pub spectral_voiced: Vec<bool>,
    pub voiced_lengths_s: Vec<f64>,
    pub unvoiced_lengths_s: Vec<f64>,
    pub leq_db: f64,
}

fn some_runs(track: &[Option<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for v in track {
        match v {
            Some(x) => cur.push(*x),
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn masked_runs(track: &[f64], voiced: &[bool], want: bool) -> Vec<Vec<f64>> {
    let masked: Vec<Option<f64>> = track
        .iter()
        .zip(voiced)
        .map(|(&x, &v)| (v == want).then_some(x))
        .collect();
    some_runs(&masked)
}

impl Descriptors {
    fn contours(&self, lld: &str, scope: Scope) -> Result<(Vec<Vec<f64>>, f64)> {
        let mismatch = || Error::RegistryMismatch(format!("no track {lld:?} with scope {scope}"));
        if let Some(t) = self.pitch.get(lld) {
            return match scope {
                Scope::VoicedOnly => Ok((some_runs(t), self.pitch_hop_s)),
                _ => Err(mismatch()),
            };
        }
        let t = self.spectral.get(lld).ok_or_else(mismatch)?;
        let runs = match scope {
            Scope::AllFrames if t.is_empty() => Vec::new(),
            Scope::AllFrames => vec![t.clone()],
            Scope::VoicedOnly => masked_runs(t, &self.spectral_voiced, true),
            Scope::UnvoicedOnly => masked_runs(t, &self.spectral_voiced, false),
            Scope::Global => return Err(mismatch()),
        };
        Ok((runs, self.spectral_hop_s))
    }

    fn global(&self, lld: &str, f: Functional, population: bool) -> Result<f64> {
        let lengths = match lld {
            "voiced_segments" => Some(&self.voiced_lengths_s),
            "unvoiced_segments" => Some(&self.unvoiced_lengths_s),
            _ => None,
        };
        match (lld, f, lengths) {
            (_, Functional::Rate, Some(l)) if self.duration_s > 0.0 => Ok(l.len() as f64 / self.duration_s),
            (_, Functional::Rate, Some(_)) => Ok(0.0),
            (_, Functional::LengthMean, Some(l)) => Ok(func_mean(l)),
            (_, Functional::LengthSd, Some(l)) => Ok(func_sd(l, population)),
            ("level", Functional::LeqDb, _) => Ok(self.leq_db),
            (_, Functional::PeaksPerSecond, _) => {
                let t = self
                    .spectral
                    .get(lld)
                    .ok_or_else(|| Error::RegistryMismatch(format!("no track {lld:?}")))?;
                Ok(func_peaks_per_second(t, self.duration_s))
            }
            _ => Err(Error::RegistryMismatch(format!("cannot apply {f} to {lld:?} globally"))),
        }
    }
}

/// Evaluates every registry entry on `d`. Returns the values in registry
/// order and the names of features whose coefficient of variation fell back
/// to the plain SD.
pub fn assemble_vector(d: &Descriptors, registry: &FeatureRegistry, population: bool) -> Result<(Vec<f64>, Vec<String>)> {
    let mut values = Vec::with_capacity(registry.len());
    let mut guarded = Vec::new();
    for e in &registry.entries {
        let v = if e.scope == Scope::Global {
            d.global(&e.lld, e.functional, population)?
        } else {
            let (runs, hop) = d.contours(&e.lld, e.scope)?;
            let flat = runs.concat();
            match e.functional {
                Functional::Mean => func_mean(&flat),
                Functional::SdNorm => {
                    let (v, g) = func_sd_norm(&flat, population);
                    if g {
                        guarded.push(e.name.clone());
                    }
                    v
                }
                Functional::Pctl20 => func_percentiles(&flat).p20,
                Functional::Pctl50 => func_percentiles(&flat).p50,
                Functional::Pctl80 => func_percentiles(&flat).p80,
                Functional::PctlRange => func_percentiles(&flat).range_20_80,
                Functional::RisingSlopeMean => func_slopes(&runs, hop, population).rising_mean,
                Functional::RisingSlopeSd => func_slopes(&runs, hop, population).rising_sd,
                Functional::FallingSlopeMean => func_slopes(&runs, hop, population).falling_mean,
                Functional::FallingSlopeSd => func_slopes(&runs, hop, population).falling_sd,
                f => {
                    return Err(Error::RegistryMismatch(format!(
                        "{f} needs global scope ({})",
                        e.name
                    )))
                }
            }
        };
        values.push(if v.is_finite() { v } else { 0.0 });
    }
    Ok((values, guarded))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Descriptors {
        let mut d = Descriptors {
            duration_s: 1.0,
            pitch_hop_s: 0.01,
            spectral_hop_s: 0.01,
            leq_db: -20.0,
            voiced_lengths_s: vec![0.4, 0.3],
            unvoiced_lengths_s: vec![0.3],
            ..Descriptors::default()
        };
        let voiced: Vec<bool> = (0..100).map(|i| !(40..70).contains(&i)).collect();
        for id in PITCH_LLDS {
            d.pitch.insert(
                id.to_string(),
                voiced.iter().enumerate().map(|(i, &v)| v.then_some(1.0 + i as f64 * 0.01)).collect(),
            );
        }
        for id in SPECTRAL_LLDS {
            d.spectral.insert(id.to_string(), (0..100).map(|i| 2.0 + (i % 7) as f64).collect());
        }
        d.spectral_voiced = voiced;
        d
    }

    #[test]
    fn full_vector() {
        let reg = FeatureRegistry::builtin();
        let (v, _) = assemble_vector(&toy(), reg, true).unwrap();
        assert_eq!(v.len(), 88);
        assert!(v.iter().all(|x| x.is_finite()));
        let at = |name: &str| v[reg.resolve(name).unwrap()];
        assert_eq!(at("voiced segments per second"), 2.0);
        assert!((at("mean voiced segment length") - 0.35).abs() < 1e-12);
        assert_eq!(at("equivalent sound level"), -20.0);
    }

    #[test]
    fn missing_track_is_a_mismatch() {
        let mut d = toy();
        d.pitch.remove("hnr");
        let err = assemble_vector(&d, FeatureRegistry::builtin(), true).unwrap_err();
        assert!(matches!(err, Error::RegistryMismatch(_)));
    }

    #[test]
    fn voiced_scope_ignores_unvoiced_values() {
        let reg = FeatureRegistry::builtin();
        let base = toy();
        let mut perturbed = toy();
        for t in perturbed.spectral.values_mut() {
            for (i, v) in t.iter_mut().enumerate().take(70).skip(40) {
                *v = 1e3 * i as f64;
            }
        }
        let (a, _) = assemble_vector(&base, reg, true).unwrap();
        let (b, _) = assemble_vector(&perturbed, reg, true).unwrap();
        for (e, (x, y)) in reg.entries.iter().zip(a.iter().zip(&b)) {
            if e.scope == Scope::VoicedOnly {
                assert_eq!(x, y, "{}", e.name);
            }
        }
        assert_ne!(a[reg.resolve("mean alpha ratio UV").unwrap()], b[reg.resolve("mean alpha ratio UV").unwrap()]);
    }

    #[test]
    fn empty_scopes_fall_back_to_zero() {
        let mut d = toy();
        d.spectral_voiced = vec![false; 100];
        for t in d.pitch.values_mut() {
            t.iter_mut().for_each(|v| *v = None);
        }
        d.voiced_lengths_s.clear();
        let reg = FeatureRegistry::builtin();
        let (v, _) = assemble_vector(&d, reg, true).unwrap();
        assert_eq!(v[reg.resolve("mean F0").unwrap()], 0.0);
        assert_eq!(v[reg.resolve("mean MFCC1 VR").unwrap()], 0.0);
        assert_eq!(v[reg.resolve("voiced segments per second").unwrap()], 0.0);
    }
}
