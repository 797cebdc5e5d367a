//! Labeled two-group cohorts of synthesized vowels.
//!
//! Random stream layout: participant `g` (negatives first, then positives)
//! draws its per-participant values from ChaCha8 stream `8 g` and each of its
//! vowels `v` (a, e, i, o, u order) from stream `8 g + 1 + v`, all keyed by
//! the cohort seed. Any single recording can therefore be regenerated
//! without synthesizing the rest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{synth_vowel, GroundTruth, SynthSpec};
use crate::audio::{write_manifest, write_wav_16, Group, SegmentManifestEntry, Vowel, VowelRecording};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

const BANDWIDTHS: [f64; 3] = [80.0, 120.0, 160.0];

/// Built-in formant centers (Hz) per vowel.
pub const VOWEL_FORMANTS: [(Vowel, [f64; 3]); 5] = [
    (Vowel::A, [730.0, 1090.0, 2440.0]),
    (Vowel::E, [460.0, 1900.0, 2600.0]),
    (Vowel::I, [270.0, 2290.0, 3010.0]),
    (Vowel::O, [450.0, 880.0, 2500.0]),
    (Vowel::U, [300.0, 870.0, 2240.0]),
];

pub(crate) fn formants_for(vowel: Vowel) -> [(f64, f64); 3] {
    let centers = VOWEL_FORMANTS.iter().find(|(v, _)| *v == vowel).unwrap().1;
    [
        (centers[0], BANDWIDTHS[0]),
        (centers[1], BANDWIDTHS[1]),
        (centers[2], BANDWIDTHS[2]),
    ]
}

fn default_formant_table() -> BTreeMap<Vowel, Vec<(f64, f64)>> {
    Vowel::ALL.iter().map(|&v| (v, formants_for(v).to_vec())).collect()
}

/// Distribution of synthesis parameters for one group. Ranges are `[lo, hi]`
/// and sampled uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Profile {
    pub female_fraction: f64,
    pub male_f0_hz: (f64, f64),
    pub female_f0_hz: (f64, f64),
    /// Per-recording f0 deviation from the participant's f0, +- percent.
    pub f0_vowel_spread_pct: f64,
    pub duration_s: (f64, f64),
    pub jitter_pct: (f64, f64),
    pub shimmer_pct: (f64, f64),
    pub hnr_db: (f64, f64),
    /// Inclusive range of voicing breaks per recording.
    pub breaks: (usize, usize),
    pub break_len_s: (f64, f64),
    /// Minimum voiced stretch before, between and after breaks.
    pub min_voiced_run_s: f64,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            female_fraction: 4.0 / 11.0,
            male_f0_hz: (95.0, 140.0),
            female_f0_hz: (175.0, 235.0),
            f0_vowel_spread_pct: 3.0,
            duration_s: (2.6, 3.0),
            jitter_pct: (0.2, 0.6),
            shimmer_pct: (1.5, 4.0),
            hnr_db: (15.0, 25.0),
            breaks: (0, 0),
            break_len_s: (0.08, 0.45),
            min_voiced_run_s: 0.15,
        }
    }
}

impl Profile {
    fn validate(&self) -> Result<()> {
        let ordered = |r: (f64, f64)| r.0 <= r.1 && r.0.is_finite() && r.1.is_finite();
        if !(0.0..=1.0).contains(&self.female_fraction)
            || ![
                self.male_f0_hz,
                self.female_f0_hz,
                self.duration_s,
                self.jitter_pct,
                self.shimmer_pct,
                self.hnr_db,
                self.break_len_s,
            ]
            .into_iter()
            .all(ordered)
            || self.breaks.0 > self.breaks.1
        {
            return Err(Error::InvalidSpec("profile ranges must be ordered".into()));
        }
        let worst = self.breaks.1 as f64 * self.break_len_s.1
            + (self.breaks.1 + 1) as f64 * self.min_voiced_run_s;
        if worst > self.duration_s.0 {
            return Err(Error::InvalidSpec(format!(
                "{} breaks of up to {} s do not fit in {} s",
                self.breaks.1, self.break_len_s.1, self.duration_s.0
            )));
        }
        Ok(())
    }
}

/// Negative and positive group profiles plus the shared formant table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortProfiles {
    pub neg: Profile,
    pub pos: Profile,
    pub formants: BTreeMap<Vowel, Vec<(f64, f64)>>,
}

impl Default for CohortProfiles {
    /// Negatives phonate with at most one break, positives with two to four.
    fn default() -> Self {
        CohortProfiles {
            neg: Profile {
                breaks: (0, 1),
                ..Profile::default()
            },
            pos: Profile {
                breaks: (2, 4),
                ..Profile::default()
            },
            formants: default_formant_table(),
        }
    }
}

impl CohortProfiles {
    /// Both groups drawn from the negative profile.
    pub fn null() -> CohortProfiles {
        let base = CohortProfiles::default();
        CohortProfiles {
            pos: base.neg.clone(),
            ..base
        }
    }
}

/// A synthesized recording with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthRecording {
    pub recording: VowelRecording,
    pub truth: GroundTruth,
}

fn uniform(rng: &mut ChaCha8Rng, r: (f64, f64)) -> f64 {
    if r.1 > r.0 {
        rng.random_range(r.0..r.1)
    } else {
        r.0
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Places `count` breaks so every voiced run is at least `min_run` long.
fn place_breaks(rng: &mut ChaCha8Rng, p: &Profile, duration: f64, count: usize) -> Vec<(f64, f64)> {
    if count == 0 {
        return Vec::new();
    }
    let lens: Vec<f64> = (0..count).map(|_| uniform(rng, p.break_len_s)).collect();
    let free = duration - lens.iter().sum::<f64>() - (count + 1) as f64 * p.min_voiced_run_s;
    let weights: Vec<f64> = (0..=count).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut t = 0.0;
    lens.iter()
        .zip(&weights)
        .map(|(&len, &w)| {
            t += p.min_voiced_run_s + free.max(0.0) * w / total;
            let b = (t, len);
            t += len;
            b
        })
        .collect()
}

/// Synthesizes `n_per_group` participants per group, five vowels each.
pub fn synth_cohort(
    n_per_group: usize,
    profiles: &CohortProfiles,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SynthRecording>> {
    if n_per_group < 2 {
        return Err(Error::InvalidSpec("need at least 2 participants per group".into()));
    }
    profiles.neg.validate()?;
    profiles.pos.validate()?;
    for v in Vowel::ALL {
        if !profiles.formants.contains_key(&v) {
            return Err(Error::InvalidSpec(format!("formant table lacks vowel {v}")));
        }
    }

    let participants = 2 * n_per_group;
    let per_participant: Vec<(String, Group, f64)> = (0..participants)
        .map(|g| {
            let (group, idx, profile) = if g < n_per_group {
                (Group::Neg, g, &profiles.neg)
            } else {
                (Group::Pos, g - n_per_group, &profiles.pos)
            };
            let n_female = (profile.female_fraction * n_per_group as f64).round() as usize;
            let range = if idx < n_female {
                profile.female_f0_hz
            } else {
                profile.male_f0_hz
            };
            let mut rng = stream(seed, 8 * g as u64);
            let f0 = uniform(&mut rng, range);
            (format!("{}{:02}", group.as_str(), idx + 1), group, f0)
        })
        .collect();

    let results = par::map_range(participants * Vowel::ALL.len(), exec, |k| {
        let g = k / Vowel::ALL.len();
        let vi = k % Vowel::ALL.len();
        let vowel = Vowel::ALL[vi];
        let (id, group, base_f0) = &per_participant[g];
        let profile = match group {
            Group::Neg => &profiles.neg,
            Group::Pos => &profiles.pos,
        };
        let mut rng = stream(seed, 8 * g as u64 + 1 + vi as u64);
        let spread = profile.f0_vowel_spread_pct / 100.0;
        let f0 = (base_f0 * (1.0 + uniform(&mut rng, (-spread, spread)))).clamp(55.0, 1000.0);
        let duration_s = uniform(&mut rng, profile.duration_s);
        let count = rng.random_range(profile.breaks.0..=profile.breaks.1);
        let breaks = place_breaks(&mut rng, profile, duration_s, count);
        let spec = SynthSpec {
            f0_hz: f0,
            duration_s,
            jitter_pct: uniform(&mut rng, profile.jitter_pct),
            shimmer_pct: uniform(&mut rng, profile.shimmer_pct),
            hnr_db: Some(uniform(&mut rng, profile.hnr_db)),
            formants: profiles.formants[&vowel].clone(),
            breaks,
            seed: rng.random(),
            ..SynthSpec::default()
        };
        let (buffer, truth) = synth_vowel(&spec)?;
        let meta = SegmentManifestEntry {
            source_path: format!("{id}_{vowel}.wav").into(),
            participant_id: id.clone(),
            group: *group,
            vowel,
            start_s: 0.0,
            end_s: buffer.duration_s(),
        };
        Ok(SynthRecording {
            recording: VowelRecording { meta, buffer },
            truth,
        })
    });
    results.into_iter().collect()
}

/// A cohort request as read from a spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortSpec {
    pub n_per_group: usize,
    pub neg: Profile,
    pub pos: Profile,
    pub formants: BTreeMap<Vowel, Vec<(f64, f64)>>,
}

impl Default for CohortSpec {
    fn default() -> Self {
        let p = CohortProfiles::default();
        CohortSpec {
            n_per_group: 11,
            neg: p.neg,
            pos: p.pos,
            formants: p.formants,
        }
    }
}

impl CohortSpec {
    pub fn profiles(&self) -> CohortProfiles {
        CohortProfiles {
            neg: self.neg.clone(),
            pos: self.pos.clone(),
            formants: self.formants.clone(),
        }
    }
}

/// Contents of a synth spec file: one recording or a whole cohort. A JSON
/// object carrying `f0_hz` is read as a single recording.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum SynthRequest {
    Single(SynthSpec),
    Cohort(CohortSpec),
}

impl SynthRequest {
    pub fn from_json(text: &str) -> Result<SynthRequest> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("f0_hz").is_some() {
            Ok(SynthRequest::Single(serde_json::from_value(value)?))
        } else {
            Ok(SynthRequest::Cohort(serde_json::from_value(value)?))
        }
    }

    /// Synthesizes the request. A single recording is labeled participant
    /// `synth01`, group `neg`, vowel `a`, and uses `seed` in place of its own.
    pub fn run(&self, seed: u64, exec: Execution) -> Result<Vec<SynthRecording>> {
        match self {
            SynthRequest::Cohort(c) => synth_cohort(c.n_per_group, &c.profiles(), seed, exec),
            SynthRequest::Single(spec) => {
                let spec = SynthSpec { seed, ..spec.clone() };
                let (buffer, truth) = synth_vowel(&spec)?;
                let mut recording = VowelRecording::from_buffer("synth01", Group::Neg, Vowel::A, buffer);
                recording.meta.source_path = "synth01_a.wav".into();
                Ok(vec![SynthRecording { recording, truth }])
            }
        }
    }
}

/// Writes every recording as 16-bit WAV under `dir` plus `manifest.csv`
/// referencing them; returns the manifest path.
pub fn write_recordings(dir: &Path, recordings: &[SynthRecording]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(recordings.len());
    for r in recordings {
        let path = dir.join(&r.recording.meta.source_path);
        write_wav_16(&path, &r.recording.buffer)?;
        entries.push(SegmentManifestEntry {
            source_path: path,
            ..r.recording.meta.clone()
        });
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(fs::File::create(&manifest)?, &entries, dir)?;
    Ok(manifest)
}
