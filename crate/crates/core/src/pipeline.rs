//! Recording-level extraction: every descriptor track, then the 88 functionals.

use std::collections::BTreeMap;

use crate::audio::{AudioBuffer, VowelRecording};
use crate::config::Config;
use crate::error::Result;
use crate::functionals::{assemble_vector, equivalent_sound_level, Descriptors, FeatureMatrix, FeatureRegistry, FeatureVector};
use crate::par::{self, Execution};
use crate::spectral::{formants_and_harmonics, spectral_tracks};
use crate::voicing::{estimate_f0, frame_perturbation, hnr, pitch_marks, unvoiced_segment_lengths, voiced_segment_stats};

/// Non-fatal conditions met while extracting one recording.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub voiced_frames: usize,
    pub formant_dropouts: usize,
    pub empty_band_frames: usize,
    /// Features whose coefficient of variation fell back to the SD.
    pub guarded_features: Vec<String>,
    /// Why cycle-level measures are missing, if they are.
    pub perturbation_error: Option<String>,
}

/// All descriptor tracks of one buffer.
pub fn descriptors(buf: &AudioBuffer, cfg: &Config) -> Result<(Descriptors, Diagnostics)> {
    let mut diag = Diagnostics::default();
    let track = estimate_f0(buf, cfg);
    let duration = buf.duration_s();
    let segments = voiced_segment_stats(&track, duration, cfg.min_voiced_frames);
    let spectral = spectral_tracks(buf, cfg)?;
    diag.voiced_frames = track.voiced_count();
    diag.empty_band_frames = spectral.empty_band_frames;

    let n = track.len();
    let mut pitch: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    pitch.insert("f0_st".into(), track.f0_st());

    let (jitter, shimmer) = match pitch_marks(buf, &track) {
        Ok(marks) => frame_perturbation(&marks, &track),
        Err(e) => {
            diag.perturbation_error = Some(e.to_string());
            (vec![None; n], vec![None; n])
        }
    };
    pitch.insert("jitter".into(), jitter);
    pitch.insert("shimmer".into(), shimmer);
    pitch.insert(
        "hnr".into(),
        hnr(buf, &track).map(|h| h.hnr_db).unwrap_or_else(|_| vec![None; n]),
    );

    let (formants, harmonics) = formants_and_harmonics(buf, &track, cfg);
    diag.formant_dropouts = formants.dropouts;
    pitch.insert("h1_h2".into(), harmonics.frames.iter().map(|h| h.map(|h| h.h1_h2)).collect());
    pitch.insert("h1_a3".into(), harmonics.frames.iter().map(|h| h.and_then(|h| h.h1_a3)).collect());
    for k in 0..3 {
        let col = |f: fn(&crate::spectral::Formant) -> f64| -> Vec<Option<f64>> {
            formants.frames.iter().map(|fr| fr.map(|fr| f(&fr[k]))).collect()
        };
        pitch.insert(format!("f{}_freq", k + 1), col(|f| f.freq_hz));
        pitch.insert(format!("f{}_bandwidth", k + 1), col(|f| f.bandwidth_hz));
        pitch.insert(format!("f{}_amplitude", k + 1), col(|f| f.amp_rel_db));
    }

    let spectral_voiced = (0..spectral.len()).map(|t| track.voiced_at(spectral.center_s(t))).collect();
    let mut sp: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    sp.insert("loudness".into(), spectral.loudness.clone());
    sp.insert("flux".into(), spectral.flux.clone());
    for (k, m) in spectral.mfcc.iter().enumerate() {
        sp.insert(format!("mfcc{}", k + 1), m.clone());
    }
    sp.insert("alpha_ratio".into(), spectral.alpha_ratio.clone());
    sp.insert("hammarberg".into(), spectral.hammarberg.clone());
    sp.insert("slope_0_500".into(), spectral.slope_0_500.clone());
    sp.insert("slope_500_1500".into(), spectral.slope_500_1500.clone());

    let d = Descriptors {
        duration_s: duration,
        pitch_hop_s: track.hop_s(),
        pitch,
        spectral_hop_s: spectral.grid.hop_s,
        spectral: sp,
        spectral_voiced,
        voiced_lengths_s: segments.segment_bounds.iter().map(|(a, b)| b - a).collect(),
        unvoiced_lengths_s: unvoiced_segment_lengths(&segments, duration),
        leq_db: equivalent_sound_level(buf.samples()),
    };
    Ok((d, diag))
}

/// The 88-feature vector of one recording.
pub fn extract_recording(rec: &VowelRecording, cfg: &Config) -> Result<(FeatureVector, Diagnostics)> {
    let (d, mut diag) = descriptors(&rec.buffer, cfg)?;
    let (values, guarded) = assemble_vector(&d, FeatureRegistry::builtin(), cfg.population_sd)?;
    diag.guarded_features = guarded;
    Ok((
        FeatureVector {
            participant_id: rec.meta.participant_id.clone(),
            group: rec.meta.group,
            vowel: rec.meta.vowel,
            values,
        },
        diag,
    ))
}

/// Extracts every recording; rows keep input order. The first failure (in
/// input order) aborts the batch.
pub fn extract_batch(recs: &[VowelRecording], cfg: &Config, exec: Execution) -> Result<FeatureMatrix> {
    let rows = par::map(recs, exec, |r| extract_recording(r, cfg).map(|(v, _)| v));
    Ok(FeatureMatrix {
        names: FeatureRegistry::builtin().names(),
        rows: rows.into_iter().collect::<Result<Vec<_>>>()?,
    })
}
