//! Fundamental frequency, voicing decisions, voiced-segment timing, and the
//! cycle-level perturbation measures (jitter, shimmer, HNR).

mod f0;
mod hnr;
mod marks;
mod segments;

pub use f0::{estimate_f0, normalized_acf, F0Track};
pub use hnr::{hnr, hnr_from_r, HnrTrack, HNR_MAX_DB, HNR_MIN_DB};
pub use marks::{
    frame_perturbation, jitter_local, pitch_marks, shimmer_local, Mark, PerturbationMeasures,
    PitchMarks,
};
pub use segments::{unvoiced_segment_lengths, voiced_segment_stats, VoicedSegmentStats};

/// Semitone reference frequency.
pub const SEMITONE_BASE_HZ: f64 = 27.5;

/// `12 log2(f / 27.5)`.
pub fn hz_to_semitones(f_hz: f64) -> f64 {
    12.0 * (f_hz / SEMITONE_BASE_HZ).log2()
}
