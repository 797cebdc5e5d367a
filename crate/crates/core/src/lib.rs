//! Acoustic screening of sustained-vowel recordings.
//!
//! The crate reads labeled vowel segments, computes 88 per-recording acoustic
//! descriptors, and ranks them by how well they separate two groups of
//! speakers (Mann-Whitney U with effect size `r = |z| / sqrt(N)`). A
//! parametric vowel synthesizer with known F0, jitter, shimmer, HNR, formants
//! and voicing breaks serves as the ground truth for every extractor.
//!
//! Batch work runs on rayon when the `parallel` feature is on (the default)
//! and sequentially otherwise; results are identical either way.

pub mod audio;
pub mod config;
pub mod dsp;
pub mod error;
pub mod functionals;
pub mod par;
pub mod pipeline;
pub mod report;
pub mod spectral;
pub mod stats;
pub mod synth;
pub mod voicing;

pub use config::Config;
pub use error::{Error, Result};
pub use par::Execution;
