//! Audio ingestion: WAV decoding, resampling to the 16 kHz working rate, and
//! slicing labeled single-vowel segments out of longer recordings.

mod manifest;
mod resample;
mod wav;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use manifest::{read_manifest, segment_recordings, write_manifest, MIN_SEGMENT_S};
pub use resample::resample;
pub use wav::{encode_wav_16, parse_wav, read_wav, write_wav_16};

/// Working sample rate for every extractor.
pub const WORKING_RATE: u32 = 16_000;

/// Mono signal with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    /// Builds a buffer, clamping samples into [-1, 1]. Non-finite samples are
    /// replaced by zero.
    pub fn new(mut samples: Vec<f64>, sample_rate: u32) -> AudioBuffer {
        assert!(sample_rate > 0, "sample rate must be positive");
        for s in &mut samples {
            *s = if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 };
        }
        AudioBuffer {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Returns a new buffer scaled by `gain`, re-clamped.
    pub fn scaled(&self, gain: f64) -> AudioBuffer {
        AudioBuffer::new(self.samples.iter().map(|s| s * gain).collect(), self.sample_rate)
    }

    /// Sub-buffer covering `[start_s, end_s)`.
    pub fn slice_s(&self, start_s: f64, end_s: f64) -> AudioBuffer {
        let rate = self.sample_rate as f64;
        let a = ((start_s * rate).round() as usize).min(self.samples.len());
        let b = ((end_s * rate).round() as usize).clamp(a, self.samples.len());
        AudioBuffer {
            samples: self.samples[a..b].to_vec(),
            sample_rate: self.sample_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Neg,
    Pos,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Neg => "neg",
            Group::Pos => "pos",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Group> {
        match s.trim() {
            "pos" => Ok(Group::Pos),
            "neg" => Ok(Group::Neg),
            other => Err(Error::InvalidManifest(format!(
                "group must be pos or neg, got {other:?}"
            ))),
        }
    }
}

/// The five sustained vowels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vowel {
    A,
    E,
    I,
    O,
    U,
}

impl Vowel {
    pub const ALL: [Vowel; 5] = [Vowel::A, Vowel::E, Vowel::I, Vowel::O, Vowel::U];

    pub fn as_str(self) -> &'static str {
        match self {
            Vowel::A => "a",
            Vowel::E => "e",
            Vowel::I => "i",
            Vowel::O => "o",
            Vowel::U => "u",
        }
    }
}

impl fmt::Display for Vowel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Vowel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Vowel> {
        match s.trim() {
            "a" => Ok(Vowel::A),
            "e" => Ok(Vowel::E),
            "i" => Ok(Vowel::I),
            "o" => Ok(Vowel::O),
            "u" => Ok(Vowel::U),
            other => Err(Error::InvalidManifest(format!(
                "vowel must be one of a,e,i,o,u, got {other:?}"
            ))),
        }
    }
}

/// One row of the segmentation manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentManifestEntry {
    pub source_path: std::path::PathBuf,
    pub participant_id: String,
    pub group: Group,
    pub vowel: Vowel,
    pub start_s: f64,
    pub end_s: f64,
}

/// A labeled single-vowel segment at the working rate.
#[derive(Debug, Clone)]
pub struct VowelRecording {
    pub meta: SegmentManifestEntry,
    pub buffer: AudioBuffer,
}

impl VowelRecording {
    /// Wraps an in-memory buffer (resampling if needed) under the given labels.
    pub fn from_buffer(
        participant_id: impl Into<String>,
        group: Group,
        vowel: Vowel,
        buffer: AudioBuffer,
    ) -> VowelRecording {
        let buffer = resample(&buffer, WORKING_RATE);
        let meta = SegmentManifestEntry {
            source_path: Default::default(),
            participant_id: participant_id.into(),
            group,
            vowel,
            start_s: 0.0,
            end_s: buffer.duration_s(),
        };
        VowelRecording { meta, buffer }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buffer_clamps_and_reports_duration() {
        let b = AudioBuffer::new(vec![2.0, -3.0, 0.5, f64::NAN], 4);
        assert_eq!(b.samples(), &[1.0, -1.0, 0.5, 0.0]);
        assert_eq!(b.duration_s(), 1.0);
    }

    #[test]
    fn labels_parse() {
        assert_eq!("pos".parse::<Group>().unwrap(), Group::Pos);
        assert!("positive".parse::<Group>().is_err());
        for v in Vowel::ALL {
            assert_eq!(v.as_str().parse::<Vowel>().unwrap(), v);
        }
        assert!("y".parse::<Vowel>().is_err());
    }
}
