//! Flat `key = value` configuration.
//!
//! Every DSP constant used by the extractors is reachable through a dotted
//! key. Lines starting with `#` are comments; unknown keys are rejected so a
//! typo never silently falls back to a default.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::Method;

/// Environment variable naming the config file read by the CLI.
pub const CONFIG_ENV: &str = "VOWELMARK_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct PitchConfig {
    pub min_hz: f64,
    pub max_hz: f64,
    pub voicing_threshold: f64,
    /// Accept a half-lag candidate when its correlation is at least this
    /// fraction of the best peak.
    pub octave_ratio: f64,
    pub frame_ms: f64,
    /// Frames with RMS below this are unvoiced without further analysis.
    pub silence_rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    pub frame_ms: f64,
    pub mel_bands: usize,
    pub mel_low_hz: f64,
    pub mel_high_hz: f64,
    pub loudness_bands: usize,
    pub loudness_low_hz: f64,
    pub loudness_high_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormantConfig {
    pub lpc_order: usize,
    pub preemphasis: f64,
    pub max_bandwidth_hz: f64,
    pub min_hz: f64,
    pub max_hz: f64,
    pub frame_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub hop_ms: f64,
    pub pitch: PitchConfig,
    pub min_voiced_frames: usize,
    pub spectral: SpectralConfig,
    pub formant: FormantConfig,
    /// Population SD when true, sample SD (n - 1) otherwise.
    pub population_sd: bool,
    pub stats_method: Method,
    pub continuity_correction: bool,
    pub threshold: f64,
    pub boxplot_threshold: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            hop_ms: 10.0,
            pitch: PitchConfig {
                min_hz: 55.0,
                max_hz: 1000.0,
                voicing_threshold: 0.45,
                octave_ratio: 0.8,
                frame_ms: 60.0,
                silence_rms: 1e-5,
            },
            min_voiced_frames: 3,
            spectral: SpectralConfig {
                frame_ms: 20.0,
                mel_bands: 26,
                mel_low_hz: 20.0,
                mel_high_hz: 8000.0,
                loudness_bands: 26,
                loudness_low_hz: 50.0,
                loudness_high_hz: 8000.0,
            },
            formant: FormantConfig {
                lpc_order: 14,
                preemphasis: 0.97,
                max_bandwidth_hz: 600.0,
                min_hz: 90.0,
                max_hz: 5500.0,
                frame_ms: 50.0,
            },
            population_sd: true,
            stats_method: Method::NormalApprox,
            continuity_correction: false,
            threshold: 0.3,
            boxplot_threshold: 0.4,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl Config {
    pub const KEYS: &'static [&'static str] = &[
        "frame.hop_ms",
        "f0.min_hz",
        "f0.max_hz",
        "f0.voicing_threshold",
        "f0.octave_ratio",
        "f0.frame_ms",
        "f0.silence_rms",
        "voicing.min_frames",
        "spectral.frame_ms",
        "mel.bands",
        "mel.low_hz",
        "mel.high_hz",
        "loudness.bands",
        "loudness.low_hz",
        "loudness.high_hz",
        "lpc.order",
        "lpc.preemphasis",
        "formant.max_bandwidth_hz",
        "formant.min_hz",
        "formant.max_hz",
        "formant.frame_ms",
        "functionals.population_sd",
        "stats.method",
        "stats.continuity_correction",
        "report.threshold",
        "report.boxplot_threshold",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "frame.hop_ms" => self.hop_ms = parse_num(key, v)?,
            "f0.min_hz" => self.pitch.min_hz = parse_num(key, v)?,
            "f0.max_hz" => self.pitch.max_hz = parse_num(key, v)?,
            "f0.voicing_threshold" => self.pitch.voicing_threshold = parse_num(key, v)?,
            "f0.octave_ratio" => self.pitch.octave_ratio = parse_num(key, v)?,
            "f0.frame_ms" => self.pitch.frame_ms = parse_num(key, v)?,
            "f0.silence_rms" => self.pitch.silence_rms = parse_num(key, v)?,
            "voicing.min_frames" => self.min_voiced_frames = parse_num(key, v)?,
            "spectral.frame_ms" => self.spectral.frame_ms = parse_num(key, v)?,
            "mel.bands" => self.spectral.mel_bands = parse_num(key, v)?,
            "mel.low_hz" => self.spectral.mel_low_hz = parse_num(key, v)?,
            "mel.high_hz" => self.spectral.mel_high_hz = parse_num(key, v)?,
            "loudness.bands" => self.spectral.loudness_bands = parse_num(key, v)?,
            "loudness.low_hz" => self.spectral.loudness_low_hz = parse_num(key, v)?,
            "loudness.high_hz" => self.spectral.loudness_high_hz = parse_num(key, v)?,
            "lpc.order" => self.formant.lpc_order = parse_num(key, v)?,
            "lpc.preemphasis" => self.formant.preemphasis = parse_num(key, v)?,
            "formant.max_bandwidth_hz" => self.formant.max_bandwidth_hz = parse_num(key, v)?,
            "formant.min_hz" => self.formant.min_hz = parse_num(key, v)?,
            "formant.max_hz" => self.formant.max_hz = parse_num(key, v)?,
            "formant.frame_ms" => self.formant.frame_ms = parse_num(key, v)?,
            "functionals.population_sd" => self.population_sd = parse_bool(key, v)?,
            "stats.method" => self.stats_method = v.parse()?,
            "stats.continuity_correction" => self.continuity_correction = parse_bool(key, v)?,
            "report.threshold" => self.threshold = parse_num(key, v)?,
            "report.boxplot_threshold" => self.boxplot_threshold = parse_num(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::FileUnreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Config::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.hop_ms > 0.0) {
            return bad("frame.hop_ms must be positive");
        }
        if !(self.pitch.min_hz > 0.0 && self.pitch.min_hz < self.pitch.max_hz) {
            return bad("f0.min_hz must be positive and below f0.max_hz");
        }
        if self.pitch.frame_ms < self.hop_ms || self.spectral.frame_ms < self.hop_ms {
            return bad("frame lengths must be at least one hop");
        }
        if self.formant.frame_ms < self.hop_ms {
            return bad("formant.frame_ms must be at least one hop");
        }
        if self.formant.lpc_order < 6 {
            return bad("lpc.order must be at least 6 to resolve three formants");
        }
        if self.spectral.mel_bands < 5 || self.spectral.loudness_bands < 1 {
            return bad("mel.bands must be at least 5");
        }
        if !(0.0..=1.0).contains(&self.threshold) || !(0.0..=1.0).contains(&self.boxplot_threshold)
        {
            return bad("report thresholds must lie in [0, 1]");
        }
        Ok(())
    }

    /// Serializes every key, in `KEYS` order, in the same flat format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let entries: Vec<(&str, String)> = vec![
            ("frame.hop_ms", self.hop_ms.to_string()),
            ("f0.min_hz", self.pitch.min_hz.to_string()),
            ("f0.max_hz", self.pitch.max_hz.to_string()),
            ("f0.voicing_threshold", self.pitch.voicing_threshold.to_string()),
            ("f0.octave_ratio", self.pitch.octave_ratio.to_string()),
            ("f0.frame_ms", self.pitch.frame_ms.to_string()),
            ("f0.silence_rms", self.pitch.silence_rms.to_string()),
            ("voicing.min_frames", self.min_voiced_frames.to_string()),
            ("spectral.frame_ms", self.spectral.frame_ms.to_string()),
            ("mel.bands", self.spectral.mel_bands.to_string()),
            ("mel.low_hz", self.spectral.mel_low_hz.to_string()),
            ("mel.high_hz", self.spectral.mel_high_hz.to_string()),
            ("loudness.bands", self.spectral.loudness_bands.to_string()),
            ("loudness.low_hz", self.spectral.loudness_low_hz.to_string()),
            ("loudness.high_hz", self.spectral.loudness_high_hz.to_string()),
            ("lpc.order", self.formant.lpc_order.to_string()),
            ("lpc.preemphasis", self.formant.preemphasis.to_string()),
            ("formant.max_bandwidth_hz", self.formant.max_bandwidth_hz.to_string()),
            ("formant.min_hz", self.formant.min_hz.to_string()),
            ("formant.max_hz", self.formant.max_hz.to_string()),
            ("formant.frame_ms", self.formant.frame_ms.to_string()),
            ("functionals.population_sd", self.population_sd.to_string()),
            ("stats.method", self.stats_method.to_string()),
            ("stats.continuity_correction", self.continuity_correction.to_string()),
            ("report.threshold", self.threshold.to_string()),
            ("report.boxplot_threshold", self.boxplot_threshold.to_string()),
        ];
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let cfg = Config::default();
        let text = cfg.to_text();
        assert_eq!(Config::parse(&text).unwrap(), cfg);
        assert_eq!(text.lines().count(), Config::KEYS.len());
        for (line, key) in text.lines().zip(Config::KEYS) {
            assert!(line.starts_with(key));
        }
    }

    #[test]
    fn overrides_and_comments() {
        let cfg = Config::parse("# tuned\nf0.voicing_threshold = 0.5\n\nlpc.order=16\n").unwrap();
        assert_eq!(cfg.pitch.voicing_threshold, 0.5);
        assert_eq!(cfg.formant.lpc_order, 16);
        assert_eq!(cfg.spectral.mel_bands, 26);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(Config::parse("f0.minhz = 60"), Err(Error::Config(_))));
        assert!(Config::parse("f0.min_hz").is_err());
        assert!(Config::parse("report.threshold = 1.5").is_err());
    }
}
