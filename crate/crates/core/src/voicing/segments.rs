use super::F0Track;

/// Timing of the voiced runs of a recording.
#[derive(Debug, Clone, PartialEq)]
pub struct VoicedSegmentStats {
    pub segments_per_second: f64,
    pub mean_length_s: f64,
    pub length_sd_s: f64,
    pub segment_bounds: Vec<(f64, f64)>,
}

impl VoicedSegmentStats {
    pub fn count(&self) -> usize {
        self.segment_bounds.len()
    }

    pub fn total_voiced_s(&self) -> f64 {
        self.segment_bounds.iter().map(|(a, b)| b - a).sum()
    }
}

/// Maximal runs of `value` frames, as inclusive frame index pairs.
pub(crate) fn runs(flags: &[bool], value: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if flags[i] != value {
            i += 1;
            continue;
        }
        let start = i;
        while i < flags.len() && flags[i] == value {
            i += 1;
        }
        out.push((start, i - 1));
    }
    out
}

/// Time span of frames `a..=b`: from half a hop before the first center to
/// half a hop after the last, extended to the recording edges when the run
/// touches the first or last frame.
pub(crate) fn run_bounds(track: &F0Track, a: usize, b: usize, duration_s: f64) -> (f64, f64) {
    let half = track.hop_s() / 2.0;
    let start = if a == 0 { 0.0 } else { track.center_s(a) - half };
    let end = if b + 1 == track.len() {
        duration_s
    } else {
        track.center_s(b) + half
    };
    (start.max(0.0), end.min(duration_s))
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Voiced runs of at least `min_frames` frames become segments. Recordings
/// with no segment report zeros.
pub fn voiced_segment_stats(track: &F0Track, duration_s: f64, min_frames: usize) -> VoicedSegmentStats {
    let bounds: Vec<(f64, f64)> = runs(&track.voiced, true)
        .into_iter()
        .filter(|(a, b)| b - a + 1 >= min_frames.max(1))
        .map(|(a, b)| run_bounds(track, a, b, duration_s))
        .collect();
    let lengths: Vec<f64> = bounds.iter().map(|(a, b)| b - a).collect();
    let (mean, sd) = mean_sd(&lengths);
    VoicedSegmentStats {
        segments_per_second: if duration_s > 0.0 {
            bounds.len() as f64 / duration_s
        } else {
            0.0
        },
        mean_length_s: mean,
        length_sd_s: sd,
        segment_bounds: bounds,
    }
}

/// Lengths of the gaps not covered by voiced segments, including leading and
/// trailing gaps.
pub fn unvoiced_segment_lengths(stats: &VoicedSegmentStats, duration_s: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.0;
    for &(a, b) in &stats.segment_bounds {
        if a - t > 1e-9 {
            out.push(a - t);
        }
        t = b;
    }
    if duration_s - t > 1e-9 {
        out.push(duration_s - t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::dsp::{FrameGrid, Window};
    use crate::synth::{synth_vowel, SynthSpec};
    use crate::voicing::estimate_f0;

    fn track(voiced: Vec<bool>, duration_s: f64) -> F0Track {
        F0Track {
            f0_hz: voiced.iter().map(|&v| if v { 100.0 } else { 0.0 }).collect(),
            voiced,
            grid: FrameGrid::new(0.06, 0.01, Window::Gaussian),
            duration_s,
        }
    }

    #[test]
    fn fully_voiced() {
        let t = track(vec![true; 195], 2.0);
        let s = voiced_segment_stats(&t, 2.0, 3);
        assert_eq!(s.count(), 1);
        assert_eq!(s.segments_per_second, 0.5);
        assert_eq!(s.mean_length_s, 2.0);
        assert_eq!(s.length_sd_s, 0.0);
        assert!(unvoiced_segment_lengths(&s, 2.0).is_empty());
    }

    #[test]
    fn all_unvoiced() {
        let t = track(vec![false; 95], 1.0);
        let s = voiced_segment_stats(&t, 1.0, 3);
        assert_eq!((s.count(), s.segments_per_second, s.mean_length_s, s.length_sd_s), (0, 0.0, 0.0, 0.0));
        assert_eq!(unvoiced_segment_lengths(&s, 1.0), vec![1.0]);
    }

    #[test]
    fn short_runs_are_not_segments() {
        let mut v = vec![true; 50];
        v[20] = false;
        v[22] = false;
        let s = voiced_segment_stats(&track(v, 0.55), 0.55, 3);
        assert_eq!(s.count(), 2);
    }

    #[test]
    fn synthesized_breaks() {
        let spec = SynthSpec {
            duration_s: 3.0,
            breaks: vec![(1.0, 0.3), (2.0, 0.3)],
            hnr_db: Some(20.0),
            jitter_pct: 0.5,
            shimmer_pct: 3.0,
            ..SynthSpec::default()
        };
        let (buf, truth) = synth_vowel(&spec).unwrap();
        let cfg = Config::default();
        let t = estimate_f0(&buf, &cfg);
        let s = voiced_segment_stats(&t, buf.duration_s(), cfg.min_voiced_frames);
        assert_eq!(s.count(), truth.expected_segments);
        assert!((s.segments_per_second - 1.0).abs() <= 0.2);
        assert!((s.mean_length_s - 0.8).abs() <= 0.1, "{}", s.mean_length_s);
        assert!(s.total_voiced_s() <= buf.duration_s());
        let gaps = unvoiced_segment_lengths(&s, buf.duration_s());
        assert_eq!(gaps.len(), 2);
        for g in gaps {
            assert!((g - 0.3).abs() < 0.1, "{g}");
        }
    }

    #[test]
    fn one_more_break_one_more_segment() {
        let cfg = Config::default();
        let base = SynthSpec {
            duration_s: 3.0,
            breaks: vec![(1.0, 0.25)],
            hnr_db: Some(20.0),
            ..SynthSpec::default()
        };
        let more = SynthSpec {
            breaks: vec![(1.0, 0.25), (2.1, 0.25)],
            ..base.clone()
        };
        let stats = |spec: &SynthSpec| {
            let (buf, _) = synth_vowel(spec).unwrap();
            voiced_segment_stats(&estimate_f0(&buf, &cfg), buf.duration_s(), cfg.min_voiced_frames)
        };
        let (a, b) = (stats(&base), stats(&more));
        assert_eq!(b.count(), a.count() + 1);
        assert!(b.mean_length_s < a.mean_length_s);
    }
}
