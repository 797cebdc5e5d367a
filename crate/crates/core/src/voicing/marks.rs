//! Glottal-cycle marks and the local perturbation measures built on them.
//!
//! Each voiced segment is inverse filtered with a single LPC fit, and the
//! residual is low-passed to the band where voicing outweighs additive noise.
//! A mark is the residual maximum within 0.75 to 1.25 predicted periods of
//! the previous mark, refined to a fraction of a sample by band-limited
//! interpolation. The predicted period is the median of the last few measured
//! intervals, or the tracked period where the two disagree by more than 30%.
//! Cycle amplitude is the waveform maximum over the following
//! period. Chains are split at cycles whose amplitude drops under a quarter
//! of the segment median (break fades).

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::audio::AudioBuffer;

use crate::dsp::{autocorrelation_lags, lowpass, parabolic_peak, Window};
use crate::spectral::levinson;
use crate::error::{Error, Result};

use super::segments::{run_bounds, runs};
use super::F0Track;

const MIN_RELATIVE_AMP: f64 = 0.25;
const SINC_HALF: i64 = 8;
const COARSE_STEP: f64 = 0.1;
const REFINE_STEP: f64 = 0.01;
const PREDICT_CYCLES: usize = 5;
/// Largest ratio between the recent-interval prediction and the tracked
/// period before the tracked one takes over.
const MAX_PREDICTION_DRIFT: f64 = 1.3;
/// Half-width, in pitch frames, of the track median used as the reference.
const REFERENCE_FRAMES: usize = 5;
/// Diagonal loading of the residual LPC fit; keeps it from whitening slow
/// amplitude envelopes into spurious cycles.
const WHITE_NOISE_CORRECTION: f64 = 1e-3;
/// Keeps the residual band where voicing dominates additive noise.
const RESIDUAL_LOWPASS_HZ: f64 = 1500.0;
/// Low-pass kernel half-length in cycles of the cutoff.
const LOWPASS_SPAN: f64 = 3.0;
const MIN_F0_HZ: f64 = 55.0;
const MAX_F0_HZ: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mark {
    pub time_s: f64,
    pub amp: f64,
}

/// Marks grouped into chains of uninterrupted consecutive cycles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PitchMarks {
    pub chains: Vec<Vec<Mark>>,
}

/// Cycle-level perturbation summary. `periods_s[k]` is the period ending at
/// the mark whose amplitude is `peak_amps[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationMeasures {
    pub jitter_local: f64,
    pub shimmer_local: f64,
    pub periods_s: Vec<f64>,
    pub peak_amps: Vec<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean absolute consecutive difference divided by the mean.
fn local_ratio(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::TooFewPeriods(xs.len()));
    }
    let diffs: Vec<f64> = xs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    Ok(mean(&diffs) / mean(xs))
}

/// Local jitter of one uninterrupted period sequence.
pub fn jitter_local(periods_s: &[f64]) -> Result<f64> {
    local_ratio(periods_s)
}

/// Local shimmer of one uninterrupted amplitude sequence.
pub fn shimmer_local(peak_amps: &[f64]) -> Result<f64> {
    local_ratio(peak_amps)
}

/// Pools several chains: consecutive differences are taken within chains
/// only, then averaged over all chains and divided by the overall mean.
fn pooled_ratio(chains: &[Vec<f64>]) -> Result<f64> {
    let mut diff_sum = 0.0;
    let mut diff_n = 0usize;
    let mut sum = 0.0;
    let mut n = 0usize;
    for c in chains {
        for w in c.windows(2) {
            diff_sum += (w[1] - w[0]).abs();
            diff_n += 1;
        }
        sum += c.iter().sum::<f64>();
        n += c.len();
    }
    if diff_n == 0 {
        return Err(Error::TooFewPeriods(n));
    }
    Ok((diff_sum / diff_n as f64) / (sum / n as f64))
}

impl PitchMarks {
    pub fn count(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn period_chains(&self) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.windows(2).map(|w| w[1].time_s - w[0].time_s).collect())
            .collect()
    }

    /// Amplitudes of every mark but the first of each chain, aligned with
    /// `period_chains`.
    pub fn amp_chains(&self) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.iter().skip(1).map(|m| m.amp).collect())
            .collect()
    }

    pub fn measures(&self) -> Result<PerturbationMeasures> {
        let periods = self.period_chains();
        let amps = self.amp_chains();
        Ok(PerturbationMeasures {
            jitter_local: pooled_ratio(&periods)?,
            shimmer_local: pooled_ratio(&amps)?,
            periods_s: periods.concat(),
            peak_amps: amps.concat(),
        })
    }
}

/// Period in samples from the median voiced f0 within `REFERENCE_FRAMES` of
/// the frame at `t_s`, restricted to the run `a..=b`.
fn period_at(track: &F0Track, rate: f64, t_s: f64, a: usize, b: usize) -> f64 {
    let i = track.frame_at(t_s).unwrap_or(a).clamp(a, b);
    let lo = i.saturating_sub(REFERENCE_FRAMES).max(a);
    let hi = (i + REFERENCE_FRAMES).min(b);
    let mut f: Vec<f64> = (lo..=hi).filter(|&j| track.voiced[j]).map(|j| track.f0_hz[j]).collect();
    if f.is_empty() {
        return rate / 100.0;
    }
    f.sort_by(f64::total_cmp);
    rate / f[f.len() / 2]
}

fn argmax(x: &[f64], lo: usize, hi: usize) -> usize {
    (lo..hi).fold(lo, |best, i| if x[i] > x[best] { i } else { best })
}

/// Prediction residual of `x[s0..s1]` under one LPC fit over the whole range.
/// Samples before `s0 + order` are left at zero.
fn segment_residual(x: &[f64], s0: usize, s1: usize, order: usize) -> Option<Vec<f64>> {
    let seg = Window::Hamming.apply(&x[s0..s1]);
    let mut acf = autocorrelation_lags(&seg, order);
    acf[0] *= 1.0 + WHITE_NOISE_CORRECTION;
    let (a, _) = levinson(&acf, order)?;
    let mut e = vec![0.0; s1 - s0];
    for n in order..e.len() {
        e[n] = a.iter().enumerate().map(|(k, ak)| ak * x[s0 + n - k]).sum();
    }
    Some(e)
}

/// `(cos, sin)` of `pi m / (SINC_HALF + 1)` for `m` in `-SINC_HALF..=SINC_HALF`.
fn taper_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let half = SINC_HALF as f64 + 1.0;
        (-SINC_HALF..=SINC_HALF)
            .map(|m| {
                let a = PI * m as f64 / half;
                (a.cos(), a.sin())
            })
            .collect()
    })
}

/// Band-limited value of `e` at fractional index `t`.
fn interpolate(e: &[f64], t: f64) -> f64 {
    let c = t.round() as i64;
    let half = SINC_HALF as f64 + 1.0;
    // sin(pi (t - i)) = (-1)^i sin(pi t); the Hann taper at d = f - m expands
    // as cos(a f) cos(a m) + sin(a f) sin(a m)
    let s = (PI * t).sin();
    let f = t - c as f64;
    let (cf, sf) = ((PI * f / half).cos(), (PI * f / half).sin());
    let table = taper_table();
    (-SINC_HALF..=SINC_HALF)
        .filter(|&m| c + m >= 0 && ((c + m) as usize) < e.len())
        .map(|m| {
            let i = c + m;
            let d = t - i as f64;
            let (cm, sm) = table[(m + SINC_HALF) as usize];
            let w = 0.5 + 0.5 * (cf * cm + sf * sm);
            let sinc = if d.abs() < 1e-12 {
                1.0
            } else {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * s / (PI * d)
            };
            e[i as usize] * sinc * w
        })
        .sum()
}

/// Peak position of `f` on the grid `start + i step`, `i` in `0..=steps`,
/// refined by a parabola through the best point and its neighbours.
fn grid_peak(f: impl Fn(f64) -> f64, start: f64, step: f64, steps: usize) -> f64 {
    let grid: Vec<f64> = (0..=steps).map(|i| f(start + i as f64 * step)).collect();
    let j = argmax(&grid, 1, grid.len() - 1);
    let (d, _) = parabolic_peak(grid[j - 1], grid[j], grid[j + 1]);
    start + (j as f64 + d) * step
}

/// Sub-sample maximum of the band-limited `e` within one sample of `k`:
/// a coarse grid over the whole interval, then a fine one around its peak.
fn refine(e: &[f64], k: usize) -> f64 {
    let f = |t: f64| interpolate(e, t);
    let coarse = grid_peak(f, k as f64 - 1.0, COARSE_STEP, (2.0 / COARSE_STEP).round() as usize);
    let span = 2.0 * COARSE_STEP;
    grid_peak(f, coarse - span, REFINE_STEP, (2.0 * span / REFINE_STEP).round() as usize)
}

/// Median of the last few measured intervals, once there are enough of them.
fn recent_period(recent: &[Option<f64>]) -> Option<f64> {
    let mut last: Vec<f64> = recent.iter().rev().take(PREDICT_CYCLES).flatten().copied().collect();
    if last.len() < 2 {
        return None;
    }
    last.sort_by(f64::total_cmp);
    Some(last[last.len() / 2])
}

fn split_on_weak_cycles(chain: Vec<Mark>) -> Vec<Vec<Mark>> {
    if chain.is_empty() {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = chain.iter().map(|m| m.amp).collect();
    sorted.sort_by(f64::total_cmp);
    let floor = MIN_RELATIVE_AMP * sorted[sorted.len() / 2];
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for m in chain {
        if m.amp >= floor {
            cur.push(m);
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.retain(|c| c.len() >= 2);
    out
}

/// Marks every glottal cycle inside the voiced segments of `track`.
pub fn pitch_marks(buf: &AudioBuffer, track: &F0Track) -> Result<PitchMarks> {
    let x = buf.samples();
    let rate = buf.sample_rate() as f64;
    let order = (rate / 1000.0).round() as usize + 4;
    let mut marks = PitchMarks::default();
    for (a, b) in runs(&track.voiced, true) {
        let (start_s, end_s) = run_bounds(track, a, b, track.duration_s);
        let s0 = (start_s * rate).ceil() as usize;
        let s1 = ((end_s * rate).floor() as usize).min(x.len());
        if s1 <= s0 + 4 * order {
            continue;
        }
        let Some(e) = segment_residual(x, s0, s1, order) else {
            continue;
        };
        let mut e = lowpass(&e, RESIDUAL_LOWPASS_HZ / rate, LOWPASS_SPAN);
        let pos = e.iter().copied().fold(0.0, f64::max);
        let neg = e.iter().copied().fold(0.0, f64::min);
        if -neg > pos {
            e.iter_mut().for_each(|v| *v = -*v);
        }
        let mut chain: Vec<Mark> = Vec::new();
        let mut recent: Vec<Option<f64>> = Vec::new();
        let t = period_at(track, rate, start_s, a, b);
        let first_hi = order + t.ceil() as usize;
        if first_hi + 2 >= e.len() {
            continue;
        }
        let mut k = argmax(&e, order + 1, first_hi);
        loop {
            let m = refine(&e, k);
            let here = s0 as f64 + m;
            recent.push(chain.last().map(|p: &Mark| here - p.time_s * rate));
            let tracked = period_at(track, rate, here / rate, a, b);
            let t = recent_period(&recent)
                .filter(|p| (p / tracked).ln().abs() <= MAX_PREDICTION_DRIFT.ln())
                .unwrap_or(tracked)
                .clamp(rate / MAX_F0_HZ, rate / MIN_F0_HZ);
            let c = s0 + k;
            let amp_hi = (c + t.round() as usize).min(x.len());
            let amp = x[c..amp_hi].iter().copied().fold(f64::MIN, f64::max);
            chain.push(Mark { time_s: (s0 as f64 + m) / rate, amp });
            let lo = ((m + 0.75 * t).floor() as usize).max(k + 1);
            let hi = (m + 1.25 * t).ceil() as usize;
            if hi + SINC_HALF as usize + 2 >= e.len() {
                break;
            }
            k = argmax(&e, lo, hi);
        }
        marks.chains.extend(split_on_weak_cycles(chain));
    }
    if marks.chains.is_empty() {
        return Err(Error::NoVoicedContent);
    }
    Ok(marks)
}

/// Local jitter and shimmer per frame of `track`, from the marks falling in
/// each frame's span. `None` where the frame has too few cycles.
pub fn frame_perturbation(marks: &PitchMarks, track: &F0Track) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let half = track.grid.frame_len_s / 2.0;
    (0..track.len())
        .map(|i| {
            if !track.voiced[i] {
                return (None, None);
            }
            let c = track.center_s(i);
            let (lo, hi) = (c - half, c + half);
            let mut periods = Vec::new();
            let mut amps = Vec::new();
            for chain in &marks.chains {
                let inside: Vec<&Mark> = chain
                    .iter()
                    .filter(|m| m.time_s >= lo && m.time_s < hi)
                    .collect();
                if inside.len() >= 2 {
                    periods.push(inside.windows(2).map(|w| w[1].time_s - w[0].time_s).collect());
                    amps.push(inside.iter().map(|m| m.amp).collect());
                }
            }
            let enough = |c: &Vec<Vec<f64>>| c.iter().any(|v| v.len() >= 2);
            let j = if enough(&periods) { pooled_ratio(&periods).ok() } else { None };
            let s = if enough(&amps) { pooled_ratio(&amps).ok() } else { None };
            (j, s)
        })
        .unzip()
}
