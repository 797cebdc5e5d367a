//! Two-group nonparametric comparison and feature screening.

mod boxplot;
mod rank;
mod tables;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub use boxplot::{boxplot_summary, BoxplotSummary};
pub use rank::{rank_features, GroupingSpec, RankedFeature};
pub use tables::{
    only_known_anomaly, published_rows, table_consistency_check, PublishedRow, RowVerdict, DEFAULT_TOLERANCE, KNOWN_ANOMALY,
};

/// Largest total sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    NormalApprox,
    Exact,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::NormalApprox => "approx",
            Method::Exact => "exact",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "approx" | "normal_approx" => Ok(Method::NormalApprox),
            "exact" => Ok(Method::Exact),
            _ => Err(Error::Config(format!("unknown test method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TestOptions {
    pub method: Method,
    pub continuity_correction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UTestResult {
    /// U of the first sample: pairs (x in a, y in b) with x > y, ties counting 1/2.
    pub u: f64,
    pub z: f64,
    pub p_two_tailed: f64,
    pub method: Method,
    pub n1: usize,
    pub n2: usize,
    /// Set when an exact test was requested but could not be run.
    pub fallback: Option<String>,
}

impl UTestResult {
    pub fn r(&self) -> f64 {
        effect_size_r(self.z, self.n1 + self.n2)
    }
}

/// Midranks (1-based) of `values`, plus the tie term `sum(t^3 - t)`.
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    (ranks, ties)
}

pub fn effect_size_r(z: f64, n_total: usize) -> f64 {
    z.abs() / (n_total as f64).sqrt()
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Two-tailed p of a standard normal deviate.
pub fn normal_two_tailed(z: f64) -> f64 {
    (2.0 * std_normal().cdf(-z.abs())).min(1.0)
}

/// `Phi^-1(1 - p/2)`.
pub fn z_from_two_tailed(p: f64) -> f64 {
    std_normal().inverse_cdf(1.0 - p / 2.0)
}

/// Counts, for every U in `0..=n1*n2`, the rank assignments producing it.
fn u_distribution(n1: usize, n2: usize) -> Vec<f64> {
    // table[m][n] is the distribution for sizes (m, n); built bottom-up with
    // f(m, n, u) = f(m - 1, n, u - n) + f(m, n - 1, u).
    let mut table: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n2 + 1]; n1 + 1];
    for m in 0..=n1 {
        for n in 0..=n2 {
            let mut dist = vec![0.0; m * n + 1];
            if m == 0 || n == 0 {
                dist[0] = 1.0;
            } else {
                for (u, slot) in dist.iter_mut().enumerate() {
                    let mut c = 0.0;
                    if u >= n {
                        c += table[m - 1][n].get(u - n).copied().unwrap_or(0.0);
                    }
                    c += table[m][n - 1].get(u).copied().unwrap_or(0.0);
                    *slot = c;
                }
            }
            table[m][n] = dist;
        }
    }
    std::mem::take(&mut table[n1][n2])
}

fn exact_p(u: f64, n1: usize, n2: usize) -> f64 {
    let dist = u_distribution(n1, n2);
    let total: f64 = dist.iter().sum();
    let k = u.round() as usize;
    let lower: f64 = dist[..=k].iter().sum();
    let upper: f64 = dist[k..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

pub fn mann_whitney(a: &[f64], b: &[f64], method: Method) -> Result<UTestResult> {
    mann_whitney_with(a, b, TestOptions { method, ..TestOptions::default() })
}

pub fn mann_whitney_with(a: &[f64], b: &[f64], opts: TestOptions) -> Result<UTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyGroup(format!("sizes {} and {}", a.len(), b.len())));
    }
    let (n1, n2) = (a.len(), b.len());
    let n = (n1 + n2) as f64;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum: f64 = ranks[..n1].iter().sum();
    let u = rank_sum - (n1 * (n1 + 1)) as f64 / 2.0;

    let mean = (n1 * n2) as f64 / 2.0;
    let var = if n > 1.0 {
        (n1 * n2) as f64 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)))
    } else {
        0.0
    };
    let mut dev = u - mean;
    if opts.continuity_correction {
        dev = dev.signum() * (dev.abs() - 0.5).max(0.0);
    }
    let z = if var > 0.0 { dev / var.sqrt() } else { 0.0 };

    let mut method = Method::NormalApprox;
    let mut fallback = None;
    let p = match opts.method {
        Method::Exact if ties > 0.0 => {
            fallback = Some("ties present; used normal approximation".to_string());
            normal_two_tailed(z)
        }
        Method::Exact if n1 + n2 > EXACT_MAX_N => {
            fallback = Some(format!("N = {} exceeds {EXACT_MAX_N}; used normal approximation", n1 + n2));
            normal_two_tailed(z)
        }
        Method::Exact => {
            method = Method::Exact;
            exact_p(u, n1, n2)
        }
        Method::NormalApprox => normal_two_tailed(z),
    };
    Ok(UTestResult {
        u,
        z,
        p_two_tailed: p,
        method,
        n1,
        n2,
        fallback,
    })
}
