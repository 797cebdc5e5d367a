//! Internal consistency of published (r, p, N) triples.
//!
//! The effect size implied by a two-tailed p under the normal approximation
//! is `Phi^-1(1 - p/2) / sqrt(N)`; a printed r further than the tolerance
//! from it cannot come from the same test.

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::z_from_two_tailed;

pub const DEFAULT_TOLERANCE: f64 = 0.02;

const FIXTURE: &str = include_str!("../../data/published_tables.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub table: u8,
    pub grouping: String,
    pub rank: usize,
    /// Feature name exactly as typeset, e.g. with `\textsubscript{norm}`.
    pub feature: String,
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowVerdict {
    pub row: PublishedRow,
    pub implied_r: f64,
    pub ok: bool,
}

impl RowVerdict {
    pub fn deviation(&self) -> f64 {
        (self.row.r - self.implied_r).abs()
    }
}

/// The ranked rows of both published tables, as shipped with the crate.
pub fn published_rows() -> Vec<PublishedRow> {
    parse_rows(FIXTURE.as_bytes()).expect("bundled table fixture parses")
}

pub fn parse_rows(reader: impl std::io::Read) -> Result<Vec<PublishedRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Into::into)).collect()
}

/// The one published row whose r and p disagree: table, grouping, feature.
pub const KNOWN_ANOMALY: (u8, &str, &str) = (2, "uo", "mean MFCC1 VR");

impl PublishedRow {
    pub fn is_known_anomaly(&self) -> bool {
        (self.table, self.grouping.as_str(), self.feature.as_str()) == KNOWN_ANOMALY
    }
}

/// True when no row other than the known anomaly is flagged.
pub fn only_known_anomaly(verdicts: &[RowVerdict]) -> bool {
    verdicts.iter().all(|v| v.ok || v.row.is_known_anomaly())
}

pub fn table_consistency_check(rows: &[PublishedRow], tolerance: f64) -> Vec<RowVerdict> {
    rows.iter()
        .map(|row| {
            let implied_r = z_from_two_tailed(row.p) / (row.n as f64).sqrt();
            RowVerdict {
                ok: (row.r - implied_r).abs() <= tolerance,
                implied_r,
                row: row.clone(),
            }
        })
        .collect()
}
