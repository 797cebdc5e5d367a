//! Ranked tables, boxplot data, and the table-consistency report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::{Group, Vowel};
use crate::config::Config;
use crate::error::Result;
use crate::functionals::FeatureMatrix;
use crate::par::Execution;
use crate::stats::{boxplot_summary, rank_features, BoxplotSummary, GroupingSpec, RankedFeature, RowVerdict, TestOptions};

/// Effect size as printed in the human table.
pub fn format_r(r: f64) -> String {
    format!("{r:.2}")
}

/// p with three decimals, or two significant digits below 0.01 so that small
/// values keep enough precision to recover r.
pub fn format_p(p: f64) -> String {
    if p >= 0.01 {
        format!("{p:.3}")
    } else if p >= 0.001 {
        format!("{p:.4}")
    } else {
        format!("{p:.1e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotEntry {
    pub feature: String,
    pub vowel: Vowel,
    pub group: Group,
    #[serde(flatten)]
    pub summary: BoxplotSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupingResult {
    pub grouping: GroupingSpec,
    /// Every feature, ranked; the table keeps those above the threshold.
    pub ranked: Vec<RankedFeature>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOutput {
    pub threshold: f64,
    pub results: Vec<GroupingResult>,
    pub boxplots: Vec<BoxplotEntry>,
}

impl GroupingResult {
    pub fn above(&self, threshold: f64) -> impl Iterator<Item = &RankedFeature> {
        self.ranked.iter().filter(move |f| f.r > threshold)
    }
}

/// Both groups' boxplots of one feature on one vowel.
pub fn boxplot_entries(matrix: &FeatureMatrix, column: usize, vowel: Vowel) -> Vec<BoxplotEntry> {
    [Group::Neg, Group::Pos]
        .into_iter()
        .filter_map(|g| {
            boxplot_summary(&matrix.values(column, g, vowel)).map(|summary| BoxplotEntry {
                feature: matrix.names[column].clone(),
                vowel,
                group: g,
                summary,
            })
        })
        .collect()
}

/// Ranks every grouping and collects boxplots of features that separate a
/// single vowel with `r > cfg.boxplot_threshold`.
pub fn compare(matrix: &FeatureMatrix, groupings: &[GroupingSpec], cfg: &Config, exec: Execution) -> Result<CompareOutput> {
    let opts = TestOptions {
        method: cfg.stats_method,
        continuity_correction: cfg.continuity_correction,
    };
    let mut results = Vec::with_capacity(groupings.len());
    for g in groupings {
        results.push(GroupingResult {
            grouping: g.clone(),
            ranked: rank_features(matrix, g, f64::NEG_INFINITY, opts, exec)?,
        });
    }
    let mut boxplots = Vec::new();
    for v in Vowel::ALL {
        let single = match results.iter().find(|r| r.grouping.vowels == [v]) {
            Some(r) => r.ranked.clone(),
            None => rank_features(matrix, &GroupingSpec::single(v), f64::NEG_INFINITY, opts, exec)?,
        };
        for f in single.iter().filter(|f| f.r > cfg.boxplot_threshold) {
            if let Some(col) = matrix.names.iter().position(|n| *n == f.name) {
                boxplots.extend(boxplot_entries(matrix, col, v));
            }
        }
    }
    Ok(CompareOutput {
        threshold: cfg.threshold,
        results,
        boxplots,
    })
}

fn table_csv(rows: &[&RankedFeature], full: bool) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "feature", "r", "p", "n1", "n2", "method"])?;
    for f in rows {
        let (r, p) = if full {
            (f.r.to_string(), f.p.to_string())
        } else {
            (format_r(f.r), format_p(f.p))
        };
        w.write_record([f.rank.to_string(), f.name.clone(), r, p, f.n1.to_string(), f.n2.to_string(), f.method.to_string()])?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// Writes `ranked_<label>.csv` (rounded), `ranked_<label>_full.csv`, and
/// `boxplots.json` into `dir`; returns the paths written.
pub fn write_compare(dir: &Path, out: &CompareOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for res in &out.results {
        let rows: Vec<&RankedFeature> = res.above(out.threshold).collect();
        for (suffix, full) in [("", false), ("_full", true)] {
            let path = dir.join(format!("ranked_{}{suffix}.csv", res.grouping.label));
            fs::write(&path, table_csv(&rows, full)?)?;
            written.push(path);
        }
    }
    let path = dir.join("boxplots.json");
    fs::write(&path, serde_json::to_string_pretty(&out.boxplots)? + "\n")?;
    written.push(path);
    Ok(written)
}

/// Plain-text verdict listing, one line per row.
pub fn checktables_text(verdicts: &[RowVerdict], tolerance: f64) -> String {
    let mut s = String::new();
    for v in verdicts {
        let r = &v.row;
        let _ = writeln!(
            s,
            "{:<7} table {} {:>5} #{:<2} {:<52} r={:.2} p={:<8} N={:<3} implied r={:.3}",
            if v.ok { "OK" } else { "ANOMALY" },
            r.table,
            r.grouping,
            r.rank,
            crate::functionals::normalize_name(&r.feature),
            r.r,
            r.p,
            r.n,
            v.implied_r
        );
    }
    let bad = verdicts.iter().filter(|v| !v.ok).count();
    let _ = writeln!(
        s,
        "{} rows, {} consistent, {} flagged (tolerance {tolerance})",
        verdicts.len(),
        verdicts.len() - bad,
        bad
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FeatureVector;
    use crate::stats::{table_consistency_check, PublishedRow};

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.0301), "0.030");
        assert_eq!(format_p(0.0023), "0.0023");
        assert_eq!(format_p(4.1e-5), "4.1e-5");
        assert_eq!(format_r(0.4649), "0.46");
    }

    #[test]
    fn printed_rows_stay_consistent() {
        // sweep z for every grouping size and check the rounded pair
        for n in [22usize, 44, 110] {
            for i in 0..400 {
                let z = 1.0 + i as f64 * 0.01;
                let p = crate::stats::normal_two_tailed(z);
                let r = z / (n as f64).sqrt();
                let row = PublishedRow {
                    table: 0,
                    grouping: "x".into(),
                    rank: 1,
                    feature: "f".into(),
                    r: format_r(r).parse().unwrap(),
                    p: format_p(p).parse().unwrap(),
                    n,
                };
                assert!(table_consistency_check(&[row], 0.02)[0].ok, "z={z} n={n}");
            }
        }
    }

    fn toy_matrix() -> FeatureMatrix {
        let mut rows = Vec::new();
        for v in Vowel::ALL {
            for i in 0..8 {
                rows.push(FeatureVector {
                    participant_id: format!("p{i}"),
                    group: if i < 4 { Group::Neg } else { Group::Pos },
                    vowel: v,
                    values: vec![i as f64, [0.0, 3.0, 4.0, 7.0, 1.0, 2.0, 5.0, 6.0][i]],
                });
            }
        }
        FeatureMatrix {
            names: vec!["sep".into(), "mixed".into()],
            rows,
        }
    }

    #[test]
    fn compare_writes_tables_and_boxplots() {
        let m = toy_matrix();
        let out = compare(&m, &GroupingSpec::canonical(), &Config::default(), Execution::Sequential).unwrap();
        assert_eq!(out.results.len(), 8);
        assert!(out.boxplots.iter().all(|b| b.feature == "sep"));
        assert_eq!(out.boxplots.len(), 10);
        let dir = tempfile::tempdir().unwrap();
        let paths = write_compare(dir.path(), &out).unwrap();
        assert_eq!(paths.len(), 17);
        let all = fs::read_to_string(dir.path().join("ranked_all.csv")).unwrap();
        assert!(all.starts_with("rank,feature,r,p,n1,n2,method\n1,sep,"));
    }

    #[test]
    fn threshold_one_gives_empty_tables() {
        let m = toy_matrix();
        let cfg = Config { threshold: 1.0, ..Config::default() };
        let out = compare(&m, &GroupingSpec::canonical(), &cfg, Execution::Sequential).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_compare(dir.path(), &out).unwrap();
        let t = fs::read_to_string(dir.path().join("ranked_a.csv")).unwrap();
        assert_eq!(t, "rank,feature,r,p,n1,n2,method\n");
    }
}
