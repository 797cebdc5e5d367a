use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::audio::{Group, Vowel};
use crate::error::{Error, Result};
use crate::functionals::FeatureMatrix;
use crate::par::{self, Execution};

use super::{mann_whitney_with, Method, TestOptions};

/// A set of vowels whose recordings are pooled into one comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingSpec {
    pub label: String,
    pub vowels: Vec<Vowel>,
}

impl GroupingSpec {
    pub fn new(label: &str, vowels: &[Vowel]) -> Result<GroupingSpec> {
        if vowels.is_empty() {
            return Err(Error::Config(format!("grouping {label:?} has no vowels")));
        }
        Ok(GroupingSpec {
            label: label.to_string(),
            vowels: vowels.to_vec(),
        })
    }

    pub fn single(v: Vowel) -> GroupingSpec {
        GroupingSpec {
            label: v.as_str().to_string(),
            vowels: vec![v],
        }
    }

    pub fn all_vowels() -> GroupingSpec {
        GroupingSpec {
            label: "all".into(),
            vowels: Vowel::ALL.to_vec(),
        }
    }

    /// Each vowel alone, front pair, back pair, all five.
    pub fn canonical() -> Vec<GroupingSpec> {
        let mut out: Vec<GroupingSpec> = Vowel::ALL.iter().map(|&v| GroupingSpec::single(v)).collect();
        out.push(GroupingSpec {
            label: "ie".into(),
            vowels: vec![Vowel::I, Vowel::E],
        });
        out.push(GroupingSpec {
            label: "uo".into(),
            vowels: vec![Vowel::U, Vowel::O],
        });
        out.push(GroupingSpec::all_vowels());
        out
    }

    /// Looks up a canonical grouping by label.
    pub fn by_label(label: &str) -> Option<GroupingSpec> {
        GroupingSpec::canonical().into_iter().find(|g| g.label == label)
    }

    pub fn contains(&self, v: Vowel) -> bool {
        self.vowels.contains(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedFeature {
    pub rank: usize,
    pub name: String,
    pub r: f64,
    pub p: f64,
    pub z: f64,
    pub u: f64,
    pub n1: usize,
    pub n2: usize,
    pub method: Method,
}

fn ranking_order(a: &RankedFeature, b: &RankedFeature) -> Ordering {
    b.r.total_cmp(&a.r)
        .then(a.p.total_cmp(&b.p))
        .then_with(|| a.name.cmp(&b.name))
}

/// Tests every feature (negative group first) on the recordings whose vowel
/// belongs to `grouping`, keeping those with `r > threshold`.
pub fn rank_features(
    matrix: &FeatureMatrix,
    grouping: &GroupingSpec,
    threshold: f64,
    opts: TestOptions,
    exec: Execution,
) -> Result<Vec<RankedFeature>> {
    let rows: Vec<_> = matrix.rows.iter().filter(|r| grouping.contains(r.vowel)).collect();
    let neg: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].group == Group::Neg).collect();
    let pos: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].group == Group::Pos).collect();
    if neg.is_empty() || pos.is_empty() {
        return Err(Error::EmptyGroup(format!(
            "grouping {:?}: {} negative, {} positive recordings",
            grouping.label,
            neg.len(),
            pos.len()
        )));
    }
    let tested = par::map_range(matrix.names.len(), exec, |k| {
        let a: Vec<f64> = neg.iter().map(|&i| rows[i].values[k]).collect();
        let b: Vec<f64> = pos.iter().map(|&i| rows[i].values[k]).collect();
        mann_whitney_with(&a, &b, opts).map(|t| RankedFeature {
            rank: 0,
            name: matrix.names[k].clone(),
            r: t.r(),
            p: t.p_two_tailed,
            z: t.z,
            u: t.u,
            n1: t.n1,
            n2: t.n2,
            method: t.method,
        })
    });
    let mut ranked = tested.into_iter().collect::<Result<Vec<_>>>()?;
    ranked.sort_by(ranking_order);
    for (i, f) in ranked.iter_mut().enumerate() {
        f.rank = i + 1;
    }
    ranked.retain(|f| f.r > threshold);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FeatureVector;

    fn matrix(columns: &[(&str, Vec<f64>)], vowel: Vowel) -> FeatureMatrix {
        let n = columns[0].1.len();
        FeatureMatrix {
            names: columns.iter().map(|c| c.0.to_string()).collect(),
            rows: (0..n)
                .map(|i| FeatureVector {
                    participant_id: format!("p{i:02}"),
                    group: if i < n / 2 { Group::Neg } else { Group::Pos },
                    vowel,
                    values: columns.iter().map(|c| c.1[i]).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn perfect_separator_ranks_first() {
        let sep: Vec<f64> = (0..22).map(f64::from).collect();
        let flat = vec![1.0; 22];
        let mixed: Vec<f64> = (0..22).map(|i| ((i * 7) % 22) as f64).collect();
        let m = matrix(&[("flat", flat), ("mixed", mixed), ("sep", sep)], Vowel::A);
        let ranked = rank_features(&m, &GroupingSpec::single(Vowel::A), 0.0, TestOptions::default(), Execution::Sequential).unwrap();
        assert_eq!(ranked[0].name, "sep");
        assert_eq!(ranked[0].rank, 1);
        assert!((ranked[0].r - 0.847).abs() < 1e-3);
        assert!(ranked.iter().all(|f| f.name != "flat"));
        assert!(ranked.iter().all(|f| f.n1 + f.n2 == 22));
    }

    #[test]
    fn ties_break_by_p_then_name() {
        let col: Vec<f64> = (0..10).map(f64::from).collect();
        let m = matrix(&[("zeta", col.clone()), ("alpha", col)], Vowel::E);
        let ranked = rank_features(&m, &GroupingSpec::single(Vowel::E), 0.0, TestOptions::default(), Execution::Parallel).unwrap();
        assert_eq!(ranked[0].name, "alpha");
        assert_eq!(ranked[1].name, "zeta");
    }

    #[test]
    fn missing_group_is_an_error() {
        let m = matrix(&[("x", vec![1.0, 2.0])], Vowel::A);
        let err = rank_features(&m, &GroupingSpec::single(Vowel::O), 0.3, TestOptions::default(), Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::EmptyGroup(msg) if msg.contains("\"o\"")));
    }

    #[test]
    fn canonical_groupings() {
        let c = GroupingSpec::canonical();
        assert_eq!(c.len(), 8);
        assert_eq!(c[7].vowels.len(), 5);
        assert!(GroupingSpec::by_label("uo").unwrap().contains(Vowel::O));
        assert!(GroupingSpec::new("x", &[]).is_err());
    }

    #[test]
    fn monotone_transform_invariance() {
        let col: Vec<f64> = (0..16).map(|i| ((i * 5) % 16) as f64 + 0.5).collect();
        let warped: Vec<f64> = col.iter().map(|x| x.powi(3) + x.exp()).collect();
        let m = matrix(&[("raw", col), ("warped", warped)], Vowel::I);
        let ranked = rank_features(&m, &GroupingSpec::single(Vowel::I), -1.0, TestOptions::default(), Execution::Sequential).unwrap();
        assert_eq!(ranked[0].u, ranked[1].u);
        assert_eq!(ranked[0].p, ranked[1].p);
    }
}
