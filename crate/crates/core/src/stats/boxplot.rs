use serde::{Deserialize, Serialize};

use crate::functionals::percentile_sorted;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

impl BoxplotSummary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    pub fn fences(&self) -> (f64, f64) {
        (self.q1 - 1.5 * self.iqr(), self.q3 + 1.5 * self.iqr())
    }
}

/// Quartiles by linear interpolation, whiskers at the most extreme data
/// inside the 1.5 IQR fences. Returns `None` for an empty input.
pub fn boxplot_summary(values: &[f64]) -> Option<BoxplotSummary> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = percentile_sorted(&sorted, 0.25);
    let median = percentile_sorted(&sorted, 0.5);
    let q3 = percentile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted.iter().copied().filter(|v| (lo..=hi).contains(v)).collect();
    let outliers = sorted.iter().copied().filter(|v| !(lo..=hi).contains(v)).collect();
    Some(BoxplotSummary {
        q1,
        median,
        q3,
        whisker_lo: inside[0],
        whisker_hi: inside[inside.len() - 1],
        outliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seven_values() {
        let b = boxplot_summary(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.5, 4.0, 5.5));
        assert_eq!(b.fences(), (-2.0, 10.0));
        assert!(b.outliers.is_empty());
        assert_eq!((b.whisker_lo, b.whisker_hi), (1.0, 7.0));
    }

    #[test]
    fn far_value_is_outlier() {
        let b = boxplot_summary(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 100.0]).unwrap();
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.whisker_hi, 7.0);
    }

    #[test]
    fn constant_values() {
        let b = boxplot_summary(&[3.0; 6]).unwrap();
        assert_eq!(b.iqr(), 0.0);
        assert!(b.outliers.is_empty());
        assert_eq!((b.whisker_lo, b.whisker_hi), (3.0, 3.0));
    }

    #[test]
    fn empty_input() {
        assert!(boxplot_summary(&[]).is_none());
    }

    proptest! {
        #[test]
        fn partition_and_membership(v in prop::collection::vec(-1e3f64..1e3, 1..60)) {
            let b = boxplot_summary(&v).unwrap();
            prop_assert!(b.q1 <= b.median && b.median <= b.q3);
            prop_assert!(v.contains(&b.whisker_lo) && v.contains(&b.whisker_hi));
            let (lo, hi) = b.fences();
            let inside = v.iter().filter(|x| (lo..=hi).contains(*x)).count();
            prop_assert_eq!(inside + b.outliers.len(), v.len());
        }
    }
}
