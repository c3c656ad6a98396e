//! Breakpoint heuristics: for one feature column and the target, propose a
//! single promising threshold `c` that splits rows into `x <= c` and `x > c`.
//!
//! Every heuristic returns at most one [`SplitCandidate`], scored by its
//! own figure of merit but always carrying the weighted variance reduction
//! at the proposed threshold, which the tree grower uses to compare
//! features. A candidate is only returned when both sides hold at least `m`
//! rows and the reduction is strictly positive.

mod gmm;
mod segmented;
mod sweep;
mod ttest;
mod variance;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use gmm::{best_split_gmm, fit_gmm, GaussianMixtureFit, GmmConfig};
pub use segmented::{best_split_segmented, fit_segmented, SegmentScoring, SegmentedConfig, SegmentedFit};
pub use sweep::{PrefixMoments, SortedColumn};
pub use ttest::best_split_ttest;
pub use variance::best_split_variance;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    /// Sort, then sweep the incremental variance reduction.
    Variance,
    /// Sort, then sweep the Welch two-sample t statistic.
    TTest,
    /// Iterative segmented regression on `(x, y)`.
    Segmented,
    /// Two-component bivariate Gaussian mixture with a quadratic boundary.
    Gmm,
}

impl Heuristic {
    pub const ALL: [Heuristic; 4] = [Heuristic::Variance, Heuristic::TTest, Heuristic::Segmented, Heuristic::Gmm];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Variance => "variance",
            Heuristic::TTest => "ttest",
            Heuristic::Segmented => "segmented",
            Heuristic::Gmm => "gmm",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "variance" => Ok(Heuristic::Variance),
            "ttest" | "t-test" => Ok(Heuristic::TTest),
            "segmented" => Ok(Heuristic::Segmented),
            "gmm" => Ok(Heuristic::Gmm),
            _ => Err(Error::Config(format!(
                "unknown heuristic {s:?} (expected variance, ttest, segmented or gmm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature_index: usize,
    pub threshold: f64,
    /// Heuristic-specific score: reduction, |t|, or the segmented/GMM score.
    pub score: f64,
    /// Weighted variance reduction of the split at `threshold`.
    pub reduction: f64,
    pub left_count: usize,
    pub right_count: usize,
}

impl SplitCandidate {
    pub fn with_feature(mut self, feature_index: usize) -> Self {
        self.feature_index = feature_index;
        self
    }
}

/// Settings for the fit-based heuristics; the sort-based ones need none.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BreakpointConfig {
    #[serde(default)]
    pub segmented: SegmentedConfig,
    #[serde(default)]
    pub gmm: GmmConfig,
}

/// Runs `heuristic` on one feature column. `seed` only matters for the GMM.
pub fn find_split(
    heuristic: Heuristic,
    x: &[f64],
    y: &[f64],
    m: usize,
    cfg: &BreakpointConfig,
    seed: u64,
) -> Result<Option<SplitCandidate>> {
    match heuristic {
        Heuristic::Variance => best_split_variance(x, y, m),
        Heuristic::TTest => best_split_ttest(x, y, m),
        Heuristic::Segmented => best_split_segmented(x, y, m, &cfg.segmented),
        Heuristic::Gmm => best_split_gmm(x, y, m, &GmmConfig { seed, ..cfg.gmm }),
    }
}

pub(crate) fn check_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Data(format!("feature has {} rows but target has {}", x.len(), y.len())));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite feature value at row {i}")));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite target value at row {i}")));
    }
    Ok(())
}

pub(crate) fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Group statistics for the partition `x <= c` / `x > c`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Partition {
    pub left: usize,
    pub right: usize,
    /// Weighted variance reduction, population convention.
    pub reduction: f64,
    pub var_left: f64,
    pub var_right: f64,
}

pub(crate) fn partition_at(x: &[f64], y: &[f64], c: f64) -> Partition {
    let n = y.len();
    let shift = y.iter().sum::<f64>() / n as f64;
    let (mut nl, mut sl, mut ql, mut sr, mut qr) = (0usize, 0.0, 0.0, 0.0, 0.0);
    for (&xv, &yv) in x.iter().zip(y) {
        let d = yv - shift;
        if xv <= c {
            nl += 1;
            sl += d;
            ql += d * d;
        } else {
            sr += d;
            qr += d * d;
        }
    }
    let nr = n - nl;
    let group = |k: usize, s: f64, q: f64| {
        if k == 0 {
            (0.0, 0.0)
        } else {
            let mean = s / k as f64;
            (mean, ((q - s * mean) / k as f64).max(0.0))
        }
    };
    let (ml, vl) = group(nl, sl, ql);
    let (mr, vr) = group(nr, sr, qr);
    let reduction = if nl == 0 || nr == 0 {
        0.0
    } else {
        let (a, b, t) = (nl as f64, nr as f64, n as f64);
        a * b / (t * t) * (ml - mr) * (ml - mr)
    };
    Partition {
        left: nl,
        right: nr,
        reduction,
        var_left: vl,
        var_right: vr,
    }
}

/// Moves a proposed threshold into the range where both sides keep at
/// least `m` rows and the threshold lies strictly inside `(min x, max x)`.
/// Returns `None` when no such threshold exists.
pub(crate) fn clamp_threshold(x: &[f64], m: usize, c: f64) -> Option<f64> {
    let n = x.len();
    let m = m.max(1);
    if n < 2 * m {
        return None;
    }
    let mut buf = x.to_vec();
    let lo = *buf.select_nth_unstable_by(m - 1, f64::total_cmp).1;
    let hi = *buf.select_nth_unstable_by(n - m, f64::total_cmp).1;
    if lo >= hi {
        return None;
    }
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    if c < lo || c <= min || !c.is_finite() {
        let succ = x.iter().copied().filter(|&v| v > lo).fold(f64::INFINITY, f64::min);
        return Some(midpoint(lo, succ));
    }
    if c >= hi {
        let pred = x.iter().copied().filter(|&v| v < hi).fold(f64::NEG_INFINITY, f64::max);
        return Some(midpoint(pred, hi));
    }
    Some(c)
}

/// Midpoint of two adjacent distinct values, falling back to the lower one
/// when rounding would land on the upper.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) * 0.5;
    if mid < hi {
        mid
    } else {
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_names_round_trip() {
        for h in Heuristic::ALL {
            assert_eq!(h.name().parse::<Heuristic>().unwrap(), h);
        }
        assert!("cart".parse::<Heuristic>().is_err());
    }

    #[test]
    fn clamp_respects_min_leaf() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(clamp_threshold(&x, 3, 0.5), Some(2.5));
        assert_eq!(clamp_threshold(&x, 3, 9.0), Some(6.5));
        assert_eq!(clamp_threshold(&x, 3, 4.2), Some(4.2));
        assert_eq!(clamp_threshold(&x, 6, 4.2), None);
        assert_eq!(clamp_threshold(&[0.0, 0.0, 1.0, 1.0], 1, 0.0), Some(0.5));
        assert_eq!(clamp_threshold(&[2.0; 6], 1, 2.0), None);
    }

    #[test]
    fn partition_reduction_matches_definition() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 0.0, 10.0, 10.0];
        let p = partition_at(&x, &y, 2.5);
        assert_eq!((p.left, p.right), (2, 2));
        assert!((p.reduction - 25.0).abs() < 1e-12);
        assert_eq!(p.var_left, 0.0);
    }

    #[test]
    fn nan_inputs_are_data_errors() {
        assert!(matches!(check_inputs(&[1.0, f64::NAN], &[0.0, 1.0]), Err(Error::Data(_))));
        assert!(matches!(check_inputs(&[1.0, 2.0], &[0.0, f64::INFINITY]), Err(Error::Data(_))));
    }
}
