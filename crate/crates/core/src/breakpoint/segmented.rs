use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_inputs, clamp_threshold, is_constant, partition_at, SplitCandidate};
use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::util::median;

/// How a segmented-regression breakpoint is scored once found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentScoring {
    /// Weighted variance reduction at the breakpoint.
    #[default]
    VarianceReduction,
    /// Absolute difference of the two groups' population variances.
    VarianceDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentedConfig {
    pub max_iters: usize,
    /// Convergence tolerance as a fraction of the range of x.
    pub tol_fraction: f64,
    #[serde(default)]
    pub scoring: SegmentScoring,
}

impl Default for SegmentedConfig {
    fn default() -> Self {
        SegmentedConfig {
            max_iters: 30,
            tol_fraction: 1e-4,
            scoring: SegmentScoring::VarianceReduction,
        }
    }
}

/// Result of the iterative breakpoint estimation, coefficients in the
/// original units of x: `y ≈ b0 + alpha x + beta (x - c)+ - gamma 1[x > c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedFit {
    pub intercept: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Breakpoint at the start of each iteration followed by the final one.
    pub trajectory: Vec<f64>,
    pub converged: bool,
    /// Set when the normal equations needed a ridge jitter.
    pub jittered: bool,
}

impl SegmentedFit {
    pub fn breakpoint(&self) -> f64 {
        *self.trajectory.last().expect("trajectory holds the initial breakpoint")
    }

    pub fn iterations(&self) -> usize {
        self.trajectory.len() - 1
    }
}

/// Iterative breakpoint estimation for a two-segment linear fit of y on x.
///
/// Each step builds `U = max(x - c, 0)` and `V = -1[x > c]`, fits
/// `y ~ 1 + x + U + V` by least squares and moves the breakpoint by
/// `gamma / beta`. Stops once a step is at most `tol`, after `max_iters`
/// steps, or when `|beta|` drops below 1e-12. The breakpoint is kept inside
/// `[min x, max x]`.
pub fn fit_segmented(x: &[f64], y: &[f64], c0: f64, tol: f64, max_iters: usize) -> Result<SegmentedFit> {
    check_inputs(x, y)?;
    let n = x.len();
    if n < 3 {
        return Err(Error::Data(format!("segmented regression needs at least 3 rows, got {n}")));
    }
    let (min, max) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if min == max {
        return Err(Error::Data("segmented regression needs at least two distinct x values".into()));
    }

    // Work on standardised x for conditioning; y is only centred.
    let x_mean = x.iter().sum::<f64>() / n as f64;
    let x_scale = (x.iter().map(|v| (v - x_mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let to_z = |v: f64| (v - x_mean) / x_scale;
    let (zmin, zmax) = (to_z(min), to_z(max));
    let ztol = tol / x_scale;

    let mut c = to_z(c0.clamp(min, max));
    let mut fit = SegmentedFit {
        intercept: 0.0,
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
        trajectory: vec![c0.clamp(min, max)],
        converged: false,
        jittered: false,
    };
    let mut coef = [0.0; 4];
    for _ in 0..max_iters {
        let mut gram = DMatrix::<f64>::zeros(4, 4);
        let mut rhs = DVector::<f64>::zeros(4);
        for (&xv, &yv) in x.iter().zip(y) {
            let z = to_z(xv);
            let (u, v) = if z > c { (z - c, -1.0) } else { (0.0, 0.0) };
            let row = [1.0, z, u, v];
            let t = yv - y_mean;
            for i in 0..4 {
                rhs[i] += row[i] * t;
                for j in i..4 {
                    gram[(i, j)] += row[i] * row[j];
                }
            }
        }
        for i in 0..4 {
            for j in 0..i {
                gram[(i, j)] = gram[(j, i)];
            }
        }
        let (sol, jittered) = solve_spd(&gram, &rhs, 1e-8);
        fit.jittered |= jittered;
        coef = [sol[0], sol[1], sol[2], sol[3]];
        let (beta, gamma) = (coef[2], coef[3]);
        if beta.abs() < 1e-12 || !beta.is_finite() || !gamma.is_finite() {
            break;
        }
        let next = (c + gamma / beta).clamp(zmin, zmax);
        let step = (next - c).abs();
        c = next;
        fit.trajectory.push(x_mean + x_scale * c);
        if step <= ztol {
            fit.converged = true;
            break;
        }
    }
    fit.alpha = coef[1] / x_scale;
    fit.beta = coef[2] / x_scale;
    fit.gamma = coef[3];
    fit.intercept = y_mean + coef[0] - coef[1] * x_mean / x_scale;
    Ok(fit)
}

/// One candidate per feature from [`fit_segmented`] started at the median,
/// moved into the range that keeps `m` rows per side, and scored per
/// `cfg.scoring`.
pub fn best_split_segmented(x: &[f64], y: &[f64], m: usize, cfg: &SegmentedConfig) -> Result<Option<SplitCandidate>> {
    check_inputs(x, y)?;
    if y.len() < 2 * m.max(1) || y.len() < 3 || is_constant(y) || is_constant(x) {
        return Ok(None);
    }
    let (min, max) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let fit = fit_segmented(x, y, median(x), cfg.tol_fraction * (max - min), cfg.max_iters)?;
    if !fit.converged {
        log::debug!(
            "segmented fit stopped after {} iterations at {}",
            fit.iterations(),
            fit.breakpoint()
        );
    }
    let Some(c) = clamp_threshold(x, m, fit.breakpoint()) else {
        return Ok(None);
    };
    let p = partition_at(x, y, c);
    if p.reduction <= 0.0 {
        return Ok(None);
    }
    let score = match cfg.scoring {
        SegmentScoring::VarianceReduction => p.reduction,
        SegmentScoring::VarianceDifference => (p.var_left - p.var_right).abs(),
    };
    Ok(Some(SplitCandidate {
        feature_index: 0,
        threshold: c,
        score,
        reduction: p.reduction,
        left_count: p.left,
        right_count: p.right,
    }))
}
