use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{PenaltyNorm, PruneConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::solve_spd;

/// Weights below this magnitude count as zero for the L0 penalty.
pub const L0_ZERO: f64 = 1e-8;

/// `y ≈ w · x + b` over every feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Residual sum of squares on the records the model was fitted on.
    pub loss: f64,
}

impl LeafModel {
    pub fn constant(n_features: usize, value: f64) -> Self {
        LeafModel {
            weights: vec![0.0; n_features],
            intercept: value,
            loss: 0.0,
        }
    }

    /// Prediction with feature values supplied by `x`. Summation order is
    /// fixed so every caller gets bit-identical results.
    #[inline]
    pub fn eval_with(&self, x: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * x(i);
        }
        acc + self.intercept
    }

    pub fn eval(&self, row: &[f64]) -> f64 {
        self.eval_with(|i| row[i])
    }

    pub fn penalty(&self, norm: PenaltyNorm) -> f64 {
        match norm {
            PenaltyNorm::L0 => self.weights.iter().filter(|w| w.abs() > L0_ZERO).count() as f64,
            PenaltyNorm::L1 => self.weights.iter().map(|w| w.abs()).sum(),
            PenaltyNorm::L2 => self.weights.iter().map(|w| w * w).sum(),
        }
    }
}

/// Least squares `min Σ (y - w·x - b)² + ridge_eps ‖w‖²` on the given rows.
pub fn fit_leaf(data: &Dataset, rows: &[usize], ridge_eps: f64) -> Result<LeafModel> {
    let y = data.require_target()?;
    fit_leaf_columns(data.columns(), y, rows, ridge_eps)
}

pub(crate) fn fit_leaf_columns(columns: &[Vec<f64>], y: &[f64], rows: &[usize], ridge_eps: f64) -> Result<LeafModel> {
    if rows.is_empty() {
        return Err(Error::Data("cannot fit a leaf model on zero rows".into()));
    }
    let d = columns.len();
    let n = rows.len() as f64;
    let x_mean: Vec<f64> = columns.iter().map(|c| rows.iter().map(|&r| c[r]).sum::<f64>() / n).collect();
    let y_mean = rows.iter().map(|&r| y[r]).sum::<f64>() / n;

    // Centred normal equations; the intercept then follows from the means.
    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut buf = vec![0.0; d];
    for &r in rows {
        for (j, c) in columns.iter().enumerate() {
            buf[j] = c[r] - x_mean[j];
        }
        let t = y[r] - y_mean;
        for i in 0..d {
            let bi = buf[i];
            if bi == 0.0 {
                continue;
            }
            rhs[i] += bi * t;
            let row = &mut gram[i * d..(i + 1) * d];
            for j in i..d {
                row[j] += bi * buf[j];
            }
        }
    }

    // Columns constant on these rows carry no signal; pin their weight to 0.
    let active: Vec<usize> = (0..d).filter(|&i| gram[i * d + i] > 0.0).collect();
    let mut weights = vec![0.0; d];
    if !active.is_empty() {
        let k = active.len();
        let mut a = DMatrix::<f64>::zeros(k, k);
        let mut b = DVector::<f64>::zeros(k);
        for (p, &i) in active.iter().enumerate() {
            b[p] = rhs[i];
            for (q, &j) in active.iter().enumerate().skip(p) {
                let v = gram[i * d + j];
                a[(p, q)] = v;
                a[(q, p)] = v;
            }
            a[(p, p)] += ridge_eps;
        }
        let (w, _) = solve_spd(&a, &b, ridge_eps.max(1e-12));
        for (p, &i) in active.iter().enumerate() {
            weights[i] = w[p];
        }
    }
    let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
    let mut model = LeafModel {
        weights,
        intercept,
        loss: 0.0,
    };
    model.loss = residual_ss(&model, columns, y, rows);
    Ok(model)
}

pub(crate) fn residual_ss(model: &LeafModel, columns: &[Vec<f64>], y: &[f64], rows: &[usize]) -> f64 {
    rows.iter()
        .map(|&r| {
            let e = y[r] - model.eval_with(|i| columns[i][r]);
            e * e
        })
        .sum()
}

/// Regularised node loss `Σ (y - ŷ)² + λ R(w)` of `model` on `rows`.
pub fn node_loss(data: &Dataset, rows: &[usize], model: &LeafModel, cfg: &PruneConfig) -> Result<f64> {
    let y = data.require_target()?;
    Ok(residual_ss(model, data.columns(), y, rows) + cfg.lambda * model.penalty(cfg.norm))
}
