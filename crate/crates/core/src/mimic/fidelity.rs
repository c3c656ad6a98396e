use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Agreement between a mimic model and its teacher on held-out rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub rmse: f64,
    /// `None` when either series is constant and correlation is undefined.
    pub pearson_r: Option<f64>,
    /// RMSE of the constant training-mean predictor on the same rows.
    pub null_rmse: f64,
    pub n_test: usize,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl FidelityReport {
    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }

    /// True when the mimic beats the constant baseline.
    pub fn beats_null(&self) -> bool {
        self.rmse < self.null_rmse
    }
}

/// The constant predictor used as the fidelity baseline: the mean of the
/// training soft labels.
pub fn null_model(train_soft: &[f64]) -> f64 {
    train_soft.iter().sum::<f64>() / train_soft.len() as f64
}

pub fn rmse(pred: &[f64], soft: &[f64]) -> f64 {
    let n = pred.len() as f64;
    (pred.iter().zip(soft).map(|(p, s)| (p - s) * (p - s)).sum::<f64>() / n).sqrt()
}

/// Pearson correlation from a single streaming pass over co-moments.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (mut n, mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        n += 1.0;
        let dx = x - ma;
        let dy = y - mb;
        ma += dx / n;
        mb += dy / n;
        saa += dx * (x - ma);
        sbb += dy * (y - mb);
        sab += dx * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Fidelity of `pred` against teacher labels `soft`, with the null model
/// given by the training-label mean `null_prediction`.
pub fn fidelity(pred: &[f64], soft: &[f64], null_prediction: f64) -> Result<FidelityReport> {
    if pred.len() != soft.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} teacher labels",
            pred.len(),
            soft.len()
        )));
    }
    if pred.len() < 2 {
        return Err(Error::Data("fidelity needs at least two rows".into()));
    }
    if pred.iter().chain(soft).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite prediction or label".into()));
    }
    let null = vec![null_prediction; soft.len()];
    Ok(FidelityReport {
        rmse: rmse(pred, soft),
        pearson_r: pearson(pred, soft),
        null_rmse: rmse(&null, soft),
        n_test: soft.len(),
        metadata: BTreeMap::new(),
    })
}
