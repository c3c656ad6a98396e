use serde::{Deserialize, Serialize};

use super::{ColumnKind, Dataset};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    /// Lag-0 column name the statistics were fitted on.
    pub column: String,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

impl NormEntry {
    pub fn zero_variance(&self) -> bool {
        self.stddev == 0.0
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        if self.stddev == 0.0 {
            0.0
        } else {
            (v - self.mean) / self.stddev
        }
    }
}

/// Standardisation parameters for the continuous columns of a table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormStats {
    pub entries: Vec<NormEntry>,
}

impl NormStats {
    pub fn get(&self, column: &str) -> Option<&NormEntry> {
        self.entries.iter().find(|e| e.column == column)
    }
}

/// Fits per-column mean and population standard deviation on the
/// continuous columns and standardises them. Indicator columns are left
/// untouched; constant columns map to all zeros.
pub fn normalize(dataset: &Dataset) -> Result<(Dataset, NormStats)> {
    let mut stats = NormStats::default();
    for (desc, col) in dataset.schema().iter().zip(dataset.columns()) {
        if desc.kind != ColumnKind::Continuous || stats.get(&desc.base).is_some() {
            continue;
        }
        let n = col.len().max(1) as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        stats.entries.push(NormEntry {
            column: desc.base.clone(),
            mean,
            stddev: var.sqrt(),
        });
    }
    let out = apply_norm(dataset, &stats)?;
    Ok((out, stats))
}

/// Applies fitted statistics to every continuous column whose lag-0 source
/// has an entry. Columns without an entry pass through unchanged.
pub fn apply_norm(dataset: &Dataset, stats: &NormStats) -> Result<Dataset> {
    let columns = dataset
        .schema()
        .iter()
        .zip(dataset.columns())
        .map(|(desc, col)| match (&desc.kind, stats.get(&desc.base)) {
            (ColumnKind::Continuous, Some(e)) => col.iter().map(|&v| e.apply(v)).collect(),
            _ => col.clone(),
        })
        .collect();
    let mut out = Dataset::new(dataset.schema().to_vec(), columns, dataset.target().map(<[f64]>::to_vec))?
        .with_augmented_flags(dataset.augmented().to_vec())
        .with_norm_stats(stats.clone());
    if let Some(e) = dataset.episodes() {
        out = out.with_episodes(e.to_vec())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dataset::testutil::{continuous, onehot};

    fn one(col: Vec<f64>) -> Dataset {
        Dataset::new(vec![continuous("x")], vec![col], None).unwrap()
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let (d, s) = normalize(&one(vec![2.0, 2.0, 2.0])).unwrap();
        assert_eq!(d.column(0), &[0.0, 0.0, 0.0]);
        assert!(s.entries[0].zero_variance());
    }

    #[test]
    fn two_point_column() {
        let (d, s) = normalize(&one(vec![0.0, 10.0])).unwrap();
        assert_eq!(d.column(0), &[-1.0, 1.0]);
        assert_eq!(s.entries[0].mean, 5.0);
        assert_eq!(s.entries[0].stddev, 5.0);
    }

    #[test]
    fn one_hot_untouched() {
        let d = Dataset::new(vec![onehot("a", "x")], vec![vec![1.0, 0.0, 1.0]], None).unwrap();
        let (n, s) = normalize(&d).unwrap();
        assert_eq!(n.column(0), &[1.0, 0.0, 1.0]);
        assert!(s.entries.is_empty());
    }

    proptest! {
        #[test]
        fn standardises_and_reapplies_bitwise(col in prop::collection::vec(-1e3f64..1e3, 2..200)) {
            let d = one(col);
            let (n, s) = normalize(&d).unwrap();
            let again = apply_norm(&d, &s).unwrap();
            prop_assert_eq!(n.column(0), again.column(0));
            if !s.entries[0].zero_variance() {
                let c = n.column(0);
                let len = c.len() as f64;
                let mean = c.iter().sum::<f64>() / len;
                let sd = (c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len).sqrt();
                prop_assert!(mean.abs() <= 1e-6);
                prop_assert!((sd - 1.0).abs() <= 1e-6);
            }
        }
    }
}
