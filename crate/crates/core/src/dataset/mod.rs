//! Columnar event tables: ingestion, one-hot encoding, lag windows,
//! standardisation and train/test splitting.

mod lag;
mod load;
mod norm;
mod schema;
mod split;

pub use lag::lag_expand;
pub use load::{load_csv, load_csv_with};
pub(crate) use load::encoded_schema;
pub use norm::{apply_norm, normalize, NormEntry, NormStats};
pub use schema::{FeatureKind, FeatureSpec, SchemaConfig};
pub use split::split_train_test;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// How a numeric column was derived from its source feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ColumnKind {
    Continuous,
    Binary,
    /// One indicator of a categorical feature's one-hot group.
    OneHot { level: String },
}

impl ColumnKind {
    /// Indicator columns are never standardised and are split at 0.5.
    pub fn is_indicator(&self) -> bool {
        !matches!(self, ColumnKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDesc {
    /// Display name, lag-tagged for history columns, e.g. `speed(t-1)`.
    pub name: String,
    /// Name of the lag-0 column this one was shifted from.
    pub base: String,
    /// Source feature as declared in the schema.
    pub feature: String,
    pub kind: ColumnKind,
    pub lag: usize,
}

/// An immutable column-major table of encoded features plus an optional
/// target column of soft labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnDesc>,
    columns: Vec<Vec<f64>>,
    target: Option<Vec<f64>>,
    episodes: Option<Vec<String>>,
    augmented: Vec<bool>,
    norm_stats: Option<NormStats>,
}

impl Dataset {
    pub fn new(schema: Vec<ColumnDesc>, columns: Vec<Vec<f64>>, target: Option<Vec<f64>>) -> Result<Self> {
        if schema.len() != columns.len() {
            return Err(Error::Schema(format!(
                "{} column descriptors for {} columns",
                schema.len(),
                columns.len()
            )));
        }
        let n = match (columns.first(), &target) {
            (Some(c), _) => c.len(),
            (None, Some(t)) => t.len(),
            (None, None) => 0,
        };
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::Schema(format!(
                "column {:?} has {} rows, expected {n}",
                schema[i].name,
                c.len()
            )));
        }
        if let Some(t) = &target {
            if t.len() != n {
                return Err(Error::Schema(format!("target has {} rows, expected {n}", t.len())));
            }
        }
        Ok(Dataset {
            schema,
            columns,
            target,
            episodes: None,
            augmented: vec![false; n],
            norm_stats: None,
        })
    }

    pub fn with_episodes(mut self, episodes: Vec<String>) -> Result<Self> {
        if episodes.len() != self.n_rows() {
            return Err(Error::Schema(format!(
                "episode column has {} rows, expected {}",
                episodes.len(),
                self.n_rows()
            )));
        }
        self.episodes = Some(episodes);
        Ok(self)
    }

    pub fn with_target(mut self, target: Vec<f64>) -> Result<Self> {
        if target.len() != self.n_rows() {
            return Err(Error::Schema(format!(
                "target has {} rows, expected {}",
                target.len(),
                self.n_rows()
            )));
        }
        self.target = Some(target);
        Ok(self)
    }

    pub fn without_target(mut self) -> Self {
        self.target = None;
        self
    }

    pub(crate) fn with_augmented_flags(mut self, flags: Vec<bool>) -> Self {
        debug_assert_eq!(flags.len(), self.n_rows());
        self.augmented = flags;
        self
    }

    pub(crate) fn with_norm_stats(mut self, stats: NormStats) -> Self {
        self.norm_stats = Some(stats);
        self
    }

    pub fn n_rows(&self) -> usize {
        self.augmented.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn schema(&self) -> &[ColumnDesc] {
        &self.schema
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_deref()
    }

    /// The target column, or a schema error when the table is unlabeled.
    pub fn require_target(&self) -> Result<&[f64]> {
        self.target
            .as_deref()
            .ok_or_else(|| Error::Schema("dataset has no target column".into()))
    }

    pub fn episodes(&self) -> Option<&[String]> {
        self.episodes.as_deref()
    }

    pub fn augmented(&self) -> &[bool] {
        &self.augmented
    }

    pub fn norm_stats(&self) -> Option<&NormStats> {
        self.norm_stats.as_ref()
    }

    /// Row `i` as a feature vector in schema order.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Hex digest over column names and kinds; trees refuse datasets whose
    /// fingerprint differs from the one they were trained on.
    pub fn fingerprint(&self) -> String {
        schema_fingerprint(&self.schema)
    }

    /// Copies the given rows, in the given order, into a new table.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let pick = |c: &Vec<f64>| rows.iter().map(|&r| c[r]).collect::<Vec<_>>();
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(pick).collect(),
            target: self.target.as_ref().map(pick),
            episodes: self
                .episodes
                .as_ref()
                .map(|e| rows.iter().map(|&r| e[r].clone()).collect()),
            augmented: rows.iter().map(|&r| self.augmented[r]).collect(),
            norm_stats: self.norm_stats.clone(),
        }
    }

    /// Appends the rows of `other`, which must share this table's schema.
    /// Episode ids are dropped unless both tables carry them.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.schema != other.schema {
            return Err(Error::Schema("cannot concatenate tables with different schemas".into()));
        }
        let target = match (&self.target, &other.target) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            (None, None) => None,
            _ => {
                return Err(Error::Schema(
                    "cannot concatenate a labeled table with an unlabeled one".into(),
                ))
            }
        };
        let episodes = match (&self.episodes, &other.episodes) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        Ok(Dataset {
            schema: self.schema.clone(),
            columns: self
                .columns
                .iter()
                .zip(&other.columns)
                .map(|(a, b)| a.iter().chain(b).copied().collect())
                .collect(),
            target,
            episodes,
            augmented: self.augmented.iter().chain(&other.augmented).copied().collect(),
            norm_stats: self.norm_stats.clone(),
        })
    }
}

pub(crate) fn schema_fingerprint(schema: &[ColumnDesc]) -> String {
    let mut hasher = Sha256::new();
    for c in schema {
        let kind = match &c.kind {
            ColumnKind::Continuous => "continuous".to_string(),
            ColumnKind::Binary => "binary".to_string(),
            ColumnKind::OneHot { level } => format!("onehot:{level}"),
        };
        hasher.update(format!("{}\u{1f}{}\u{1f}{}\u{1f}{}\u{1e}", c.name, c.feature, kind, c.lag).as_bytes());
    }
    let digest = hasher.finalize();
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn continuous(name: &str) -> ColumnDesc {
        ColumnDesc {
            name: name.into(),
            base: name.into(),
            feature: name.into(),
            kind: ColumnKind::Continuous,
            lag: 0,
        }
    }

    pub fn onehot(feature: &str, level: &str) -> ColumnDesc {
        let name = format!("{feature}={level}");
        ColumnDesc {
            name: name.clone(),
            base: name,
            feature: feature.into(),
            kind: ColumnKind::OneHot { level: level.into() },
            lag: 0,
        }
    }
}
