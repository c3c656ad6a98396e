use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{ColumnKind, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplacementVolume {
    Count(usize),
    /// Fraction of the source table's rows.
    Rate(f64),
}

/// Counterfactual sampling: copy observed events whose action differs from
/// `target_action` and rewrite their current action to it.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationPlan {
    /// Categorical feature holding the action, e.g. `action`.
    pub action_feature: String,
    /// Level of that feature to substitute, e.g. `shot`.
    pub target_action: String,
    pub volume: ReplacementVolume,
    pub seed: u64,
}

impl AugmentationPlan {
    pub fn new(action_feature: impl Into<String>, target_action: impl Into<String>) -> Self {
        AugmentationPlan {
            action_feature: action_feature.into(),
            target_action: target_action.into(),
            volume: ReplacementVolume::Rate(0.1),
            seed: 0,
        }
    }
}

/// Unlabeled counterfactual rows plus the source row each was copied from.
#[derive(Debug, Clone)]
pub struct Augmented {
    pub rows: Dataset,
    pub sources: Vec<usize>,
}

/// Samples source rows uniformly with replacement among those whose
/// current (lag-0) action is not the target, and rewrites only that one-hot
/// group. The output has no target: label it with the teacher.
pub fn action_replace(dataset: &Dataset, plan: &AugmentationPlan) -> Result<Augmented> {
    let group: Vec<(usize, bool)> = dataset
        .schema()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.lag == 0 && c.feature == plan.action_feature)
        .map(|(i, c)| match &c.kind {
            ColumnKind::OneHot { level } => Ok((i, *level == plan.target_action)),
            _ => Err(Error::Augmentation(format!(
                "action feature {:?} is not one-hot encoded",
                plan.action_feature
            ))),
        })
        .collect::<Result<_>>()?;
    if group.is_empty() {
        return Err(Error::Augmentation(format!(
            "dataset has no one-hot group for action feature {:?}",
            plan.action_feature
        )));
    }
    let Some(&(target_col, _)) = group.iter().find(|(_, is_target)| *is_target) else {
        return Err(Error::Augmentation(format!(
            "action {:?} is not a level of {:?}",
            plan.target_action, plan.action_feature
        )));
    };

    let count = match plan.volume {
        ReplacementVolume::Count(c) => c,
        ReplacementVolume::Rate(r) if r >= 0.0 && r.is_finite() => (r * dataset.n_rows() as f64).round() as usize,
        ReplacementVolume::Rate(r) => return Err(Error::Config(format!("augmentation rate {r} is invalid"))),
    };
    let eligible: Vec<usize> = (0..dataset.n_rows())
        .filter(|&r| dataset.column(target_col)[r] != 1.0)
        .collect();
    if count == 0 {
        return Ok(Augmented {
            rows: dataset.select_rows(&[]).without_target(),
            sources: Vec::new(),
        });
    }
    if eligible.is_empty() {
        return Err(Error::Augmentation(format!(
            "no rows with an action other than {:?} to replace",
            plan.target_action
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let sources: Vec<usize> = (0..count)
        .map(|_| eligible[rng.random_range(0..eligible.len())])
        .collect();
    let picked = dataset.select_rows(&sources);

    let mut columns = picked.columns().to_vec();
    for &(i, is_target) in &group {
        columns[i].fill(if is_target { 1.0 } else { 0.0 });
    }
    let mut rows = Dataset::new(picked.schema().to_vec(), columns, None)?.with_augmented_flags(vec![true; count]);
    if let Some(e) = picked.episodes() {
        rows = rows.with_episodes(e.to_vec())?;
    }
    if let Some(s) = dataset.norm_stats() {
        rows = rows.with_norm_stats(s.clone());
    }
    Ok(Augmented { rows, sources })
}
