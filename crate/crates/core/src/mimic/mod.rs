//! Distillation plumbing around the tree learner: teacher queries,
//! counterfactual augmentation, impact targets and fidelity metrics.

mod augment;
mod fidelity;
mod impact;
mod oracle;

pub use augment::{action_replace, AugmentationPlan, Augmented, ReplacementVolume};
pub use fidelity::{fidelity, null_model, pearson, rmse, FidelityReport};
pub use impact::{compute_impact, ImpactBaseline};
pub use oracle::{query_oracle, OracleClient};
