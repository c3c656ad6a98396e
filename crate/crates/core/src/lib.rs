//! Linear model trees learned by mimicking a black-box regression teacher.
//!
//! The crate is organised around the pipeline it supports:
//!
//! * [`dataset`] ingests event tables, one-hot encodes categorical columns,
//!   expands a history window into lagged columns and standardises features.
//! * [`breakpoint`] proposes one split threshold per feature with one of four
//!   sort- or fit-based heuristics.
//! * [`tree`] grows, prunes, evaluates and serialises the model tree.
//! * [`mimic`] talks to the teacher, augments data by action replacement,
//!   computes impacts and measures fidelity.
//! * [`interpret`] extracts importance tables, rules and graph exports.

pub mod breakpoint;
pub mod dataset;
mod error;
pub mod interpret;
pub(crate) mod linalg;
pub mod mimic;
pub mod synth;
pub mod tree;
pub mod util;

pub use breakpoint::{Heuristic, SplitCandidate};
pub use dataset::{ColumnDesc, ColumnKind, Dataset, FeatureKind, FeatureSpec, NormStats, SchemaConfig};
pub use error::{Error, Result};
pub use tree::{GrowthConfig, LeafModel, ModelTree, Node, NodeId, PenaltyNorm, PruneConfig};
