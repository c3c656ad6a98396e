//! Linear model trees: binary splits on single features, least-squares
//! linear models in the leaves.

mod grow;
mod io;
mod leaf;
mod predict;
mod prune;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use grow::grow;
pub use io::{FORMAT_NAME, FORMAT_VERSION};
pub use leaf::{fit_leaf, node_loss, LeafModel};
pub use prune::prune;

use crate::breakpoint::{BreakpointConfig, Heuristic};
use crate::dataset::ColumnDesc;
use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: NodeId,
        right: NodeId,
        n: usize,
        mean_y: f64,
        variance_reduction: f64,
    },
    Leaf {
        model: LeafModel,
        n: usize,
        mean_y: f64,
    },
}

impl Node {
    pub fn n(&self) -> usize {
        match self {
            Node::Split { n, .. } | Node::Leaf { n, .. } => *n,
        }
    }

    pub fn mean_y(&self) -> f64 {
        match self {
            Node::Split { mean_y, .. } | Node::Leaf { mean_y, .. } => *mean_y,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }

    pub fn children(&self) -> Option<(NodeId, NodeId)> {
        match self {
            Node::Split { left, right, .. } => Some((*left, *right)),
            Node::Leaf { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub heuristic: Heuristic,
    /// Minimum number of training records in every leaf.
    pub min_leaf: usize,
    pub max_depth: usize,
    /// Hard cap on the arena size.
    pub max_nodes: usize,
    pub seed: u64,
    /// Tikhonov stabiliser for leaf least squares.
    pub ridge_eps: f64,
    #[serde(default)]
    pub breakpoint: BreakpointConfig,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            heuristic: Heuristic::Variance,
            min_leaf: 100,
            max_depth: 12,
            max_nodes: 8191,
            seed: 0,
            ridge_eps: 1e-8,
            breakpoint: BreakpointConfig::default(),
        }
    }
}

impl GrowthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf < 2 {
            return Err(Error::Config(format!("minimum leaf size must be at least 2, got {}", self.min_leaf)));
        }
        if self.max_depth < 1 {
            return Err(Error::Config("max depth must be at least 1".into()));
        }
        if self.max_nodes < 1 {
            return Err(Error::Config("node cap must be at least 1".into()));
        }
        if !(self.ridge_eps >= 0.0 && self.ridge_eps.is_finite()) {
            return Err(Error::Config("ridge stabiliser must be a non-negative number".into()));
        }
        Ok(())
    }
}

/// Complexity penalty on leaf weights used by pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyNorm {
    /// Number of non-zero weights.
    #[default]
    L0,
    /// Sum of absolute weights.
    L1,
    /// Sum of squared weights.
    L2,
}

impl std::str::FromStr for PenaltyNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l0" => Ok(PenaltyNorm::L0),
            "l1" => Ok(PenaltyNorm::L1),
            "l2" => Ok(PenaltyNorm::L2),
            _ => Err(Error::Config(format!("unknown penalty norm {s:?} (expected l0, l1 or l2)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub lambda: f64,
    pub norm: PenaltyNorm,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig {
            lambda: 0.0,
            norm: PenaltyNorm::L0,
        }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// A trained tree. Nodes live in an arena in breadth-first order with the
/// root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTree {
    nodes: Vec<Node>,
    schema: Vec<ColumnDesc>,
    fingerprint: String,
    growth: GrowthConfig,
    prune: Option<PruneConfig>,
    /// Free-form provenance such as the run's master seed.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

impl ModelTree {
    pub(crate) fn from_parts(
        nodes: Vec<Node>,
        schema: Vec<ColumnDesc>,
        growth: GrowthConfig,
        prune: Option<PruneConfig>,
    ) -> Self {
        let fingerprint = crate::dataset::schema_fingerprint(&schema);
        ModelTree {
            nodes,
            schema,
            fingerprint,
            growth,
            prune,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.len() - self.leaf_count()
    }

    pub fn schema(&self) -> &[ColumnDesc] {
        &self.schema
    }

    pub fn feature_name(&self, i: usize) -> &str {
        &self.schema[i].name
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn growth_config(&self) -> &GrowthConfig {
        &self.growth
    }

    pub fn prune_config(&self) -> Option<&PruneConfig> {
        self.prune.as_ref()
    }

    /// Depth of every node, root at 0.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        for id in 0..self.nodes.len() {
            if let Some((l, r)) = self.nodes[id].children() {
                depth[l] = depth[id] + 1;
                depth[r] = depth[id] + 1;
            }
        }
        depth
    }

    pub fn max_depth(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Parent of every node; `None` for the root.
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parent = vec![None; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            if let Some((l, r)) = node.children() {
                parent[l] = Some(id);
                parent[r] = Some(id);
            }
        }
        parent
    }

    pub(crate) fn check_fingerprint(&self, fingerprint: &str) -> Result<()> {
        if fingerprint != self.fingerprint {
            return Err(Error::Config(format!(
                "dataset schema {fingerprint} does not match the tree's schema {}",
                self.fingerprint
            )));
        }
        Ok(())
    }
}
