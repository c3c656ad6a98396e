use std::collections::BTreeMap;
use std::fmt;

use crate::tree::{LeafModel, ModelTree, Node, NodeId};

/// Which leaves to turn into rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RuleSelector {
    #[default]
    All,
    Leaf(NodeId),
    /// Leaves that hold at least this many training records.
    MinCount(usize),
}

/// `lower < x[feature] <= upper` with missing bounds unconstrained. The
/// strict lower bound matches the tree's `x <= c` routing.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub feature: usize,
    pub name: String,
    pub indicator: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Condition {
    pub fn holds(&self, v: f64) -> bool {
        self.lower.is_none_or(|b| v > b) && self.upper.is_none_or(|b| v <= b)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Indicators are split between 0 and 1, so a single bound decides
        // the value.
        if self.indicator {
            if let (Some(b), None) = (self.upper, self.lower) {
                if (0.0..1.0).contains(&b) {
                    return write!(f, "{} = 0", self.name);
                }
            }
            if let (None, Some(b)) = (self.upper, self.lower) {
                if (0.0..1.0).contains(&b) {
                    return write!(f, "{} = 1", self.name);
                }
            }
        }
        match (self.lower, self.upper) {
            (Some(lo), Some(hi)) => write!(
                f,
                "{} < {} <= {}",
                format_significant(lo, 4),
                self.name,
                format_significant(hi, 4)
            ),
            (Some(lo), None) => write!(f, "{} > {}", self.name, format_significant(lo, 4)),
            (None, Some(hi)) => write!(f, "{} <= {}", self.name, format_significant(hi, 4)),
            (None, None) => write!(f, "{} is any", self.name),
        }
    }
}

/// The path to one leaf, reduced to the tightest interval per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub leaf: NodeId,
    /// Sorted by feature index.
    pub conditions: Vec<Condition>,
    pub n: usize,
    pub mean_y: f64,
    pub model: LeafModel,
}

impl Rule {
    /// Whether a feature row satisfies every condition.
    pub fn matches(&self, row: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(row[c.feature]))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IF ")?;
        if self.conditions.is_empty() {
            write!(f, "true")?;
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                write!(f, " AND ")?;
            }
            write!(f, "{c}")?;
        }
        write!(
            f,
            " THEN leaf {} (n = {}, mean = {})",
            self.leaf,
            self.n,
            format_significant(self.mean_y, 4)
        )
    }
}

/// Per-feature (lower, upper) bounds accumulated along a path.
type Bounds = BTreeMap<usize, (Option<f64>, Option<f64>)>;

pub fn extract_rules(tree: &ModelTree, selector: RuleSelector) -> Vec<Rule> {
    let mut out = Vec::new();
    // Depth-first with an explicit stack of (node, path constraints).
    let mut stack: Vec<(NodeId, Bounds)> = vec![(tree.root(), BTreeMap::new())];
    while let Some((id, bounds)) = stack.pop() {
        match tree.node(id) {
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                let (lo, hi) = bounds.get(feature).copied().unwrap_or((None, None));
                let mut r = bounds.clone();
                r.insert(*feature, (Some(lo.map_or(*threshold, |v| v.max(*threshold))), hi));
                let mut l = bounds;
                l.insert(*feature, (lo, Some(hi.map_or(*threshold, |v| v.min(*threshold)))));
                stack.push((*right, r));
                stack.push((*left, l));
            }
            Node::Leaf { model, n, mean_y } => {
                let keep = match selector {
                    RuleSelector::All => true,
                    RuleSelector::Leaf(target) => target == id,
                    RuleSelector::MinCount(k) => *n >= k,
                };
                if keep {
                    let conditions = bounds
                        .into_iter()
                        .map(|(feature, (lo, hi))| Condition {
                            feature,
                            name: tree.feature_name(feature).to_string(),
                            indicator: tree.schema()[feature].kind.is_indicator(),
                            lower: lo,
                            upper: hi,
                        })
                        .collect();
                    out.push(Rule {
                        leaf: id,
                        conditions,
                        n: *n,
                        mean_y: *mean_y,
                        model: model.clone(),
                    });
                }
            }
        }
    }
    out
}

/// `v` rounded to `digits` significant digits without trailing zeros.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    let exp = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&exp) {
        return format!("{:.*e}", digits - 1, v);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // Rounding may have carried into a new digit, e.g. 9.9996 -> 10.000.
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}
