//! Read-only views of a trained tree for people: importance tables, rules
//! and graph exports.

mod graph;
mod importance;
mod rules;

pub use graph::export_graph;
pub use importance::{feature_importance, ImportanceRow, ImportanceTable};
pub use rules::{extract_rules, format_significant, Condition, Rule, RuleSelector};
