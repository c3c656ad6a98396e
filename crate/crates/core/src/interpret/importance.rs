use std::fmt::Write;

use crate::tree::{ModelTree, Node};
use crate::util::ExactSum;

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRow {
    pub feature: String,
    /// Column index, or `None` for rows aggregated across lags.
    pub feature_index: Option<usize>,
    /// Sum of the variance reductions of the splits on this feature.
    pub importance: f64,
    /// Number of splits on this feature.
    pub frequency: usize,
}

/// Importance per lag-tagged column, sorted by decreasing importance.
#[derive(Debug, Clone)]
pub struct ImportanceTable {
    pub rows: Vec<ImportanceRow>,
    sums: Vec<ExactSum>,
}

impl PartialEq for ImportanceTable {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

/// Sums each feature's split variance reductions over the whole tree.
/// Features the tree never splits on are omitted.
pub fn feature_importance(tree: &ModelTree) -> ImportanceTable {
    let d = tree.n_features();
    let mut sums = vec![ExactSum::new(); d];
    let mut freq = vec![0usize; d];
    for node in tree.nodes() {
        if let Node::Split {
            feature,
            variance_reduction,
            ..
        } = node
        {
            sums[*feature].add(*variance_reduction);
            freq[*feature] += 1;
        }
    }
    let mut order: Vec<usize> = (0..d).filter(|&f| freq[f] > 0).collect();
    order.sort_by(|&a, &b| sums[b].value().total_cmp(&sums[a].value()).then(a.cmp(&b)));
    ImportanceTable {
        rows: order
            .iter()
            .map(|&f| ImportanceRow {
                feature: tree.feature_name(f).to_string(),
                feature_index: Some(f),
                importance: sums[f].value(),
                frequency: freq[f],
            })
            .collect(),
        sums: order.iter().map(|&f| sums[f].clone()).collect(),
    }
}

impl ImportanceTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Correctly rounded total importance; equals the correctly rounded sum
    /// of every split's variance reduction.
    pub fn total(&self) -> f64 {
        let mut all = ExactSum::new();
        for s in &self.sums {
            all.merge(s);
        }
        all.value()
    }

    pub fn total_frequency(&self) -> usize {
        self.rows.iter().map(|r| r.frequency).sum()
    }

    pub fn top(&self, k: usize) -> ImportanceTable {
        ImportanceTable {
            rows: self.rows.iter().take(k).cloned().collect(),
            sums: self.sums.iter().take(k).cloned().collect(),
        }
    }

    /// Importances rescaled to sum to 1.
    pub fn normalized(&self) -> ImportanceTable {
        let total = self.total();
        let mut out = self.clone();
        if total > 0.0 {
            for r in &mut out.rows {
                r.importance /= total;
            }
        }
        out
    }

    /// Merges lag columns of the same source column, e.g. `speed` and
    /// `speed(t-1)`, using `base_of(feature_index)` to find the group name.
    pub fn aggregate_by(&self, base_of: impl Fn(usize) -> String) -> ImportanceTable {
        let mut groups: Vec<(String, ExactSum, usize)> = Vec::new();
        for (row, sum) in self.rows.iter().zip(&self.sums) {
            let key = row.feature_index.map(&base_of).unwrap_or_else(|| row.feature.clone());
            match groups.iter_mut().find(|g| g.0 == key) {
                Some(g) => {
                    g.1.merge(sum);
                    g.2 += row.frequency;
                }
                None => groups.push((key, sum.clone(), row.frequency)),
            }
        }
        groups.sort_by(|a, b| b.1.value().total_cmp(&a.1.value()).then(a.0.cmp(&b.0)));
        ImportanceTable {
            rows: groups
                .iter()
                .map(|(name, s, f)| ImportanceRow {
                    feature: name.clone(),
                    feature_index: None,
                    importance: s.value(),
                    frequency: *f,
                })
                .collect(),
            sums: groups.into_iter().map(|g| g.1).collect(),
        }
    }

    /// Tab-separated `feature  importance  frequency` with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("feature\timportance\tfrequency\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}", r.feature, r.importance, r.frequency);
        }
        out
    }
}
