use rayon::prelude::*;

use super::leaf::fit_leaf_columns;
use super::{GrowthConfig, ModelTree, Node, NodeId};
use crate::breakpoint::{find_split, is_constant, SplitCandidate};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::util::mix_seed;

struct Pending {
    id: NodeId,
    rows: Vec<usize>,
    depth: usize,
}

/// Grows a model tree breadth first.
///
/// At every open node each feature's heuristic proposes at most one
/// threshold; the candidate with the largest variance reduction is applied
/// when it is positive and leaves at least `min_leaf` rows on both sides
/// (ties go to the lower feature index). Nodes that do not split become
/// leaves with least-squares linear models over all features. The result
/// depends only on the data and `cfg`, not on thread scheduling.
pub fn grow(train: &Dataset, cfg: &GrowthConfig) -> Result<ModelTree> {
    cfg.validate()?;
    let y = train.require_target()?;
    let n = train.n_rows();
    if n == 0 {
        return Err(Error::Config("cannot grow a tree on an empty dataset".into()));
    }
    if train.n_cols() == 0 {
        return Err(Error::Config("dataset has no feature columns".into()));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite target at row {i}")));
    }

    let columns = train.columns();
    let mut nodes: Vec<Option<Node>> = vec![None];
    let mut frontier = vec![Pending {
        id: 0,
        rows: (0..n).collect(),
        depth: 0,
    }];

    while !frontier.is_empty() {
        let decisions: Vec<Option<SplitCandidate>> = frontier
            .par_iter()
            .map(|p| choose_split(columns, y, p, cfg))
            .collect();

        let mut next = Vec::new();
        let mut leaves = Vec::new();
        for (p, decision) in frontier.into_iter().zip(decisions) {
            let stats = summary(y, &p.rows);
            match decision {
                Some(c) if nodes.len() + 2 <= cfg.max_nodes => {
                    let (left, right) = (nodes.len(), nodes.len() + 1);
                    nodes.push(None);
                    nodes.push(None);
                    let col = &columns[c.feature_index];
                    let (lrows, rrows): (Vec<usize>, Vec<usize>) =
                        p.rows.iter().partition(|&&r| col[r] <= c.threshold);
                    debug_assert_eq!((lrows.len(), rrows.len()), (c.left_count, c.right_count));
                    nodes[p.id] = Some(Node::Split {
                        feature: c.feature_index,
                        threshold: c.threshold,
                        left,
                        right,
                        n: stats.0,
                        mean_y: stats.1,
                        variance_reduction: c.reduction,
                    });
                    next.push(Pending {
                        id: left,
                        rows: lrows,
                        depth: p.depth + 1,
                    });
                    next.push(Pending {
                        id: right,
                        rows: rrows,
                        depth: p.depth + 1,
                    });
                }
                _ => leaves.push(p),
            }
        }

        let fitted: Vec<Result<(NodeId, Node)>> = leaves
            .par_iter()
            .map(|p| {
                let model = fit_leaf_columns(columns, y, &p.rows, cfg.ridge_eps)?;
                let (n, mean_y) = summary(y, &p.rows);
                Ok((p.id, Node::Leaf { model, n, mean_y }))
            })
            .collect();
        for f in fitted {
            let (id, node) = f?;
            nodes[id] = Some(node);
        }
        frontier = next;
    }

    let nodes = nodes
        .into_iter()
        .map(|n| n.expect("every allocated node is resolved"))
        .collect();
    Ok(ModelTree::from_parts(nodes, train.schema().to_vec(), *cfg, None))
}

fn summary(y: &[f64], rows: &[usize]) -> (usize, f64) {
    let n = rows.len();
    (n, rows.iter().map(|&r| y[r]).sum::<f64>() / n as f64)
}

fn choose_split(columns: &[Vec<f64>], y: &[f64], p: &Pending, cfg: &GrowthConfig) -> Option<SplitCandidate> {
    let m = cfg.min_leaf;
    if p.depth >= cfg.max_depth || p.rows.len() < 2 * m {
        return None;
    }
    let ys: Vec<f64> = p.rows.iter().map(|&r| y[r]).collect();
    if is_constant(&ys) {
        return None;
    }
    let node_seed = mix_seed(cfg.seed, p.id as u64);
    let candidates: Vec<Option<SplitCandidate>> = columns
        .par_iter()
        .enumerate()
        .map(|(f, col)| {
            let xs: Vec<f64> = p.rows.iter().map(|&r| col[r]).collect();
            if is_constant(&xs) {
                return None;
            }
            match find_split(cfg.heuristic, &xs, &ys, m, &cfg.breakpoint, mix_seed(node_seed, f as u64)) {
                Ok(c) => c.map(|c| c.with_feature(f)),
                Err(e) => {
                    log::warn!("node {}: feature {f} produced no candidate: {e}", p.id);
                    None
                }
            }
        })
        .collect();

    let mut best: Option<SplitCandidate> = None;
    for c in candidates.into_iter().flatten() {
        if c.reduction > 0.0
            && c.reduction.is_finite()
            && c.left_count >= m
            && c.right_count >= m
            && best.is_none_or(|b| c.reduction > b.reduction)
        {
            best = Some(c);
        }
    }
    best
}
