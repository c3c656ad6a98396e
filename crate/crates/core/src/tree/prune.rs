use super::leaf::{fit_leaf_columns, residual_ss};
use super::{ModelTree, Node, NodeId, PruneConfig};
use crate::dataset::Dataset;
use crate::error::Result;

/// Bottom-up regularised pruning.
///
/// For every split whose children are both leaves, a linear model is
/// refitted on the split's own records and the split collapses into a leaf
/// when `E(parent) < E(left) + E(right)`, with `E` the squared residual loss
/// plus `λ R(w)`. Repeats until no such split remains.
pub fn prune(tree: &ModelTree, train: &Dataset, cfg: &PruneConfig) -> Result<ModelTree> {
    cfg.validate()?;
    tree.check_fingerprint(&train.fingerprint())?;
    let y = train.require_target()?;
    let cols = train.columns();
    let ridge = tree.growth.ridge_eps;
    let rows = tree.node_rows(train);
    let mut nodes = tree.nodes.clone();

    // Leaf losses on the supplied data; a leaf reached by no rows costs
    // only its penalty.
    let mut energy: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(id, n)| match n {
            Node::Leaf { model, .. } => {
                residual_ss(model, cols, y, &rows[id]) + cfg.lambda * model.penalty(cfg.norm)
            }
            Node::Split { .. } => f64::NAN,
        })
        .collect();

    loop {
        let mut changed = false;
        // Children always have larger ids than their parent, so a reverse
        // sweep lets collapses cascade upward within one pass.
        for id in (0..nodes.len()).rev() {
            let Node::Split { left, right, .. } = nodes[id] else {
                continue;
            };
            if !(nodes[left].is_leaf() && nodes[right].is_leaf()) || rows[id].is_empty() {
                continue;
            }
            let model = fit_leaf_columns(cols, y, &rows[id], ridge)?;
            let e_parent = model.loss + cfg.lambda * model.penalty(cfg.norm);
            if e_parent < energy[left] + energy[right] {
                let (n, mean_y) = (nodes[id].n(), nodes[id].mean_y());
                nodes[id] = Node::Leaf { model, n, mean_y };
                energy[id] = e_parent;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut pruned = ModelTree::from_parts(compact(&nodes), tree.schema.clone(), tree.growth, Some(*cfg));
    pruned.metadata = tree.metadata.clone();
    Ok(pruned)
}

/// Drops nodes no longer reachable from the root, renumbering the rest in
/// breadth-first order.
fn compact(nodes: &[Node]) -> Vec<Node> {
    let mut order: Vec<NodeId> = vec![0];
    let mut i = 0;
    while i < order.len() {
        if let Some((l, r)) = nodes[order[i]].children() {
            order.push(l);
            order.push(r);
        }
        i += 1;
    }
    let mut new_id = vec![usize::MAX; nodes.len()];
    for (new, &old) in order.iter().enumerate() {
        new_id[old] = new;
    }
    order
        .iter()
        .map(|&old| match &nodes[old] {
            Node::Split {
                feature,
                threshold,
                left,
                right,
                n,
                mean_y,
                variance_reduction,
            } => Node::Split {
                feature: *feature,
                threshold: *threshold,
                left: new_id[*left],
                right: new_id[*right],
                n: *n,
                mean_y: *mean_y,
                variance_reduction: *variance_reduction,
            },
            leaf => leaf.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;
    use crate::dataset::testutil::continuous;
    use crate::tree::{grow, GrowthConfig, PenaltyNorm};

    fn noisy_table(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let x: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..n)
            .map(|r| if x[0][r] > 0.0 { 1.0 } else { 0.0 } + 0.5 * x[1][r] + noise.sample(&mut rng))
            .collect();
        let schema = (0..3).map(|i| continuous(&format!("x{i}"))).collect();
        Dataset::new(schema, x, Some(y)).unwrap()
    }

    fn grown(d: &Dataset) -> ModelTree {
        grow(
            d,
            &GrowthConfig {
                min_leaf: 30,
                max_depth: 6,
                ..GrowthConfig::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn zero_lambda_keeps_splits_that_help() {
        let d = noisy_table(1, 2000);
        let t = grown(&d);
        let p = prune(&t, &d, &PruneConfig::default()).unwrap();
        // With λ = 0 a collapse needs the parent's least-squares fit to beat
        // two fits on subsets of its rows, which cannot happen.
        assert_eq!(p.node_count(), t.node_count());
        assert!(p.node_count() > 1);
    }

    #[test]
    fn large_lambda_collapses_noise_split() {
        // y is pure noise, so any split only fits noise.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..400).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..400).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = Dataset::new(vec![continuous("x")], vec![x], Some(y)).unwrap();
        let t = grow(
            &d,
            &GrowthConfig {
                min_leaf: 100,
                max_depth: 1,
                ..GrowthConfig::default()
            },
        )
        .unwrap();
        assert_eq!(t.node_count(), 3);
        let cfg = PruneConfig {
            lambda: 1e3,
            norm: PenaltyNorm::L0,
        };
        // The collapse decision, checked by hand.
        let rows = t.node_rows(&d);
        let y = d.target().unwrap();
        let parent = fit_leaf_columns(d.columns(), y, &rows[0], 1e-8).unwrap();
        let e_parent = parent.loss + cfg.lambda * parent.penalty(cfg.norm);
        let e_children: f64 = [1, 2]
            .iter()
            .map(|&c| match t.node(c) {
                Node::Leaf { model, .. } => model.loss + cfg.lambda * model.penalty(cfg.norm),
                _ => unreachable!(),
            })
            .sum();
        assert!(e_parent < e_children);
        let p = prune(&t, &d, &cfg).unwrap();
        assert_eq!(p.node_count(), 1);
        assert_eq!(p.node(0).n(), 400);
    }

    #[test]
    fn linear_target_prunes_to_one_leaf() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..1000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 0.5).collect();
        let d = Dataset::new(vec![continuous("x")], vec![x], Some(y)).unwrap();
        let t = grow(&d, &GrowthConfig { min_leaf: 50, ..GrowthConfig::default() }).unwrap();
        assert!(t.node_count() > 1);
        let p = prune(&t, &d, &PruneConfig { lambda: 0.1, norm: PenaltyNorm::L0 }).unwrap();
        assert_eq!(p.node_count(), 1);
        let Node::Leaf { model, .. } = p.node(0) else {
            panic!("expected a leaf")
        };
        assert!((model.weights[0] - 3.0).abs() < 1e-6);
        assert!((model.intercept + 0.5).abs() < 1e-6);
    }

    #[test]
    fn node_count_shrinks_with_lambda() {
        let d = noisy_table(3, 3000);
        let t = grown(&d);
        let mut last = t.node_count();
        for lambda in [0.0, 0.1, 1.0, 10.0, 100.0] {
            let p = prune(&t, &d, &PruneConfig { lambda, norm: PenaltyNorm::L0 }).unwrap();
            assert!(p.node_count() <= last, "λ={lambda}: {} > {last}", p.node_count());
            last = p.node_count();
        }
    }

    #[test]
    fn pruned_tree_is_well_formed() {
        let d = noisy_table(4, 2000);
        let t = grown(&d);
        let p = prune(&t, &d, &PruneConfig { lambda: 5.0, norm: PenaltyNorm::L1 }).unwrap();
        for (id, node) in p.nodes().iter().enumerate() {
            if let Some((l, r)) = node.children() {
                assert!(l > id && r > id && l < p.node_count() && r < p.node_count());
                assert_eq!(node.n(), p.node(l).n() + p.node(r).n());
            }
        }
        assert_eq!(p.prune_config().unwrap().lambda, 5.0);
    }
}
