use mimictree::dataset::{lag_expand, load_csv_with, normalize, split_train_test, SchemaConfig};
use mimictree::interpret::{extract_rules, feature_importance, RuleSelector};
use mimictree::mimic::{fidelity, null_model};
use mimictree::synth::PlantedTree;
use mimictree::tree::{grow, prune};
use mimictree::{ColumnDesc, ColumnKind, Dataset, GrowthConfig, Heuristic, ModelTree, PenaltyNorm, PruneConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grown(data: &Dataset, heuristic: Heuristic, min_leaf: usize) -> ModelTree {
    let cfg = GrowthConfig {
        heuristic,
        min_leaf,
        seed: 1,
        ..GrowthConfig::default()
    };
    grow(data, &cfg).unwrap()
}

#[test]
fn csv_to_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let planted = PlantedTree::default();
    let sample = planted.sample(6000, 21).unwrap();
    let csv = dir.path().join("events.csv");
    planted.write_csv(&sample, &csv).unwrap();
    let schema = (planted.schema_text() + "window = 2\n").parse::<SchemaConfig>().unwrap();

    let raw = load_csv_with(&csv, &schema).unwrap();
    assert_eq!(raw.n_rows(), 6000);
    let (normed, _) = normalize(&raw).unwrap();
    let lagged = lag_expand(&normed, 2, 0.0).unwrap();
    assert_eq!(lagged.n_cols(), 2 * raw.n_cols());
    let (train, test) = split_train_test(&lagged, 0.25, 4).unwrap();
    assert_eq!(train.n_rows() + test.n_rows(), 6000);

    let tree = grown(&train, Heuristic::Variance, 60);
    let pruned = prune(
        &tree,
        &train,
        &PruneConfig {
            lambda: 0.05,
            norm: PenaltyNorm::L0,
        },
    )
    .unwrap();
    assert!(pruned.node_count() <= tree.node_count());
    let pred = pruned.predict_batch(&test).unwrap();
    let report = fidelity(&pred, test.require_target().unwrap(), null_model(train.require_target().unwrap())).unwrap();
    assert!(report.rmse < 0.2 * report.null_rmse, "{report:?}");
    assert!(report.pearson_r.unwrap() > 0.97);
}

#[test]
fn dominant_feature_ranks_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 4000;
    let cols: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    // Piecewise constant in column 2, with a faint step in column 0.
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let big = if cols[2][i] > 0.5 { 5.0 } else { -5.0 };
            let small = if cols[0][i] > 0.3 { 0.2 } else { 0.0 };
            big + small + 0.01 * rng.random::<f64>()
        })
        .collect();
    let schema = (0..4)
        .map(|i| ColumnDesc {
            name: format!("c{i}"),
            base: format!("c{i}"),
            feature: format!("c{i}"),
            kind: ColumnKind::Continuous,
            lag: 0,
        })
        .collect();
    let data = Dataset::new(schema, cols, Some(y)).unwrap();
    for h in Heuristic::ALL {
        let tree = grown(&data, h, 100);
        let table = feature_importance(&tree);
        assert_eq!(table.rows[0].feature, "c2", "{h}: {:?}", table.rows);
    }
}

#[test]
fn reloaded_tree_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let sample = PlantedTree::default().sample(3000, 2).unwrap();
    for h in Heuristic::ALL {
        let tree = grown(&sample.data, h, 40).with_metadata("heuristic", h);
        let path = dir.path().join(format!("{h}.json"));
        tree.save(&path).unwrap();
        let back = ModelTree::load(&path).unwrap();
        assert_eq!(back.to_json().unwrap(), tree.to_json().unwrap());
        let a = tree.predict_batch(&sample.data).unwrap();
        let b = back.predict_batch(&sample.data).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()), "{h}");
        let leaves = back.route_batch(&sample.data).unwrap();
        let rules = extract_rules(&back, RuleSelector::All);
        for (r, leaf) in leaves.iter().enumerate().step_by(7) {
            let row = sample.data.row(r);
            let rule = rules.iter().find(|rule| rule.matches(&row)).unwrap();
            assert_eq!(rule.leaf, *leaf);
        }
    }
}

#[test]
fn schema_mismatch_is_rejected() {
    let sample = PlantedTree::default().sample(500, 3).unwrap();
    let tree = grown(&sample.data, Heuristic::Variance, 50);
    let other = PlantedTree {
        extra_features: 2,
        ..PlantedTree::default()
    }
    .sample(50, 4)
    .unwrap();
    assert!(tree.predict_batch(&other.data).is_err());
}
