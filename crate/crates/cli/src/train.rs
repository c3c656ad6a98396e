use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use mimictree::dataset::{lag_expand, load_csv_with, normalize, split_train_test, NormStats};
use mimictree::interpret::feature_importance;
use mimictree::mimic::{
    action_replace, fidelity, null_model, AugmentationPlan, FidelityReport, OracleClient, ReplacementVolume,
};
use mimictree::tree::{grow, prune};
use mimictree::util::mix_seed;
use mimictree::{GrowthConfig, PruneConfig, SchemaConfig};
use serde::Serialize;

use crate::output::Staged;
use crate::TrainArgs;

const SPLIT_STREAM: u64 = 1;
const GROWTH_STREAM: u64 = 2;
const AUGMENT_STREAM: u64 = 3;

#[derive(Serialize)]
struct Report<'a> {
    config: &'a TrainArgs,
    seed: u64,
    derived_seeds: Seeds,
    schema_fingerprint: String,
    rows: Rows,
    tree: TreeStats,
    fidelity: FidelityReport,
    normalization: NormStats,
}

#[derive(Serialize)]
struct Seeds {
    split: u64,
    growth: u64,
    augmentation: u64,
}

#[derive(Serialize)]
struct Rows {
    loaded: usize,
    train: usize,
    augmented: usize,
    test: usize,
}

#[derive(Serialize)]
struct TreeStats {
    grown_nodes: usize,
    nodes: usize,
    leaves: usize,
    depth: usize,
}

pub fn run(args: &TrainArgs) -> Result<ExitCode> {
    if !(args.test_fraction > 0.0 && args.test_fraction < 1.0) {
        bail!("--test-fraction must be between 0 and 1, got {}", args.test_fraction);
    }
    let seeds = Seeds {
        split: mix_seed(args.seed, SPLIT_STREAM),
        growth: mix_seed(args.seed, GROWTH_STREAM),
        augmentation: mix_seed(args.seed, AUGMENT_STREAM),
    };

    let mut schema =
        SchemaConfig::from_path(&args.schema).with_context(|| format!("reading schema {}", args.schema.display()))?;
    let teacher = match (&args.labels_file, &args.oracle_cmd) {
        (Some(path), _) => Some(OracleClient::aligned_file(path)),
        (None, Some(cmd)) => Some(OracleClient::subprocess(cmd)?),
        (None, None) => None,
    };
    if args.target.is_some() {
        schema.target = args.target.clone();
    } else if teacher.is_some() {
        schema.target = None;
    }
    if teacher.is_none() && schema.target.is_none() {
        bail!("no labels: give --target, declare a target in the schema, or use --labels-file / --oracle-cmd");
    }

    let raw = load_csv_with(&args.data, &schema).with_context(|| format!("loading {}", args.data.display()))?;
    let loaded = raw.n_rows();
    let (normed, norm_stats) = normalize(&raw)?;
    let mut data = lag_expand(&normed, schema.window, schema.pad)?;
    if let Some(t) = &teacher {
        let labels = t.query(&data).context("labelling rows with the teacher")?;
        data = data.with_target(labels)?;
    }
    let (mut train, test) = split_train_test(&data, args.test_fraction, seeds.split)?;
    if test.n_rows() < 2 {
        bail!("test split holds {} rows; need at least 2", test.n_rows());
    }

    let mut augmented = 0;
    if let Some(level) = &args.augment_action {
        let Some(action) = &schema.action else {
            bail!("--augment-action needs an `action = <feature>` line in the schema");
        };
        let Some(oracle) = &args.oracle_cmd else {
            bail!("--augment-action needs --oracle-cmd to label the new rows");
        };
        let plan = AugmentationPlan {
            volume: ReplacementVolume::Rate(args.augment_rate),
            seed: seeds.augmentation,
            ..AugmentationPlan::new(action.clone(), level.clone())
        };
        let aug = action_replace(&train, &plan)?;
        augmented = aug.rows.n_rows();
        if augmented > 0 {
            let labels = OracleClient::subprocess(oracle)?
                .query(&aug.rows)
                .context("labelling augmented rows")?;
            train = train.concat(&aug.rows.with_target(labels)?)?;
        }
    }

    let growth = GrowthConfig {
        heuristic: args.heuristic,
        min_leaf: args.min_leaf,
        max_depth: args.max_depth,
        max_nodes: args.max_nodes,
        seed: seeds.growth,
        ..GrowthConfig::default()
    };
    let grown = grow(&train, &growth)?;
    let pruned = prune(
        &grown,
        &train,
        &PruneConfig {
            lambda: args.lambda,
            norm: args.norm,
        },
    )?
    .with_metadata("seed", args.seed)
    .with_metadata("heuristic", args.heuristic)
    .with_metadata("data", args.data.display());

    let pred = pruned.predict_batch(&test)?;
    let null = null_model(train.require_target()?);
    let report = fidelity(&pred, test.require_target()?, null)?
        .with_meta("heuristic", args.heuristic)
        .with_meta("seed", args.seed);

    let doc = Report {
        config: args,
        seed: args.seed,
        schema_fingerprint: pruned.fingerprint().to_string(),
        rows: Rows {
            loaded,
            train: train.n_rows(),
            augmented,
            test: test.n_rows(),
        },
        tree: TreeStats {
            grown_nodes: grown.node_count(),
            nodes: pruned.node_count(),
            leaves: pruned.leaf_count(),
            depth: pruned.max_depth(),
        },
        fidelity: report,
        normalization: norm_stats,
        derived_seeds: seeds,
    };

    let mut out = Staged::new(&args.out)?;
    out.add("tree.json", &(pruned.to_json()? + "\n"))?;
    out.add("report.json", &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    let text = summary(&doc, &pruned);
    out.add("summary.txt", &text)?;
    for path in out.commit()? {
        eprintln!("wrote {}", path.display());
    }
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn summary(doc: &Report, tree: &mimictree::ModelTree) -> String {
    let f = &doc.fidelity;
    let mut s = String::new();
    let _ = writeln!(s, "mimic tree trained on {}", doc.config.data.display());
    let _ = writeln!(s, "seed                {}", doc.seed);
    let _ = writeln!(s, "schema fingerprint  {}", doc.schema_fingerprint);
    let _ = writeln!(s, "heuristic           {}", doc.config.heuristic);
    let _ = writeln!(s, "minimum leaf size   {}", doc.config.min_leaf);
    let _ = writeln!(s, "pruning             lambda {} ({:?})", doc.config.lambda, doc.config.norm);
    let _ = writeln!(
        s,
        "rows                {} loaded, {} train ({} augmented), {} test",
        doc.rows.loaded, doc.rows.train, doc.rows.augmented, doc.rows.test
    );
    let _ = writeln!(
        s,
        "tree                {} nodes ({} before pruning), {} leaves, depth {}",
        doc.tree.nodes, doc.tree.grown_nodes, doc.tree.leaves, doc.tree.depth
    );
    let _ = writeln!(s, "test rmse           {:.6}", f.rmse);
    let _ = writeln!(s, "null model rmse     {:.6}", f.null_rmse);
    match f.pearson_r {
        Some(r) => _ = writeln!(s, "correlation         {r:.6}"),
        None => _ = writeln!(s, "correlation         undefined (constant series)"),
    }
    let table = feature_importance(tree).top(5);
    if !table.is_empty() {
        let _ = writeln!(s, "top features");
        for row in &table.rows {
            let _ = writeln!(s, "  {:<24} {:.6} ({} splits)", row.feature, row.importance, row.frequency);
        }
    }
    s
}
