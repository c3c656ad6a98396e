use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::{Context, Result};
use mimictree::interpret::{export_graph, extract_rules, feature_importance, RuleSelector};
use mimictree::ModelTree;

use crate::output::Staged;
use crate::ExplainArgs;

pub fn run(args: &ExplainArgs) -> Result<ExitCode> {
    let tree = ModelTree::load(&args.tree).with_context(|| format!("reading tree {}", args.tree.display()))?;
    let mut provenance = format!("tree {}\nschema fingerprint {}\n", args.tree.display(), tree.fingerprint());
    for (k, v) in tree.metadata() {
        let _ = writeln!(provenance, "{k} {v}");
    }
    let commented = |prefix: &str| provenance.lines().map(|l| format!("{prefix} {l}\n")).collect::<String>();

    let mut table = feature_importance(&tree);
    if args.aggregate {
        table = table.aggregate_by(|i| tree.schema()[i].feature.clone());
    }
    if args.normalized {
        table = table.normalized();
    }
    if let Some(k) = args.top {
        table = table.top(k);
    }
    let importance = commented("#") + &table.to_tsv();

    let selector = args.min_count.map_or(RuleSelector::All, RuleSelector::MinCount);
    let mut rules = commented("#");
    for rule in extract_rules(&tree, selector) {
        let _ = writeln!(rules, "{rule}");
        let terms: Vec<String> = rule
            .model
            .weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(i, w)| format!("{w:+} * {}", tree.feature_name(i)))
            .collect();
        let _ = writeln!(rules, "    prediction = {} {}", rule.model.intercept, terms.join(" "));
    }

    let graph = commented("//") + &export_graph(&tree, args.depth);

    print!("{}", table.to_tsv());
    let mut out = Staged::new(&args.out)?;
    out.add("importance.tsv", &importance)?;
    out.add("rules.txt", &rules)?;
    out.add("tree.dot", &graph)?;
    for path in out.commit()? {
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}
