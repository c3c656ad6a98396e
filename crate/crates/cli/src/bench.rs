use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use mimictree::synth::PlantedTree;
use mimictree::tree::grow;
use mimictree::util::mix_seed;
use mimictree::GrowthConfig;

use crate::BenchArgs;

/// Times tree growth on synthetic data for every heuristic and size. A run
/// over budget is flagged, and larger sizes for that heuristic are skipped
/// and flagged too.
pub fn run(args: &BenchArgs) -> Result<ExitCode> {
    if args.sizes.is_empty() || args.heuristics.is_empty() {
        bail!("nothing to benchmark");
    }
    if !(args.budget_secs > 0.0) {
        bail!("--budget-secs must be positive");
    }
    let mut sizes = args.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();

    let planted = PlantedTree::default();
    let mut table = String::from("heuristic\trows\tseconds\tnodes\ttimeout\n");
    print!("{table}");
    let mut any_timeout = false;
    for &h in &args.heuristics {
        let mut over = false;
        for &n in &sizes {
            let line = if over {
                format!("{h}\t{n}\tNA\tNA\ttrue\n")
            } else {
                let data = planted.sample(n, mix_seed(args.seed, n as u64))?.data;
                let cfg = GrowthConfig {
                    heuristic: h,
                    min_leaf: args.min_leaf,
                    seed: args.seed,
                    ..GrowthConfig::default()
                };
                let start = Instant::now();
                let tree = grow(&data, &cfg).with_context(|| format!("{h} on {n} rows"))?;
                let secs = start.elapsed().as_secs_f64();
                over = secs > args.budget_secs;
                format!("{h}\t{n}\t{secs:.3}\t{}\t{over}\n", tree.node_count())
            };
            any_timeout |= over;
            print!("{line}");
            table.push_str(&line);
        }
    }
    if let Some(path) = &args.out {
        let mut text = String::new();
        let _ = writeln!(text, "# seed {} min_leaf {} budget_secs {}", args.seed, args.min_leaf, args.budget_secs);
        text.push_str(&table);
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if any_timeout && args.strict {
        eprintln!("error: at least one run exceeded the {}s budget", args.budget_secs);
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
