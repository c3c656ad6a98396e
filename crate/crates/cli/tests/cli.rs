use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mimictree::interpret::{extract_rules, RuleSelector};
use mimictree::synth::PlantedTree;
use mimictree::ModelTree;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimictree"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Fixture {
    dir: TempDir,
    data: PathBuf,
    schema: PathBuf,
}

impl Fixture {
    fn new(n: usize) -> Fixture {
        let dir = TempDir::new().unwrap();
        let planted = PlantedTree::default();
        let sample = planted.sample(n, 5).unwrap();
        let data = dir.path().join("events.csv");
        let schema = dir.path().join("events.schema");
        planted.write_csv(&sample, &data).unwrap();
        fs::write(&schema, planted.schema_text()).unwrap();
        Fixture { dir, data, schema }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn train(&self, out: &Path, extra: &[&str]) -> Output {
        run(bin()
            .arg("train")
            .arg("--data")
            .arg(&self.data)
            .arg("--schema")
            .arg(&self.schema)
            .arg("--out")
            .arg(out)
            .args(["--min-leaf", "50", "--seed", "3"])
            .args(extra))
    }
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn train_beats_null_model() {
    let fx = Fixture::new(4000);
    let out = fx.path("run");
    let o = fx.train(&out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["tree.json", "report.json", "summary.txt"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let r = report(&out);
    let rmse = r["fidelity"]["rmse"].as_f64().unwrap();
    let null = r["fidelity"]["null_rmse"].as_f64().unwrap();
    assert!(rmse < 0.5 * null, "rmse {rmse} null {null}");
    assert_eq!(r["rows"]["loaded"], 4000);
    assert_eq!(r["seed"], 3);
    let summary = String::from_utf8(o.stdout).unwrap();
    assert!(summary.contains("test rmse"), "{summary}");
    // No leftover staging files.
    let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 3, "{names:?}");
}

#[test]
fn reruns_are_byte_identical() {
    let fx = Fixture::new(2000);
    let (a, b) = (fx.path("a"), fx.path("b"));
    for d in [&a, &b] {
        let o = fx.train(d, &["--heuristic", "ttest", "--lambda", "0.5"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let ta = fs::read(a.join("tree.json")).unwrap();
    let tb = fs::read(b.join("tree.json")).unwrap();
    assert_eq!(ta, tb);
    assert_eq!(report(&a)["fidelity"], report(&b)["fidelity"]);
}

#[test]
fn labels_file_replaces_target() {
    let fx = Fixture::new(1500);
    // Teacher labels: twice the first feature, ignoring q.
    let text = fs::read_to_string(&fx.data).unwrap();
    let labels: String = text
        .lines()
        .skip(1)
        .map(|l| format!("{}\n", 2.0 * l.split(',').nth(1).unwrap().parse::<f64>().unwrap()))
        .collect();
    let path = fx.path("labels.txt");
    fs::write(&path, labels).unwrap();
    let out = fx.path("run");
    let o = fx.train(&out, &["--labels-file", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    // A linear teacher is fitted almost exactly.
    let rmse = report(&out)["fidelity"]["rmse"].as_f64().unwrap();
    assert!(rmse < 1e-6, "rmse {rmse}");
}

#[cfg(unix)]
#[test]
fn oracle_subprocess_and_augmentation() {
    use std::os::unix::fs::PermissionsExt;
    let fx = Fixture::new(1500);
    let script = fx.path("teacher.sh");
    fs::write(&script, "#!/bin/sh\nawk -F, 'NR > 1 { printf \"%.17g\\n\", 3 * $1 - $2 }'\n").unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let out = fx.path("run");
    let o = fx.train(
        &out,
        &["--oracle-cmd", script.to_str().unwrap(), "--augment-action", "shot", "--augment-rate", "0.2"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["rows"]["augmented"], 240);
    assert!(r["fidelity"]["rmse"].as_f64().unwrap() < 1e-6);
}

#[test]
fn missing_schema_is_named() {
    let fx = Fixture::new(100);
    let o = run(bin()
        .arg("train")
        .arg("--data")
        .arg(&fx.data)
        .args(["--schema", "/nonexistent/thing.schema", "--out"])
        .arg(fx.path("run")));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/nonexistent/thing.schema"), "{}", stderr(&o));
    assert!(!fx.path("run").join("tree.json").exists());
}

#[test]
fn explain_writes_artifacts() {
    let fx = Fixture::new(3000);
    let run_dir = fx.path("run");
    assert!(fx.train(&run_dir, &[]).status.success());
    let tree_path = run_dir.join("tree.json");
    let out = fx.path("explain");
    let o = run(bin()
        .arg("explain")
        .arg("--tree")
        .arg(&tree_path)
        .arg("--out")
        .arg(&out)
        .args(["--top", "3", "--depth", "1"]));
    assert!(o.status.success(), "{}", stderr(&o));

    let tsv = fs::read_to_string(out.join("importance.tsv")).unwrap();
    let body: Vec<&str> = tsv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "feature\timportance\tfrequency");
    assert_eq!(body.len(), 4);
    assert!(body[1].starts_with("x0\t"), "{tsv}");

    let dot = fs::read_to_string(out.join("tree.dot")).unwrap();
    assert!(dot.contains("digraph"));
    // Depth 1: the root and its two children.
    let is_node = |l: &&str| {
        let l = l.trim_start();
        l.starts_with('n') && l[1..].starts_with(|c: char| c.is_ascii_digit()) && !l.contains("->")
    };
    assert_eq!(dot.lines().filter(is_node).count(), 3);

    let rules = fs::read_to_string(out.join("rules.txt")).unwrap();
    assert!(rules.contains("seed 3"), "provenance missing");
    let tree = ModelTree::load(&tree_path).unwrap();
    assert_eq!(rules.lines().filter(|l| l.starts_with("IF")).count(), tree.leaf_count());
}

#[test]
fn rules_route_like_the_reloaded_tree() {
    let fx = Fixture::new(3000);
    let run_dir = fx.path("run");
    assert!(fx.train(&run_dir, &["--heuristic", "gmm"]).status.success());
    let tree = ModelTree::load(run_dir.join("tree.json")).unwrap();
    let rules = extract_rules(&tree, RuleSelector::All);
    let probe = PlantedTree::default().sample(500, 99).unwrap().data;
    let mut row = vec![0.0; probe.n_cols()];
    for r in 0..probe.n_rows() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = probe.column(c)[r];
        }
        let hits: Vec<_> = rules.iter().filter(|rule| rule.matches(&row)).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].leaf, tree.leaf_for(&row).unwrap());
    }
}

#[test]
fn corrupt_tree_is_rejected() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("tree.json");
    fs::write(&bad, "{\"format\": \"something else\"").unwrap();
    let o = run(bin().arg("explain").arg("--tree").arg(&bad).arg("--out").arg(dir.path().join("x")));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("tree.json"), "{}", stderr(&o));
}

#[test]
fn bench_reports_every_heuristic() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("bench.tsv");
    let o = run(bin().args(["bench", "--sizes", "300", "--min-leaf", "20", "--out"]).arg(&table));
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with("\tfalse")));
    let written = fs::read_to_string(&table).unwrap();
    assert!(written.starts_with("# seed 0"));
}

#[test]
fn strict_bench_fails_on_timeout() {
    let o = run(bin().args([
        "bench",
        "--sizes",
        "2000,4000",
        "--heuristics",
        "variance",
        "--budget-secs",
        "1e-9",
        "--strict",
    ]));
    assert!(!o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("variance\t4000\tNA\tNA\ttrue"), "{stdout}");
}
