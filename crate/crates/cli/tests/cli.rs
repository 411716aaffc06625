use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

fn impactlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_impactlab"))
        .args(args)
        .env_remove("IMPACTLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_lists_subcommands() {
    let o = impactlab(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for sub in ["graph", "mutate", "evaluate", "viz", "verify-corpus"] {
        assert!(text.contains(sub), "missing {sub} in help:\n{text}");
    }
}

#[test]
fn graph_f_dot_has_field_node() {
    let o = impactlab(&[
        "graph",
        p(&corpus("fig2")),
        "--variant",
        "f",
        "--format",
        "dot",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph \"CG_F\" {"));
    assert!(dot.contains("\"C#bar\" [shape=box]"));
    assert!(dot.contains("\"C.biz1()\" -> \"C#bar\" [label=\"field_read\"]"));
    assert!(dot.contains("\"C#bar\" -> \"C.biz2()\" [label=\"field_write\"]"));
}

#[test]
fn graph_figure_orientation_flips_field_edges() {
    let o = impactlab(&[
        "graph",
        p(&corpus("fig2")),
        "--variant",
        "f",
        "--format",
        "dot",
        "--field-orientation",
        "figure",
    ]);
    assert!(o.status.success());
    let dot = stdout(&o);
    assert!(dot.contains("\"C#bar\" -> \"C.biz1()\""));
    assert!(dot.contains("\"C.biz2()\" -> \"C#bar\""));
}

#[test]
fn graph_json_round_trips_node_count() {
    let o = impactlab(&["graph", p(&corpus("fig2")), "--variant", "h"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 7);
    assert_eq!(doc["edges"].as_array().unwrap().len(), 7);
}

#[test]
fn graph_on_empty_dir_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = impactlab(&["graph", p(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn graph_rejects_unknown_variant() {
    let o = impactlab(&["graph", p(&corpus("fig2")), "--variant", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mutate_single_addition_gives_six_mutants() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("t.moo"),
        "class T {\n  int add(int a, int b) { return a + b; }\n  test void t() { assert(this.add(2, 3) == 5); }\n}\n",
    )
    .unwrap();
    let o = impactlab(&["mutate", p(tmp.path()), "--op", "aor"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mutants = doc["mutants"].as_array().unwrap();
    assert_eq!(mutants.len(), 6);
    let codes: Vec<&str> = mutants
        .iter()
        .map(|m| m["replacement"].as_str().unwrap())
        .collect();
    assert_eq!(codes, ["sub", "mul", "div", "rem", "left", "right"]);
    assert!(mutants.iter().all(|m| m["enclosing"] == "T.add(int,int)"));
    // a + b with (2, 3): every replacement changes the result.
    assert!(mutants.iter().all(|m| m["viability"] == "killed"));
}

#[test]
fn mutate_is_deterministic() {
    let dir = corpus("bank");
    let args = [
        "mutate",
        p(&dir),
        "--op",
        "ROR",
        "--cap",
        "20",
        "--seed",
        "7",
    ];
    let a = impactlab(&args);
    let b = impactlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["mutants"].as_array().unwrap().len(), 20);
    assert_eq!(doc["seed"], 7);
}

#[test]
fn mutate_rejects_unknown_operator() {
    let o = impactlab(&["mutate", p(&corpus("fig2")), "--op", "XYZ"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evaluate_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = impactlab(&[
        "evaluate",
        p(&corpus("fig3")),
        "--variant",
        "b,h",
        "-o",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "project,operator,variant,k,n,p_same,p_complete,mean_p,mean_r,mean_f,s,o,u,d"
    );
    assert_eq!(lines.len(), 1 + 5 * 2);
    let timing = std::fs::read_to_string(out.join("timing.csv")).unwrap();
    assert_eq!(timing.lines().count(), 3);
    for op in ["ABS", "AOR", "LCR", "ROR", "UOI"] {
        assert!(out.join(format!("manifest-{op}.json")).is_file());
    }
    assert!(std::fs::read_to_string(out.join("report.md"))
        .unwrap()
        .starts_with("| project |"));
    let ledger = std::fs::read_to_string(out.join("ledger.jsonl")).unwrap();
    assert!(ledger
        .lines()
        .all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
}

#[test]
fn evaluate_default_variant_gives_five_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = impactlab(&["evaluate", p(&corpus("fig2")), "-o", p(tmp.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn evaluate_output_independent_of_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |workers: &str| {
        let out = tmp.path().join(workers);
        let o = impactlab(&[
            "evaluate",
            p(&corpus("bank")),
            "--variant",
            "s,f",
            "--workers",
            workers,
            "-o",
            p(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let (one, four) = (run("1"), run("4"));
    for file in [
        "ledger.jsonl",
        "report.csv",
        "report.md",
        "manifest-AOR.json",
    ] {
        assert_eq!(
            std::fs::read(one.join(file)).unwrap(),
            std::fs::read(four.join(file)).unwrap(),
            "{file} differs"
        );
    }
}

#[test]
fn evaluate_missing_dir_fails() {
    let o = impactlab(&[
        "evaluate",
        "/nonexistent/project",
        "-o",
        "/tmp/unused-impactlab-out",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn evaluate_rejects_too_few_timing_reps() {
    let o = impactlab(&["evaluate", p(&corpus("fig2")), "--timing-reps", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

fn fig3_ledger(dir: &Path) -> (PathBuf, String) {
    let o = impactlab(&["evaluate", p(&corpus("fig3")), "--op", "AOR", "-o", p(dir)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest-AOR.json")).unwrap())
            .unwrap();
    let id = manifest["mutants"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["enclosing"] == "Calc.mul()" && m["replacement"] == "right")
        .unwrap()["id"]
        .as_str()
        .unwrap()
        .to_string();
    (dir.join("ledger.jsonl"), id)
}

#[test]
fn viz_marks_all_four_classes() {
    let tmp = tempfile::tempdir().unwrap();
    let (ledger, id) = fig3_ledger(tmp.path());
    let o = impactlab(&[
        "viz",
        p(&corpus("fig3")),
        "--ledger",
        p(&ledger),
        "--mutant",
        &id,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dot = stdout(&o);
    assert!(dot.contains("\"Calc.mul()\" [class=\"mutated\""));
    assert!(dot.contains("\"CalcTest.testMul()\" [class=\"tp\""));
    assert!(dot.contains("\"CalcTest.testPow()\" [class=\"fp\""));
    assert!(dot.contains("\"CalcTest.testOp()\" [class=\"fn\""));
    assert!(dot.contains("// counts: mutated=1 tp=1 fp=1 fn=1"));
}

#[test]
fn viz_unknown_mutant_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let (ledger, _) = fig3_ledger(tmp.path());
    let o = impactlab(&[
        "viz",
        p(&corpus("fig3")),
        "--ledger",
        p(&ledger),
        "--mutant",
        "AOR-0000000000000000-add",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not in the ledger"));
}

#[test]
fn viz_variant_missing_from_ledger_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let (ledger, id) = fig3_ledger(tmp.path());
    let o = impactlab(&[
        "viz",
        p(&corpus("fig3")),
        "--ledger",
        p(&ledger),
        "--mutant",
        &id,
        "--variant",
        "h",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("only for variant(s) B"));
}

#[test]
fn verify_corpus_passes_on_shipped_corpus() {
    let o = impactlab(&["verify-corpus"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(
        stdout(&o).lines().filter(|l| l.ends_with(": pass")).count(),
        6
    );
}

#[test]
fn verify_corpus_reports_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let proj = tmp.path().join("tiny");
    std::fs::create_dir_all(proj.join("src")).unwrap();
    std::fs::write(
        proj.join("src/t.moo"),
        "class T { int one() { return 1; } test void t() { assert(this.one() == 1); } }",
    )
    .unwrap();
    let bless = impactlab(&["verify-corpus", p(tmp.path()), "--bless"]);
    assert!(bless.status.success(), "{}", stderr(&bless));
    assert!(impactlab(&["verify-corpus", p(tmp.path())])
        .status
        .success());

    std::fs::write(
        proj.join("src/t.moo"),
        "class T { int one() { return 1; } int two() { return 2; } test void t() { assert(this.one() == 1); } }",
    )
    .unwrap();
    let o = impactlab(&["verify-corpus", p(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("tiny: FAIL"));
    assert!(stdout(&o).contains("methods: expected 2, found 3"));
}
