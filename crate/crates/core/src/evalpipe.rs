//! End-to-end evaluation: mutate, run, predict, score, aggregate and report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::callgraph::{
    self, dot_id, BuildOptions, CallGraph, FieldOrientation, GraphNode, GraphVariant,
};
use crate::error::{Error, Result};
use crate::frontend::{compile_dir, CheckedProgram, MethodRef};
use crate::impact::{self, classify, metrics, ImpactRecord, MutantCategory, TestSet};
use crate::interpreter::{run_suite, SuiteResult, DEFAULT_STEP_BUDGET};
use crate::mutgen::{self, Manifest, ManifestEntry, MutationOperator, Viability};

/// What happens to mutants whose method has no usable graph node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnboundedPolicy {
    /// Kept in K with zero scores.
    #[default]
    Keep,
    /// Dropped from K; still counted in `n`.
    Exclude,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Maximum mutants per (project, operator).
    pub cap: usize,
    pub seed: u64,
    pub step_budget: u64,
    pub workers: usize,
    pub unbounded: UnboundedPolicy,
    pub field_orientation: FieldOrientation,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            cap: 3000,
            seed: 0,
            step_budget: DEFAULT_STEP_BUDGET,
            workers: default_workers(),
            unbounded: UnboundedPolicy::Keep,
            field_orientation: FieldOrientation::Formal,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cap == 0 {
            return Err(Error::Analysis("cap must be positive".into()));
        }
        if self.step_budget == 0 {
            return Err(Error::Analysis("step budget must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Analysis("worker count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub project: String,
    pub operator: MutationOperator,
    pub variant: GraphVariant,
    pub k: usize,
    pub n: usize,
    pub p_same: f64,
    pub p_complete: f64,
    pub mean_p: f64,
    pub mean_r: f64,
    pub mean_f: f64,
    pub s: usize,
    pub o: usize,
    pub u: usize,
    pub d: usize,
}

/// Killed-mutant records of one (project, operator, variant) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub operator: MutationOperator,
    pub variant: GraphVariant,
    pub ledger: Vec<ImpactRecord>,
    pub report: EvaluationReport,
}

#[derive(Debug, Clone)]
pub struct ProjectEvaluation {
    pub project: String,
    /// Ordered by operator, then variant, in the order requested.
    pub runs: Vec<RunResult>,
    pub manifests: Vec<Manifest>,
    pub baseline: SuiteResult,
    pub graphs: Vec<CallGraph>,
}

impl ProjectEvaluation {
    pub fn run(&self, operator: MutationOperator, variant: GraphVariant) -> Option<&RunResult> {
        self.runs
            .iter()
            .find(|r| r.operator == operator && r.variant == variant)
    }

    pub fn ledger_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for run in &self.runs {
            out.push_str(&ledger_to_jsonl(&run.ledger)?);
        }
        Ok(out)
    }

    pub fn reports(&self) -> Vec<EvaluationReport> {
        self.runs.iter().map(|r| r.report.clone()).collect()
    }
}

pub fn ledger_to_jsonl(records: &[ImpactRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json_line()?);
        out.push('\n');
    }
    Ok(out)
}

pub fn ledger_from_jsonl(text: &str) -> Result<Vec<ImpactRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(ImpactRecord::from_json_line)
        .collect()
}

/// Name of a project directory (its last path component).
pub fn project_name(dir: &Path) -> String {
    dir.canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| dir.display().to_string())
}

/// Runs the original suite and insists that it is green.
pub fn baseline(checked: &CheckedProgram, step_budget: u64) -> Result<SuiteResult> {
    if checked.tests.is_empty() {
        return Err(Error::Project("project has no test methods".into()));
    }
    let suite = run_suite(checked, step_budget)?;
    let failing = suite.failing();
    if !failing.is_empty() {
        let names: Vec<String> = failing.iter().map(|t| t.to_string()).collect();
        return Err(Error::Project(format!(
            "baseline suite is not green; failing: {}",
            names.join(", ")
        )));
    }
    Ok(suite)
}

struct KilledMutant {
    id: String,
    method: MethodRef,
    ais: TestSet,
}

/// Evaluates one project for every requested operator and variant. Each
/// mutant is executed once and its outcome scored against every variant.
pub fn evaluate_checked(
    project: &str,
    checked: &CheckedProgram,
    variants: &[GraphVariant],
    operators: &[MutationOperator],
    config: &EvalConfig,
) -> Result<ProjectEvaluation> {
    config.validate()?;
    let base = baseline(checked, config.step_budget)?;
    let options = BuildOptions {
        field_orientation: config.field_orientation,
    };
    let graphs: Vec<CallGraph> = variants
        .iter()
        .map(|&v| callgraph::build_with(checked, v, options))
        .collect();
    let tests: TestSet = checked.tests.iter().cloned().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .thread_name(|i| format!("impactlab-worker-{i}"))
        .build()
        .map_err(|e| Error::Analysis(format!("cannot start worker pool: {e}")))?;

    let mut runs = Vec::new();
    let mut manifests = Vec::new();
    for &op in operators {
        let mutants = mutgen::sample(&mutgen::all_mutants(checked, op), config.cap, config.seed);
        let outcomes: Vec<Result<(Viability, Option<TestSet>)>> = pool.install(|| {
            mutants
                .par_iter()
                .map(|m| {
                    let run = mutgen::run_mutant(checked, m, &base, config.step_budget)?;
                    let ais = match &run.suite {
                        Some(s) if run.viability == Viability::Killed => {
                            Some(impact::actual(s, &base)?)
                        }
                        _ => None,
                    };
                    Ok((run.viability, ais))
                })
                .collect()
        });

        let mut entries = Vec::with_capacity(mutants.len());
        let mut killed = Vec::new();
        for (m, outcome) in mutants.iter().zip(outcomes) {
            let (viability, ais) = outcome?;
            entries.push(ManifestEntry::new(m, viability));
            if let Some(ais) = ais {
                killed.push(KilledMutant {
                    id: m.id.clone(),
                    method: m.site.enclosing.clone(),
                    ais,
                });
            }
        }
        manifests.push(Manifest {
            project: project.to_string(),
            operator: op,
            seed: config.seed,
            mutants: entries,
        });

        for graph in &graphs {
            let mut ledger = Vec::with_capacity(killed.len());
            let mut excluded = 0;
            for k in &killed {
                let prediction = impact::predict(graph, &k.method, &tests)?;
                let record = ImpactRecord::new(
                    k.id.clone(),
                    graph.variant(),
                    k.method.clone(),
                    k.ais.clone(),
                    prediction,
                );
                if record.unbounded && config.unbounded == UnboundedPolicy::Exclude {
                    excluded += 1;
                } else {
                    ledger.push(record);
                }
            }
            let report = summarize(project, op, graph.variant(), &ledger, excluded)?;
            runs.push(RunResult {
                operator: op,
                variant: graph.variant(),
                ledger,
                report,
            });
        }
    }
    Ok(ProjectEvaluation {
        project: project.to_string(),
        runs,
        manifests,
        baseline: base,
        graphs,
    })
}

/// Loads a project directory and evaluates it.
pub fn evaluate_project(
    dir: &Path,
    variants: &[GraphVariant],
    operators: &[MutationOperator],
    config: &EvalConfig,
) -> Result<ProjectEvaluation> {
    let checked = compile_dir(dir)?;
    evaluate_checked(&project_name(dir), &checked, variants, operators, config)
}

/// Single (project, variant, operator) evaluation.
pub fn evaluate(
    dir: &Path,
    variant: GraphVariant,
    operator: MutationOperator,
    config: &EvalConfig,
) -> Result<(Vec<ImpactRecord>, EvaluationReport)> {
    let mut eval = evaluate_project(dir, &[variant], &[operator], config)?;
    let run = eval.runs.pop().expect("one run per variant and operator");
    Ok((run.ledger, run.report))
}

fn summarize(
    project: &str,
    operator: MutationOperator,
    variant: GraphVariant,
    ledger: &[ImpactRecord],
    excluded_unbounded: usize,
) -> Result<EvaluationReport> {
    let mut counts: BTreeMap<MutantCategory, usize> = BTreeMap::new();
    let (mut sp, mut sr, mut sf) = (0.0, 0.0, 0.0);
    for r in ledger {
        *counts.entry(classify(r)?).or_default() += 1;
        let m = metrics(r);
        sp += m.p();
        sr += m.r();
        sf += m.f();
    }
    let k = ledger.len();
    let n = excluded_unbounded + ledger.iter().filter(|r| r.unbounded).count();
    let c = |cat| counts.get(&cat).copied().unwrap_or(0);
    let (s, o, u, d) = (
        c(MutantCategory::S),
        c(MutantCategory::O),
        c(MutantCategory::U),
        c(MutantCategory::D),
    );
    let ratio = |x: f64| if k == 0 { 0.0 } else { x / k as f64 };
    Ok(EvaluationReport {
        project: project.to_string(),
        operator,
        variant,
        k,
        n,
        p_same: ratio(s as f64),
        p_complete: ratio((s + o) as f64),
        mean_p: ratio(sp),
        mean_r: ratio(sr),
        mean_f: ratio(sf),
        s,
        o,
        u,
        d,
    })
}

/// Means and partition sizes over a non-empty ledger.
pub fn aggregate(
    project: &str,
    operator: MutationOperator,
    variant: GraphVariant,
    ledger: &[ImpactRecord],
) -> Result<EvaluationReport> {
    if ledger.is_empty() {
        return Err(Error::Analysis("cannot aggregate an empty ledger".into()));
    }
    summarize(project, operator, variant, ledger, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub project: String,
    pub variant: GraphVariant,
    pub t_test: Duration,
    pub t_build: Duration,
    pub t_pred_mean: Duration,
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

/// Medians over `repetitions` runs of the suite, of each graph build, and of
/// the mean prediction time with every declared method as the source.
pub fn timings(
    project: &str,
    checked: &CheckedProgram,
    variants: &[GraphVariant],
    repetitions: usize,
    step_budget: u64,
) -> Result<Vec<TimingReport>> {
    if repetitions < 3 {
        return Err(Error::Analysis(
            "timings need at least 3 repetitions".into(),
        ));
    }
    let mut suite_times = Vec::new();
    for _ in 0..repetitions {
        suite_times.push(run_suite(checked, step_budget)?.wall_time);
    }
    let t_test = median(suite_times);
    let tests: TestSet = checked.tests.iter().cloned().collect();
    let sources: Vec<&MethodRef> = checked.methods.keys().collect();
    let mut out = Vec::new();
    for &v in variants {
        let mut builds = Vec::new();
        let mut preds = Vec::new();
        for _ in 0..repetitions {
            let start = Instant::now();
            let g = callgraph::build(checked, v);
            builds.push(start.elapsed());
            let start = Instant::now();
            for m in &sources {
                std::hint::black_box(impact::predict(&g, m, &tests)?);
            }
            preds.push(start.elapsed() / sources.len().max(1) as u32);
        }
        out.push(TimingReport {
            project: project.to_string(),
            variant: v,
            t_test,
            t_build: median(builds),
            t_pred_mean: median(preds),
        });
    }
    Ok(out)
}

pub fn render_timings_csv(reports: &[TimingReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "project",
        "variant",
        "t_test_ms",
        "t_build_ms",
        "t_pred_mean_us",
    ])
    .expect("in-memory csv");
    for t in reports {
        w.write_record([
            t.project.clone(),
            t.variant.to_string(),
            format!("{:.3}", t.t_test.as_secs_f64() * 1e3),
            format!("{:.3}", t.t_build.as_secs_f64() * 1e3),
            format!("{:.3}", t.t_pred_mean.as_secs_f64() * 1e6),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

pub const REPORT_HEADER: [&str; 14] = [
    "project",
    "operator",
    "variant",
    "k",
    "n",
    "p_same",
    "p_complete",
    "mean_p",
    "mean_r",
    "mean_f",
    "s",
    "o",
    "u",
    "d",
];

pub fn render_report(reports: &[EvaluationReport], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(reports),
        ReportFormat::Markdown => render_markdown(reports),
    }
}

fn render_csv(reports: &[EvaluationReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER).expect("in-memory csv");
    for r in reports {
        let f6 = |x: f64| format!("{x:.6}");
        w.write_record([
            r.project.clone(),
            r.operator.to_string(),
            r.variant.to_string(),
            r.k.to_string(),
            r.n.to_string(),
            f6(r.p_same),
            f6(r.p_complete),
            f6(r.mean_p),
            f6(r.mean_r),
            f6(r.mean_f),
            r.s.to_string(),
            r.o.to_string(),
            r.u.to_string(),
            r.d.to_string(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

fn render_markdown(reports: &[EvaluationReport]) -> String {
    let mut best: BTreeMap<(&str, MutationOperator), f64> = BTreeMap::new();
    for r in reports {
        let e = best
            .entry((r.project.as_str(), r.operator))
            .or_insert(f64::NEG_INFINITY);
        *e = e.max(r.mean_f);
    }
    let mut out = String::from(
        "| project | operator | variant | K | N | p_S | p_C | P | R | F |\n\
         |---|---|---|---:|---:|---:|---:|---:|---:|---:|\n",
    );
    for r in reports {
        let f = format!("{:.3}", r.mean_f);
        let f = if r.mean_f == best[&(r.project.as_str(), r.operator)] {
            format!("**{f}**")
        } else {
            f
        };
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {:.3} | {:.3} | {:.3} | {:.3} | {} |",
            r.project,
            r.operator,
            r.variant,
            r.k,
            r.n,
            r.p_same,
            r.p_complete,
            r.mean_p,
            r.mean_r,
            f
        )
        .unwrap();
    }
    out
}

/// Propagation picture for one record: the mutated node, correctly
/// predicted tests, false positives, false negatives and the remaining
/// application nodes each get their own style class.
pub fn render_impact_dot(graph: &CallGraph, record: &ImpactRecord) -> Result<String> {
    if record.variant != graph.variant() {
        return Err(Error::Analysis(format!(
            "record was computed on variant {} but the graph is variant {}",
            record.variant,
            graph.variant()
        )));
    }
    for t in record.ais.iter().chain(&record.cis) {
        if !graph.contains(&GraphNode::Method(t.clone())) {
            return Err(Error::Analysis(format!(
                "test `{t}` is not a node of the graph"
            )));
        }
    }
    let mutated = graph.node_for(&record.method).cloned();
    if mutated.is_none() && !record.unbounded {
        return Err(Error::Analysis(format!(
            "`{}` is not a node of the graph",
            record.method
        )));
    }
    let tp = record.true_positives();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut body = String::new();
    for n in graph.nodes() {
        let (class, attrs) = match n {
            _ if Some(n) == mutated.as_ref() => (
                "mutated",
                "shape=ellipse, style=filled, fillcolor=\"#f4a261\", penwidth=3",
            ),
            GraphNode::Method(m) if tp.contains(m) => {
                ("tp", "shape=box, style=filled, fillcolor=\"#8ac926\"")
            }
            GraphNode::Method(m) if record.fpis.contains(m) => {
                ("fp", "shape=box, style=filled, fillcolor=\"#ffca3a\"")
            }
            GraphNode::Method(m) if record.fnis.contains(m) => (
                "fn",
                "shape=box, style=\"filled,dashed\", fillcolor=\"#ff595e\"",
            ),
            GraphNode::Method(m) if graph.tests().contains(m) => ("test", "shape=box"),
            GraphNode::Method(_) => ("app", "shape=ellipse"),
            GraphNode::Field(_) => ("app", "shape=box, style=rounded"),
        };
        *counts.entry(class).or_default() += 1;
        writeln!(
            body,
            "    {} [class=\"{class}\", {attrs}];",
            dot_id(&n.to_string())
        )
        .unwrap();
    }
    for e in graph.edges() {
        writeln!(
            body,
            "    {} -> {};",
            dot_id(&e.from.to_string()),
            dot_id(&e.to.to_string())
        )
        .unwrap();
    }
    let count = |c: &str| counts.get(c).copied().unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "digraph \"impact\" {{").unwrap();
    writeln!(
        out,
        "    // counts: mutated={} tp={} fp={} fn={} app={} test={}",
        count("mutated"),
        count("tp"),
        count("fp"),
        count("fn"),
        count("app"),
        count("test")
    )
    .unwrap();
    writeln!(
        out,
        "    label={};",
        dot_id(&format!("{} on {}", record.mutant, record.method))
    )
    .unwrap();
    out.push_str(&body);
    out.push_str("}\n");
    Ok(out)
}
