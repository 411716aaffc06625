//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs sequentially so the timing criteria are not skewed
//! by other tests sharing the machine.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use impactlab::callgraph::{self, EdgeKind, GraphNode, GraphVariant};
use impactlab::corpus::{self, CorpusProject};
use impactlab::evalpipe::{self, EvalConfig, ProjectEvaluation, ReportFormat};
use impactlab::frontend::ast::{BinOp, ExprKind};
use impactlab::frontend::{method_at, CheckedProgram, FieldRef, MethodRef, NodeRef};
use impactlab::impact::{self, ImpactRecord, MutantMetrics, Prediction, TestSet};
use impactlab::interpreter::{run_suite, TestStatus, DEFAULT_STEP_BUDGET};
use impactlab::mutgen::{self, MutationOperator, Replacement, SiteKind, Viability};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn mref(s: &str) -> MethodRef {
    s.parse().unwrap()
}

fn tests_of(names: &[&str]) -> TestSet {
    names.iter().map(|s| mref(s)).collect()
}

fn project(name: &str) -> CorpusProject {
    corpus::load_corpus(&corpus::default_root())
        .unwrap()
        .into_iter()
        .find(|p| p.name == name)
        .unwrap_or_else(|| panic!("corpus project {name} missing"))
}

fn compile(name: &str) -> CheckedProgram {
    project(name).compile().unwrap()
}

/// Category from set relations, independent of `impact::classify`.
fn category_oracle(r: &ImpactRecord) -> char {
    if r.unbounded {
        return 'U';
    }
    let missed = r.ais.difference(&r.cis).next().is_some();
    let extra = r.cis.difference(&r.ais).next().is_some();
    match (extra, missed) {
        (false, false) => 'S',
        (true, false) => 'O',
        (false, true) => 'U',
        (true, true) => 'D',
    }
}

/// Recall as an exact ratio, independent of `impact::metrics`.
fn recall_oracle(r: &ImpactRecord) -> Ratio<u64> {
    if r.unbounded || r.ais.is_empty() {
        return Ratio::from_integer(0);
    }
    let tp = r.ais.intersection(&r.cis).count() as u64;
    Ratio::new(tp, r.ais.len() as u64)
}

// 1
fn fig3_end_to_end() -> Outcome {
    let start = Instant::now();
    let checked = compile("fig3");
    let mul = mref("Calc.mul()");
    let mutant = mutgen::all_mutants(&checked, MutationOperator::AOR)
        .into_iter()
        .find(|m| m.site.enclosing == mul && m.replacement == Replacement::Right)
        .ok_or("no AOR right mutant in Calc.mul")?;
    let baseline = run_suite(&checked, DEFAULT_STEP_BUDGET).map_err(|e| e.to_string())?;
    let run = mutgen::run_mutant(&checked, &mutant, &baseline, DEFAULT_STEP_BUDGET)
        .map_err(|e| e.to_string())?;
    ensure!(
        run.viability == Viability::Killed,
        "mutant not killed: {:?}",
        run.viability
    );
    let ais = impact::actual(run.suite.as_ref().unwrap(), &baseline).map_err(|e| e.to_string())?;
    let graph = callgraph::build(&checked, GraphVariant::B);
    let tests: TestSet = checked.tests.iter().cloned().collect();
    let pred = impact::predict(&graph, &mul, &tests).map_err(|e| e.to_string())?;
    let record = ImpactRecord::new(mutant.id.clone(), GraphVariant::B, mul, ais, pred);
    let elapsed = start.elapsed();

    ensure!(
        record.ais == tests_of(&["CalcTest.testMul()", "CalcTest.testOp()"]),
        "AIS {:?}",
        record.ais
    );
    ensure!(
        record.cis == tests_of(&["CalcTest.testMul()", "CalcTest.testPow()"]),
        "CIS {:?}",
        record.cis
    );
    ensure!(
        record.fpis == tests_of(&["CalcTest.testPow()"]),
        "FPIS {:?}",
        record.fpis
    );
    ensure!(
        record.fnis == tests_of(&["CalcTest.testOp()"]),
        "FNIS {:?}",
        record.fnis
    );
    let cat = impact::classify(&record).map_err(|e| e.to_string())?;
    ensure!(cat == impact::MutantCategory::D, "category {cat:?}");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("category D in {elapsed:.2?}"))
}

// 2
fn fig2_structure() -> Outcome {
    let checked = compile("fig2");
    let b = callgraph::build(&checked, GraphVariant::B);
    let h = callgraph::build(&checked, GraphVariant::H);
    let f = callgraph::build(&checked, GraphVariant::F);
    let a_foo = GraphNode::Method(mref("A.foo()"));
    let b_foo = GraphNode::Method(mref("B.foo()"));
    let pairs = |g: &callgraph::CallGraph| -> BTreeSet<(GraphNode, GraphNode, EdgeKind)> {
        g.edges()
            .map(|e| (e.from.clone(), e.to.clone(), e.kind))
            .collect()
    };
    let (eb, eh, ef) = (pairs(&b), pairs(&h), pairs(&f));
    ensure!(
        eh.contains(&(a_foo.clone(), b_foo.clone(), EdgeKind::Override)),
        "H lacks A.foo()->B.foo()"
    );
    ensure!(
        !eb.iter().any(|(x, y, _)| *x == a_foo && *y == b_foo),
        "B has A.foo()->B.foo()"
    );

    let hn: BTreeSet<_> = h.nodes().iter().cloned().collect();
    let extra_nodes: Vec<_> = f.nodes().iter().filter(|n| !hn.contains(n)).collect();
    let bar = GraphNode::Field(FieldRef::new("C", "bar"));
    ensure!(extra_nodes == vec![&bar], "F adds nodes {extra_nodes:?}");
    let extra_edges: Vec<_> = ef.difference(&eh).collect();
    ensure!(extra_edges.len() == 2, "F adds {} edges", extra_edges.len());
    let reads: Vec<_> = extra_edges
        .iter()
        .filter(|e| e.2 == EdgeKind::FieldRead)
        .collect();
    let writes: Vec<_> = extra_edges
        .iter()
        .filter(|e| e.2 == EdgeKind::FieldWrite)
        .collect();
    ensure!(
        reads.len() == 1 && writes.len() == 1,
        "reads {reads:?} writes {writes:?}"
    );
    let reader = GraphNode::Method(mref("C.biz1()"));
    let writer = GraphNode::Method(mref("C.biz2()"));
    ensure!(
        reads[0].0 == reader && reads[0].1 == bar,
        "read edge {:?}",
        reads[0]
    );
    ensure!(
        writes[0].0 == bar && writes[0].1 == writer,
        "write edge {:?}",
        writes[0]
    );
    ensure!(eh.is_subset(&ef), "F drops an H edge");
    Ok("override edge in H only; F adds C#bar with one read and one write".into())
}

struct Sweep {
    evaluations: Vec<ProjectEvaluation>,
    elapsed: Duration,
}

fn sweep() -> Sweep {
    let start = Instant::now();
    let evaluations = corpus::load_corpus(&corpus::default_root())
        .unwrap()
        .iter()
        .map(|p| {
            let checked = p.compile().unwrap();
            evalpipe::evaluate_checked(
                &p.name,
                &checked,
                &GraphVariant::ALL,
                &MutationOperator::ALL,
                &EvalConfig::default(),
            )
            .unwrap()
        })
        .collect();
    Sweep {
        evaluations,
        elapsed: start.elapsed(),
    }
}

// 3
fn partition_identity(sweep: &Sweep) -> Outcome {
    let mut runs = 0;
    for eval in &sweep.evaluations {
        for run in &eval.runs {
            let r = &run.report;
            let tag = format!("{}/{}/{}", r.project, r.operator, r.variant);
            ensure!(
                r.s + r.o + r.u + r.d == r.k,
                "{tag}: {}+{}+{}+{} != {}",
                r.s,
                r.o,
                r.u,
                r.d,
                r.k
            );
            ensure!(
                r.k == run.ledger.len(),
                "{tag}: K {} vs ledger {}",
                r.k,
                run.ledger.len()
            );
            let mut counts = BTreeMap::new();
            for rec in &run.ledger {
                *counts.entry(category_oracle(rec)).or_insert(0usize) += 1;
            }
            let c = |k| counts.get(&k).copied().unwrap_or(0);
            ensure!(
                (c('S'), c('O'), c('U'), c('D')) == (r.s, r.o, r.u, r.d),
                "{tag}: oracle partition differs"
            );
            runs += 1;
        }
        ensure!(
            eval.runs.len() == 20,
            "{}: {} runs",
            eval.project,
            eval.runs.len()
        );
    }
    ensure!(
        sweep.elapsed < Duration::from_secs(120),
        "sweep took {:?}",
        sweep.elapsed
    );
    Ok(format!("{runs} runs, sweep {:.1?}", sweep.elapsed))
}

// 4
fn node_and_edge_monotonicity() -> Outcome {
    let projects = corpus::load_corpus(&corpus::default_root()).map_err(|e| e.to_string())?;
    for p in &projects {
        let checked = p.compile().map_err(|e| e.to_string())?;
        let g: Vec<_> = [GraphVariant::B, GraphVariant::H, GraphVariant::F]
            .into_iter()
            .map(|v| callgraph::build(&checked, v))
            .collect();
        let edges: Vec<BTreeSet<(GraphNode, GraphNode)>> = g
            .iter()
            .map(|g| g.edges().map(|e| (e.from.clone(), e.to.clone())).collect())
            .collect();
        ensure!(
            g[0].nodes() == g[1].nodes(),
            "{}: nodes(B) != nodes(H)",
            p.name
        );
        ensure!(
            edges[0].is_subset(&edges[1]),
            "{}: edges(B) not within edges(H)",
            p.name
        );
        ensure!(
            edges[1].is_subset(&edges[2]),
            "{}: edges(H) not within edges(F)",
            p.name
        );
    }
    Ok(format!("{} projects", projects.len()))
}

// 5
fn recall_monotonicity(sweep: &Sweep) -> Outcome {
    let mut checked_mutants = 0;
    for eval in &sweep.evaluations {
        for op in MutationOperator::ALL {
            let run = |v| eval.run(op, v).expect("run present");
            let (b, h, f) = (
                run(GraphVariant::B),
                run(GraphVariant::H),
                run(GraphVariant::F),
            );
            let tag = format!("{}/{}", eval.project, op);
            ensure!(
                b.report.p_complete <= h.report.p_complete
                    && h.report.p_complete <= f.report.p_complete,
                "{tag}: p_C {} {} {}",
                b.report.p_complete,
                h.report.p_complete,
                f.report.p_complete
            );
            let by_id = |run: &evalpipe::RunResult| -> BTreeMap<String, ImpactRecord> {
                run.ledger
                    .iter()
                    .map(|r| (r.mutant.clone(), r.clone()))
                    .collect()
            };
            let (hm, fm) = (by_id(h), by_id(f));
            for rb in b.ledger.iter().filter(|r| !r.unbounded) {
                let rh = hm
                    .get(&rb.mutant)
                    .ok_or(format!("{tag}: {} missing in H", rb.mutant))?;
                let rf = fm
                    .get(&rb.mutant)
                    .ok_or(format!("{tag}: {} missing in F", rb.mutant))?;
                let (xb, xh, xf) = (recall_oracle(rb), recall_oracle(rh), recall_oracle(rf));
                ensure!(
                    xb <= xh && xh <= xf,
                    "{tag}: {} recall {xb} {xh} {xf}",
                    rb.mutant
                );
                let lib = [rb, rh, rf].map(|r| impact::metrics(r).recall);
                ensure!(
                    lib == [xb, xh, xf],
                    "{tag}: {} library recall {lib:?}",
                    rb.mutant
                );
                checked_mutants += 1;
            }
        }
    }
    Ok(format!("{checked_mutants} bound mutants"))
}

// 6
fn fig4_metrics() -> Outcome {
    let test = |i: usize| mref(&format!("T.t{i}()"));
    // 7 hits, 7 misses, 23 false alarms.
    let ais: TestSet = (0..14).map(test).collect();
    let cis: TestSet = (0..7).chain(14..37).map(test).collect();
    let rec = ImpactRecord::new(
        "fig4",
        GraphVariant::B,
        mref("T.m()"),
        ais,
        Prediction {
            cis,
            unbounded: false,
        },
    );
    ensure!(
        rec.true_positives().len() == 7,
        "TP {}",
        rec.true_positives().len()
    );
    ensure!(
        rec.fpis.len() == 23 && rec.fnis.len() == 7,
        "FP {} FN {}",
        rec.fpis.len(),
        rec.fnis.len()
    );
    let m = impact::metrics(&rec);
    let p = Ratio::new(7u64, 7 + 23);
    let r = Ratio::new(7u64, 7 + 7);
    let f = Ratio::from_integer(2) * p * r / (p + r);
    ensure!(
        m.precision == p && p == Ratio::new(7, 30),
        "P {}",
        m.precision
    );
    ensure!(m.recall == r && r == Ratio::new(1, 2), "R {}", m.recall);
    ensure!(m.f_score == f && f == Ratio::new(7, 22), "F {}", m.f_score);
    Ok(format!("P={} R={} F={}", m.precision, m.recall, m.f_score))
}

// 7
fn unbounded_handling(sweep: &Sweep) -> Outcome {
    let magic = mref("Account.magic()");
    let bank = sweep
        .evaluations
        .iter()
        .find(|e| e.project == "bank")
        .ok_or("bank not evaluated")?;
    let mut seen = 0;
    for run in &bank.runs {
        let graph = bank
            .graphs
            .iter()
            .find(|g| g.variant() == run.variant)
            .ok_or("graph missing")?;
        let node = GraphNode::Method(magic.clone());
        ensure!(
            graph.is_isolated(&node),
            "{}: Account.magic() not isolated",
            run.variant
        );
        let hits: Vec<_> = run.ledger.iter().filter(|r| r.method == magic).collect();
        for r in &hits {
            ensure!(r.unbounded, "{}: {} bounded", run.variant, r.mutant);
            ensure!(
                impact::metrics(r) == MutantMetrics::ZERO,
                "{}: nonzero metrics",
                r.mutant
            );
            let cat = impact::classify(r).map_err(|e| e.to_string())?;
            ensure!(
                cat == impact::MutantCategory::U,
                "{}: category {cat:?}",
                r.mutant
            );
        }
        let unbounded = run.ledger.iter().filter(|r| r.unbounded).count();
        ensure!(
            run.report.n == unbounded,
            "{}/{}: N {} vs {unbounded}",
            run.operator,
            run.variant,
            run.report.n
        );
        ensure!(
            unbounded >= hits.len(),
            "N does not cover Account.magic() mutants"
        );
        seen += hits.len();
    }
    ensure!(seen > 0, "no killed mutant in Account.magic()");
    Ok(format!(
        "{seen} killed records in Account.magic(), all unbounded"
    ))
}

// 8
fn variant_s_absence(sweep: &Sweep) -> Outcome {
    let checked = compile("shapes");
    let shapes = sweep
        .evaluations
        .iter()
        .find(|e| e.project == "shapes")
        .ok_or("shapes not evaluated")?;
    let mut witnesses = Vec::new();
    for op in MutationOperator::ALL {
        let s = shapes.run(op, GraphVariant::S).ok_or("no S run")?;
        let b = shapes.run(op, GraphVariant::B).ok_or("no B run")?;
        let bound_b: BTreeSet<&str> = b
            .ledger
            .iter()
            .filter(|r| !r.unbounded)
            .map(|r| r.mutant.as_str())
            .collect();
        for r in &s.ledger {
            if r.unbounded
                && checked.overridden(&r.method).is_some()
                && bound_b.contains(r.mutant.as_str())
            {
                witnesses.push(r.mutant.clone());
            }
        }
    }
    ensure!(
        !witnesses.is_empty(),
        "no overriding-method mutant unbounded under S and bound under B"
    );
    Ok(format!(
        "{} witnesses, e.g. {}",
        witnesses.len(),
        witnesses[0]
    ))
}

/// Every test that has some path to `source`, by enumerating simple paths.
fn all_paths_oracle(
    n: usize,
    edges: &[(usize, usize)],
    tests: &[usize],
    source: usize,
) -> BTreeSet<usize> {
    fn dfs(at: usize, target: usize, adj: &[Vec<usize>], on_path: &mut Vec<bool>) -> bool {
        if at == target {
            return true;
        }
        on_path[at] = true;
        let mut found = false;
        for &nx in &adj[at] {
            if !on_path[nx] && dfs(nx, target, adj, on_path) {
                found = true;
                break;
            }
        }
        on_path[at] = false;
        found
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    tests
        .iter()
        .copied()
        .filter(|&t| dfs(t, source, &adj, &mut vec![false; n]))
        .collect()
}

// 9
fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2b);
    let graphs = 250;
    let mut predictions = 0;
    for g in 0..graphs {
        let n = rng.gen_range(1..=12);
        let methods: Vec<MethodRef> = (0..n).map(|i| mref(&format!("G.m{i}()"))).collect();
        let density = rng.gen_range(0.0..0.4);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(density) {
                    edges.push((a, b));
                }
            }
        }
        let tests: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
        let test_set: TestSet = tests.iter().map(|&i| methods[i].clone()).collect();
        let graph = callgraph::CallGraph::from_parts(
            GraphVariant::B,
            methods.iter().cloned().map(GraphNode::Method),
            edges.iter().map(|&(a, b)| {
                (
                    GraphNode::Method(methods[a].clone()),
                    GraphNode::Method(methods[b].clone()),
                    EdgeKind::Call,
                )
            }),
            test_set.iter().cloned(),
        )
        .map_err(|e| e.to_string())?;
        for source in 0..n {
            let pred =
                impact::predict(&graph, &methods[source], &test_set).map_err(|e| e.to_string())?;
            let isolated = !edges.iter().any(|&(a, b)| a == source || b == source);
            let want: TestSet = if isolated {
                TestSet::new()
            } else {
                all_paths_oracle(n, &edges, &tests, source)
                    .into_iter()
                    .map(|i| methods[i].clone())
                    .collect()
            };
            ensure!(
                pred.unbounded == isolated,
                "graph {g} source {source}: unbounded {}",
                pred.unbounded
            );
            ensure!(
                pred.cis == want,
                "graph {g} source {source}: CIS {:?} vs {:?}",
                pred.cis,
                want
            );
            predictions += 1;
        }
    }
    Ok(format!("{graphs} graphs, {predictions} sources"))
}

/// Binary-operator sites per group, found by walking the AST directly.
fn binary_sites_oracle(checked: &CheckedProgram) -> BTreeMap<&'static str, usize> {
    let mut counts = BTreeMap::new();
    checked.program.walk(|path, node| {
        let NodeRef::Expr(e) = node else { return };
        let ExprKind::Binary { op, .. } = &e.kind else {
            return;
        };
        let Ok(m) = method_at(checked, path) else {
            return;
        };
        if checked.is_test(&m) {
            return;
        }
        let group = match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => "arith",
            BinOp::And | BinOp::Or => "logical",
            _ => "relational",
        };
        *counts.entry(group).or_insert(0) += 1;
    });
    counts
}

// 10
fn mutant_cardinalities() -> Outcome {
    let want = |op: MutationOperator, kind: SiteKind| match (op, kind) {
        (MutationOperator::AOR, SiteKind::ArithBinary) => Some(6),
        (MutationOperator::LCR, SiteKind::LogicalBinary) => Some(5),
        (MutationOperator::ROR, SiteKind::RelationalBinary) => Some(7),
        (MutationOperator::ABS, SiteKind::NumericExpr) => Some(1),
        (MutationOperator::UOI, SiteKind::NumericExpr) => Some(3),
        (MutationOperator::UOI, SiteKind::BoolExpr) => Some(1),
        _ => None,
    };
    let mut totals: BTreeMap<String, usize> = BTreeMap::new();
    for p in corpus::load_corpus(&corpus::default_root()).map_err(|e| e.to_string())? {
        let checked = p.compile().map_err(|e| e.to_string())?;
        let oracle = binary_sites_oracle(&checked);
        for op in MutationOperator::ALL {
            let sites = mutgen::sites(&checked, op);
            let mut per_site: BTreeMap<_, usize> = BTreeMap::new();
            for m in mutgen::all_mutants(&checked, op) {
                *per_site.entry(m.site.path.clone()).or_default() += 1;
            }
            ensure!(
                per_site.len() == sites.len(),
                "{}/{op}: mutants at {} of {} sites",
                p.name,
                per_site.len(),
                sites.len()
            );
            for site in &sites {
                let expected = want(op, site.kind).ok_or(format!(
                    "{}/{op}: unexpected site kind {:?}",
                    p.name, site.kind
                ))?;
                let got = per_site.get(&site.path).copied().unwrap_or(0);
                ensure!(
                    got == expected,
                    "{}/{op} at {:?}: {got} mutants, expected {expected}",
                    p.name,
                    site.path
                );
                *totals.entry(format!("{op}/{:?}", site.kind)).or_default() += 1;
            }
            let group = match op {
                MutationOperator::AOR => Some("arith"),
                MutationOperator::LCR => Some("logical"),
                MutationOperator::ROR => Some("relational"),
                _ => None,
            };
            if let Some(g) = group {
                let o = oracle.get(g).copied().unwrap_or(0);
                ensure!(
                    sites.len() == o,
                    "{}/{op}: {} sites, AST walk finds {o}",
                    p.name,
                    sites.len()
                );
            }
        }
    }
    for key in [
        "AOR/ArithBinary",
        "LCR/LogicalBinary",
        "ROR/RelationalBinary",
        "ABS/NumericExpr",
        "UOI/NumericExpr",
        "UOI/BoolExpr",
    ] {
        ensure!(
            totals.get(key).copied().unwrap_or(0) > 0,
            "corpus has no {key} site"
        );
    }
    Ok(format!("{} sites checked", totals.values().sum::<usize>()))
}

// 11
fn timeout_kill() -> Outcome {
    let checked = compile("numeric");
    let sum_to = mref("Num.sumTo(int)");
    let guard = mutgen::sites(&checked, MutationOperator::ROR)
        .into_iter()
        .find(|s| s.enclosing == sum_to)
        .ok_or("no ROR site in Num.sumTo")?;
    match checked.program.node_at(&guard.path) {
        Some(NodeRef::Expr(e)) if matches!(e.kind, ExprKind::Binary { op: BinOp::Le, .. }) => {}
        other => {
            return Err(format!(
                "first ROR site in Num.sumTo is not `<=`: {other:?}"
            ))
        }
    }
    let mutant = mutgen::mutants_at(&checked, &guard, MutationOperator::ROR)
        .into_iter()
        .find(|m| m.replacement == Replacement::True)
        .ok_or("no ROR true mutant")?;
    let budget = DEFAULT_STEP_BUDGET;
    let baseline = run_suite(&checked, budget).map_err(|e| e.to_string())?;
    let run =
        mutgen::run_mutant(&checked, &mutant, &baseline, budget).map_err(|e| e.to_string())?;
    ensure!(
        run.viability == Viability::Killed,
        "viability {:?}",
        run.viability
    );
    let suite = run.suite.ok_or("no suite result")?;
    let timeouts: Vec<_> = suite
        .outcomes
        .values()
        .filter(|o| o.status == TestStatus::Timeout)
        .collect();
    ensure!(!timeouts.is_empty(), "no test timed out");
    for o in &timeouts {
        ensure!(
            o.steps_used == budget,
            "{} used {} of {budget} steps",
            o.test,
            o.steps_used
        );
        ensure!(
            baseline.outcomes[&o.test].status == TestStatus::Pass,
            "{} failed on baseline",
            o.test
        );
    }
    Ok(format!("{} ({} timeout(s))", mutant.id, timeouts.len()))
}

// 12
fn speed_ratio() -> Outcome {
    let mut worst = f64::INFINITY;
    for p in corpus::load_corpus(&corpus::default_root()).map_err(|e| e.to_string())? {
        let checked = p.compile().map_err(|e| e.to_string())?;
        let reports = evalpipe::timings(
            &p.name,
            &checked,
            &GraphVariant::ALL,
            3,
            DEFAULT_STEP_BUDGET,
        )
        .map_err(|e| e.to_string())?;
        for t in reports {
            let tag = format!("{}/{}", t.project, t.variant);
            ensure!(
                t.t_pred_mean * 10 <= t.t_test,
                "{tag}: predict {:?} vs suite {:?}",
                t.t_pred_mean,
                t.t_test
            );
            ensure!(
                t.t_build < t.t_test,
                "{tag}: build {:?} vs suite {:?}",
                t.t_build,
                t.t_test
            );
            let ratio = t.t_test.as_secs_f64() / t.t_pred_mean.as_secs_f64().max(1e-9);
            worst = worst.min(ratio);
        }
    }
    Ok(format!("smallest suite/predict ratio {worst:.0}x"))
}

// 13
fn determinism() -> Outcome {
    let mut compared = 0;
    for name in ["fig3", "bank", "numeric"] {
        let checked = compile(name);
        let outputs: Vec<(String, String, String)> = [1, 4]
            .into_iter()
            .map(|workers| {
                let config = EvalConfig {
                    workers,
                    ..EvalConfig::default()
                };
                let eval = evalpipe::evaluate_checked(
                    name,
                    &checked,
                    &GraphVariant::ALL,
                    &MutationOperator::ALL,
                    &config,
                )
                .unwrap();
                let manifests: String = eval.manifests.iter().map(|m| m.to_json()).collect();
                let mut ledger = eval.ledger_jsonl().unwrap();
                ledger.push_str(&manifests);
                (
                    ledger,
                    evalpipe::render_report(&eval.reports(), ReportFormat::Csv),
                    evalpipe::render_report(&eval.reports(), ReportFormat::Markdown),
                )
            })
            .collect();
        ensure!(
            outputs[0].0 == outputs[1].0,
            "{name}: ledgers differ between 1 and 4 workers"
        );
        ensure!(outputs[0].1 == outputs[1].1, "{name}: CSV reports differ");
        ensure!(
            outputs[0].2 == outputs[1].2,
            "{name}: Markdown reports differ"
        );
        ensure!(!outputs[0].0.is_empty(), "{name}: empty ledger");
        compared += 1;
    }
    Ok(format!(
        "{compared} projects byte-identical at 1 and 4 workers"
    ))
}

fn main() {
    let sweep = sweep();
    let criteria: Vec<Criterion> = vec![
        ("fig3 end-to-end", Box::new(fig3_end_to_end)),
        ("fig2 structure", Box::new(fig2_structure)),
        (
            "partition identity over full sweep",
            Box::new(|| partition_identity(&sweep)),
        ),
        (
            "node-set equality and edge monotonicity",
            Box::new(node_and_edge_monotonicity),
        ),
        (
            "recall and completeness monotonicity",
            Box::new(|| recall_monotonicity(&sweep)),
        ),
        ("fig4 metric arithmetic", Box::new(fig4_metrics)),
        (
            "unbounded handling",
            Box::new(|| unbounded_handling(&sweep)),
        ),
        ("variant S absence", Box::new(|| variant_s_absence(&sweep))),
        ("predict vs all-paths oracle", Box::new(oracle_equivalence)),
        ("mutant cardinalities", Box::new(mutant_cardinalities)),
        ("timeout kill", Box::new(timeout_kill)),
        ("speed ratio", Box::new(speed_ratio)),
        ("determinism across worker counts", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
