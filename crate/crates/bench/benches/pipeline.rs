use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use impactlab::callgraph::{self, GraphVariant};
use impactlab::impact::{self, TestSet};
use impactlab::interpreter::{run_suite, DEFAULT_STEP_BUDGET};
use impactlab::mutgen::{self, MutationOperator};
use impactlab_bench::compiled_corpus;

fn graph_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph_build");
    for (name, checked) in compiled_corpus() {
        for v in GraphVariant::ALL {
            group.bench_with_input(BenchmarkId::new(name.as_str(), v), &v, |b, &v| {
                b.iter(|| callgraph::build(black_box(&checked), v))
            });
        }
    }
    group.finish();
}

fn predict_all_methods(c: &mut Criterion) {
    let mut group = c.benchmark_group("predict_all_methods");
    for (name, checked) in compiled_corpus() {
        let tests: TestSet = checked.tests.iter().cloned().collect();
        for v in GraphVariant::ALL {
            let g = callgraph::build(&checked, v);
            group.bench_function(BenchmarkId::new(name.as_str(), v), |b| {
                b.iter(|| {
                    for m in checked.methods.keys() {
                        black_box(impact::predict(&g, m, &tests).unwrap());
                    }
                })
            });
        }
    }
    group.finish();
}

fn suite_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_suite");
    for (name, checked) in compiled_corpus() {
        group.bench_function(name.as_str(), |b| {
            b.iter(|| run_suite(black_box(&checked), DEFAULT_STEP_BUDGET).unwrap())
        });
    }
    group.finish();
}

fn mutant_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("all_mutants");
    for (name, checked) in compiled_corpus() {
        group.bench_function(name.as_str(), |b| {
            b.iter(|| {
                MutationOperator::ALL
                    .into_iter()
                    .map(|op| mutgen::all_mutants(black_box(&checked), op).len())
                    .sum::<usize>()
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    graph_build,
    predict_all_methods,
    suite_run,
    mutant_enumeration
);
criterion_main!(benches);
