//! Shared fixtures for the criterion benches.

use impactlab::corpus;
use impactlab::frontend::CheckedProgram;

/// Every bundled project, compiled, by name.
pub fn compiled_corpus() -> Vec<(String, CheckedProgram)> {
    corpus::load_corpus(&corpus::default_root())
        .expect("bundled corpus loads")
        .into_iter()
        .map(|p| {
            let checked = p.compile().expect("corpus project compiles");
            (p.name, checked)
        })
        .collect()
}
