//! The bundled sample projects and their recorded statistics.
//!
//! Layout: `<root>/<name>/src/*.moo` plus `<root>/<name>/expected.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::callgraph::{self, GraphVariant};
use crate::error::{Error, Result};
use crate::frontend::{compile_dir, CheckedProgram};
use crate::interpreter::{run_suite, DEFAULT_STEP_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedStats {
    pub methods: usize,
    pub tests: usize,
    pub graphs: BTreeMap<GraphVariant, GraphStats>,
}

#[derive(Debug, Clone)]
pub struct CorpusProject {
    pub name: String,
    pub dir: PathBuf,
    pub expected: ExpectedStats,
}

impl CorpusProject {
    pub fn src_dir(&self) -> PathBuf {
        self.dir.join("src")
    }

    pub fn compile(&self) -> Result<CheckedProgram> {
        compile_dir(&self.src_dir())
    }
}

/// The corpus shipped with the repository.
pub fn default_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Project directories (those with a `src` subdirectory) under `root`,
/// sorted by name.
pub fn project_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let dir = entry.map_err(|e| Error::io(root, e))?.path();
        if dir.join("src").is_dir() {
            dirs.push(dir);
        }
    }
    if dirs.is_empty() {
        return Err(Error::Project(format!(
            "no corpus projects under `{}`",
            root.display()
        )));
    }
    dirs.sort();
    Ok(dirs)
}

/// Every project under `root` with its recorded statistics.
pub fn load_corpus(root: &Path) -> Result<Vec<CorpusProject>> {
    project_dirs(root)?
        .into_iter()
        .map(|dir| {
            let expected_path = dir.join("expected.json");
            let text = std::fs::read_to_string(&expected_path)
                .map_err(|e| Error::io(&expected_path, e))?;
            let expected: ExpectedStats = serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", expected_path.display())))?;
            let name = dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(CorpusProject {
                name,
                dir,
                expected,
            })
        })
        .collect()
}

/// Statistics of a checked program as recorded in `expected.json`.
pub fn observed_stats(checked: &CheckedProgram) -> ExpectedStats {
    let graphs = GraphVariant::ALL
        .into_iter()
        .map(|v| {
            let g = callgraph::build(checked, v);
            (
                v,
                GraphStats {
                    nodes: g.node_count(),
                    edges: g.edge_count(),
                },
            )
        })
        .collect();
    ExpectedStats {
        methods: checked.methods.len(),
        tests: checked.tests.len(),
        graphs,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectCheck {
    pub name: String,
    pub mismatches: Vec<String>,
}

impl ProjectCheck {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn verify_project(project: &CorpusProject) -> ProjectCheck {
    let mut mismatches = Vec::new();
    match project.compile() {
        Err(e) => mismatches.push(format!("does not compile: {e}")),
        Ok(checked) => {
            match run_suite(&checked, DEFAULT_STEP_BUDGET) {
                Ok(suite) => {
                    for t in suite.failing() {
                        mismatches.push(format!("baseline test {t} fails"));
                    }
                }
                Err(e) => mismatches.push(format!("suite did not run: {e}")),
            }
            let seen = observed_stats(&checked);
            let want = &project.expected;
            if seen.methods != want.methods {
                mismatches.push(format!(
                    "methods: expected {}, found {}",
                    want.methods, seen.methods
                ));
            }
            if seen.tests != want.tests {
                mismatches.push(format!(
                    "tests: expected {}, found {}",
                    want.tests, seen.tests
                ));
            }
            for v in GraphVariant::ALL {
                let s = seen.graphs[&v];
                match want.graphs.get(&v) {
                    None => mismatches.push(format!("no recorded statistics for variant {v}")),
                    Some(w) => {
                        if w.nodes != s.nodes {
                            mismatches.push(format!(
                                "variant {v} nodes: expected {}, found {}",
                                w.nodes, s.nodes
                            ));
                        }
                        if w.edges != s.edges {
                            mismatches.push(format!(
                                "variant {v} edges: expected {}, found {}",
                                w.edges, s.edges
                            ));
                        }
                    }
                }
            }
        }
    }
    ProjectCheck {
        name: project.name.clone(),
        mismatches,
    }
}

pub fn verify_corpus(root: &Path) -> Result<Vec<ProjectCheck>> {
    Ok(load_corpus(root)?.iter().map(verify_project).collect())
}
