//! Measures how well call-graph reverse reachability predicts the tests a
//! change breaks, using mutants of MiniOO programs as changes and their test
//! suites as ground truth.

pub mod callgraph;
pub mod corpus;
pub mod error;
pub mod evalpipe;
pub mod frontend;
pub mod impact;
pub mod interpreter;
pub mod mutgen;

pub use callgraph::{CallGraph, EdgeKind, FieldOrientation, GraphNode, GraphVariant};
pub use error::{Error, Result};
pub use evalpipe::{EvalConfig, EvaluationReport, UnboundedPolicy};
pub use frontend::{compile_dir, CheckedProgram, FieldRef, MethodRef, NodePath, Program, Type};
pub use impact::{ImpactRecord, MutantCategory, MutantMetrics, Prediction, TestSet};
pub use interpreter::{SuiteResult, TestOutcome, TestStatus, DEFAULT_STEP_BUDGET};
pub use mutgen::{Mutant, MutationOperator, MutationSite, Replacement, Viability};
