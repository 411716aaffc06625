//! Candidate impact sets by reverse reachability, actual impact sets from
//! test runs, and the scores that compare them.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::callgraph::{CallGraph, GraphNode, GraphVariant};
use crate::error::{Error, Result};
use crate::frontend::MethodRef;
use crate::interpreter::SuiteResult;

pub type TestSet = BTreeSet<MethodRef>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub cis: TestSet,
    /// The mutated method has no node, or an isolated one.
    pub unbounded: bool,
}

/// Tests whose node reaches the mutated method's node.
pub fn predict(graph: &CallGraph, mutated: &MethodRef, tests: &TestSet) -> Result<Prediction> {
    if !graph.is_declared(mutated) {
        return Err(Error::Analysis(format!(
            "`{mutated}` is not declared in the program"
        )));
    }
    let unbounded = Prediction {
        cis: TestSet::new(),
        unbounded: true,
    };
    let Some(node) = graph.node_for(mutated) else {
        return Ok(unbounded);
    };
    if graph.is_isolated(node) {
        return Ok(unbounded);
    }
    let start = graph.index_of(node).expect("node_for returns graph nodes");
    let mut seen = vec![false; graph.node_count()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut cis = TestSet::new();
    while let Some(i) = queue.pop_front() {
        if let GraphNode::Method(m) = graph.node(i) {
            if tests.contains(m) {
                cis.insert(m.clone());
            }
        }
        for &p in graph.predecessors(i) {
            if !seen[p] {
                seen[p] = true;
                queue.push_back(p);
            }
        }
    }
    Ok(Prediction {
        cis,
        unbounded: false,
    })
}

/// Tests failing on the mutant that did not fail on the original.
pub fn actual(mutant: &SuiteResult, baseline: &SuiteResult) -> Result<TestSet> {
    if !mutant.outcomes.keys().eq(baseline.outcomes.keys()) {
        return Err(Error::Analysis(
            "mutant and baseline suites cover different tests".into(),
        ));
    }
    let before = baseline.failing();
    Ok(mutant
        .failing()
        .into_iter()
        .filter(|t| !before.contains(t))
        .collect())
}

/// (false-positive set, false-negative set).
pub fn bohner(ais: &TestSet, cis: &TestSet) -> (TestSet, TestSet) {
    (
        cis.difference(ais).cloned().collect(),
        ais.difference(cis).cloned().collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutantCategory {
    S,
    O,
    U,
    D,
}

impl fmt::Display for MutantCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MutantCategory::S => "S",
            MutantCategory::O => "O",
            MutantCategory::U => "U",
            MutantCategory::D => "D",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpactRecord {
    pub mutant: String,
    pub variant: GraphVariant,
    pub method: MethodRef,
    pub ais: TestSet,
    pub cis: TestSet,
    pub fpis: TestSet,
    pub fnis: TestSet,
    pub unbounded: bool,
}

impl ImpactRecord {
    pub fn new(
        mutant: impl Into<String>,
        variant: GraphVariant,
        method: MethodRef,
        ais: TestSet,
        prediction: Prediction,
    ) -> Self {
        let (fpis, fnis) = bohner(&ais, &prediction.cis);
        ImpactRecord {
            mutant: mutant.into(),
            variant,
            method,
            ais,
            cis: prediction.cis,
            fpis,
            fnis,
            unbounded: prediction.unbounded,
        }
    }

    pub fn true_positives(&self) -> TestSet {
        self.ais.intersection(&self.cis).cloned().collect()
    }

    /// One ledger line (no trailing newline).
    pub fn to_json_line(&self) -> Result<String> {
        let m = metrics(self);
        let line = LedgerLine {
            mutant: self.mutant.clone(),
            variant: self.variant,
            method: self.method.clone(),
            ais: self.ais.clone(),
            cis: self.cis.clone(),
            fpis: self.fpis.clone(),
            fnis: self.fnis.clone(),
            unbounded: self.unbounded,
            category: classify(self)?,
            p: m.p(),
            r: m.r(),
            f: m.f(),
        };
        Ok(serde_json::to_string(&line)?)
    }

    /// Parses a ledger line and checks its derived fields.
    pub fn from_json_line(line: &str) -> Result<ImpactRecord> {
        let l: LedgerLine = serde_json::from_str(line)?;
        let (fpis, fnis) = bohner(&l.ais, &l.cis);
        if fpis != l.fpis || fnis != l.fnis {
            return Err(Error::Format(format!(
                "ledger line for `{}` has inconsistent fpis/fnis",
                l.mutant
            )));
        }
        let record = ImpactRecord {
            mutant: l.mutant,
            variant: l.variant,
            method: l.method,
            ais: l.ais,
            cis: l.cis,
            fpis,
            fnis,
            unbounded: l.unbounded,
        };
        if classify(&record)? != l.category {
            return Err(Error::Format(format!(
                "ledger line for `{}` has the wrong category",
                record.mutant
            )));
        }
        Ok(record)
    }
}

#[derive(Serialize, Deserialize)]
struct LedgerLine {
    mutant: String,
    variant: GraphVariant,
    method: MethodRef,
    ais: TestSet,
    cis: TestSet,
    fpis: TestSet,
    fnis: TestSet,
    unbounded: bool,
    category: MutantCategory,
    p: f64,
    r: f64,
    f: f64,
}

/// Category of a killed mutant's prediction. Unbounded mutants are `U`.
pub fn classify(record: &ImpactRecord) -> Result<MutantCategory> {
    if record.ais.is_empty() {
        return Err(Error::Analysis(format!(
            "mutant `{}` broke no test and cannot be classified",
            record.mutant
        )));
    }
    if record.unbounded {
        return Ok(MutantCategory::U);
    }
    Ok(match (record.fpis.is_empty(), record.fnis.is_empty()) {
        (true, true) => MutantCategory::S,
        (false, true) => MutantCategory::O,
        (true, false) => MutantCategory::U,
        (false, false) => MutantCategory::D,
    })
}

/// Exact precision, recall and F-score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MutantMetrics {
    pub precision: Ratio<u64>,
    pub recall: Ratio<u64>,
    pub f_score: Ratio<u64>,
}

fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl MutantMetrics {
    pub const ZERO: MutantMetrics = MutantMetrics {
        precision: Ratio::new_raw(0, 1),
        recall: Ratio::new_raw(0, 1),
        f_score: Ratio::new_raw(0, 1),
    };

    pub fn p(&self) -> f64 {
        to_f64(self.precision)
    }

    pub fn r(&self) -> f64 {
        to_f64(self.recall)
    }

    pub fn f(&self) -> f64 {
        to_f64(self.f_score)
    }
}

pub fn metrics(record: &ImpactRecord) -> MutantMetrics {
    if record.unbounded || record.cis.is_empty() || record.ais.is_empty() {
        return MutantMetrics::ZERO;
    }
    let hit = record.ais.intersection(&record.cis).count() as u64;
    let (a, c) = (record.ais.len() as u64, record.cis.len() as u64);
    let precision = Ratio::new(hit, c);
    let recall = Ratio::new(hit, a);
    let zero = Ratio::from_integer(0);
    let f_score = if precision + recall == zero {
        zero
    } else {
        Ratio::from_integer(2) * precision * recall / (precision + recall)
    };
    MutantMetrics {
        precision,
        recall,
        f_score,
    }
}
