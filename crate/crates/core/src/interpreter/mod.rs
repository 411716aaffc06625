//! Deterministic evaluator and test runner.
//!
//! Every statement and expression evaluation consumes one step. A test that
//! reaches its step budget stops with [`TestStatus::Timeout`], which stands
//! in for a wall-clock timeout on a hanging test.

mod eval;
mod lower;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::{CheckedProgram, MethodRef};

use eval::{Halt, Machine};
use lower::Runtime;

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// Evaluation runs on a dedicated thread with this much stack so that the
/// call depth limit, not the host stack, bounds recursion.
const EVAL_STACK_BYTES: usize = 256 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestStatus {
    Pass,
    AssertFail,
    RuntimeError,
    Timeout,
}

impl TestStatus {
    pub fn is_failing(self) -> bool {
        self != TestStatus::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: MethodRef,
    pub status: TestStatus,
    pub steps_used: u64,
    /// Runtime error message, when there is one.
    pub detail: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub outcomes: BTreeMap<MethodRef, TestOutcome>,
    pub wall_time: Duration,
}

impl SuiteResult {
    pub fn failing(&self) -> BTreeSet<MethodRef> {
        self.outcomes
            .values()
            .filter(|o| o.status.is_failing())
            .map(|o| o.test.clone())
            .collect()
    }

    pub fn all_pass(&self) -> bool {
        self.outcomes.values().all(|o| !o.status.is_failing())
    }
}

fn on_eval_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("impactlab-eval".into())
            .stack_size(EVAL_STACK_BYTES)
            .spawn_scoped(s, f)
            .expect("spawn evaluation thread")
            .join()
            .expect("evaluation thread panicked")
    })
}

fn run_one(rt: &Runtime, checked: &CheckedProgram, test: &MethodRef, budget: u64) -> TestOutcome {
    let mut m = Machine::new(rt, budget);
    let result = (|| {
        m.init_statics()?;
        let id = rt.method_ids[test];
        let this = if checked.methods[test].is_static {
            None
        } else {
            Some(m.instantiate(rt.class_ids[&test.owner])?)
        };
        m.invoke(id, this, Vec::new())
    })();
    let (status, detail) = match result {
        Ok(_) => (TestStatus::Pass, None),
        Err(Halt::AssertFail) => (TestStatus::AssertFail, None),
        Err(Halt::Runtime(msg)) => (TestStatus::RuntimeError, Some(msg)),
        Err(Halt::Timeout) => (TestStatus::Timeout, None),
    };
    TestOutcome {
        test: test.clone(),
        status,
        steps_used: m.steps,
        detail,
    }
}

fn check_budget(step_budget: u64) -> Result<()> {
    if step_budget == 0 {
        return Err(Error::Analysis("step budget must be positive".into()));
    }
    Ok(())
}

/// Runs one test on fresh program state.
pub fn run_test(
    checked: &CheckedProgram,
    test: &MethodRef,
    step_budget: u64,
) -> Result<TestOutcome> {
    check_budget(step_budget)?;
    if !checked.tests.contains(test) {
        return Err(Error::Analysis(format!("`{test}` is not a test method")));
    }
    Ok(on_eval_thread(|| {
        let rt = lower::lower(checked);
        run_one(&rt, checked, test, step_budget)
    }))
}

/// Runs every test, each on fresh program state with static fields
/// re-initialized.
pub fn run_suite(checked: &CheckedProgram, step_budget: u64) -> Result<SuiteResult> {
    check_budget(step_budget)?;
    let start = Instant::now();
    let outcomes = on_eval_thread(|| {
        let rt = lower::lower(checked);
        checked
            .tests
            .iter()
            .map(|t| (t.clone(), run_one(&rt, checked, t, step_budget)))
            .collect::<BTreeMap<_, _>>()
    });
    Ok(SuiteResult {
        outcomes,
        wall_time: start.elapsed(),
    })
}
