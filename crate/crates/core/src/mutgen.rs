//! Mutation sites, the five mutation operators, mutant application,
//! viability checks and seeded sampling.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::ast::{BinOp, Expr, ExprKind, UnOp};
use crate::frontend::{
    check, method_at, CheckedProgram, MethodRef, NodePath, NodeRef, Program, Type,
};
use crate::interpreter::{run_suite, SuiteResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationOperator {
    ABS,
    AOR,
    LCR,
    ROR,
    UOI,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 5] = [
        MutationOperator::ABS,
        MutationOperator::AOR,
        MutationOperator::LCR,
        MutationOperator::ROR,
        MutationOperator::UOI,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MutationOperator::ABS => "ABS",
            MutationOperator::AOR => "AOR",
            MutationOperator::LCR => "LCR",
            MutationOperator::ROR => "ROR",
            MutationOperator::UOI => "UOI",
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MutationOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MutationOperator::ALL
            .into_iter()
            .find(|op| op.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Format(format!(
                    "unknown mutation operator `{s}` (expected ABS, AOR, LCR, ROR or UOI)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiteKind {
    NumericExpr,
    ArithBinary,
    LogicalBinary,
    RelationalBinary,
    BoolExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MutationSite {
    pub path: NodePath,
    pub kind: SiteKind,
    pub enclosing: MethodRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Replacement {
    Operator(BinOp),
    Left,
    Right,
    True,
    False,
    AbsWrap,
    Negate,
    Increment,
    Decrement,
    Complement,
}

impl Replacement {
    /// Short code used in mutant ids and manifests.
    pub fn code(self) -> &'static str {
        match self {
            Replacement::Operator(op) => match op {
                BinOp::Add => "add",
                BinOp::Sub => "sub",
                BinOp::Mul => "mul",
                BinOp::Div => "div",
                BinOp::Rem => "rem",
                BinOp::Lt => "lt",
                BinOp::Le => "le",
                BinOp::Gt => "gt",
                BinOp::Ge => "ge",
                BinOp::Eq => "eq",
                BinOp::Ne => "ne",
                BinOp::And => "and",
                BinOp::Or => "or",
            },
            Replacement::Left => "left",
            Replacement::Right => "right",
            Replacement::True => "true",
            Replacement::False => "false",
            Replacement::AbsWrap => "abs",
            Replacement::Negate => "neg",
            Replacement::Increment => "inc",
            Replacement::Decrement => "dec",
            Replacement::Complement => "not",
        }
    }

    fn all() -> impl Iterator<Item = Replacement> {
        let ops = BinOp::ARITHMETIC
            .into_iter()
            .chain(BinOp::RELATIONAL)
            .chain(BinOp::LOGICAL)
            .map(Replacement::Operator);
        ops.chain([
            Replacement::Left,
            Replacement::Right,
            Replacement::True,
            Replacement::False,
            Replacement::AbsWrap,
            Replacement::Negate,
            Replacement::Increment,
            Replacement::Decrement,
            Replacement::Complement,
        ])
    }
}

impl fmt::Display for Replacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Replacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Replacement::all()
            .find(|r| r.code() == s)
            .ok_or_else(|| Error::Format(format!("unknown replacement `{s}`")))
    }
}

impl Serialize for Replacement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Replacement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mutant {
    pub id: String,
    pub operator: MutationOperator,
    pub site: MutationSite,
    pub replacement: Replacement,
}

impl Mutant {
    pub fn new(operator: MutationOperator, site: MutationSite, replacement: Replacement) -> Mutant {
        Mutant {
            id: mutant_id(operator, &site.path, replacement),
            operator,
            site,
            replacement,
        }
    }
}

/// `OP-<hash of path>-<replacement>`; a pure function of its inputs.
pub fn mutant_id(op: MutationOperator, path: &NodePath, replacement: Replacement) -> String {
    // 64-bit FNV-1a over the little-endian path indices.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for i in path.as_slice() {
        for b in i.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{op}-{h:016x}-{replacement}")
}

fn site_kind(op: MutationOperator, expr: &Expr, ty: &Type) -> Option<SiteKind> {
    match op {
        MutationOperator::ABS => {
            let shape_ok = matches!(
                expr.kind,
                ExprKind::Int(_)
                    | ExprKind::Name(_)
                    | ExprKind::Field { .. }
                    | ExprKind::Call { .. }
                    | ExprKind::ReflectCall { .. }
            );
            (shape_ok && *ty == Type::Int).then_some(SiteKind::NumericExpr)
        }
        MutationOperator::AOR => match expr.kind {
            ExprKind::Binary { op, .. } if op.is_arithmetic() => Some(SiteKind::ArithBinary),
            _ => None,
        },
        MutationOperator::LCR => match expr.kind {
            ExprKind::Binary { op, .. } if op.is_logical() => Some(SiteKind::LogicalBinary),
            _ => None,
        },
        MutationOperator::ROR => match expr.kind {
            ExprKind::Binary { op, .. } if op.is_relational() => Some(SiteKind::RelationalBinary),
            _ => None,
        },
        MutationOperator::UOI => match ty {
            Type::Int => Some(SiteKind::NumericExpr),
            Type::Bool => Some(SiteKind::BoolExpr),
            _ => None,
        },
    }
}

/// Every site for `op`, in document order. Expressions inside test methods
/// and field initializers are not sites.
pub fn sites(checked: &CheckedProgram, op: MutationOperator) -> Vec<MutationSite> {
    let mut out = Vec::new();
    checked.program.walk(|path, node| {
        let NodeRef::Expr(expr) = node else { return };
        let Some(ty) = checked.static_types.get(path) else {
            return;
        };
        let Some(kind) = site_kind(op, expr, ty) else {
            return;
        };
        let Ok(enclosing) = method_at(checked, path) else {
            return;
        };
        if checked.is_test(&enclosing) {
            return;
        }
        out.push(MutationSite {
            path: path.clone(),
            kind,
            enclosing,
        });
    });
    out
}

fn binary_op_at(checked: &CheckedProgram, path: &NodePath) -> Option<BinOp> {
    match checked.program.node_at(path)? {
        NodeRef::Expr(Expr {
            kind: ExprKind::Binary { op, .. },
            ..
        }) => Some(*op),
        _ => None,
    }
}

fn others(group: &[BinOp], current: BinOp) -> impl Iterator<Item = Replacement> + '_ {
    group
        .iter()
        .copied()
        .filter(move |&o| o != current)
        .map(Replacement::Operator)
}

/// All mutants the operator derives from one site.
pub fn mutants_at(
    checked: &CheckedProgram,
    site: &MutationSite,
    op: MutationOperator,
) -> Vec<Mutant> {
    let replacements: Vec<Replacement> = match (op, site.kind) {
        (MutationOperator::ABS, _) => vec![Replacement::AbsWrap],
        (MutationOperator::AOR, _) | (MutationOperator::LCR, _) | (MutationOperator::ROR, _) => {
            let Some(current) = binary_op_at(checked, &site.path) else {
                return Vec::new();
            };
            match op {
                MutationOperator::AOR => others(&BinOp::ARITHMETIC, current)
                    .chain([Replacement::Left, Replacement::Right])
                    .collect(),
                MutationOperator::LCR => others(&BinOp::LOGICAL, current)
                    .chain([
                        Replacement::True,
                        Replacement::False,
                        Replacement::Left,
                        Replacement::Right,
                    ])
                    .collect(),
                _ => others(&BinOp::RELATIONAL, current)
                    .chain([Replacement::True, Replacement::False])
                    .collect(),
            }
        }
        (MutationOperator::UOI, SiteKind::BoolExpr) => vec![Replacement::Complement],
        (MutationOperator::UOI, _) => vec![
            Replacement::Negate,
            Replacement::Increment,
            Replacement::Decrement,
        ],
    };
    replacements
        .into_iter()
        .map(|r| Mutant::new(op, site.clone(), r))
        .collect()
}

/// Every mutant of `op` over the whole program, in document order.
pub fn all_mutants(checked: &CheckedProgram, op: MutationOperator) -> Vec<Mutant> {
    sites(checked, op)
        .iter()
        .flat_map(|s| mutants_at(checked, s, op))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("no expression at {0} (stale mutation site)")]
    StalePath(NodePath),
    #[error("expression at {path} has the wrong shape for replacement `{replacement}`")]
    ShapeMismatch {
        path: NodePath,
        replacement: Replacement,
    },
}

impl From<ApplyError> for Error {
    fn from(e: ApplyError) -> Self {
        Error::Analysis(e.to_string())
    }
}

/// Replaces the single subtree at the mutant's site.
pub fn apply(program: &Program, mutant: &Mutant) -> Result<Program, ApplyError> {
    let mut out = program.clone();
    let path = &mutant.site.path;
    let target = out
        .expr_at_mut(path)
        .ok_or_else(|| ApplyError::StalePath(path.clone()))?;
    let span = target.span;
    let mismatch = || ApplyError::ShapeMismatch {
        path: path.clone(),
        replacement: mutant.replacement,
    };
    let wrap = |kind: ExprKind| Expr::new(kind, span);
    let take = |e: &mut Expr| std::mem::replace(e, Expr::new(ExprKind::Int(0), span));

    match mutant.replacement {
        Replacement::Operator(new_op) => match &mut target.kind {
            ExprKind::Binary { op, .. } if same_group(*op, new_op) => *op = new_op,
            _ => return Err(mismatch()),
        },
        Replacement::Left | Replacement::Right => {
            let ExprKind::Binary { lhs, rhs, .. } = &mut target.kind else {
                return Err(mismatch());
            };
            let kept = if mutant.replacement == Replacement::Left {
                take(lhs)
            } else {
                take(rhs)
            };
            *target = kept;
        }
        Replacement::True => *target = wrap(ExprKind::Bool(true)),
        Replacement::False => *target = wrap(ExprKind::Bool(false)),
        Replacement::AbsWrap => {
            let inner = take(target);
            *target = wrap(ExprKind::Abs(Box::new(inner)));
        }
        Replacement::Negate | Replacement::Complement => {
            let op = if mutant.replacement == Replacement::Negate {
                UnOp::Neg
            } else {
                UnOp::Not
            };
            let inner = take(target);
            *target = wrap(ExprKind::Unary {
                op,
                operand: Box::new(inner),
            });
        }
        Replacement::Increment | Replacement::Decrement => {
            let op = if mutant.replacement == Replacement::Increment {
                BinOp::Add
            } else {
                BinOp::Sub
            };
            let inner = take(target);
            *target = wrap(ExprKind::Binary {
                op,
                lhs: Box::new(inner),
                rhs: Box::new(wrap(ExprKind::Int(1))),
            });
        }
    }
    Ok(out)
}

fn same_group(a: BinOp, b: BinOp) -> bool {
    (a.is_arithmetic() && b.is_arithmetic())
        || (a.is_relational() && b.is_relational())
        || (a.is_logical() && b.is_logical())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Viability {
    NonCompiling,
    Alive,
    Killed,
}

/// Result of building and running one mutant.
#[derive(Debug, Clone)]
pub struct MutantRun {
    pub viability: Viability,
    /// The mutant's suite result, present unless it failed to compile.
    pub suite: Option<SuiteResult>,
}

/// Applies, re-checks and runs one mutant against a recorded baseline.
pub fn run_mutant(
    checked: &CheckedProgram,
    mutant: &Mutant,
    baseline: &SuiteResult,
    step_budget: u64,
) -> Result<MutantRun> {
    let program = apply(&checked.program, mutant)?;
    let Ok(mutated) = check(program) else {
        return Ok(MutantRun {
            viability: Viability::NonCompiling,
            suite: None,
        });
    };
    let suite = run_suite(&mutated, step_budget)?;
    let baseline_failing = baseline.failing();
    let killed = suite
        .failing()
        .iter()
        .any(|t| !baseline_failing.contains(t));
    Ok(MutantRun {
        viability: if killed {
            Viability::Killed
        } else {
            Viability::Alive
        },
        suite: Some(suite),
    })
}

/// Viability of one mutant; runs the baseline suite itself.
pub fn viability(checked: &CheckedProgram, mutant: &Mutant, step_budget: u64) -> Result<Viability> {
    let baseline = run_suite(checked, step_budget)?;
    Ok(run_mutant(checked, mutant, &baseline, step_budget)?.viability)
}

/// Uniform sample of `cap` mutants, deterministic in `seed`, kept in input
/// order. Lists no longer than `cap` are returned unchanged.
pub fn sample(mutants: &[Mutant], cap: usize, seed: u64) -> Vec<Mutant> {
    if mutants.len() <= cap {
        return mutants.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, mutants.len(), cap).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| mutants[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub project: String,
    pub operator: MutationOperator,
    pub seed: u64,
    pub mutants: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: NodePath,
    pub replacement: Replacement,
    pub enclosing: MethodRef,
    pub viability: Viability,
}

impl ManifestEntry {
    pub fn new(mutant: &Mutant, viability: Viability) -> Self {
        ManifestEntry {
            id: mutant.id.clone(),
            path: mutant.site.path.clone(),
            replacement: mutant.replacement,
            enclosing: mutant.site.enclosing.clone(),
            viability,
        }
    }
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
