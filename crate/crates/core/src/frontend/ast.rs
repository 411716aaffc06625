//! Syntax tree for MiniOO.
//!
//! Every node is addressed by a [`NodePath`]: the sequence of child indices
//! leading to it from the program root. Child order per node kind:
//!
//! | node        | children                                   |
//! |-------------|--------------------------------------------|
//! | program     | declarations                               |
//! | class       | members                                    |
//! | interface   | signatures                                 |
//! | method      | body block                                 |
//! | field       | initializer, if any                        |
//! | block       | statements                                 |
//! | local decl  | initializer, if any                        |
//! | assignment  | receiver (field targets only), value       |
//! | if          | condition, then block, else block if any   |
//! | while       | condition, body block                      |
//! | return      | value, if any                              |
//! | assert/expr | expression                                 |
//! | expressions | operands in source order                   |

use std::fmt;

use serde::{Deserialize, Serialize};

/// Source location. Spans compare equal unconditionally so that derived
/// equality on the tree is structural.
#[derive(Debug, Clone, Copy, Default, Eq, Serialize, Deserialize)]
pub struct Span {
    pub file: u32,
    pub start: u32,
    pub end: u32,
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _state: &mut H) {}
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodePath(pub Vec<u32>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, index: u32) -> Self {
        let mut v = self.0.clone();
        v.push(index);
        NodePath(v)
    }

    pub fn starts_with(&self, prefix: &NodePath) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join("."))
    }
}

impl From<Vec<u32>> for NodePath {
    fn from(v: Vec<u32>) -> Self {
        NodePath(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeName {
    Int,
    Bool,
    Void,
    Named(String),
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeName::Int => f.write_str("int"),
            TypeName::Bool => f.write_str("bool"),
            TypeName::Void => f.write_str("void"),
            TypeName::Named(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
    /// Unit paths, indexed by `Span::file`.
    pub files: Vec<String>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.decls == other.decls
    }
}

impl Eq for Program {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Class(ClassDecl),
    Interface(InterfaceDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Class(c) => &c.name,
            Decl::Interface(i) => &i.name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Decl::Class(c) => c.span,
            Decl::Interface(i) => i.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub extends: Option<String>,
    pub implements: Vec<String>,
    pub members: Vec<Member>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceDecl {
    pub name: String,
    pub sigs: Vec<MethodSig>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSig {
    pub ret: TypeName,
    pub name: String,
    pub params: Vec<Param>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Member {
    Method(MethodDecl),
    Field(FieldDecl),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub is_static: bool,
    pub is_test: bool,
    pub ret: TypeName,
    pub name: String,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub ty: TypeName,
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub is_static: bool,
    pub ty: TypeName,
    pub name: String,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Local {
        ty: TypeName,
        name: String,
        init: Option<Expr>,
    },
    Assign {
        target: Place,
        value: Expr,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    Return(Option<Expr>),
    Assert(Expr),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Place {
    Local(String),
    Field { object: Box<Expr>, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i32),
    Bool(bool),
    This,
    /// A local variable, parameter or (for static access) a class name.
    Name(String),
    Field {
        object: Box<Expr>,
        name: String,
    },
    Call {
        receiver: Option<Box<Expr>>,
        name: String,
        args: Vec<Expr>,
    },
    New(String),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnOp,
        operand: Box<Expr>,
    },
    Abs(Box<Expr>),
    ReflectCall {
        target: Box<Expr>,
        method: String,
    },
}

impl ExprKind {
    /// Child expressions in NodePath order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            ExprKind::Int(_)
            | ExprKind::Bool(_)
            | ExprKind::This
            | ExprKind::Name(_)
            | ExprKind::New(_) => Vec::new(),
            ExprKind::Field { object, .. } => vec![object],
            ExprKind::Call { receiver, args, .. } => {
                receiver.iter().map(|r| &**r).chain(args.iter()).collect()
            }
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Abs(e) => vec![e],
            ExprKind::ReflectCall { target, .. } => vec![target],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            ExprKind::Int(_)
            | ExprKind::Bool(_)
            | ExprKind::This
            | ExprKind::Name(_)
            | ExprKind::New(_) => Vec::new(),
            ExprKind::Field { object, .. } => vec![object],
            ExprKind::Call { receiver, args, .. } => receiver
                .iter_mut()
                .map(|r| &mut **r)
                .chain(args.iter_mut())
                .collect(),
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Abs(e) => vec![e],
            ExprKind::ReflectCall { target, .. } => vec![target],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub const ARITHMETIC: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Rem];
    pub const RELATIONAL: [BinOp; 6] = [
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
    ];
    pub const LOGICAL: [BinOp; 2] = [BinOp::And, BinOp::Or];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        let all = BinOp::ARITHMETIC
            .iter()
            .chain(BinOp::RELATIONAL.iter())
            .chain(BinOp::LOGICAL.iter());
        all.copied().find(|op| op.symbol() == s)
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        BinOp::ARITHMETIC.contains(&self)
    }

    pub fn is_relational(self) -> bool {
        BinOp::RELATIONAL.contains(&self)
    }

    pub fn is_logical(self) -> bool {
        BinOp::LOGICAL.contains(&self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "!",
        }
    }
}

/// Borrowed view of any node, used for path-based navigation.
#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Program(&'a Program),
    Decl(&'a Decl),
    Method(&'a MethodDecl),
    Field(&'a FieldDecl),
    Sig(&'a MethodSig),
    Block(&'a Block),
    Stmt(&'a Stmt),
    Expr(&'a Expr),
}

impl<'a> NodeRef<'a> {
    pub fn children(self) -> Vec<NodeRef<'a>> {
        match self {
            NodeRef::Program(p) => p.decls.iter().map(NodeRef::Decl).collect(),
            NodeRef::Decl(Decl::Class(c)) => c
                .members
                .iter()
                .map(|m| match m {
                    Member::Method(m) => NodeRef::Method(m),
                    Member::Field(f) => NodeRef::Field(f),
                })
                .collect(),
            NodeRef::Decl(Decl::Interface(i)) => i.sigs.iter().map(NodeRef::Sig).collect(),
            NodeRef::Method(m) => vec![NodeRef::Block(&m.body)],
            NodeRef::Field(f) => f.init.iter().map(NodeRef::Expr).collect(),
            NodeRef::Sig(_) => Vec::new(),
            NodeRef::Block(b) => b.stmts.iter().map(NodeRef::Stmt).collect(),
            NodeRef::Stmt(s) => stmt_children(s),
            NodeRef::Expr(e) => e.kind.children().into_iter().map(NodeRef::Expr).collect(),
        }
    }

    pub fn span(self) -> Span {
        match self {
            NodeRef::Program(_) => Span::default(),
            NodeRef::Decl(d) => d.span(),
            NodeRef::Method(m) => m.span,
            NodeRef::Field(f) => f.span,
            NodeRef::Sig(s) => s.span,
            NodeRef::Block(b) => b.span,
            NodeRef::Stmt(s) => s.span,
            NodeRef::Expr(e) => e.span,
        }
    }
}

fn stmt_children(s: &Stmt) -> Vec<NodeRef<'_>> {
    match &s.kind {
        StmtKind::Local { init, .. } => init.iter().map(NodeRef::Expr).collect(),
        StmtKind::Assign { target, value } => match target {
            Place::Local(_) => vec![NodeRef::Expr(value)],
            Place::Field { object, .. } => vec![NodeRef::Expr(object), NodeRef::Expr(value)],
        },
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            let mut v = vec![NodeRef::Expr(cond), NodeRef::Block(then_block)];
            if let Some(b) = else_block {
                v.push(NodeRef::Block(b));
            }
            v
        }
        StmtKind::While { cond, body } => vec![NodeRef::Expr(cond), NodeRef::Block(body)],
        StmtKind::Return(e) => e.iter().map(NodeRef::Expr).collect(),
        StmtKind::Assert(e) | StmtKind::Expr(e) => vec![NodeRef::Expr(e)],
    }
}

impl Program {
    pub fn node_at(&self, path: &NodePath) -> Option<NodeRef<'_>> {
        let mut node = NodeRef::Program(self);
        for &i in path.as_slice() {
            node = node.children().into_iter().nth(i as usize)?;
        }
        Some(node)
    }

    /// Mutable access to the expression at `path`, if that path names one.
    pub fn expr_at_mut(&mut self, path: &NodePath) -> Option<&mut Expr> {
        let p = path.as_slice();
        let (&d, rest) = p.split_first()?;
        match self.decls.get_mut(d as usize)? {
            Decl::Interface(_) => None,
            Decl::Class(c) => {
                let (&m, rest) = rest.split_first()?;
                match c.members.get_mut(m as usize)? {
                    Member::Field(f) => {
                        let (&i, rest) = rest.split_first()?;
                        if i != 0 {
                            return None;
                        }
                        expr_in_expr(f.init.as_mut()?, rest)
                    }
                    Member::Method(md) => {
                        let (&i, rest) = rest.split_first()?;
                        if i != 0 {
                            return None;
                        }
                        expr_in_block(&mut md.body, rest)
                    }
                }
            }
        }
    }

    /// Pre-order walk over every node, with its path.
    pub fn walk(&self, mut visit: impl FnMut(&NodePath, NodeRef<'_>)) {
        fn go<'a>(
            path: &mut NodePath,
            node: NodeRef<'a>,
            visit: &mut dyn FnMut(&NodePath, NodeRef<'a>),
        ) {
            visit(path, node);
            for (i, c) in node.children().into_iter().enumerate() {
                path.0.push(i as u32);
                go(path, c, visit);
                path.0.pop();
            }
        }
        let mut path = NodePath::root();
        go(&mut path, NodeRef::Program(self), &mut visit);
    }
}

fn expr_in_block<'a>(b: &'a mut Block, path: &[u32]) -> Option<&'a mut Expr> {
    let (&i, rest) = path.split_first()?;
    let stmt = b.stmts.get_mut(i as usize)?;
    let (&c, rest) = rest.split_first()?;
    match &mut stmt.kind {
        StmtKind::Local { init, .. } => {
            if c != 0 {
                return None;
            }
            expr_in_expr(init.as_mut()?, rest)
        }
        StmtKind::Assign { target, value } => match (target, c) {
            (Place::Local(_), 0) => expr_in_expr(value, rest),
            (Place::Field { object, .. }, 0) => expr_in_expr(object, rest),
            (Place::Field { .. }, 1) => expr_in_expr(value, rest),
            _ => None,
        },
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => match c {
            0 => expr_in_expr(cond, rest),
            1 => expr_in_block(then_block, rest),
            2 => expr_in_block(else_block.as_mut()?, rest),
            _ => None,
        },
        StmtKind::While { cond, body } => match c {
            0 => expr_in_expr(cond, rest),
            1 => expr_in_block(body, rest),
            _ => None,
        },
        StmtKind::Return(e) => {
            if c != 0 {
                return None;
            }
            expr_in_expr(e.as_mut()?, rest)
        }
        StmtKind::Assert(e) | StmtKind::Expr(e) => {
            if c != 0 {
                return None;
            }
            expr_in_expr(e, rest)
        }
    }
}

fn expr_in_expr<'a>(e: &'a mut Expr, path: &[u32]) -> Option<&'a mut Expr> {
    match path.split_first() {
        None => Some(e),
        Some((&i, rest)) => {
            let child = e.kind.children_mut().into_iter().nth(i as usize)?;
            expr_in_expr(child, rest)
        }
    }
}
