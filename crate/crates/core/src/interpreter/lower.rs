//! Lowers a checked program into slot-resolved IR for evaluation.

use std::collections::HashMap;

use crate::frontend::ast::{
    BinOp, Block, Decl, Expr, ExprKind, Member, NodePath, Place, Stmt, StmtKind, UnOp,
};
use crate::frontend::{CheckedProgram, FieldRef, MethodRef, Type};

#[derive(Debug, Clone)]
pub(crate) enum Ir {
    Int(i32),
    Bool(bool),
    Null,
    This,
    Local(u32),
    Field(Box<Ir>, u32),
    Static(u32),
    Virtual {
        recv: Box<Ir>,
        selector: u32,
        args: Vec<Ir>,
    },
    StaticCall {
        method: u32,
        args: Vec<Ir>,
    },
    New(u32),
    Bin(BinOp, Box<Ir>, Box<Ir>),
    Neg(Box<Ir>),
    Not(Box<Ir>),
    Abs(Box<Ir>),
    Reflect(Box<Ir>, String),
}

#[derive(Debug, Clone)]
pub(crate) enum IrStmt {
    SetLocal(u32, Ir),
    SetField(Ir, u32, Ir),
    SetStatic(u32, Ir),
    If(Ir, Vec<IrStmt>, Vec<IrStmt>),
    While(Ir, Vec<IrStmt>),
    Return(Option<Ir>),
    Assert(Ir),
    Expr(Ir),
}

#[derive(Debug)]
pub(crate) struct RtMethod {
    pub name: MethodRef,
    pub frame_size: u32,
    pub param_count: u32,
    pub returns_value: bool,
    pub returns_int: bool,
    pub body: Vec<IrStmt>,
}

#[derive(Debug)]
pub(crate) struct RtClass {
    pub field_count: u32,
    /// Instance field initializers, root class first: (slot, initial value).
    pub inits: Vec<(u32, Ir)>,
    /// Selector id -> most-derived instance method.
    pub vtable: Vec<Option<u32>>,
}

#[derive(Debug)]
pub(crate) struct RtStatic {
    pub init: Ir,
}

#[derive(Debug)]
pub(crate) struct Runtime {
    pub classes: Vec<RtClass>,
    pub methods: Vec<RtMethod>,
    pub method_ids: HashMap<MethodRef, u32>,
    pub class_ids: HashMap<String, u32>,
    pub selectors: HashMap<String, u32>,
    /// Static fields in program order.
    pub statics: Vec<RtStatic>,
}

fn default_value(t: &Type) -> Ir {
    match t {
        Type::Int => Ir::Int(0),
        Type::Bool => Ir::Bool(false),
        _ => Ir::Null,
    }
}

struct Lowerer<'a> {
    checked: &'a CheckedProgram,
    method_ids: HashMap<MethodRef, u32>,
    class_ids: HashMap<String, u32>,
    selectors: HashMap<String, u32>,
    static_ids: HashMap<FieldRef, u32>,
    instance_slots: HashMap<FieldRef, u32>,
}

pub(crate) fn lower(checked: &CheckedProgram) -> Runtime {
    let program = &checked.program;
    let mut class_ids = HashMap::new();
    for (i, d) in program.decls.iter().enumerate() {
        class_ids.insert(d.name().to_string(), i as u32);
    }
    let mut method_ids = HashMap::new();
    let mut selectors: HashMap<String, u32> = HashMap::new();
    let mut method_order = Vec::new();
    for (m, info) in &checked.methods {
        if info.is_abstract {
            continue;
        }
        method_ids.insert(m.clone(), method_order.len() as u32);
        method_order.push(m.clone());
        if !info.is_static {
            let n = selectors.len() as u32;
            selectors.entry(m.name.clone()).or_insert(n);
        }
    }
    let mut static_ids = HashMap::new();
    let mut instance_slots = HashMap::new();
    let mut static_order = Vec::new();
    for d in &program.decls {
        let Decl::Class(c) = d else { continue };
        for m in &c.members {
            if let Member::Field(f) = m {
                if f.is_static {
                    let r = FieldRef::new(c.name.clone(), f.name.clone());
                    static_ids.insert(r.clone(), static_order.len() as u32);
                    static_order.push(r);
                }
            }
        }
    }
    // Instance slots: ancestors' fields first.
    let mut field_counts = HashMap::new();
    for d in &program.decls {
        let chain = checked.superclass_chain(d.name());
        let mut slot = 0u32;
        for c in chain.iter().rev() {
            for f in &checked.classes[*c].fields {
                if !checked.fields[f].is_static {
                    instance_slots.entry(f.clone()).or_insert(slot);
                    slot += 1;
                }
            }
        }
        field_counts.insert(d.name().to_string(), slot);
    }

    let lw = Lowerer {
        checked,
        method_ids,
        class_ids,
        selectors,
        static_ids,
        instance_slots,
    };

    let mut statics = Vec::new();
    for f in &static_order {
        let info = &checked.fields[f];
        let init = lw
            .field_init(&info.path)
            .unwrap_or_else(|| default_value(&info.ty));
        statics.push(RtStatic { init });
    }

    let mut classes = Vec::new();
    for d in &program.decls {
        let name = d.name();
        let mut inits = Vec::new();
        let mut vtable = vec![None; lw.selectors.len()];
        if !checked.classes[name].is_interface {
            for c in checked.superclass_chain(name).iter().rev() {
                for f in &checked.classes[*c].fields {
                    let info = &checked.fields[f];
                    if info.is_static {
                        continue;
                    }
                    let init = lw
                        .field_init(&info.path)
                        .unwrap_or_else(|| default_value(&info.ty));
                    inits.push((lw.instance_slots[f], init));
                }
                for m in &checked.classes[*c].methods {
                    let info = &checked.methods[m];
                    if info.is_static {
                        continue;
                    }
                    let sel = lw.selectors[&m.name] as usize;
                    vtable[sel] = Some(lw.method_ids[m]);
                }
            }
        }
        classes.push(RtClass {
            field_count: field_counts[name],
            inits,
            vtable,
        });
    }

    let mut methods = Vec::new();
    for m in &method_order {
        let info = &checked.methods[m];
        let Some(crate::frontend::NodeRef::Method(md)) = program.node_at(&info.path) else {
            unreachable!("method path must address a method");
        };
        let mut path = info.path.0.clone();
        path.push(0);
        let body = lw.block(&md.body, &mut path);
        methods.push(RtMethod {
            name: m.clone(),
            frame_size: info.frame_size,
            param_count: m.params.len() as u32,
            returns_value: info.ret != Type::Void,
            returns_int: info.ret == Type::Int,
            body,
        });
    }

    Runtime {
        classes,
        methods,
        method_ids: lw.method_ids,
        class_ids: lw.class_ids,
        selectors: lw.selectors,
        statics,
    }
}

impl Lowerer<'_> {
    fn field_init(&self, field_path: &NodePath) -> Option<Ir> {
        let Some(crate::frontend::NodeRef::Field(f)) = self.checked.program.node_at(field_path)
        else {
            return None;
        };
        let init = f.init.as_ref()?;
        let mut path = field_path.0.clone();
        path.push(0);
        Some(self.expr(init, &mut path))
    }

    fn block(&self, b: &Block, path: &mut Vec<u32>) -> Vec<IrStmt> {
        let mut out = Vec::with_capacity(b.stmts.len());
        for (i, s) in b.stmts.iter().enumerate() {
            path.push(i as u32);
            out.push(self.stmt(s, path));
            path.pop();
        }
        out
    }

    fn slot(&self, path: &[u32]) -> u32 {
        *self
            .checked
            .local_slots
            .get(&NodePath(path.to_vec()))
            .expect("checked local has a slot")
    }

    fn field_target(&self, path: &[u32]) -> &FieldRef {
        self.checked
            .field_targets
            .get(&NodePath(path.to_vec()))
            .expect("checked field access has a target")
    }

    fn ty(&self, path: &[u32]) -> &Type {
        self.checked
            .static_types
            .get(&NodePath(path.to_vec()))
            .expect("checked expression has a type")
    }

    fn child(&self, e: &Expr, idx: u32, path: &mut Vec<u32>) -> Ir {
        path.push(idx);
        let ir = self.expr(e, path);
        path.pop();
        ir
    }

    fn block_at(&self, b: &Block, idx: u32, path: &mut Vec<u32>) -> Vec<IrStmt> {
        path.push(idx);
        let out = self.block(b, path);
        path.pop();
        out
    }

    fn stmt(&self, s: &Stmt, path: &mut Vec<u32>) -> IrStmt {
        match &s.kind {
            StmtKind::Local { init, .. } => {
                let slot = self.slot(path);
                let value = match init {
                    Some(e) => self.child(e, 0, path),
                    None => {
                        let StmtKind::Local { ty, .. } = &s.kind else {
                            unreachable!()
                        };
                        match ty {
                            crate::frontend::ast::TypeName::Int => Ir::Int(0),
                            crate::frontend::ast::TypeName::Bool => Ir::Bool(false),
                            _ => Ir::Null,
                        }
                    }
                };
                IrStmt::SetLocal(slot, value)
            }
            StmtKind::Assign { target, value } => match target {
                Place::Local(_) => {
                    let slot = self.slot(path);
                    IrStmt::SetLocal(slot, self.child(value, 0, path))
                }
                Place::Field { object, .. } => {
                    let f = self.field_target(path).clone();
                    let v = self.child(value, 1, path);
                    if let Some(&idx) = self.static_ids.get(&f) {
                        IrStmt::SetStatic(idx, v)
                    } else {
                        let obj = self.child(object, 0, path);
                        IrStmt::SetField(obj, self.instance_slots[&f], v)
                    }
                }
            },
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let c = self.child(cond, 0, path);
                let t = self.block_at(then_block, 1, path);
                let e = match else_block {
                    Some(b) => self.block_at(b, 2, path),
                    None => Vec::new(),
                };
                IrStmt::If(c, t, e)
            }
            StmtKind::While { cond, body } => {
                let c = self.child(cond, 0, path);
                let b = self.block_at(body, 1, path);
                IrStmt::While(c, b)
            }
            StmtKind::Return(e) => IrStmt::Return(e.as_ref().map(|e| self.child(e, 0, path))),
            StmtKind::Assert(e) => IrStmt::Assert(self.child(e, 0, path)),
            StmtKind::Expr(e) => IrStmt::Expr(self.child(e, 0, path)),
        }
    }

    fn expr(&self, e: &Expr, path: &mut Vec<u32>) -> Ir {
        match &e.kind {
            ExprKind::Int(v) => Ir::Int(*v),
            ExprKind::Bool(b) => Ir::Bool(*b),
            ExprKind::This => Ir::This,
            ExprKind::Name(_) => match self.ty(path) {
                // Class names only appear as static receivers, handled below.
                Type::ClassRef(_) => Ir::Null,
                _ => Ir::Local(self.slot(path)),
            },
            ExprKind::Field { object, .. } => {
                let f = self.field_target(path);
                if let Some(&idx) = self.static_ids.get(f) {
                    Ir::Static(idx)
                } else {
                    let slot = self.instance_slots[f];
                    Ir::Field(Box::new(self.child(object, 0, path)), slot)
                }
            }
            ExprKind::Call { receiver, args, .. } => {
                let target = self
                    .checked
                    .call_targets
                    .get(&NodePath(path.clone()))
                    .expect("checked call has a target")
                    .clone();
                let first_arg = u32::from(receiver.is_some());
                let args: Vec<Ir> = args
                    .iter()
                    .enumerate()
                    .map(|(i, a)| self.child(a, first_arg + i as u32, path))
                    .collect();
                if self.checked.methods[&target].is_static {
                    Ir::StaticCall {
                        method: self.method_ids[&target],
                        args,
                    }
                } else {
                    let recv = match receiver {
                        Some(r) => self.child(r, 0, path),
                        None => Ir::This,
                    };
                    Ir::Virtual {
                        recv: Box::new(recv),
                        selector: self.selectors[&target.name],
                        args,
                    }
                }
            }
            ExprKind::New(c) => Ir::New(self.class_ids[c]),
            ExprKind::Binary { op, lhs, rhs } => Ir::Bin(
                *op,
                Box::new(self.child(lhs, 0, path)),
                Box::new(self.child(rhs, 1, path)),
            ),
            ExprKind::Unary { op, operand } => {
                let inner = Box::new(self.child(operand, 0, path));
                match op {
                    UnOp::Neg => Ir::Neg(inner),
                    UnOp::Not => Ir::Not(inner),
                }
            }
            ExprKind::Abs(inner) => Ir::Abs(Box::new(self.child(inner, 0, path))),
            ExprKind::ReflectCall { target, method } => {
                Ir::Reflect(Box::new(self.child(target, 0, path)), method.clone())
            }
        }
    }
}
