//! Name resolution and static typing.
//!
//! Call sites resolve by the nearest-definition rule: starting at the static
//! type of the receiver, walk up the superclass chain and take the first
//! declaration with the requested name.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::diagnostic::{DiagCode, Diagnostic};
use super::types::{FieldRef, MethodRef, Type};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub name: String,
    pub is_interface: bool,
    pub superclass: Option<String>,
    pub interfaces: Vec<String>,
    pub decl_index: u32,
    /// Own fields and methods, in declaration order.
    pub fields: Vec<FieldRef>,
    pub methods: Vec<MethodRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodInfo {
    pub method: MethodRef,
    pub ret: Type,
    pub is_static: bool,
    pub is_test: bool,
    /// Interface signature without a body.
    pub is_abstract: bool,
    pub path: NodePath,
    /// Local slots including parameters.
    pub frame_size: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldInfo {
    pub field: FieldRef,
    pub ty: Type,
    pub is_static: bool,
    pub path: NodePath,
}

/// Statically resolved members each method body touches.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemberUses {
    pub calls: BTreeSet<MethodRef>,
    pub reads: BTreeSet<FieldRef>,
    pub writes: BTreeSet<FieldRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckedProgram {
    pub program: Program,
    pub classes: BTreeMap<String, ClassInfo>,
    pub methods: BTreeMap<MethodRef, MethodInfo>,
    pub fields: BTreeMap<FieldRef, FieldInfo>,
    /// Type of every expression node.
    pub static_types: BTreeMap<NodePath, Type>,
    /// Statically resolved callee of every call expression.
    pub call_targets: BTreeMap<NodePath, MethodRef>,
    /// Field of every field-read expression and field-assignment statement.
    pub field_targets: BTreeMap<NodePath, FieldRef>,
    /// Frame slot of every local read, local declaration and local assignment.
    pub local_slots: BTreeMap<NodePath, u32>,
    /// Overridden or implemented ancestor declarations, nearest superclass
    /// declaration first, then interface signatures.
    pub overrides: BTreeMap<MethodRef, Vec<MethodRef>>,
    pub uses: BTreeMap<MethodRef, MemberUses>,
    pub tests: Vec<MethodRef>,
}

impl CheckedProgram {
    /// The primary ancestor declaration `method` overrides, if any.
    pub fn overridden(&self, method: &MethodRef) -> Option<&MethodRef> {
        self.overrides.get(method).and_then(|v| v.first())
    }

    /// Follows primary overrides up to the topmost declaration.
    pub fn topmost_declaration<'a>(&'a self, method: &'a MethodRef) -> &'a MethodRef {
        let mut cur = method;
        let mut guard = 0;
        while let Some(p) = self.overridden(cur) {
            cur = p;
            guard += 1;
            if guard > self.classes.len() + 1 {
                break;
            }
        }
        cur
    }

    pub fn is_test(&self, method: &MethodRef) -> bool {
        self.methods.get(method).is_some_and(|m| m.is_test)
    }

    /// Superclass chain starting at `class` itself.
    pub fn superclass_chain<'a>(&'a self, class: &'a str) -> Vec<&'a str> {
        let mut out = Vec::new();
        let mut cur = Some(class);
        while let Some(c) = cur {
            if out.contains(&c) {
                break;
            }
            out.push(c);
            cur = self.classes.get(c).and_then(|i| i.superclass.as_deref());
        }
        out
    }

    /// Nearest declaration of `name` visible from `class`.
    pub fn lookup_method(&self, class: &str, name: &str) -> Option<&MethodRef> {
        for c in self.superclass_chain(class) {
            let info = self.classes.get(c)?;
            if let Some(m) = info.methods.iter().find(|m| m.name == name) {
                return Some(m);
            }
        }
        None
    }

    pub fn lookup_field(&self, class: &str, name: &str) -> Option<&FieldRef> {
        for c in self.superclass_chain(class) {
            let info = self.classes.get(c)?;
            if let Some(f) = info.fields.iter().find(|f| f.name == name) {
                return Some(f);
            }
        }
        None
    }

    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        self.superclass_chain(sub).into_iter().any(|c| {
            c == sup
                || self
                    .classes
                    .get(c)
                    .is_some_and(|i| i.interfaces.iter().any(|x| x == sup))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocateError {
    #[error("path {0} does not address a node")]
    InvalidPath(NodePath),
    #[error("path {0} has no enclosing method")]
    NoEnclosingMethod(NodePath),
}

/// The method whose body lexically contains the node at `path`.
pub fn method_at(checked: &CheckedProgram, path: &NodePath) -> Result<MethodRef, LocateError> {
    if checked.program.node_at(path).is_none() {
        return Err(LocateError::InvalidPath(path.clone()));
    }
    let p = path.as_slice();
    if p.len() < 3 {
        return Err(LocateError::NoEnclosingMethod(path.clone()));
    }
    match checked.program.node_at(&NodePath(p[..2].to_vec())) {
        Some(NodeRef::Method(md)) => {
            let class = checked.program.decls[p[0] as usize].name();
            checked
                .lookup_method(class, &md.name)
                .filter(|m| m.owner == class)
                .cloned()
                .ok_or_else(|| LocateError::NoEnclosingMethod(path.clone()))
        }
        _ => Err(LocateError::NoEnclosingMethod(path.clone())),
    }
}

pub fn check(program: Program) -> Result<CheckedProgram, Vec<Diagnostic>> {
    let mut cx = Checker {
        diags: Vec::new(),
        out: CheckedProgram {
            program: Program::default(),
            classes: BTreeMap::new(),
            methods: BTreeMap::new(),
            fields: BTreeMap::new(),
            static_types: BTreeMap::new(),
            call_targets: BTreeMap::new(),
            field_targets: BTreeMap::new(),
            local_slots: BTreeMap::new(),
            overrides: BTreeMap::new(),
            uses: BTreeMap::new(),
            tests: Vec::new(),
        },
    };
    cx.collect_types(&program);
    if cx.diags.is_empty() {
        cx.check_hierarchy(&program);
    }
    if cx.diags.is_empty() {
        cx.collect_members(&program);
    }
    if cx.diags.is_empty() {
        cx.check_overrides(&program);
        cx.check_bodies(&program);
    }
    if cx.diags.is_empty() {
        cx.out.program = program;
        Ok(cx.out)
    } else {
        cx.diags.sort_by_key(|d| (d.span.file, d.span.start));
        Err(cx.diags)
    }
}

struct Checker {
    diags: Vec<Diagnostic>,
    out: CheckedProgram,
}

struct Scope {
    frames: Vec<HashMap<String, (u32, Type)>>,
    next_slot: u32,
}

impl Scope {
    fn lookup(&self, name: &str) -> Option<&(u32, Type)> {
        self.frames.iter().rev().find_map(|f| f.get(name))
    }

    fn declare(&mut self, name: &str, ty: Type) -> u32 {
        let slot = self.next_slot;
        self.next_slot += 1;
        self.frames
            .last_mut()
            .expect("scope has a frame")
            .insert(name.to_string(), (slot, ty));
        slot
    }
}

struct BodyCx {
    class: String,
    is_static: bool,
    ret: Type,
    method: Option<MethodRef>,
    scope: Scope,
}

impl Checker {
    fn err(&mut self, code: DiagCode, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, span, msg));
    }

    fn collect_types(&mut self, program: &Program) {
        for (i, d) in program.decls.iter().enumerate() {
            let name = d.name().to_string();
            if self.out.classes.contains_key(&name) {
                self.err(
                    DiagCode::DuplicateDefinition,
                    d.span(),
                    format!("type `{name}` is defined more than once"),
                );
                continue;
            }
            let info = match d {
                Decl::Class(c) => ClassInfo {
                    name: name.clone(),
                    is_interface: false,
                    superclass: c.extends.clone(),
                    interfaces: c.implements.clone(),
                    decl_index: i as u32,
                    fields: Vec::new(),
                    methods: Vec::new(),
                },
                Decl::Interface(_) => ClassInfo {
                    name: name.clone(),
                    is_interface: true,
                    superclass: None,
                    interfaces: Vec::new(),
                    decl_index: i as u32,
                    fields: Vec::new(),
                    methods: Vec::new(),
                },
            };
            self.out.classes.insert(name, info);
        }
    }

    fn check_hierarchy(&mut self, program: &Program) {
        for d in &program.decls {
            let Decl::Class(c) = d else { continue };
            if let Some(sup) = &c.extends {
                match self.out.classes.get(sup) {
                    None => self.err(
                        DiagCode::UnknownType,
                        c.span,
                        format!("unknown superclass `{sup}`"),
                    ),
                    Some(i) if i.is_interface => self.err(
                        DiagCode::TypeError,
                        c.span,
                        format!("`{}` cannot extend interface `{sup}`", c.name),
                    ),
                    _ => {}
                }
            }
            let mut seen = BTreeSet::new();
            for iface in &c.implements {
                if !seen.insert(iface) {
                    self.err(
                        DiagCode::DuplicateDefinition,
                        c.span,
                        format!("interface `{iface}` listed twice"),
                    );
                }
                match self.out.classes.get(iface) {
                    None => self.err(
                        DiagCode::UnknownType,
                        c.span,
                        format!("unknown interface `{iface}`"),
                    ),
                    Some(i) if !i.is_interface => self.err(
                        DiagCode::TypeError,
                        c.span,
                        format!("`{}` cannot implement class `{iface}`", c.name),
                    ),
                    _ => {}
                }
            }
        }
        if !self.diags.is_empty() {
            return;
        }
        for d in &program.decls {
            let Decl::Class(c) = d else { continue };
            let mut seen = BTreeSet::new();
            let mut cur = Some(c.name.as_str());
            while let Some(n) = cur {
                if !seen.insert(n) {
                    self.err(
                        DiagCode::InheritanceCycle,
                        c.span,
                        format!("inheritance cycle through `{}`", c.name),
                    );
                    break;
                }
                cur = self
                    .out
                    .classes
                    .get(n)
                    .and_then(|i| i.superclass.as_deref());
            }
        }
    }

    fn resolve_type(&mut self, t: &TypeName, span: Span) -> Option<Type> {
        match t {
            TypeName::Int => Some(Type::Int),
            TypeName::Bool => Some(Type::Bool),
            TypeName::Void => Some(Type::Void),
            TypeName::Named(n) => {
                if self.out.classes.contains_key(n) {
                    Some(Type::Object(n.clone()))
                } else {
                    self.err(DiagCode::UnknownType, span, format!("unknown type `{n}`"));
                    None
                }
            }
        }
    }

    fn value_type(&mut self, t: &TypeName, span: Span, what: &str) -> Option<Type> {
        let ty = self.resolve_type(t, span)?;
        if ty == Type::Void {
            self.err(
                DiagCode::TypeError,
                span,
                format!("{what} cannot have type void"),
            );
            return None;
        }
        Some(ty)
    }

    fn param_types(&mut self, params: &[Param]) -> Option<Vec<Type>> {
        let mut out = Vec::new();
        let mut ok = true;
        let mut names = BTreeSet::new();
        for p in params {
            if !names.insert(&p.name) {
                self.err(
                    DiagCode::DuplicateDefinition,
                    p.span,
                    format!("parameter `{}` declared twice", p.name),
                );
                ok = false;
            }
            match self.value_type(&p.ty, p.span, "parameter") {
                Some(t) => out.push(t),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn collect_members(&mut self, program: &Program) {
        for (di, d) in program.decls.iter().enumerate() {
            let owner = d.name().to_string();
            let mut names: BTreeSet<String> = BTreeSet::new();
            match d {
                Decl::Interface(i) => {
                    for (si, s) in i.sigs.iter().enumerate() {
                        if !names.insert(s.name.clone()) {
                            self.err(
                                DiagCode::DuplicateDefinition,
                                s.span,
                                format!("`{owner}.{}` is declared more than once", s.name),
                            );
                            continue;
                        }
                        let (Some(ret), Some(params)) = (
                            self.resolve_type(&s.ret, s.span),
                            self.param_types(&s.params),
                        ) else {
                            continue;
                        };
                        let mref = MethodRef::new(owner.clone(), s.name.clone(), params);
                        self.out.methods.insert(
                            mref.clone(),
                            MethodInfo {
                                method: mref.clone(),
                                ret,
                                is_static: false,
                                is_test: false,
                                is_abstract: true,
                                path: NodePath(vec![di as u32, si as u32]),
                                frame_size: 0,
                            },
                        );
                        self.out.classes.get_mut(&owner).unwrap().methods.push(mref);
                    }
                }
                Decl::Class(c) => {
                    for (mi, m) in c.members.iter().enumerate() {
                        let path = NodePath(vec![di as u32, mi as u32]);
                        match m {
                            Member::Field(f) => {
                                if !names.insert(f.name.clone()) {
                                    self.err(
                                        DiagCode::DuplicateDefinition,
                                        f.span,
                                        format!("`{owner}#{}` is declared more than once", f.name),
                                    );
                                    continue;
                                }
                                let Some(ty) = self.value_type(&f.ty, f.span, "field") else {
                                    continue;
                                };
                                let fref = FieldRef::new(owner.clone(), f.name.clone());
                                self.out.fields.insert(
                                    fref.clone(),
                                    FieldInfo {
                                        field: fref.clone(),
                                        ty,
                                        is_static: f.is_static,
                                        path,
                                    },
                                );
                                self.out.classes.get_mut(&owner).unwrap().fields.push(fref);
                            }
                            Member::Method(md) => {
                                if !names.insert(md.name.clone()) {
                                    self.err(
                                        DiagCode::DuplicateDefinition,
                                        md.span,
                                        format!("`{owner}.{}` is declared more than once", md.name),
                                    );
                                    continue;
                                }
                                let (Some(ret), Some(params)) = (
                                    self.resolve_type(&md.ret, md.span),
                                    self.param_types(&md.params),
                                ) else {
                                    continue;
                                };
                                if md.is_test && (!params.is_empty() || ret != Type::Void) {
                                    self.err(
                                        DiagCode::InvalidTest,
                                        md.span,
                                        format!(
                                            "test `{}` must take no parameters and return void",
                                            md.name
                                        ),
                                    );
                                }
                                let mref = MethodRef::new(owner.clone(), md.name.clone(), params);
                                self.out.methods.insert(
                                    mref.clone(),
                                    MethodInfo {
                                        method: mref.clone(),
                                        ret,
                                        is_static: md.is_static,
                                        is_test: md.is_test,
                                        is_abstract: false,
                                        path,
                                        frame_size: 0,
                                    },
                                );
                                self.out
                                    .classes
                                    .get_mut(&owner)
                                    .unwrap()
                                    .methods
                                    .push(mref.clone());
                                if md.is_test {
                                    self.out.tests.push(mref);
                                }
                            }
                        }
                    }
                }
            }
        }
        // Fields may not hide inherited fields.
        let class_names: Vec<String> = self.out.classes.keys().cloned().collect();
        for c in &class_names {
            let info = &self.out.classes[c];
            let Some(sup) = info.superclass.clone() else {
                continue;
            };
            for f in info.fields.clone() {
                if let Some(prev) = self.out.lookup_field(&sup, &f.name).cloned() {
                    let span = self.span_of(program, &self.out.fields[&f].path);
                    self.err(
                        DiagCode::DuplicateDefinition,
                        span,
                        format!("field `{f}` hides inherited field `{prev}`"),
                    );
                }
            }
        }
    }

    fn span_of(&self, program: &Program, path: &NodePath) -> Span {
        program.node_at(path).map(NodeRef::span).unwrap_or_default()
    }

    fn same_signature(&self, a: &MethodRef, b: &MethodRef) -> bool {
        a.params == b.params && self.out.methods[a].ret == self.out.methods[b].ret
    }

    fn check_overrides(&mut self, program: &Program) {
        let class_names: Vec<String> = self.out.classes.keys().cloned().collect();
        let mut pending = Vec::new();
        for c in &class_names {
            let info = self.out.classes[c].clone();
            if info.is_interface {
                continue;
            }
            for m in &info.methods {
                let mi = &self.out.methods[m];
                let span_path = mi.path.clone();
                let mut parents = Vec::new();
                if let Some(sup) = &info.superclass {
                    if let Some(p) = self.out.lookup_method(sup, &m.name).cloned() {
                        let pi = &self.out.methods[&p];
                        if pi.is_static != mi.is_static {
                            pending.push((
                                span_path.clone(),
                                format!("`{m}` and `{p}` differ in static-ness"),
                            ));
                        } else if !self.same_signature(m, &p) {
                            pending.push((
                                span_path.clone(),
                                format!("`{m}` does not match the signature of `{p}`"),
                            ));
                        } else if !mi.is_static {
                            parents.push(p);
                        }
                    }
                }
                for iface in &info.interfaces {
                    let found = self.out.classes[iface]
                        .methods
                        .iter()
                        .find(|s| s.name == m.name)
                        .cloned();
                    if let Some(s) = found {
                        if mi.is_static || !self.same_signature(m, &s) {
                            pending.push((
                                span_path.clone(),
                                format!("`{m}` does not implement `{s}`"),
                            ));
                        } else {
                            parents.push(s);
                        }
                    }
                }
                if !parents.is_empty() {
                    self.out.overrides.insert(m.clone(), parents);
                }
            }
            for iface in &info.interfaces {
                for s in self.out.classes[iface].methods.clone() {
                    let ok = self
                        .out
                        .lookup_method(c, &s.name)
                        .cloned()
                        .is_some_and(|m| {
                            !self.out.methods[&m].is_static && self.same_signature(&m, &s)
                        });
                    if !ok {
                        let path = NodePath(vec![info.decl_index]);
                        pending.push((path, format!("`{c}` does not implement `{s}`")));
                    }
                }
            }
        }
        for (path, msg) in pending {
            let code = if path.0.len() == 1 {
                DiagCode::MissingImplementation
            } else {
                DiagCode::SignatureMismatch
            };
            let span = self.span_of(program, &path);
            self.err(code, span, msg);
        }
    }
}

impl Checker {
    fn check_bodies(&mut self, program: &Program) {
        for (di, d) in program.decls.iter().enumerate() {
            let Decl::Class(c) = d else { continue };
            for (mi, m) in c.members.iter().enumerate() {
                let mut path = vec![di as u32, mi as u32];
                match m {
                    Member::Field(f) => {
                        let fref = FieldRef::new(c.name.clone(), f.name.clone());
                        let (Some(init), Some(info)) =
                            (&f.init, self.out.fields.get(&fref).cloned())
                        else {
                            continue;
                        };
                        let mut bx = BodyCx {
                            class: c.name.clone(),
                            is_static: f.is_static,
                            ret: Type::Void,
                            method: None,
                            scope: Scope {
                                frames: vec![HashMap::new()],
                                next_slot: 0,
                            },
                        };
                        path.push(0);
                        if let Some(t) = self.expr(&mut bx, init, &mut path) {
                            self.expect_assignable(&t, &info.ty, init.span);
                        }
                    }
                    Member::Method(md) => {
                        let Some(mref) = self.out.lookup_method(&c.name, &md.name).cloned() else {
                            continue;
                        };
                        if mref.owner != c.name {
                            continue;
                        }
                        let info = self.out.methods[&mref].clone();
                        let mut scope = Scope {
                            frames: vec![HashMap::new()],
                            next_slot: 0,
                        };
                        for (p, t) in md.params.iter().zip(&mref.params) {
                            scope.declare(&p.name, t.clone());
                        }
                        let mut bx = BodyCx {
                            class: c.name.clone(),
                            is_static: md.is_static,
                            ret: info.ret.clone(),
                            method: Some(mref.clone()),
                            scope,
                        };
                        self.out.uses.entry(mref.clone()).or_default();
                        path.push(0);
                        self.block(&mut bx, &md.body, &mut path);
                        if info.ret != Type::Void && !block_returns(&md.body) {
                            self.err(
                                DiagCode::MissingReturn,
                                md.span,
                                format!("`{mref}` may finish without returning a value"),
                            );
                        }
                        if let Some(mi) = self.out.methods.get_mut(&mref) {
                            mi.frame_size = bx.scope.next_slot;
                        }
                    }
                }
            }
        }
    }

    fn is_assignable(&self, from: &Type, to: &Type) -> bool {
        match (from, to) {
            (Type::Object(a), Type::Object(b)) => self.out.is_subtype(a, b),
            (a, b) => a == b && !matches!(a, Type::ClassRef(_) | Type::Void),
        }
    }

    fn expect_assignable(&mut self, from: &Type, to: &Type, span: Span) {
        if !self.is_assignable(from, to) {
            self.err(
                DiagCode::TypeError,
                span,
                format!("expected `{to}`, found `{from}`"),
            );
        }
    }

    fn expect_type(&mut self, found: Option<Type>, want: &Type, span: Span) -> bool {
        match found {
            Some(t) if &t == want => true,
            Some(t) => {
                self.err(
                    DiagCode::TypeError,
                    span,
                    format!("expected `{want}`, found `{t}`"),
                );
                false
            }
            None => false,
        }
    }

    fn block(&mut self, bx: &mut BodyCx, b: &Block, path: &mut Vec<u32>) {
        bx.scope.frames.push(HashMap::new());
        for (i, s) in b.stmts.iter().enumerate() {
            path.push(i as u32);
            self.stmt(bx, s, path);
            path.pop();
        }
        bx.scope.frames.pop();
    }

    fn note_uses(&mut self, bx: &BodyCx, f: impl FnOnce(&mut MemberUses)) {
        if let Some(m) = &bx.method {
            f(self.out.uses.entry(m.clone()).or_default());
        }
    }

    fn stmt(&mut self, bx: &mut BodyCx, s: &Stmt, path: &mut Vec<u32>) {
        match &s.kind {
            StmtKind::Local { ty, name, init } => {
                let declared = self.value_type(ty, s.span, "local variable");
                if let Some(e) = init {
                    path.push(0);
                    let t = self.expr(bx, e, path);
                    path.pop();
                    if let (Some(t), Some(d)) = (t, &declared) {
                        self.expect_assignable(&t, d, e.span);
                    }
                }
                if bx.scope.lookup(name).is_some() {
                    self.err(
                        DiagCode::DuplicateDefinition,
                        s.span,
                        format!("variable `{name}` is already defined"),
                    );
                }
                let slot = bx.scope.declare(name, declared.unwrap_or(Type::Void));
                self.out.local_slots.insert(NodePath(path.clone()), slot);
            }
            StmtKind::Assign { target, value } => match target {
                Place::Local(name) => {
                    path.push(0);
                    let vt = self.expr(bx, value, path);
                    path.pop();
                    match bx.scope.lookup(name).cloned() {
                        Some((slot, ty)) => {
                            self.out.local_slots.insert(NodePath(path.clone()), slot);
                            if let Some(vt) = vt {
                                self.expect_assignable(&vt, &ty, value.span);
                            }
                        }
                        None => self.err(
                            DiagCode::UnknownVariable,
                            s.span,
                            format!("unknown variable `{name}`"),
                        ),
                    }
                }
                Place::Field { object, name } => {
                    path.push(0);
                    let ot = self.expr(bx, object, path);
                    path.pop();
                    path.push(1);
                    let vt = self.expr(bx, value, path);
                    path.pop();
                    if let Some(ot) = ot {
                        if let Some((fref, fty)) = self.resolve_field(&ot, name, object.span) {
                            self.out
                                .field_targets
                                .insert(NodePath(path.clone()), fref.clone());
                            self.note_uses(bx, |u| {
                                u.writes.insert(fref);
                            });
                            if let Some(vt) = vt {
                                self.expect_assignable(&vt, &fty, value.span);
                            }
                        }
                    }
                }
            },
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                path.push(0);
                let t = self.expr(bx, cond, path);
                path.pop();
                self.expect_type(t, &Type::Bool, cond.span);
                path.push(1);
                self.block(bx, then_block, path);
                path.pop();
                if let Some(b) = else_block {
                    path.push(2);
                    self.block(bx, b, path);
                    path.pop();
                }
            }
            StmtKind::While { cond, body } => {
                path.push(0);
                let t = self.expr(bx, cond, path);
                path.pop();
                self.expect_type(t, &Type::Bool, cond.span);
                path.push(1);
                self.block(bx, body, path);
                path.pop();
            }
            StmtKind::Return(value) => match (value, bx.ret.clone()) {
                (None, Type::Void) => {}
                (None, r) => self.err(
                    DiagCode::TypeError,
                    s.span,
                    format!("missing return value of type `{r}`"),
                ),
                (Some(e), r) => {
                    path.push(0);
                    let t = self.expr(bx, e, path);
                    path.pop();
                    if r == Type::Void {
                        self.err(
                            DiagCode::TypeError,
                            e.span,
                            "void method cannot return a value",
                        );
                    } else if let Some(t) = t {
                        self.expect_assignable(&t, &r, e.span);
                    }
                }
            },
            StmtKind::Assert(e) => {
                path.push(0);
                let t = self.expr(bx, e, path);
                path.pop();
                self.expect_type(t, &Type::Bool, e.span);
            }
            StmtKind::Expr(e) => {
                path.push(0);
                self.expr(bx, e, path);
                path.pop();
            }
        }
    }

    fn resolve_field(&mut self, object: &Type, name: &str, span: Span) -> Option<(FieldRef, Type)> {
        let (class, need_static) = match object {
            Type::Object(c) => (c.clone(), false),
            Type::ClassRef(c) => (c.clone(), true),
            other => {
                self.err(
                    DiagCode::TypeError,
                    span,
                    format!("`{other}` has no fields"),
                );
                return None;
            }
        };
        let Some(fref) = self.out.lookup_field(&class, name).cloned() else {
            self.err(
                DiagCode::UnknownMember,
                span,
                format!("`{class}` has no field `{name}`"),
            );
            return None;
        };
        let info = &self.out.fields[&fref];
        if need_static && !info.is_static {
            self.err(
                DiagCode::TypeError,
                span,
                format!("instance field `{fref}` accessed through class name"),
            );
            return None;
        }
        Some((fref, info.ty.clone()))
    }

    fn expr(&mut self, bx: &mut BodyCx, e: &Expr, path: &mut Vec<u32>) -> Option<Type> {
        let t = self.expr_inner(bx, e, path)?;
        self.out
            .static_types
            .insert(NodePath(path.clone()), t.clone());
        Some(t)
    }

    fn child(&mut self, bx: &mut BodyCx, e: &Expr, idx: u32, path: &mut Vec<u32>) -> Option<Type> {
        path.push(idx);
        let t = self.expr(bx, e, path);
        path.pop();
        t
    }

    fn expr_inner(&mut self, bx: &mut BodyCx, e: &Expr, path: &mut Vec<u32>) -> Option<Type> {
        match &e.kind {
            ExprKind::Int(_) => Some(Type::Int),
            ExprKind::Bool(_) => Some(Type::Bool),
            ExprKind::This => {
                if bx.is_static {
                    self.err(
                        DiagCode::InvalidThis,
                        e.span,
                        "`this` used in a static context",
                    );
                    None
                } else {
                    Some(Type::Object(bx.class.clone()))
                }
            }
            ExprKind::Name(n) => {
                if let Some((slot, ty)) = bx.scope.lookup(n).cloned() {
                    self.out.local_slots.insert(NodePath(path.clone()), slot);
                    Some(ty)
                } else if self.out.classes.get(n).is_some_and(|c| !c.is_interface) {
                    Some(Type::ClassRef(n.clone()))
                } else {
                    self.err(
                        DiagCode::UnknownVariable,
                        e.span,
                        format!("unknown variable `{n}`"),
                    );
                    None
                }
            }
            ExprKind::Field { object, name } => {
                let ot = self.child(bx, object, 0, path)?;
                let (fref, ty) = self.resolve_field(&ot, name, e.span)?;
                self.out
                    .field_targets
                    .insert(NodePath(path.clone()), fref.clone());
                self.note_uses(bx, |u| {
                    u.reads.insert(fref);
                });
                Some(ty)
            }
            ExprKind::Call {
                receiver,
                name,
                args,
            } => {
                let mut idx = 0;
                let (class, mode) = match receiver {
                    None => (
                        bx.class.clone(),
                        if bx.is_static {
                            CallMode::StaticOnly
                        } else {
                            CallMode::Any
                        },
                    ),
                    Some(r) => {
                        idx = 1;
                        match self.child(bx, r, 0, path) {
                            Some(Type::Object(c)) => (c, CallMode::Any),
                            Some(Type::ClassRef(c)) => (c, CallMode::StaticOnly),
                            Some(other) => {
                                self.err(
                                    DiagCode::TypeError,
                                    r.span,
                                    format!("`{other}` has no methods"),
                                );
                                return None;
                            }
                            None => return None,
                        }
                    }
                };
                let mut arg_types = Vec::new();
                for (i, a) in args.iter().enumerate() {
                    arg_types.push(self.child(bx, a, idx + i as u32, path));
                }
                let target = match self.out.classes.get(&class) {
                    Some(ci) if ci.is_interface => {
                        ci.methods.iter().find(|m| &m.name == name).cloned()
                    }
                    _ => self.out.lookup_method(&class, name).cloned(),
                };
                let Some(target) = target else {
                    self.err(
                        DiagCode::UnknownMember,
                        e.span,
                        format!("`{class}` has no method `{name}`"),
                    );
                    return None;
                };
                let info = self.out.methods[&target].clone();
                if mode == CallMode::StaticOnly && !info.is_static {
                    let code = if receiver.is_none() {
                        DiagCode::InvalidThis
                    } else {
                        DiagCode::TypeError
                    };
                    self.err(
                        code,
                        e.span,
                        format!("instance method `{target}` called without a receiver object"),
                    );
                    return None;
                }
                if target.params.len() != args.len() {
                    self.err(
                        DiagCode::SignatureMismatch,
                        e.span,
                        format!(
                            "`{target}` takes {} arguments, {} given",
                            target.params.len(),
                            args.len()
                        ),
                    );
                    return None;
                }
                let mut ok = true;
                for ((a, at), pt) in args.iter().zip(&arg_types).zip(&target.params) {
                    match at {
                        Some(at) if self.is_assignable(at, pt) => {}
                        Some(at) => {
                            self.err(
                                DiagCode::TypeError,
                                a.span,
                                format!("expected `{pt}`, found `{at}`"),
                            );
                            ok = false;
                        }
                        None => ok = false,
                    }
                }
                self.out
                    .call_targets
                    .insert(NodePath(path.clone()), target.clone());
                self.note_uses(bx, |u| {
                    u.calls.insert(target);
                });
                ok.then_some(info.ret)
            }
            ExprKind::New(c) => match self.out.classes.get(c) {
                Some(ci) if !ci.is_interface => Some(Type::Object(c.clone())),
                Some(_) => {
                    self.err(
                        DiagCode::TypeError,
                        e.span,
                        format!("cannot instantiate interface `{c}`"),
                    );
                    None
                }
                None => {
                    self.err(
                        DiagCode::UnknownType,
                        e.span,
                        format!("unknown class `{c}`"),
                    );
                    None
                }
            },
            ExprKind::Binary { op, lhs, rhs } => {
                let lt = self.child(bx, lhs, 0, path);
                let rt = self.child(bx, rhs, 1, path);
                let (lt, rt) = (lt?, rt?);
                let mismatch = |s: &mut Self| {
                    s.err(
                        DiagCode::TypeError,
                        e.span,
                        format!(
                            "operator `{}` cannot be applied to `{lt}` and `{rt}`",
                            op.symbol()
                        ),
                    );
                    None
                };
                if op.is_arithmetic() {
                    if lt == Type::Int && rt == Type::Int {
                        Some(Type::Int)
                    } else {
                        mismatch(self)
                    }
                } else if op.is_logical() {
                    if lt == Type::Bool && rt == Type::Bool {
                        Some(Type::Bool)
                    } else {
                        mismatch(self)
                    }
                } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                    let ok = match (&lt, &rt) {
                        (Type::Int, Type::Int) | (Type::Bool, Type::Bool) => true,
                        (Type::Object(a), Type::Object(b)) => {
                            self.out.is_subtype(a, b)
                                || self.out.is_subtype(b, a)
                                || self.out.classes[a].is_interface
                                || self.out.classes[b].is_interface
                        }
                        _ => false,
                    };
                    if ok {
                        Some(Type::Bool)
                    } else {
                        mismatch(self)
                    }
                } else if lt == Type::Int && rt == Type::Int {
                    Some(Type::Bool)
                } else {
                    mismatch(self)
                }
            }
            ExprKind::Unary { op, operand } => {
                let t = self.child(bx, operand, 0, path)?;
                let want = match op {
                    UnOp::Neg => Type::Int,
                    UnOp::Not => Type::Bool,
                };
                if t == want {
                    Some(want)
                } else {
                    self.err(
                        DiagCode::TypeError,
                        e.span,
                        format!("operator `{}` cannot be applied to `{t}`", op.symbol()),
                    );
                    None
                }
            }
            ExprKind::Abs(inner) => {
                let t = self.child(bx, inner, 0, path);
                self.expect_type(t, &Type::Int, inner.span)
                    .then_some(Type::Int)
            }
            ExprKind::ReflectCall { target, .. } => match self.child(bx, target, 0, path)? {
                Type::Object(_) => Some(Type::Int),
                other => {
                    self.err(
                        DiagCode::TypeError,
                        target.span,
                        format!("reflect_call needs an object receiver, found `{other}`"),
                    );
                    None
                }
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CallMode {
    Any,
    StaticOnly,
}

/// Conservative definite-return analysis: a block returns if some statement
/// in it returns, or is an if whose branches both return.
fn block_returns(b: &Block) -> bool {
    b.stmts.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If {
            then_block,
            else_block: Some(e),
            ..
        } => block_returns(then_block) && block_returns(e),
        _ => false,
    })
}
