use std::fmt::Write;

use super::ast::*;

const UNARY_PREC: u8 = 7;
const POSTFIX_PREC: u8 = 8;

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (i, d) in program.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        decl(&mut out, d);
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(&mut s, e, 0);
    s
}

fn params(out: &mut String, ps: &[Param]) {
    let parts: Vec<String> = ps.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
    out.push_str(&parts.join(", "));
}

fn decl(out: &mut String, d: &Decl) {
    match d {
        Decl::Class(c) => {
            write!(out, "class {}", c.name).unwrap();
            if let Some(e) = &c.extends {
                write!(out, " extends {e}").unwrap();
            }
            if !c.implements.is_empty() {
                write!(out, " implements {}", c.implements.join(", ")).unwrap();
            }
            out.push_str(" {\n");
            for m in &c.members {
                member(out, m);
            }
            out.push_str("}\n");
        }
        Decl::Interface(i) => {
            writeln!(out, "interface {} {{", i.name).unwrap();
            for s in &i.sigs {
                write!(out, "    {} {}(", s.ret, s.name).unwrap();
                params(out, &s.params);
                out.push_str(");\n");
            }
            out.push_str("}\n");
        }
    }
}

fn member(out: &mut String, m: &Member) {
    out.push_str("    ");
    match m {
        Member::Field(f) => {
            if f.is_static {
                out.push_str("static ");
            }
            write!(out, "{} {}", f.ty, f.name).unwrap();
            if let Some(init) = &f.init {
                out.push_str(" = ");
                expr(out, init, 0);
            }
            out.push_str(";\n");
        }
        Member::Method(md) => {
            if md.is_static {
                out.push_str("static ");
            }
            if md.is_test {
                out.push_str("test ");
            }
            write!(out, "{} {}(", md.ret, md.name).unwrap();
            params(out, &md.params);
            out.push_str(") ");
            block(out, &md.body, 1);
            out.push('\n');
        }
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn block(out: &mut String, b: &Block, level: usize) {
    out.push_str("{\n");
    for s in &b.stmts {
        stmt(out, s, level + 1);
    }
    indent(out, level);
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::Local { ty, name, init } => {
            write!(out, "{ty} {name}").unwrap();
            if let Some(e) = init {
                out.push_str(" = ");
                expr(out, e, 0);
            }
            out.push(';');
        }
        StmtKind::Assign { target, value } => {
            match target {
                Place::Local(n) => out.push_str(n),
                Place::Field { object, name } => {
                    expr(out, object, POSTFIX_PREC);
                    write!(out, ".{name}").unwrap();
                }
            }
            out.push_str(" = ");
            expr(out, value, 0);
            out.push(';');
        }
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            out.push_str("if (");
            expr(out, cond, 0);
            out.push_str(") ");
            block(out, then_block, level);
            if let Some(b) = else_block {
                out.push_str(" else ");
                block(out, b, level);
            }
        }
        StmtKind::While { cond, body } => {
            out.push_str("while (");
            expr(out, cond, 0);
            out.push_str(") ");
            block(out, body, level);
        }
        StmtKind::Return(e) => {
            out.push_str("return");
            if let Some(e) = e {
                out.push(' ');
                expr(out, e, 0);
            }
            out.push(';');
        }
        StmtKind::Assert(e) => {
            out.push_str("assert(");
            expr(out, e, 0);
            out.push_str(");");
        }
        StmtKind::Expr(e) => {
            expr(out, e, 0);
            out.push(';');
        }
    }
    out.push('\n');
}

fn args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr(out, a, 0);
    }
    out.push(')');
}

/// Prints `e`, parenthesizing when its own precedence is below `min_prec`.
fn expr(out: &mut String, e: &Expr, min_prec: u8) {
    match &e.kind {
        ExprKind::Int(v) => write!(out, "{v}").unwrap(),
        ExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        ExprKind::This => out.push_str("this"),
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::New(c) => write!(out, "new {c}()").unwrap(),
        ExprKind::Abs(inner) => {
            out.push_str("abs(");
            expr(out, inner, 0);
            out.push(')');
        }
        ExprKind::ReflectCall { target, method } => {
            out.push_str("reflect_call(");
            expr(out, target, 0);
            write!(out, ", \"{method}\")").unwrap();
        }
        ExprKind::Field { object, name } => {
            expr(out, object, POSTFIX_PREC);
            write!(out, ".{name}").unwrap();
        }
        ExprKind::Call {
            receiver,
            name,
            args: a,
        } => {
            if let Some(r) = receiver {
                expr(out, r, POSTFIX_PREC);
                out.push('.');
            }
            out.push_str(name);
            args(out, a);
        }
        ExprKind::Unary { op, operand } => {
            let paren = UNARY_PREC < min_prec;
            if paren {
                out.push('(');
            }
            out.push_str(op.symbol());
            expr(out, operand, UNARY_PREC);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let paren = prec < min_prec;
            if paren {
                out.push('(');
            }
            expr(out, lhs, prec);
            write!(out, " {} ", op.symbol()).unwrap();
            expr(out, rhs, prec + 1);
            if paren {
                out.push(')');
            }
        }
    }
}
