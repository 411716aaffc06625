//! Lexer, parser, pretty-printer and static checker for MiniOO.

pub mod ast;
mod checker;
mod diagnostic;
mod lexer;
mod parser;
mod printer;
mod types;

use std::path::Path;

pub use ast::{NodePath, NodeRef, Program, Span};
pub use checker::{
    check, method_at, CheckedProgram, ClassInfo, FieldInfo, LocateError, MemberUses, MethodInfo,
};
pub use diagnostic::{DiagCode, Diagnostic, Severity};
pub use parser::{parse, parse_str};
pub use printer::{pretty_print, print_expr};
pub use types::{FieldRef, MethodRef, RefParseError, Type};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
}

impl SourceUnit {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        SourceUnit {
            path: path.into(),
            text: text.into(),
        }
    }
}

/// Reads every `*.moo` file under `dir` (recursively), sorted by relative path.
pub fn load_units(dir: &Path) -> Result<Vec<SourceUnit>> {
    if !dir.is_dir() {
        return Err(Error::Project(format!(
            "`{}` is not a directory",
            dir.display()
        )));
    }
    let mut files = Vec::new();
    collect_moo(dir, &mut files)?;
    files.sort();
    let mut units = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f).map_err(|e| Error::io(&f, e))?;
        let rel = f
            .strip_prefix(dir)
            .unwrap_or(&f)
            .to_string_lossy()
            .replace('\\', "/");
        units.push(SourceUnit::new(rel, text));
    }
    if units.is_empty() {
        return Err(Error::Project(format!(
            "no .moo files in `{}`",
            dir.display()
        )));
    }
    Ok(units)
}

fn collect_moo(dir: &Path, out: &mut Vec<std::path::PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let p = entry.path();
        if p.is_dir() {
            collect_moo(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "moo") {
            out.push(p);
        }
    }
    Ok(())
}

/// Parses and checks a set of units, rendering diagnostics into the error.
pub fn compile(units: &[SourceUnit]) -> Result<CheckedProgram> {
    let files: Vec<String> = units.iter().map(|u| u.path.clone()).collect();
    let program = parse(units).map_err(|d| Error::Diagnostics(render_all(&d, &files)))?;
    check(program).map_err(|d| Error::Diagnostics(render_all(&d, &files)))
}

/// Loads, parses and checks the project in `dir`.
pub fn compile_dir(dir: &Path) -> Result<CheckedProgram> {
    compile(&load_units(dir)?)
}

fn render_all(diags: &[Diagnostic], files: &[String]) -> Vec<String> {
    diags.iter().map(|d| d.render(files)).collect()
}
