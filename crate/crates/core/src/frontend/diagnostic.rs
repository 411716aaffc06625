use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagCode {
    LexError,
    SyntaxError,
    UnknownType,
    UnknownMember,
    UnknownVariable,
    SignatureMismatch,
    InheritanceCycle,
    DuplicateDefinition,
    TypeError,
    MissingImplementation,
    MissingReturn,
    InvalidTest,
    InvalidThis,
    EmptyProject,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::LexError => "E001",
            DiagCode::SyntaxError => "E002",
            DiagCode::UnknownType => "E101",
            DiagCode::UnknownMember => "E102",
            DiagCode::UnknownVariable => "E103",
            DiagCode::SignatureMismatch => "E104",
            DiagCode::InheritanceCycle => "E105",
            DiagCode::DuplicateDefinition => "E106",
            DiagCode::TypeError => "E107",
            DiagCode::MissingImplementation => "E108",
            DiagCode::MissingReturn => "E109",
            DiagCode::InvalidTest => "E110",
            DiagCode::InvalidThis => "E111",
            DiagCode::EmptyProject => "E112",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub span: Span,
    pub severity: Severity,
    pub code: DiagCode,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagCode, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            span,
            severity: Severity::Error,
            code,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Renders with the unit path looked up from `files`.
    pub fn render(&self, files: &[String]) -> String {
        let file = files
            .get(self.span.file as usize)
            .map(String::as_str)
            .unwrap_or("<input>");
        format!("{}:{}:{}: {}", file, self.span.line, self.span.col, self)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}[{}]: {}", sev, self.code.as_str(), self.message)
    }
}
