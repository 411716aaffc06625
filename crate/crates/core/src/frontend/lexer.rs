use super::ast::Span;
use super::diagnostic::{DiagCode, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    // keywords
    Class,
    Interface,
    Extends,
    Implements,
    Static,
    Test,
    IntTy,
    BoolTy,
    VoidTy,
    If,
    Else,
    While,
    Return,
    Assert,
    True,
    False,
    This,
    New,
    Abs,
    ReflectCall,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Dot,
    Assign,
    Op(&'static str),
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Class => "class",
            Tok::Interface => "interface",
            Tok::Extends => "extends",
            Tok::Implements => "implements",
            Tok::Static => "static",
            Tok::Test => "test",
            Tok::IntTy => "int",
            Tok::BoolTy => "bool",
            Tok::VoidTy => "void",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Return => "return",
            Tok::Assert => "assert",
            Tok::True => "true",
            Tok::False => "false",
            Tok::This => "this",
            Tok::New => "new",
            Tok::Abs => "abs",
            Tok::ReflectCall => "reflect_call",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Assign => "=",
            Tok::Op(s) => s,
            Tok::Bang => "!",
            Tok::Ident(_) | Tok::Int(_) | Tok::Str(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "class" => Tok::Class,
        "interface" => Tok::Interface,
        "extends" => Tok::Extends,
        "implements" => Tok::Implements,
        "static" => Tok::Static,
        "test" => Tok::Test,
        "int" => Tok::IntTy,
        "bool" => Tok::BoolTy,
        "void" => Tok::VoidTy,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "return" => Tok::Return,
        "assert" => Tok::Assert,
        "true" => Tok::True,
        "false" => Tok::False,
        "this" => Tok::This,
        "new" => Tok::New,
        "abs" => Tok::Abs,
        "reflect_call" => Tok::ReflectCall,
        _ => return None,
    })
}

pub fn tokenize(file: u32, text: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut line_start = 0usize;

    let span_of = |start: usize, end: usize, line: u32, line_start: usize| Span {
        file,
        start: start as u32,
        end: end as u32,
        line,
        col: (start - line_start) as u32 + 1,
    };

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()))
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let digits = &text[start..i];
            match digits.parse::<i64>() {
                Ok(v) if v <= i32::MAX as i64 => Tok::Int(v),
                _ => {
                    return Err(Diagnostic::error(
                        DiagCode::LexError,
                        span_of(start, i, line, line_start),
                        format!("integer literal `{digits}` out of range"),
                    ))
                }
            }
        } else if c == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                i += 1;
            }
            if i >= bytes.len() || bytes[i] != b'"' {
                return Err(Diagnostic::error(
                    DiagCode::LexError,
                    span_of(start, i, line, line_start),
                    "unterminated string literal",
                ));
            }
            i += 1;
            Tok::Str(text[start + 1..i - 1].to_string())
        } else {
            let two = text.get(i..i + 2).unwrap_or("");
            let (t, len) = match two {
                "<=" => (Tok::Op("<="), 2),
                ">=" => (Tok::Op(">="), 2),
                "==" => (Tok::Op("=="), 2),
                "!=" => (Tok::Op("!="), 2),
                "&&" => (Tok::Op("&&"), 2),
                "||" => (Tok::Op("||"), 2),
                _ => match c {
                    b'{' => (Tok::LBrace, 1),
                    b'}' => (Tok::RBrace, 1),
                    b'(' => (Tok::LParen, 1),
                    b')' => (Tok::RParen, 1),
                    b';' => (Tok::Semi, 1),
                    b',' => (Tok::Comma, 1),
                    b'.' => (Tok::Dot, 1),
                    b'=' => (Tok::Assign, 1),
                    b'!' => (Tok::Bang, 1),
                    b'+' => (Tok::Op("+"), 1),
                    b'-' => (Tok::Op("-"), 1),
                    b'*' => (Tok::Op("*"), 1),
                    b'/' => (Tok::Op("/"), 1),
                    b'%' => (Tok::Op("%"), 1),
                    b'<' => (Tok::Op("<"), 1),
                    b'>' => (Tok::Op(">"), 1),
                    _ => {
                        let ch = text[i..].chars().next().unwrap_or('?');
                        return Err(Diagnostic::error(
                            DiagCode::LexError,
                            span_of(start, i + ch.len_utf8(), line, line_start),
                            format!("unexpected character `{ch}`"),
                        ));
                    }
                },
            };
            i += len;
            t
        };
        out.push(Token {
            tok,
            span: span_of(start, i, line, line_start),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: span_of(i, i, line, line_start),
    });
    Ok(out)
}
