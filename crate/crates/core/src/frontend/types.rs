use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    Void,
    /// Instance of a class or interface.
    Object(String),
    /// A class name used as the receiver of a static access.
    ClassRef(String),
}

impl Type {
    pub fn is_reference(&self) -> bool {
        matches!(self, Type::Object(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
            Type::Void => f.write_str("void"),
            Type::Object(n) => f.write_str(n),
            Type::ClassRef(n) => write!(f, "class {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed member reference `{0}`")]
pub struct RefParseError(pub String);

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_type(s: &str) -> Option<Type> {
    match s {
        "int" => Some(Type::Int),
        "bool" => Some(Type::Bool),
        "void" => Some(Type::Void),
        other if is_ident(other) => Some(Type::Object(other.to_string())),
        _ => None,
    }
}

/// A declared method, rendered `Owner.name(T1,T2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodRef {
    pub owner: String,
    pub name: String,
    pub params: Vec<Type>,
}

impl MethodRef {
    pub fn new(owner: impl Into<String>, name: impl Into<String>, params: Vec<Type>) -> Self {
        MethodRef {
            owner: owner.into(),
            name: name.into(),
            params,
        }
    }
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.params.iter().map(Type::to_string).collect();
        write!(f, "{}.{}({})", self.owner, self.name, ps.join(","))
    }
}

impl FromStr for MethodRef {
    type Err = RefParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || RefParseError(s.to_string());
        let inner = s.strip_suffix(')').ok_or_else(err)?;
        let (head, params) = inner.split_once('(').ok_or_else(err)?;
        let (owner, name) = head.split_once('.').ok_or_else(err)?;
        if !is_ident(owner) || !is_ident(name) {
            return Err(err());
        }
        let params = if params.is_empty() {
            Vec::new()
        } else {
            params
                .split(',')
                .map(parse_type)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(err)?
        };
        Ok(MethodRef::new(owner, name, params))
    }
}

impl Serialize for MethodRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MethodRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A declared field, rendered `Owner#name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldRef {
    pub owner: String,
    pub name: String,
}

impl FieldRef {
    pub fn new(owner: impl Into<String>, name: impl Into<String>) -> Self {
        FieldRef {
            owner: owner.into(),
            name: name.into(),
        }
    }
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.owner, self.name)
    }
}

impl FromStr for FieldRef {
    type Err = RefParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('#') {
            Some((o, n)) if is_ident(o) && is_ident(n) => Ok(FieldRef::new(o, n)),
            _ => Err(RefParseError(s.to_string())),
        }
    }
}
