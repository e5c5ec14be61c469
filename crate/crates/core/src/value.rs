use alloc::string::String;
use core::fmt;

use crate::ids::ObjectId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueType {
    Int,
    Bool,
    Str,
    Ref,
}

impl ValueType {
    /// Keyword used for the type in diagram sources.
    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::Int => "Int",
            ValueType::Bool => "Bool",
            ValueType::Str => "String",
            ValueType::Ref => "Ref",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "Int" => ValueType::Int,
            "Bool" => ValueType::Bool,
            "String" => ValueType::Str,
            "Ref" => ValueType::Ref,
            _ => return None,
        })
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Ground value carried by attributes and message arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    /// `None` is the null reference.
    Ref(Option<ObjectId>),
}

impl Value {
    pub fn ty(&self) -> ValueType {
        match self {
            Value::Int(_) => ValueType::Int,
            Value::Bool(_) => ValueType::Bool,
            Value::Str(_) => ValueType::Str,
            Value::Ref(_) => ValueType::Ref,
        }
    }

    /// Value an attribute takes when an object is created without bindings.
    pub fn default_for(ty: ValueType) -> Value {
        match ty {
            ValueType::Int => Value::Int(0),
            ValueType::Bool => Value::Bool(false),
            ValueType::Str => Value::Str(String::new()),
            ValueType::Ref => Value::Ref(None),
        }
    }
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write_quoted(f, s),
            Value::Ref(Some(id)) => write!(f, "@{id}"),
            Value::Ref(None) => f.write_str("null"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn display_escapes_strings() {
        assert_eq!(Value::Str("a\"b\\".into()).to_string(), r#""a\"b\\""#);
        assert_eq!(Value::Ref(Some(ObjectId::new("x"))).to_string(), "@x");
        assert_eq!(Value::Ref(None).to_string(), "null");
        assert_eq!(Value::Int(-3).to_string(), "-3");
    }

    #[test]
    fn defaults() {
        assert_eq!(Value::default_for(ValueType::Int), Value::Int(0));
        assert_eq!(Value::default_for(ValueType::Str), Value::Str(String::new()));
        assert_eq!(Value::default_for(ValueType::Ref), Value::Ref(None));
    }
}
