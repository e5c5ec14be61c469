//! Guard, invariant and action expressions.
//!
//! Integer arithmetic (`+ - * div`), comparisons, boolean connectives and
//! references to attributes, trigger parameters, `self` and `sender`.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use core::fmt;

use thiserror::Error;

use crate::ids::ObjectId;
use crate::value::{Value, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    /// Attribute or trigger parameter.
    Var(String),
    SelfRef,
    SenderRef,
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("operator `{op}` applied to {found}")]
    Type { op: &'static str, found: ValueType },
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("`{0}` is not available here")]
    Unavailable(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct TypeError(pub String);

/// Names visible to an evaluation. Parameters shadow attributes.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env<'a> {
    pub params: Option<&'a BTreeMap<String, Value>>,
    pub attrs: Option<&'a BTreeMap<String, Value>>,
    pub this: Option<&'a ObjectId>,
    pub sender: Option<&'a ObjectId>,
}

impl<'a> Env<'a> {
    fn lookup(&self, name: &str) -> Option<&'a Value> {
        self.params
            .and_then(|p| p.get(name))
            .or_else(|| self.attrs.and_then(|a| a.get(name)))
    }
}

/// Static typing context.
#[derive(Debug, Clone, Copy)]
pub struct TypeEnv<'a> {
    pub vars: &'a BTreeMap<String, ValueType>,
    pub has_self: bool,
    pub has_sender: bool,
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Lit(Value::Int(n))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Lit(Value::Bool(b))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    /// Conjunction of `parts`; `true` when empty.
    pub fn conjunction<I: IntoIterator<Item = Expr>>(parts: I) -> Expr {
        parts
            .into_iter()
            .reduce(|acc, e| Expr::bin(BinOp::And, acc, e))
            .unwrap_or(Expr::bool(true))
    }

    pub fn eval(&self, env: &Env<'_>) -> Result<Value, EvalError> {
        match self {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(name) => env
                .lookup(name)
                .cloned()
                .ok_or_else(|| EvalError::Unbound(name.clone())),
            Expr::SelfRef => env
                .this
                .map(|id| Value::Ref(Some(id.clone())))
                .ok_or(EvalError::Unavailable("self")),
            Expr::SenderRef => env
                .sender
                .map(|id| Value::Ref(Some(id.clone())))
                .ok_or(EvalError::Unavailable("sender")),
            Expr::Unary(UnOp::Neg, e) => match e.eval(env)? {
                Value::Int(n) => n.checked_neg().map(Value::Int).ok_or(EvalError::Overflow),
                v => Err(EvalError::Type { op: "-", found: v.ty() }),
            },
            Expr::Unary(UnOp::Not, e) => match e.eval(env)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                v => Err(EvalError::Type { op: "not", found: v.ty() }),
            },
            Expr::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                let lhs = expect_bool(op.symbol(), l.eval(env)?)?;
                // short-circuit
                match (op, lhs) {
                    (BinOp::And, false) => Ok(Value::Bool(false)),
                    (BinOp::Or, true) => Ok(Value::Bool(true)),
                    _ => Ok(Value::Bool(expect_bool(op.symbol(), r.eval(env)?)?)),
                }
            }
            Expr::Binary(op, l, r) => {
                let lhs = l.eval(env)?;
                let rhs = r.eval(env)?;
                apply_binary(*op, lhs, rhs)
            }
        }
    }

    pub fn eval_bool(&self, env: &Env<'_>) -> Result<bool, EvalError> {
        expect_bool("guard", self.eval(env)?)
    }

    pub fn type_of(&self, tenv: &TypeEnv<'_>) -> Result<ValueType, TypeError> {
        match self {
            Expr::Lit(v) => Ok(v.ty()),
            Expr::Var(name) => tenv
                .vars
                .get(name)
                .copied()
                .ok_or_else(|| TypeError(alloc::format!("unknown name `{name}`"))),
            Expr::SelfRef if tenv.has_self => Ok(ValueType::Ref),
            Expr::SenderRef if tenv.has_sender => Ok(ValueType::Ref),
            Expr::SelfRef => Err(TypeError("`self` is not available here".into())),
            Expr::SenderRef => Err(TypeError("`sender` is not available here".into())),
            Expr::Unary(op, e) => {
                let (want, name) = match op {
                    UnOp::Neg => (ValueType::Int, "-"),
                    UnOp::Not => (ValueType::Bool, "not"),
                };
                let t = e.type_of(tenv)?;
                if t == want {
                    Ok(want)
                } else {
                    Err(TypeError(alloc::format!("`{name}` expects {want}, found {t}")))
                }
            }
            Expr::Binary(op, l, r) => {
                let lt = l.type_of(tenv)?;
                let rt = r.type_of(tenv)?;
                let operands = |want: ValueType| {
                    if lt == want && rt == want {
                        Ok(())
                    } else {
                        Err(TypeError(alloc::format!(
                            "`{}` expects {want} operands, found {lt} and {rt}",
                            op.symbol()
                        )))
                    }
                };
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        operands(ValueType::Int).map(|_| ValueType::Int)
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        operands(ValueType::Int).map(|_| ValueType::Bool)
                    }
                    BinOp::And | BinOp::Or => operands(ValueType::Bool).map(|_| ValueType::Bool),
                    BinOp::Eq | BinOp::Ne => {
                        if lt == rt {
                            Ok(ValueType::Bool)
                        } else {
                            Err(TypeError(alloc::format!(
                                "cannot compare {lt} with {rt}"
                            )))
                        }
                    }
                }
            }
        }
    }

    /// Names referenced through [`Expr::Var`].
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Unary(_, e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Lit(_) | Expr::SelfRef | Expr::SenderRef => {}
        }
    }

    /// Splits nested `and` into its conjuncts.
    pub fn conjuncts(&self) -> alloc::vec::Vec<&Expr> {
        let mut out = alloc::vec::Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(e) = stack.pop() {
            match e {
                Expr::Binary(BinOp::And, l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
                other => out.push(other),
            }
        }
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(UnOp::Not, _) => 3,
            Expr::Unary(UnOp::Neg, _) => 7,
            Expr::Lit(Value::Int(n)) if *n < 0 => 7,
            _ => 8,
        }
    }
}

fn expect_bool(op: &'static str, v: Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        v => Err(EvalError::Type { op, found: v.ty() }),
    }
}

fn apply_binary(op: BinOp, lhs: Value, rhs: Value) -> Result<Value, EvalError> {
    use BinOp::*;
    match op {
        Eq | Ne => {
            if lhs.ty() != rhs.ty() {
                return Err(EvalError::Type { op: op.symbol(), found: rhs.ty() });
            }
            Ok(Value::Bool((lhs == rhs) == (op == Eq)))
        }
        Add | Sub | Mul | Div | Lt | Le | Gt | Ge => {
            let (a, b) = match (lhs, rhs) {
                (Value::Int(a), Value::Int(b)) => (a, b),
                (Value::Int(_), v) | (v, _) => {
                    return Err(EvalError::Type { op: op.symbol(), found: v.ty() })
                }
            };
            let int = |r: Option<i64>| r.map(Value::Int).ok_or(EvalError::Overflow);
            match op {
                Add => int(a.checked_add(b)),
                Sub => int(a.checked_sub(b)),
                Mul => int(a.checked_mul(b)),
                Div if b == 0 => Err(EvalError::DivisionByZero),
                Div => int(a.checked_div(b)),
                Lt => Ok(Value::Bool(a < b)),
                Le => Ok(Value::Bool(a <= b)),
                Gt => Ok(Value::Bool(a > b)),
                _ => Ok(Value::Bool(a >= b)),
            }
        }
        And | Or => unreachable!("short-circuit operators are evaluated by the caller"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v),
            Expr::SelfRef => f.write_str("self"),
            Expr::SenderRef => f.write_str("sender"),
            Expr::Unary(UnOp::Not, e) => {
                f.write_str("not ")?;
                write_operand(f, e, 3)
            }
            Expr::Unary(UnOp::Neg, e) => {
                f.write_str("-")?;
                // `-5` would read back as a negative literal
                if matches!(**e, Expr::Lit(Value::Int(_))) {
                    write!(f, "({e})")
                } else {
                    write_operand(f, e, 7)
                }
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                let (lmin, rmin) = if op.is_comparison() { (p + 1, p + 1) } else { (p, p + 1) };
                write_operand(f, l, lmin)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, r, rmin)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() >= min {
        write!(f, "{e}")
    } else {
        write!(f, "({e})")
    }
}
