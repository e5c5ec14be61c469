//! A second expression evaluator, written against the AST only, so oracles
//! do not share evaluation code with the implementation under test.

use std::collections::BTreeMap;

use sysmodel_core::expr::{BinOp, Expr, UnOp};
use sysmodel_core::{ObjectId, Value};

pub struct Scope<'a> {
    pub params: &'a BTreeMap<String, Value>,
    pub attrs: &'a BTreeMap<String, Value>,
    pub this: Option<&'a ObjectId>,
    pub sender: Option<&'a ObjectId>,
}

/// `None` on any runtime error.
pub fn eval(e: &Expr, s: &Scope<'_>) -> Option<Value> {
    Some(match e {
        Expr::Lit(v) => v.clone(),
        Expr::Var(n) => s.params.get(n).or_else(|| s.attrs.get(n))?.clone(),
        Expr::SelfRef => Value::Ref(Some(s.this?.clone())),
        Expr::SenderRef => Value::Ref(Some(s.sender?.clone())),
        Expr::Unary(UnOp::Not, x) => Value::Bool(!as_bool(eval(x, s)?)?),
        Expr::Unary(UnOp::Neg, x) => Value::Int(as_int(eval(x, s)?)?.checked_neg()?),
        Expr::Binary(BinOp::And, l, r) => {
            if !as_bool(eval(l, s)?)? {
                Value::Bool(false)
            } else {
                Value::Bool(as_bool(eval(r, s)?)?)
            }
        }
        Expr::Binary(BinOp::Or, l, r) => {
            if as_bool(eval(l, s)?)? {
                Value::Bool(true)
            } else {
                Value::Bool(as_bool(eval(r, s)?)?)
            }
        }
        Expr::Binary(op, l, r) => {
            let (a, b) = (eval(l, s)?, eval(r, s)?);
            match op {
                BinOp::Eq | BinOp::Ne => {
                    if std::mem::discriminant(&a) != std::mem::discriminant(&b) {
                        return None;
                    }
                    Value::Bool((a == b) == (*op == BinOp::Eq))
                }
                _ => {
                    let (x, y) = (as_int(a)?, as_int(b)?);
                    match op {
                        BinOp::Add => Value::Int(x.checked_add(y)?),
                        BinOp::Sub => Value::Int(x.checked_sub(y)?),
                        BinOp::Mul => Value::Int(x.checked_mul(y)?),
                        BinOp::Div => Value::Int(x.checked_div(y)?),
                        BinOp::Lt => Value::Bool(x < y),
                        BinOp::Le => Value::Bool(x <= y),
                        BinOp::Gt => Value::Bool(x > y),
                        BinOp::Ge => Value::Bool(x >= y),
                        _ => return None,
                    }
                }
            }
        }
    })
}

fn as_bool(v: Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(b),
        _ => None,
    }
}

fn as_int(v: Value) -> Option<i64> {
    match v {
        Value::Int(n) => Some(n),
        _ => None,
    }
}

pub fn holds(e: &Expr, s: &Scope<'_>) -> Option<bool> {
    as_bool(eval(e, s)?)
}
