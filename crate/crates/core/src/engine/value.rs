//! Ground values and built-in arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::EvalError;
use crate::syntax::{pretty, ArithOp, Atom, CmpOp, Term};

/// A ground term. Symbols order before integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Sym(Arc<str>),
    Int(i64),
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Sym(a), Value::Sym(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Sym(_), Value::Int(_)) => Ordering::Less,
            (Value::Int(_), Value::Sym(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Value {
    pub fn to_term(&self) -> Term {
        match self {
            Value::Sym(s) => Term::Const(s.clone()),
            Value::Int(i) => Term::Int(*i),
        }
    }

    pub fn from_term(t: &Term) -> Option<Value> {
        match t {
            Term::Const(s) => Some(Value::Sym(s.clone())),
            Term::Int(i) => Some(Value::Int(*i)),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Sym(s) => f.write_str(&pretty::symbol(s)),
            Value::Int(i) => write!(f, "{i}"),
        }
    }
}

pub type Tuple = Box<[Value]>;

/// Builds the ground atom `name(tuple)`.
pub fn ground_atom(name: &str, restricting: bool, tuple: &[Value]) -> Atom {
    Atom { name: name.into(), args: tuple.iter().map(Value::to_term).collect(), restricting }
}

pub fn arith(op: ArithOp, args: &[Value]) -> Result<Value, EvalError> {
    let int = |v: &Value| match v {
        Value::Int(i) => Ok(*i),
        Value::Sym(s) => Err(EvalError::Type(format!("'{s}' is not a number in {} expression", op.symbol()))),
    };
    let overflow = || EvalError::Overflow(op.symbol().to_string());
    let result = match op {
        ArithOp::Neg => int(&args[0])?.checked_neg().ok_or_else(overflow)?,
        _ => {
            let (a, b) = (int(&args[0])?, int(&args[1])?);
            match op {
                ArithOp::Add => a.checked_add(b).ok_or_else(overflow)?,
                ArithOp::Sub => a.checked_sub(b).ok_or_else(overflow)?,
                ArithOp::Mul => a.checked_mul(b).ok_or_else(overflow)?,
                ArithOp::Div | ArithOp::Mod if b == 0 => return Err(EvalError::DivisionByZero),
                ArithOp::Div => a.checked_div(b).ok_or_else(overflow)?,
                // Sign follows the divisor, as in Prolog.
                ArithOp::Mod => {
                    let r = a.checked_rem(b).ok_or_else(overflow)?;
                    if r != 0 && (r < 0) != (b < 0) {
                        r + b
                    } else {
                        r
                    }
                }
                ArithOp::Neg => unreachable!(),
            }
        }
    };
    Ok(Value::Int(result))
}

/// Compares two ground values. Equality is structural; ordering uses the
/// same order as answer display.
pub fn compare(op: CmpOp, a: &Value, b: &Value) -> bool {
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        CmpOp::Lt => a < b,
        CmpOp::Gt => a > b,
        CmpOp::Le => a <= b,
        CmpOp::Ge => a >= b,
    }
}
