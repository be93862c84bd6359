use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use super::{BinaryOp, Expr, UnaryFn};
use crate::error::{Error, Result};

/// Variable bindings for tree evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalContext {
    values: BTreeMap<String, f64>,
}

impl EvalContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, f64)>>(pairs: I) -> Self {
        let mut ctx = Self::new();
        for (k, v) in pairs {
            ctx.set(k, v);
        }
        ctx
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

// Tree walking and tape execution both go through these two functions so the
// floating-point operation sequence is identical.

#[inline]
pub(crate) fn apply_binary(
    op: BinaryOp,
    a: f64,
    b: f64,
    node: impl FnOnce() -> String,
) -> Result<f64> {
    match op {
        BinaryOp::Add => Ok(a + b),
        BinaryOp::Sub => Ok(a - b),
        BinaryOp::Mul => Ok(a * b),
        BinaryOp::Div => {
            if b == 0.0 {
                Err(Error::Domain { op: "division", node: node() })
            } else {
                Ok(a / b)
            }
        }
        BinaryOp::Pow => {
            let v = libm::pow(a, b);
            if v.is_nan() && !a.is_nan() && !b.is_nan() {
                Err(Error::Domain { op: "power", node: node() })
            } else {
                Ok(v)
            }
        }
    }
}

#[inline]
pub(crate) fn apply_unary(f: UnaryFn, a: f64, node: impl FnOnce() -> String) -> Result<f64> {
    Ok(match f {
        UnaryFn::Neg => -a,
        UnaryFn::Sin => libm::sin(a),
        UnaryFn::Cos => libm::cos(a),
        UnaryFn::Exp => libm::exp(a),
        UnaryFn::Log => {
            if a <= 0.0 {
                return Err(Error::Domain { op: "log", node: node() });
            }
            libm::log(a)
        }
    })
}

impl Expr {
    /// Tree-walking evaluation; the reference semantics for [`super::Tape`].
    pub fn eval(&self, ctx: &EvalContext) -> Result<f64> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => ctx
                .get(v)
                .ok_or_else(|| Error::UnknownIdentifier { name: v.clone() }),
            Expr::Binary(op, a, b) => {
                let x = a.eval(ctx)?;
                let y = b.eval(ctx)?;
                apply_binary(*op, x, y, || self.to_string())
            }
            Expr::Unary(f, a) => {
                let x = a.eval(ctx)?;
                apply_unary(*f, x, || self.to_string())
            }
        }
    }
}
