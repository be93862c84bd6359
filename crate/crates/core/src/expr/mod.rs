//! Expression language for Hamiltonians and observables.
//!
//! Sources are parsed into an [`Expr`] tree, differentiated symbolically with
//! [`Expr::differentiate`], and either walked directly ([`Expr::eval`]) or
//! compiled to a flat postfix [`Tape`] for the integrator hot loops.
//!
//! ```text
//! expr    = sum ;
//! sum     = product , { ( "+" | "-" ) , product } ;
//! product = unary , { ( "*" | "/" ) , unary } ;
//! unary   = "-" , unary | power ;
//! power   = atom , [ "^" , unary ] ;          (* exponent: numeric constant only *)
//! atom    = number | ident | func , "(" , expr , ")" | "(" , expr , ")" ;
//! func    = "sin" | "cos" | "exp" | "log" ;
//! number  = digits , [ "." , digits ] , [ ( "e" | "E" ) , [ "+" | "-" ] , digits ] ;
//! ident   = ( letter | "_" ) , { letter | digit | "_" } ;
//! ```

mod eval;
mod parse;
mod tape;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub use eval::EvalContext;
pub use parse::parse;
pub use tape::{Instr, Tape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryFn {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
}

impl UnaryFn {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Neg => "-",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(UnaryFn::Sin),
            "cos" => Some(UnaryFn::Cos),
            "exp" => Some(UnaryFn::Exp),
            "log" => Some(UnaryFn::Log),
            _ => None,
        }
    }
}

/// Symbolic real-valued expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Unary(UnaryFn, Box<Expr>),
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Const(v)
    }
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        matches!(self, Expr::Const(c) if *c == v)
    }

    /// True when the tree references no variables.
    pub fn is_closed(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Binary(_, a, b) => a.is_closed() && b.is_closed(),
            Expr::Unary(_, a) => a.is_closed(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Unary(_, a) => a.collect_vars(out),
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v == name,
            Expr::Binary(_, a, b) => a.depends_on(name) || b.depends_on(name),
            Expr::Unary(_, a) => a.depends_on(name),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
            Expr::Unary(_, a) => 1 + a.size(),
        }
    }

    // Simplifying constructors. Only constant folding and the identities
    // x+0, x-0, 0-x, x*0, x*1, x/1, 0/x, x^0, x^1 are applied.

    fn fold(op: BinaryOp, a: f64, b: f64) -> Option<f64> {
        let v = match op {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
            BinaryOp::Pow => libm::pow(a, b),
        };
        v.is_finite().then_some(v)
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if let Some(v) = Self::fold(op, *x, *y) {
                return Expr::Const(v);
            }
        }
        match op {
            BinaryOp::Add => {
                if a.is_const(0.0) {
                    return b;
                }
                if b.is_const(0.0) {
                    return a;
                }
            }
            BinaryOp::Sub => {
                if b.is_const(0.0) {
                    return a;
                }
                if a.is_const(0.0) {
                    return Expr::neg(b);
                }
            }
            BinaryOp::Mul => {
                if a.is_const(0.0) || b.is_const(0.0) {
                    return Expr::Const(0.0);
                }
                if a.is_const(1.0) {
                    return b;
                }
                if b.is_const(1.0) {
                    return a;
                }
            }
            BinaryOp::Div => {
                if b.is_const(1.0) {
                    return a;
                }
                if a.is_const(0.0) {
                    return Expr::Const(0.0);
                }
            }
            BinaryOp::Pow => {
                if b.is_const(0.0) {
                    return Expr::Const(1.0);
                }
                if b.is_const(1.0) {
                    return a;
                }
            }
        }
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Self::binary(BinaryOp::Add, a, b)
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Self::binary(BinaryOp::Sub, a, b)
    }
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Self::binary(BinaryOp::Mul, a, b)
    }
    pub fn div(a: Expr, b: Expr) -> Expr {
        Self::binary(BinaryOp::Div, a, b)
    }
    pub fn pow(a: Expr, b: Expr) -> Expr {
        Self::binary(BinaryOp::Pow, a, b)
    }

    pub fn unary(f: UnaryFn, a: Expr) -> Expr {
        if let Expr::Const(c) = a {
            let v = match f {
                UnaryFn::Neg => -c,
                UnaryFn::Sin => libm::sin(c),
                UnaryFn::Cos => libm::cos(c),
                UnaryFn::Exp => libm::exp(c),
                UnaryFn::Log => libm::log(c),
            };
            if v.is_finite() {
                return Expr::Const(v);
            }
        }
        Expr::Unary(f, Box::new(a))
    }

    pub fn neg(a: Expr) -> Expr {
        Self::unary(UnaryFn::Neg, a)
    }
    pub fn sin(a: Expr) -> Expr {
        Self::unary(UnaryFn::Sin, a)
    }
    pub fn cos(a: Expr) -> Expr {
        Self::unary(UnaryFn::Cos, a)
    }
    pub fn exp(a: Expr) -> Expr {
        Self::unary(UnaryFn::Exp, a)
    }
    pub fn log(a: Expr) -> Expr {
        Self::unary(UnaryFn::Log, a)
    }

    /// Sum of a list of terms; the empty sum is zero.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::Const(0.0), Expr::add)
    }

    /// Exact partial derivative with respect to `var`.
    ///
    /// Exponents are closed subtrees (enforced by the parser), so
    /// `d(a^c) = c * a^(c-1) * da`.
    pub fn differentiate(&self, var: &str) -> Expr {
        use BinaryOp::*;
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(v) => Expr::Const(if v == var { 1.0 } else { 0.0 }),
            Expr::Binary(op, a, b) => {
                let da = a.differentiate(var);
                match op {
                    Add => Expr::add(da, b.differentiate(var)),
                    Sub => Expr::sub(da, b.differentiate(var)),
                    Mul => {
                        let db = b.differentiate(var);
                        Expr::add(
                            Expr::mul(da, (**b).clone()),
                            Expr::mul((**a).clone(), db),
                        )
                    }
                    Div => {
                        let db = b.differentiate(var);
                        // a'/b - a*b'/b^2
                        Expr::sub(
                            Expr::div(da, (**b).clone()),
                            Expr::div(
                                Expr::mul((**a).clone(), db),
                                Expr::pow((**b).clone(), Expr::Const(2.0)),
                            ),
                        )
                    }
                    Pow => {
                        debug_assert!(b.is_closed(), "variable exponent");
                        let reduced = Expr::sub((**b).clone(), Expr::Const(1.0));
                        Expr::mul(
                            Expr::mul((**b).clone(), Expr::pow((**a).clone(), reduced)),
                            da,
                        )
                    }
                }
            }
            Expr::Unary(f, a) => {
                let da = a.differentiate(var);
                match f {
                    UnaryFn::Neg => Expr::neg(da),
                    UnaryFn::Sin => Expr::mul(Expr::cos((**a).clone()), da),
                    UnaryFn::Cos => Expr::mul(Expr::neg(Expr::sin((**a).clone())), da),
                    UnaryFn::Exp => Expr::mul(Expr::exp((**a).clone()), da),
                    UnaryFn::Log => Expr::div(da, (**a).clone()),
                }
            }
        }
    }

    /// Replaces every occurrence of variable `name` with `value`.
    pub fn substitute(&self, name: &str, value: &Expr) -> Expr {
        match self {
            Expr::Var(v) if v == name => value.clone(),
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Binary(op, a, b) => {
                Expr::binary(*op, a.substitute(name, value), b.substitute(name, value))
            }
            Expr::Unary(f, a) => Expr::unary(*f, a.substitute(name, value)),
        }
    }

    /// Top-level additive terms, with products and quotients distributed
    /// over parenthesized sums.
    ///
    /// `a/(2*m) + (b+c)/2 + g*z` yields four terms.
    pub fn summands(&self) -> Vec<Expr> {
        match self {
            Expr::Binary(BinaryOp::Add, a, b) => {
                let mut out = a.summands();
                out.extend(b.summands());
                out
            }
            Expr::Binary(BinaryOp::Sub, a, b) => {
                let mut out = a.summands();
                out.extend(b.summands().into_iter().map(negate_raw));
                out
            }
            Expr::Unary(UnaryFn::Neg, a) => a.summands().into_iter().map(negate_raw).collect(),
            Expr::Binary(op @ (BinaryOp::Mul | BinaryOp::Div), a, b) => {
                let left = a.summands();
                if left.len() > 1 {
                    return left
                        .into_iter()
                        .map(|t| Expr::Binary(*op, Box::new(t), b.clone()))
                        .collect();
                }
                if *op == BinaryOp::Mul {
                    let right = b.summands();
                    if right.len() > 1 {
                        return right
                            .into_iter()
                            .map(|t| Expr::Binary(*op, a.clone(), Box::new(t)))
                            .collect();
                    }
                }
                vec![self.clone()]
            }
            _ => vec![self.clone()],
        }
    }
}

fn negate_raw(e: Expr) -> Expr {
    Expr::Unary(UnaryFn::Neg, Box::new(e))
}

/// Fully parenthesized form; `parse` of the output evaluates identically.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{:?}", c)
                }
            }
            Expr::Var(v) => f.write_str(v),
            Expr::Binary(op, a, b) => write!(f, "({} {} {})", a, op.symbol(), b),
            Expr::Unary(UnaryFn::Neg, a) => write!(f, "(-{})", a),
            Expr::Unary(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<&'static str> {
        vec!["q1", "q2", "p1", "p2", "z", "m", "gamma", "theta1"]
    }

    fn eval_at(e: &Expr, pairs: &[(&str, f64)]) -> f64 {
        let ctx = EvalContext::from_pairs(pairs.iter().copied());
        e.eval(&ctx).unwrap()
    }

    #[test]
    fn derivative_of_linear_friction_term() {
        let e = parse("gamma*z", &names()).unwrap();
        let d = e.differentiate("z");
        assert_eq!(d, Expr::var("gamma"));
    }

    #[test]
    fn derivative_of_kinetic_term() {
        let e = parse("p1^2/(2*m)", &names()).unwrap();
        let d = e.differentiate("p1");
        for &(p, m) in &[(2.0, 1.0), (-0.7, 3.5), (1.3, 0.25)] {
            let got = eval_at(&d, &[("p1", p), ("m", m)]);
            assert!((got - p / m).abs() < 1e-15, "{got} vs {}", p / m);
        }
    }

    #[test]
    fn derivative_of_trigonometric_action() {
        let e = parse("(1/3)*cos(theta1)", &names()).unwrap();
        let d = e.differentiate("theta1");
        for &t in &[0.1, 0.9, 2.0] {
            let got = eval_at(&d, &[("theta1", t)]);
            assert!((got + libm::sin(t) / 3.0).abs() < 1e-16);
        }
    }

    #[test]
    fn simplification_rules() {
        let x = Expr::var("x");
        assert_eq!(Expr::mul(x.clone(), Expr::Const(0.0)), Expr::Const(0.0));
        assert_eq!(Expr::mul(Expr::Const(1.0), x.clone()), x);
        assert_eq!(Expr::add(x.clone(), Expr::Const(0.0)), x);
        assert_eq!(
            Expr::add(Expr::Const(2.0), Expr::Const(3.0)),
            Expr::Const(5.0)
        );
        // 1/0 is not folded
        assert!(matches!(
            Expr::div(Expr::Const(1.0), Expr::Const(0.0)),
            Expr::Binary(BinaryOp::Div, _, _)
        ));
    }

    #[test]
    fn dissipative_hamiltonian_has_four_summands() {
        let e = parse("p1^2/(2*m) + (q1^2+q2^2)/2 + gamma*z", &names()).unwrap();
        let terms = e.summands();
        assert_eq!(terms.len(), 4);
        let pts = [("p1", 0.3), ("m", 1.7), ("q1", -0.4), ("q2", 2.1), ("gamma", 0.5), ("z", 0.8)];
        let total: f64 = terms.iter().map(|t| eval_at(t, &pts)).sum();
        assert!((total - eval_at(&e, &pts)).abs() < 1e-14);
    }

    #[test]
    fn display_round_trips_negative_constants() {
        let e = Expr::mul(Expr::Const(-2.5), Expr::var("z"));
        let back = parse(&e.to_string(), &["z"]).unwrap();
        assert_eq!(eval_at(&back, &[("z", 3.0)]), -7.5);
    }
}
