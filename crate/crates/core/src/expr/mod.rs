//! Right-hand sides `f(t, u)` written in a small arithmetic language.
//!
//! Literals, the variables `t` and `u`, unary minus, `+ - * / ^` and the
//! functions `sin cos exp log abs pow min max`. Expressions of the form
//! `A*u^p` are recognized and tagged as [`PowerLaw`] so callers get `A` and
//! `p` exactly.

mod ast;
mod parser;

use std::fmt;

use thiserror::Error;

pub use ast::{BinOp, Expr, ExprKind, Func, Span, Var};
pub use parser::parse;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("`{function}` at byte {offset} takes {expected} argument(s), found {found}")]
    Arity { offset: usize, function: &'static str, expected: usize, found: usize },
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("evaluation failed at bytes {}..{} (t = {t}, u = {u}): {message}", span.start, span.end)]
pub struct EvalError {
    pub message: String,
    pub span: Span,
    pub t: f64,
    pub u: f64,
}

impl Expr {
    /// Evaluates at `(t, u)`. Division by zero, logarithms of nonpositive
    /// numbers and any other non-finite intermediate are reported with the
    /// span of the offending node.
    pub fn eval(&self, t: f64, u: f64) -> Result<f64, EvalError> {
        let fail = |message: String| EvalError { message, span: self.span, t, u };
        let v = match &self.kind {
            ExprKind::Num(v) => *v,
            ExprKind::Var(Var::T) => t,
            ExprKind::Var(Var::U) => u,
            ExprKind::Neg(e) => -e.eval(t, u)?,
            ExprKind::Binary(op, a, b) => {
                let x = a.eval(t, u)?;
                let y = b.eval(t, u)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(fail("division by zero".into()));
                        }
                        x / y
                    }
                    BinOp::Pow => checked_pow(x, y).map_err(fail)?,
                }
            }
            ExprKind::Call(func, args) => {
                let x = args[0].eval(t, u)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Abs => x.abs(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(fail(format!("log of nonpositive value {x}")));
                        }
                        x.ln()
                    }
                    Func::Pow => checked_pow(x, args[1].eval(t, u)?).map_err(fail)?,
                    Func::Min => x.min(args[1].eval(t, u)?),
                    Func::Max => x.max(args[1].eval(t, u)?),
                }
            }
        };
        if !v.is_finite() {
            return Err(fail(format!("non-finite result {v}")));
        }
        Ok(v)
    }

    /// Recognizes `A*u^p` shapes: constants, `u`, `u^c`, products and
    /// quotients of these with constants, and negations.
    pub fn as_power_law(&self) -> Option<PowerLaw> {
        if let Some(c) = self.as_constant() {
            return Some(PowerLaw { a: c, p: 0.0 });
        }
        match &self.kind {
            ExprKind::Var(Var::U) => Some(PowerLaw { a: 1.0, p: 1.0 }),
            ExprKind::Neg(e) => e.as_power_law().map(|pl| PowerLaw { a: -pl.a, p: pl.p }),
            ExprKind::Binary(BinOp::Pow, base, exp) => {
                let p = exp.as_constant()?;
                let inner = base.as_power_law()?;
                (inner.a == 1.0).then_some(PowerLaw { a: 1.0, p: inner.p * p })
            }
            ExprKind::Call(Func::Pow, args) => {
                let p = args[1].as_constant()?;
                let inner = args[0].as_power_law()?;
                (inner.a == 1.0).then_some(PowerLaw { a: 1.0, p: inner.p * p })
            }
            ExprKind::Binary(BinOp::Mul, a, b) => {
                let (x, y) = (a.as_power_law()?, b.as_power_law()?);
                Some(PowerLaw { a: x.a * y.a, p: x.p + y.p })
            }
            ExprKind::Binary(BinOp::Div, a, b) => {
                let x = a.as_power_law()?;
                let c = b.as_constant()?;
                (c != 0.0).then_some(PowerLaw { a: x.a / c, p: x.p })
            }
            _ => None,
        }
    }
}

fn checked_pow(x: f64, y: f64) -> Result<f64, String> {
    if x == 0.0 && y < 0.0 {
        return Err(format!("division by zero: 0 raised to negative power {y}"));
    }
    if x < 0.0 && y != y.trunc() {
        return Err(format!("negative base {x} raised to non-integer power {y}"));
    }
    Ok(x.powf(y))
}

/// `f(u) = A u^p`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerLaw {
    pub a: f64,
    pub p: f64,
}

impl PowerLaw {
    pub fn eval(&self, u: f64) -> Result<f64, String> {
        if self.p == 0.0 {
            return Ok(self.a);
        }
        let v = self.a * checked_pow(u, self.p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value {v} of {}*u^{} at u = {u}", self.a, self.p))
        }
    }
}

/// A right-hand side: a parsed expression or a tagged power law.
#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Expr(Expr),
    PowerLaw(PowerLaw),
}

impl Rhs {
    /// Parses `src`, tagging it as a power law when it has that shape.
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let e = parse(src)?;
        Ok(match e.as_power_law() {
            Some(pl) => Rhs::PowerLaw(pl),
            None => Rhs::Expr(e),
        })
    }

    pub fn power_law(a: f64, p: f64) -> Self {
        Rhs::PowerLaw(PowerLaw { a, p })
    }

    pub fn as_power_law(&self) -> Option<PowerLaw> {
        match self {
            Rhs::PowerLaw(pl) => Some(*pl),
            Rhs::Expr(_) => None,
        }
    }

    /// The right-hand side as an expression tree; power laws become `a * u^p`.
    pub fn to_expr(&self) -> Expr {
        match self {
            Rhs::Expr(e) => e.clone(),
            Rhs::PowerLaw(PowerLaw { a, p }) => {
                let lit = |v: f64| if v < 0.0 { Expr::neg(Expr::num(-v)) } else { Expr::num(v) };
                Expr::binary(BinOp::Mul, lit(*a), Expr::binary(BinOp::Pow, Expr::var(Var::U), lit(*p)))
            }
        }
    }

    pub fn eval(&self, t: f64, u: f64) -> Result<f64, EvalError> {
        match self {
            Rhs::Expr(e) => e.eval(t, u),
            Rhs::PowerLaw(pl) => pl.eval(u).map_err(|message| EvalError { message, span: Span::default(), t, u }),
        }
    }
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Expr(e) => write!(f, "{e}"),
            Rhs::PowerLaw(PowerLaw { a, p }) => write!(f, "({a:?} * (u ^ {p:?}))"),
        }
    }
}

/// Largest centered finite-difference estimate of `|∂f/∂u|` on a
/// `grid × grid` lattice over `[t_lo, t_hi] × [u_lo, u_hi]`.
///
/// Points where `f` cannot be evaluated are reported as errors.
pub fn lipschitz_probe(rhs: &Rhs, t_range: (f64, f64), u_range: (f64, f64), grid: usize) -> Result<f64, EvalError> {
    let grid = grid.max(2);
    let (t_lo, t_hi) = t_range;
    let (u_lo, u_hi) = u_range;
    let width = (u_hi - u_lo).abs().max(1e-8);
    let delta = 1e-6 * width.max(u_lo.abs()).max(u_hi.abs()).max(1e-3);
    let mut worst: f64 = 0.0;
    for i in 0..grid {
        let t = t_lo + (t_hi - t_lo) * i as f64 / (grid - 1) as f64;
        for k in 0..grid {
            let u = u_lo + (u_hi - u_lo) * k as f64 / (grid - 1) as f64;
            let (lo, hi) = ((u - delta).max(u_lo.min(u_hi)), (u + delta).min(u_hi.max(u_lo)));
            if hi <= lo {
                continue;
            }
            let slope = (rhs.eval(t, hi)? - rhs.eval(t, lo)?) / (hi - lo);
            worst = worst.max(slope.abs());
        }
    }
    Ok(worst)
}
