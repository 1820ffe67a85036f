use std::fmt;

use thiserror::Error;

use crate::nabla::norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree for one component of a right-hand side `f(t, x)`.
///
/// `X(j)` is the 1-based component `xj`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    X(usize),
    NormX,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    LogDomain,
    DivisionByZero,
    SqrtDomain,
    ZeroToNegativePower,
    NegativeBaseFractionalPower,
    UnboundComponent,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalErrorKind::LogDomain => "log of a non-positive argument",
            EvalErrorKind::DivisionByZero => "division by zero",
            EvalErrorKind::SqrtDomain => "sqrt of a negative argument",
            EvalErrorKind::ZeroToNegativePower => "zero raised to a negative power",
            EvalErrorKind::NegativeBaseFractionalPower => {
                "negative base raised to a non-integer power"
            }
            EvalErrorKind::UnboundComponent => "state component not available",
        })
    }
}

/// Evaluation failure; `at` is the offending subexpression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{at}`")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub at: String,
}

impl Expr {
    pub fn eval(&self, t: f64, x: &[f64]) -> Result<f64, EvalError> {
        let fail = |kind| EvalError {
            kind,
            at: self.to_string(),
        };
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::T => t,
            Expr::X(j) => match j.checked_sub(1).and_then(|k| x.get(k)) {
                Some(v) => *v,
                None => return Err(fail(EvalErrorKind::UnboundComponent)),
            },
            Expr::NormX => norm(x),
            Expr::Neg(e) => -e.eval(t, x)?,
            Expr::Add(l, r) => l.eval(t, x)? + r.eval(t, x)?,
            Expr::Sub(l, r) => l.eval(t, x)? - r.eval(t, x)?,
            Expr::Mul(l, r) => l.eval(t, x)? * r.eval(t, x)?,
            Expr::Div(l, r) => {
                let num = l.eval(t, x)?;
                let den = r.eval(t, x)?;
                if den == 0.0 {
                    return Err(fail(EvalErrorKind::DivisionByZero));
                }
                num / den
            }
            Expr::Pow(l, r) => {
                let base = l.eval(t, x)?;
                let exp = r.eval(t, x)?;
                if base == 0.0 && exp < 0.0 {
                    return Err(fail(EvalErrorKind::ZeroToNegativePower));
                }
                if base < 0.0 && exp.fract() != 0.0 {
                    return Err(fail(EvalErrorKind::NegativeBaseFractionalPower));
                }
                if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
                    base.powi(exp as i32)
                } else {
                    base.powf(exp)
                }
            }
            Expr::Call(func, arg) => {
                let v = arg.eval(t, x)?;
                match func {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log if v <= 0.0 => return Err(fail(EvalErrorKind::LogDomain)),
                    Func::Log => v.ln(),
                    Func::Sqrt if v < 0.0 => return Err(fail(EvalErrorKind::SqrtDomain)),
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                }
            }
        })
    }

    /// Largest `xj` index referenced, 0 if none.
    pub fn max_component(&self) -> usize {
        self.components().into_iter().max().unwrap_or(0)
    }

    /// All `xj` indices referenced, in traversal order.
    pub fn components(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::X(j) = e {
                out.push(*j);
            }
        });
        out
    }

    /// True if the expression reads the state (`xj` or `normx`).
    pub fn depends_on_state(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::X(_) | Expr::NormX));
        found
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::T | Expr::X(_) | Expr::NormX => {}
            Expr::Neg(e) | Expr::Call(_, e) => e.visit(f),
            Expr::Add(l, r)
            | Expr::Sub(l, r)
            | Expr::Mul(l, r)
            | Expr::Div(l, r)
            | Expr::Pow(l, r) => {
                l.visit(f);
                r.visit(f);
            }
        }
    }
}

/// Fully parenthesized rendering; re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bin =
            |f: &mut fmt::Formatter<'_>, op: &str, l: &Expr, r: &Expr| write!(f, "({l} {op} {r})");
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::T => f.write_str("t"),
            Expr::X(j) => write!(f, "x{j}"),
            Expr::NormX => f.write_str("normx"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(l, r) => bin(f, "+", l, r),
            Expr::Sub(l, r) => bin(f, "-", l, r),
            Expr::Mul(l, r) => bin(f, "*", l, r),
            Expr::Div(l, r) => bin(f, "/", l, r),
            Expr::Pow(l, r) => bin(f, "^", l, r),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}
