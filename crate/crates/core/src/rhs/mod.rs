//! Right-hand sides `f(t, x)`: expression DSL and built-in registry.

mod ast;
mod parser;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use ast::{EvalError, EvalErrorKind, Expr, Func};
pub use parser::{bind, parse, parse_bound, ParseError};

use crate::error::{Error, Result};
use crate::nabla::norm;

/// Serialized form of a right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsDef {
    Expressions(Vec<String>),
    Registry {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, serde_json::Value>,
    },
}

/// Unit forcing direction of the built-in example problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiMode {
    /// `phi(t) = e_1`
    ConstE1,
    /// `phi(t) = (cos t, sin t)`, dimension 2 only
    Rotating,
}

#[derive(Debug, Clone, PartialEq)]
enum RhsKind {
    Expressions(Vec<Expr>),
    /// `f(t, x) = a1 ||x||^2 x - a2 x + a3 phi(t)`
    PaperExample {
        a1: f64,
        a2: f64,
        a3: f64,
        phi: PhiMode,
    },
}

/// A bound right-hand side `f : T x R^n -> R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    dim: usize,
    kind: RhsKind,
}

impl Rhs {
    pub fn from_def(def: &RhsDef, dim: usize) -> Result<Self> {
        match def {
            RhsDef::Expressions(srcs) => Self::from_expressions(srcs, dim),
            RhsDef::Registry { name, params } => registry_instantiate(name, params, dim),
        }
    }

    pub fn from_expressions<S: AsRef<str>>(srcs: &[S], dim: usize) -> Result<Self> {
        if srcs.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: srcs.len(),
            });
        }
        let exprs = srcs
            .iter()
            .map(|s| parse_bound(s.as_ref(), dim))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            dim,
            kind: RhsKind::Expressions(exprs),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `f(t, x)` into `out`.
    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim || out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len().min(out.len()),
            });
        }
        match &self.kind {
            RhsKind::Expressions(exprs) => {
                for (j, (e, o)) in exprs.iter().zip(out.iter_mut()).enumerate() {
                    *o = e.eval(t, x).map_err(|source| Error::Eval {
                        component: j + 1,
                        t,
                        source,
                    })?;
                }
            }
            RhsKind::PaperExample { a1, a2, a3, phi } => {
                let nx = norm(x);
                let cubic = a1 * nx * nx;
                for (j, (o, xv)) in out.iter_mut().zip(x).enumerate() {
                    let phi_j = match (phi, j) {
                        (PhiMode::ConstE1, 0) => 1.0,
                        (PhiMode::ConstE1, _) => 0.0,
                        (PhiMode::Rotating, 0) => t.cos(),
                        (PhiMode::Rotating, _) => t.sin(),
                    };
                    *o = cubic * xv - a2 * xv + a3 * phi_j;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, x, &mut out)?;
        Ok(out)
    }
}

fn param(params: &BTreeMap<String, serde_json::Value>, key: &str) -> Result<f64> {
    let v = params
        .get(key)
        .ok_or_else(|| Error::Registry(format!("missing parameter `{key}`")))?;
    let v = v
        .as_f64()
        .ok_or_else(|| Error::Registry(format!("parameter `{key}` must be a number")))?;
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Registry(format!(
            "parameter `{key}` must be a finite nonnegative number, got {v}"
        )));
    }
    Ok(v)
}

/// Instantiates a built-in right-hand side by name.
///
/// Known names: `paper_example` with parameters `a1`, `a2`, `a3` (nonnegative)
/// and `phi_mode` in {`const_e1`, `rotating`} (default `const_e1`).
pub fn registry_instantiate(
    name: &str,
    params: &BTreeMap<String, serde_json::Value>,
    dim: usize,
) -> Result<Rhs> {
    match name {
        "paper_example" => {
            if dim == 0 {
                return Err(Error::Registry("dimension must be at least 1".into()));
            }
            let a1 = param(params, "a1")?;
            let a2 = param(params, "a2")?;
            let a3 = param(params, "a3")?;
            let phi = match params.get("phi_mode") {
                None => PhiMode::ConstE1,
                Some(v) => match v.as_str() {
                    Some("const_e1") => PhiMode::ConstE1,
                    Some("rotating") if dim == 2 => PhiMode::Rotating,
                    Some("rotating") => {
                        return Err(Error::Registry(format!(
                            "phi_mode `rotating` requires dimension 2, got {dim}"
                        )))
                    }
                    _ => return Err(Error::Registry(format!("unknown phi_mode {v}"))),
                },
            };
            if let Some(extra) = params
                .keys()
                .find(|k| !matches!(k.as_str(), "a1" | "a2" | "a3" | "phi_mode"))
            {
                return Err(Error::Registry(format!("unknown parameter `{extra}`")));
            }
            Ok(Rhs {
                dim,
                kind: RhsKind::PaperExample { a1, a2, a3, phi },
            })
        }
        other => Err(Error::Registry(format!("unknown registry entry `{other}`"))),
    }
}
