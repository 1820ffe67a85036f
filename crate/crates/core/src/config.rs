//! JSON configuration files and CSV/JSON emitters.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nabla::GridFunction;
use crate::problem::Problem;
use crate::rhs::{parse_bound, RhsDef};
use crate::solver::{Scheme, SolverConfig};
use crate::timescale::{FiniteTimeScale, TimeScaleSpec};
use crate::tube::Tube;

/// A number, or an expression in `t` evaluated on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Curve {
    Number(f64),
    Expr(String),
}

impl Curve {
    fn sample(curves: &[Curve], scale: &Arc<FiniteTimeScale>, what: &str) -> Result<GridFunction> {
        let exprs = curves
            .iter()
            .map(|c| match c {
                Curve::Number(v) => Ok(crate::rhs::Expr::Num(*v)),
                Curve::Expr(src) => {
                    let e =
                        parse_bound(src, 0).map_err(|e| Error::Config(format!("{what}: {e}")))?;
                    Ok(e)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        GridFunction::try_from_fn(scale.clone(), curves.len(), |_, t, out| {
            for (j, (o, e)) in out.iter_mut().zip(&exprs).enumerate() {
                *o = e.eval(t, &[]).map_err(|source| Error::Eval {
                    component: j + 1,
                    t,
                    source,
                })?;
            }
            Ok(())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dim: usize,
    pub time_scale: TimeScaleSpec,
    pub rhs: RhsDef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeConfig {
    pub v: Vec<Curve>,
    #[serde(rename = "M")]
    pub m: Curve,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub theta: Option<f64>,
    pub max_iter: Option<usize>,
    pub tol_fp: Option<f64>,
    pub tol_res: Option<f64>,
    pub x0: Option<Vec<Curve>>,
    pub scheme: Option<Scheme>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub n_dirs: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub path: Option<String>,
}

/// Configuration for `solve` and `verify-tube`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub tube: TubeConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A validated [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Run {
    pub problem: Problem,
    pub tube: Tube,
    pub solver: SolverConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<Run> {
        let p = &self.problem;
        if p.dim == 0 {
            return Err(Error::Config("problem.dim must be at least 1".into()));
        }
        let problem = Problem::new(p.time_scale.clone(), p.dim, &p.rhs)?;
        let scale = problem.scale().clone();
        if self.tube.v.len() != p.dim {
            return Err(Error::Config(format!(
                "tube.v has {} component(s), problem.dim is {}",
                self.tube.v.len(),
                p.dim
            )));
        }
        let v = Curve::sample(&self.tube.v, &scale, "tube.v")?;
        let m = Curve::sample(std::slice::from_ref(&self.tube.m), &scale, "tube.M")?;
        let tube = Tube::new(v, m)?;

        let s = &self.solver;
        let defaults = SolverConfig::default();
        let x0 = match &s.x0 {
            None => None,
            Some(curves) if curves.len() != p.dim => {
                return Err(Error::Config(format!(
                    "solver.x0 has {} component(s), problem.dim is {}",
                    curves.len(),
                    p.dim
                )))
            }
            Some(curves) => Some(Curve::sample(curves, &scale, "solver.x0")?),
        };
        let solver = SolverConfig {
            theta: s.theta.unwrap_or(defaults.theta),
            max_iter: s.max_iter.unwrap_or(defaults.max_iter),
            tol_fp: s.tol_fp.unwrap_or(defaults.tol_fp),
            tol_res: s.tol_res.unwrap_or(defaults.tol_res),
            x0,
            scheme: s.scheme.unwrap_or(defaults.scheme),
        };
        Ok(Run {
            problem,
            tube,
            solver,
        })
    }
}

/// Configuration for the `linear` command: solve `x^nabla - x = g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    pub time_scale: TimeScaleSpec,
    /// One expression in `t` per component.
    pub g: Vec<Curve>,
    #[serde(default)]
    pub output: OutputSection,
}

impl LinearConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<(Arc<FiniteTimeScale>, GridFunction)> {
        if self.g.is_empty() {
            return Err(Error::Config("g must have at least one component".into()));
        }
        let scale = Arc::new(self.time_scale.build()?);
        scale.check_regressive(1.0)?;
        let g = Curve::sample(&self.g, &scale, "g")?;
        Ok((scale, g))
    }
}

/// Extracts a time scale from a bare spec, `{"time_scale": ...}`, or a run config.
pub fn time_scale_from_json(text: &str) -> Result<TimeScaleSpec> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let node = if value.get("components").is_some() {
        &value
    } else if let Some(ts) = value.get("time_scale") {
        ts
    } else if let Some(ts) = value.get("problem").and_then(|p| p.get("time_scale")) {
        ts
    } else {
        return Err(Error::Config(
            "no time scale found (expected `components`, `time_scale` or `problem.time_scale`)"
                .into(),
        ));
    };
    serde_json::from_value(node.clone()).map_err(|e| Error::Config(e.to_string()))
}

/// 17 significant digits, round-trip exact for doubles. Empty for NaN.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

/// `t,x1,...,xn` with one row per grid point.
pub fn grid_function_csv(f: &GridFunction) -> String {
    let mut out = String::from("t");
    for j in 1..=f.dim() {
        let _ = write!(out, ",x{j}");
    }
    out.push('\n');
    for (i, t) in f.scale().points().iter().enumerate() {
        out.push_str(&fmt_f64(*t));
        for v in f.at(i) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct GridFunctionJson<'a> {
    t: &'a [f64],
    x: Vec<&'a [f64]>,
}

pub fn grid_function_json(f: &GridFunction) -> String {
    let doc = GridFunctionJson {
        t: f.scale().points(),
        x: (0..f.len()).map(|i| f.at(i)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("grid function serializes") + "\n"
}

pub fn emit_grid_function(f: &GridFunction, format: Format) -> String {
    match format {
        Format::Csv => grid_function_csv(f),
        Format::Json => grid_function_json(f),
    }
}

/// `i,t,nu,regressive` rows; `nu` and `regressive` are empty at the minimum.
pub fn grid_csv(ts: &FiniteTimeScale) -> String {
    let mut out = String::from("i,t,nu,regressive\n");
    for (i, t) in ts.points().iter().enumerate() {
        if i == 0 {
            let _ = writeln!(out, "0,{},,", fmt_f64(*t));
        } else {
            let nu = ts.nu(i).expect("kappa index");
            let _ = writeln!(out, "{i},{},{},{}", fmt_f64(*t), fmt_f64(nu), nu < 1.0);
        }
    }
    out
}

#[derive(Serialize)]
struct GridJson<'a> {
    points: &'a [f64],
    nu: Vec<Option<f64>>,
    max_graininess: f64,
    regressive: bool,
}

pub fn grid_json(ts: &FiniteTimeScale) -> String {
    let doc = GridJson {
        points: ts.points(),
        nu: (0..ts.len()).map(|i| ts.nu(i).ok()).collect(),
        max_graininess: ts.max_graininess(),
        regressive: ts.check_regressive(1.0).is_ok(),
    };
    serde_json::to_string_pretty(&doc).expect("grid serializes") + "\n"
}
