//! Tube solutions `(v, M)`: projection onto the tube, the tube residual,
//! a sampled certificate check of the three tube conditions, and the discrete
//! maximum principle used as a test oracle.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nabla::{dot, nabla_derivative, norm, norm_diff, GridFunction};
use crate::problem::Problem;
use crate::timescale::FiniteTimeScale;

/// Center curve `v` and nonnegative radius `M` on a shared scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Tube {
    center: GridFunction,
    radius: GridFunction,
}

impl Tube {
    pub fn new(center: GridFunction, radius: GridFunction) -> Result<Self> {
        if !center.same_scale(&radius) {
            return Err(Error::ScaleMismatch);
        }
        if radius.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: radius.dim(),
            });
        }
        for i in 0..radius.len() {
            let m = radius.scalar_at(i);
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::NegativeRadius { index: i, value: m });
            }
        }
        Ok(Self { center, radius })
    }

    /// Constant tube `(v, M)`.
    pub fn constant(scale: Arc<FiniteTimeScale>, center: &[f64], radius: f64) -> Result<Self> {
        Self::new(
            GridFunction::constant(scale.clone(), center),
            GridFunction::constant(scale, &[radius]),
        )
    }

    pub fn center(&self) -> &GridFunction {
        &self.center
    }

    pub fn radius(&self) -> &GridFunction {
        &self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn scale(&self) -> &Arc<FiniteTimeScale> {
        self.center.scale()
    }

    /// Applies [`project`] at every grid point.
    pub fn project_all(&self, x: &GridFunction) -> Result<GridFunction> {
        x.ensure_compatible(&self.center)?;
        Ok(x.map(x.dim(), |i, xi, out| {
            project_into(xi, self.center.at(i), self.radius.scalar_at(i), out)
        }))
    }
}

/// Radial retraction of `x` onto the closed ball of radius `m` around `v`.
pub fn project(x: &[f64], v: &[f64], m: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    project_into(x, v, m, &mut out);
    out
}

pub fn project_into(x: &[f64], v: &[f64], m: f64, out: &mut [f64]) {
    let dist = norm_diff(x, v);
    if dist > m {
        let s = m / dist;
        for ((o, xv), vv) in out.iter_mut().zip(x).zip(v) {
            *o = vv + s * (xv - vv);
        }
    } else {
        out.copy_from_slice(x);
    }
}

/// `r[i] = ||x[i] - v[i]|| - M[i]`; `x` lies in the tube iff `max r <= 0`.
pub fn tube_residual(x: &GridFunction, tube: &Tube) -> Result<GridFunction> {
    x.ensure_compatible(&tube.center)?;
    Ok(x.map(1, |i, xi, out| {
        out[0] = norm_diff(xi, tube.center.at(i)) - tube.radius.scalar_at(i)
    }))
}

pub fn max_tube_residual(x: &GridFunction, tube: &Tube) -> Result<f64> {
    let r = tube_residual(x, tube)?;
    Ok(r.values()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, crate::nabla::max_nan))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Location {
    pub index: usize,
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

/// Outcome of one tube condition. `worst_margin` is `None` when the condition
/// is vacuous (no grid point it applies to).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub ok: bool,
    pub worst_margin: Option<f64>,
    pub worst_location: Option<Location>,
    pub points_checked: usize,
}

impl ConditionReport {
    fn vacuous() -> Self {
        Self {
            ok: true,
            worst_margin: None,
            worst_location: None,
            points_checked: 0,
        }
    }

    /// Records a margin; ties keep the earlier location.
    fn record(&mut self, margin: f64, point_ok: bool, loc: impl FnOnce() -> Location) {
        self.points_checked += 1;
        self.ok &= point_ok;
        let worse = match self.worst_margin {
            None => true,
            Some(w) => margin > w || (margin.is_nan() && !w.is_nan()),
        };
        if worse {
            self.worst_margin = Some(margin);
            self.worst_location = Some(loc());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TubeCertificateReport {
    pub passed: bool,
    pub condition1: ConditionReport,
    pub condition2: ConditionReport,
    pub condition3: ConditionReport,
    pub tol: f64,
    pub directions: usize,
}

pub const DEFAULT_TOL: f64 = 1e-9;

/// Default number of sampled sphere directions for dimension `n`.
pub fn default_n_dirs(n: usize) -> usize {
    if n == 1 {
        2
    } else {
        64
    }
}

/// Deterministic unit directions used to sample the sphere `||x - v|| = M`.
///
/// Dimension 1 uses `{+1, -1}`. Otherwise `n_dirs` lattice directions
/// (equally spaced angles in 2-D, a Fibonacci sphere in 3-D, a normalized
/// Kronecker sequence beyond) followed by `+e_j, -e_j` for every axis.
pub fn sphere_directions(n: usize, n_dirs: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::{PI, TAU};
    if n == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let mut dirs = Vec::with_capacity(n_dirs + 2 * n);
    match n {
        2 => {
            for k in 0..n_dirs {
                let th = TAU * (k as f64 + 0.5) / n_dirs as f64;
                dirs.push(vec![th.cos(), th.sin()]);
            }
        }
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            for k in 0..n_dirs {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / n_dirs as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * k as f64;
                dirs.push(vec![r * phi.cos(), r * phi.sin(), z]);
            }
        }
        _ => {
            // Kronecker sequence with the generalized golden ratio of dimension n
            // (root of x^(n+1) = x + 1), mapped to Gaussian samples by Box-Muller.
            let m = n + n % 2;
            let mut g = 2.0f64;
            for _ in 0..64 {
                g = (1.0 + g).powf(1.0 / (m as f64 + 1.0));
            }
            let alpha: Vec<f64> = (1..=m).map(|j| (1.0 / g.powi(j as i32)).fract()).collect();
            for k in 0..n_dirs {
                let u: Vec<f64> = alpha
                    .iter()
                    .map(|a| (0.5 + a * (k as f64 + 1.0)).fract())
                    .collect();
                let mut v = Vec::with_capacity(m);
                for pair in u.chunks(2) {
                    let r = (-2.0 * (1.0 - pair[0]).ln()).sqrt();
                    v.push(r * (TAU * pair[1]).cos());
                    v.push(r * (TAU * pair[1]).sin());
                }
                v.truncate(n);
                let nv = norm(&v);
                if nv > 0.0 {
                    v.iter_mut().for_each(|c| *c /= nv);
                    dirs.push(v);
                }
            }
        }
    }
    for j in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[j] = sign;
            dirs.push(e);
        }
    }
    dirs
}

/// Numerical certificate for the three tube conditions on the problem's grid.
///
/// 1. At kappa points with `M > 0`, for `x = v + M u` over sampled directions:
///    `<x - v, f(t, x) - v^nabla> + M ||x - v|| - M M^nabla <= tol`.
/// 2. At kappa points with `M = 0`: `||v^nabla - f(t, v)|| <= tol` and `M^nabla > 0`.
/// 3. `||v(a) - v(b)|| - (M(a) - M(b)) <= tol`.
pub fn verify_tube(
    problem: &Problem,
    tube: &Tube,
    n_dirs: usize,
    tol: f64,
) -> Result<TubeCertificateReport> {
    problem.check_function(&tube.center)?;
    if !tube.radius.same_scale(&tube.center) {
        return Err(Error::ScaleMismatch);
    }
    let n = problem.dim();
    let ts = problem.scale();
    let rhs = problem.rhs();
    let dv = nabla_derivative(&tube.center);
    let dm = nabla_derivative(&tube.radius);
    let dirs = sphere_directions(n, n_dirs);

    let mut c1 = ConditionReport::vacuous();
    let mut c2 = ConditionReport::vacuous();
    let mut x = vec![0.0; n];
    let mut fx = vec![0.0; n];
    let mut diff = vec![0.0; n];
    let mut offset = vec![0.0; n];

    for i in ts.kappa_indices() {
        let t = ts.points()[i];
        let v = tube.center.at(i);
        let m = tube.radius.scalar_at(i);
        let m_nabla = dm.scalar_at(i);
        if m > 0.0 {
            for u in &dirs {
                for ((xj, vj), uj) in x.iter_mut().zip(v).zip(u) {
                    *xj = vj + m * uj;
                }
                rhs.eval_into(t, &x, &mut fx)?;
                for ((d, fj), dvj) in diff.iter_mut().zip(&fx).zip(dv.at(i)) {
                    *d = fj - dvj;
                }
                for ((o, xj), vj) in offset.iter_mut().zip(&x).zip(v) {
                    *o = xj - vj;
                }
                let margin = dot(&offset, &diff) + m * norm(&offset) - m * m_nabla;
                c1.record(margin, margin <= tol, || Location {
                    index: i,
                    t,
                    direction: Some(u.clone()),
                });
            }
        } else {
            rhs.eval_into(t, v, &mut fx)?;
            let gap = norm_diff(dv.at(i), &fx);
            let margin = gap.max(-m_nabla);
            c2.record(margin, gap <= tol && m_nabla > 0.0, || Location {
                index: i,
                t,
                direction: None,
            });
        }
    }

    let last = ts.len() - 1;
    let mut c3 = ConditionReport::vacuous();
    let margin3 = norm_diff(tube.center.at(0), tube.center.at(last))
        - (tube.radius.scalar_at(0) - tube.radius.scalar_at(last));
    c3.record(margin3, margin3 <= tol, || Location {
        index: 0,
        t: ts.a(),
        direction: None,
    });

    Ok(TubeCertificateReport {
        passed: c1.ok && c2.ok && c3.ok,
        condition1: c1,
        condition2: c2,
        condition3: c3,
        tol,
        directions: dirs.len(),
    })
}

/// Hypothesis and conclusion of the discrete maximum principle for a scalar `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MaxPrinciple {
    /// `r^nabla < 0` wherever `r > 0` on the kappa indices, and `r(a) <= r(b)`.
    pub hypothesis_holds: bool,
    /// `r <= 0` everywhere.
    pub conclusion_holds: bool,
}

pub fn check_max_principle(r: &GridFunction) -> Result<MaxPrinciple> {
    if r.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: r.dim(),
        });
    }
    let dr = nabla_derivative(r);
    let n = r.len();
    let decreasing_where_positive = r
        .scale()
        .kappa_indices()
        .all(|i| r.scalar_at(i) <= 0.0 || dr.scalar_at(i) < 0.0);
    let endpoints = r.scalar_at(0) <= r.scalar_at(n - 1);
    Ok(MaxPrinciple {
        hypothesis_holds: decreasing_where_positive && endpoints,
        conclusion_holds: r.values().iter().all(|&v| v <= 0.0),
    })
}
