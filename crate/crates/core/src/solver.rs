//! Fixed-point solver for the periodic problem inside a tube.
//!
//! [`apply_t`] is the solution operator of the modified problem
//! `x^nabla - x = f(t, x_hat) - x_hat`, `x(a) = x(b)`, where `x_hat` is the
//! projection of `x` onto the tube. Its fixed points that lie in the tube solve
//! the original problem.
//!
//! The operator is expansive along directions where `f` points into the tube
//! (its derivative on constants is `1 - f'`), so plain relaxation of it drifts
//! away from in-tube solutions. [`Scheme::Shifted`] relaxes instead the map
//! `x -> y` with `y^nabla + y = f(t, x_hat) - x_hat + 2x`, `y(a) = y(b)`, which
//! has exactly the same fixed points and contracts on the examples at hand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear_bvp::{solve_linear, solve_periodic};
use crate::nabla::{norm_diff, GridFunction};
use crate::problem::Problem;
use crate::tube::{max_tube_residual, Tube};

/// Which operator the damped iteration relaxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Relax the shifted splitting (periodic `eps = -1` solve).
    #[default]
    Shifted,
    /// Relax the tube operator itself.
    Direct,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub theta: f64,
    pub max_iter: usize,
    pub tol_fp: f64,
    pub tol_res: f64,
    /// Initial iterate; the tube center when `None`.
    pub x0: Option<GridFunction>,
    pub scheme: Scheme,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            theta: 0.5,
            max_iter: 10_000,
            tol_fp: 1e-12,
            tol_res: 1e-8,
            x0: None,
            scheme: Scheme::Shifted,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!(
                "theta must lie in (0, 1], got {}",
                self.theta
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if !(self.tol_fp > 0.0) || !(self.tol_res > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// `sup_i ||x_{k+1}[i] - x_k[i]||` per iteration.
    pub gap_history: Vec<f64>,
    /// `max_i ||x^nabla[i] - f(t_i, x[i])||` for the returned iterate.
    pub final_residual: f64,
    pub max_tube_residual: f64,
    /// `||x(a) - x(b)||`.
    pub boundary_gap: f64,
    /// `sup ||apply_t(x) - x||` for the returned iterate.
    pub fixed_point_gap: f64,
    pub converged: bool,
    pub scheme: Scheme,
}

/// Serializable view of a [`SolverReport`] with an optionally truncated history.
#[derive(Debug, Serialize)]
pub struct SolverReportJson<'a> {
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub max_tube_residual: f64,
    pub boundary_gap: f64,
    pub fixed_point_gap: f64,
    pub scheme: Scheme,
    pub gap_history_len: usize,
    pub gap_history: &'a [f64],
}

/// Entries of the gap history kept when the report is not asked for in full.
pub const HISTORY_TAIL: usize = 100;

impl SolverReport {
    pub fn to_json(&self, full_history: bool) -> SolverReportJson<'_> {
        let h = &self.gap_history;
        let gap_history = if full_history || h.len() <= HISTORY_TAIL {
            &h[..]
        } else {
            &h[h.len() - HISTORY_TAIL..]
        };
        SolverReportJson {
            converged: self.converged,
            iterations: self.iterations,
            final_residual: self.final_residual,
            max_tube_residual: self.max_tube_residual,
            boundary_gap: self.boundary_gap,
            fixed_point_gap: self.fixed_point_gap,
            scheme: self.scheme,
            gap_history_len: h.len(),
            gap_history,
        }
    }
}

fn check_inputs(x: &GridFunction, problem: &Problem, tube: &Tube) -> Result<()> {
    problem.check_function(x)?;
    problem.check_function(tube.center())?;
    Ok(())
}

/// `f(t, x_hat) - x_hat` on the kappa indices (zero at index 0, which the
/// linear solver never reads), along with `x_hat`.
fn modified_forcing(
    x: &GridFunction,
    problem: &Problem,
    tube: &Tube,
) -> Result<(GridFunction, GridFunction)> {
    let x_hat = tube.project_all(x)?;
    let mut g = problem.rhs_on_grid(&x_hat)?;
    for i in problem.scale().kappa_indices() {
        for (gv, xv) in g.at_mut(i).iter_mut().zip(x_hat.at(i)) {
            *gv -= xv;
        }
    }
    Ok((g, x_hat))
}

/// The tube operator: periodic solution of `y^nabla - y = f(t, x_hat) - x_hat`.
pub fn apply_t(x: &GridFunction, problem: &Problem, tube: &Tube) -> Result<GridFunction> {
    check_inputs(x, problem, tube)?;
    let (g, _) = modified_forcing(x, problem, tube)?;
    solve_linear(problem.scale(), &g)
}

/// Shifted splitting: periodic solution of `y^nabla + y = f(t, x_hat) - x_hat + 2x`.
pub fn apply_shifted(x: &GridFunction, problem: &Problem, tube: &Tube) -> Result<GridFunction> {
    check_inputs(x, problem, tube)?;
    let (mut g, _) = modified_forcing(x, problem, tube)?;
    for i in problem.scale().kappa_indices() {
        for (gv, xv) in g.at_mut(i).iter_mut().zip(x.at(i)) {
            *gv += 2.0 * xv;
        }
    }
    solve_periodic(problem.scale(), -1.0, &g)
}

/// `max_i ||x^nabla - x - (f(t, x_hat) - x_hat)||` over the kappa indices.
pub fn modified_residual(x: &GridFunction, problem: &Problem, tube: &Tube) -> Result<f64> {
    check_inputs(x, problem, tube)?;
    let (g, _) = modified_forcing(x, problem, tube)?;
    Ok(crate::linear_bvp::periodic_residual(x, 1.0, &g)?.equation)
}

/// Damped fixed-point iteration `x <- (1 - theta) x + theta S(x)` from `x0`
/// until the sup-norm step is at most `tol_fp` or `max_iter` is reached.
///
/// Non-convergence is reported through `converged = false`, not as an error.
pub fn solve(
    problem: &Problem,
    tube: &Tube,
    config: &SolverConfig,
) -> Result<(GridFunction, SolverReport)> {
    config.validate()?;
    problem.check_function(tube.center())?;
    let mut x = match &config.x0 {
        Some(x0) => {
            problem.check_function(x0)?;
            x0.clone()
        }
        None => tube.center().clone(),
    };
    let theta = config.theta;
    let mut gap_history = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iter {
        let y = match config.scheme {
            Scheme::Shifted => apply_shifted(&x, problem, tube)?,
            Scheme::Direct => apply_t(&x, problem, tube)?,
        };
        let mut next = x.clone();
        for (n, yv) in next.values_mut().iter_mut().zip(y.values()) {
            *n = (1.0 - theta) * *n + theta * yv;
        }
        let gap = next.sup_distance(&x)?;
        x = next;
        iterations += 1;
        gap_history.push(gap);
        if gap.is_nan() || gap <= config.tol_fp {
            break;
        }
    }

    let final_residual = problem.equation_residual(&x)?;
    let max_tube = max_tube_residual(&x, tube)?;
    let boundary_gap = norm_diff(x.at(0), x.at(x.len() - 1));
    let fixed_point_gap = apply_t(&x, problem, tube)?.sup_distance(&x)?;
    let last_gap = gap_history.last().copied().unwrap_or(f64::NAN);
    let converged = last_gap <= config.tol_fp
        && final_residual <= config.tol_res
        && max_tube <= config.tol_res
        && boundary_gap <= config.tol_res;

    let report = SolverReport {
        iterations,
        gap_history,
        final_residual,
        max_tube_residual: max_tube,
        boundary_gap,
        fixed_point_gap,
        converged,
        scheme: config.scheme,
    };
    Ok((x, report))
}
