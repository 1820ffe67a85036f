//! Closed-form solution of the linear periodic problem
//! `x^nabla(t) - eps * x(t) = g(t)` on `T_kappa`, `x(a) = x(b)`.
//!
//! With `e = e_eps(., b)` the solution is
//!
//! ```text
//! x(t) = e(t) [ e(a) / (e(a) - 1) * I(a) - I(t) ],   I(t) = int_(t,b] g(s) / e(rho(s)) nabla s
//! ```
//!
//! `eps = 1` is the operator behind the fixed-point map of the tube solver.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::nabla::{nabla_derivative, nabla_exp, GridFunction};
use crate::timescale::FiniteTimeScale;

/// Solves `x^nabla - x = g`, `x(a) = x(b)`.
pub fn solve_linear(ts: &Arc<FiniteTimeScale>, g: &GridFunction) -> Result<GridFunction> {
    solve_periodic(ts, 1.0, g)
}

/// Solves `x^nabla - eps * x = g`, `x(a) = x(b)` for any regressive `eps != 0`.
///
/// For `eps < 0` the exponential is anchored at `a` instead of `b`, so that
/// every factor stays in `(0, 1]` on long horizons.
pub fn solve_periodic(
    ts: &Arc<FiniteTimeScale>,
    eps: f64,
    g: &GridFunction,
) -> Result<GridFunction> {
    if eps == 0.0 {
        return Err(Error::ZeroEps);
    }
    if !(Arc::ptr_eq(ts, g.scale()) || **ts == **g.scale()) {
        return Err(Error::ScaleMismatch);
    }
    if eps < 0.0 {
        return solve_periodic_forward(ts, eps, g);
    }
    let n = ts.len();
    let dim = g.dim();
    let last = n - 1;
    let e = nabla_exp(ts, eps, last)?;
    let e_a = e.scalar_at(0);
    let c = e_a / (e_a - 1.0);

    // terms[i] = g(t_i) nu_i / e(rho(t_i)), for i in kappa
    let mut terms = vec![0.0; n * dim];
    for i in ts.kappa_indices() {
        let w = ts.nu_at(i) / e.scalar_at(i - 1);
        for (t, v) in terms[i * dim..(i + 1) * dim].iter_mut().zip(g.at(i)) {
            *t = v * w;
        }
    }

    let mut total = vec![0.0; dim];
    for i in ts.kappa_indices() {
        for (acc, t) in total.iter_mut().zip(&terms[i * dim..(i + 1) * dim]) {
            *acc += t;
        }
    }

    let mut x = GridFunction::zeros(ts.clone(), dim);
    let mut suffix = vec![0.0; dim];
    for i in (0..n).rev() {
        if i < last {
            for (s, t) in suffix.iter_mut().zip(&terms[(i + 1) * dim..(i + 2) * dim]) {
                *s += t;
            }
        }
        let ei = e.scalar_at(i);
        for ((xv, tot), s) in x.at_mut(i).iter_mut().zip(&total).zip(&suffix) {
            *xv = ei * (c * tot - s);
        }
    }
    Ok(x)
}

/// `x(t) = e(t) [ x(a) + int_(a,t] g(s) / e(s) nabla s ]` with `e = e_eps(., a)`
/// and `x(a) = e(b) I(b) / (1 - e(b))`, accumulated as a forward sweep.
fn solve_periodic_forward(
    ts: &Arc<FiniteTimeScale>,
    eps: f64,
    g: &GridFunction,
) -> Result<GridFunction> {
    ts.check_regressive(eps)?;
    let n = ts.len();
    let dim = g.dim();
    // zero-start sweep y_i = (y_{i-1} + nu_i g_i) / (1 - eps nu_i), and the product of the factors
    let mut y = GridFunction::zeros(ts.clone(), dim);
    let mut p = 1.0;
    for i in ts.kappa_indices() {
        let nu = ts.nu_at(i);
        let f = 1.0 / (1.0 - eps * nu);
        p *= f;
        let (prev, cur) = y.values_mut().split_at_mut(i * dim);
        for ((c, pv), gv) in cur[..dim]
            .iter_mut()
            .zip(&prev[(i - 1) * dim..])
            .zip(g.at(i))
        {
            *c = (pv + nu * gv) * f;
        }
    }
    let x0: Vec<f64> = y.at(n - 1).iter().map(|v| v / (1.0 - p)).collect();
    let mut x = GridFunction::zeros(ts.clone(), dim);
    let mut e = 1.0;
    for i in 0..n {
        if i > 0 {
            e /= 1.0 - eps * ts.nu_at(i);
        }
        for ((xv, yv), x0v) in x.at_mut(i).iter_mut().zip(y.at(i)).zip(&x0) {
            *xv = e * x0v + yv;
        }
    }
    Ok(x)
}

/// Residuals of a candidate solution of the periodic linear problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearResidual {
    /// `max_i ||x^nabla[i] - eps x[i] - g[i]||` over the kappa indices.
    pub equation: f64,
    /// `||x(a) - x(b)||`.
    pub boundary: f64,
}

pub fn periodic_residual(x: &GridFunction, eps: f64, g: &GridFunction) -> Result<LinearResidual> {
    x.ensure_compatible(g)?;
    let dx = nabla_derivative(x);
    let mut equation: f64 = 0.0;
    for i in x.scale().kappa_indices() {
        let r = dx
            .at(i)
            .iter()
            .zip(x.at(i))
            .zip(g.at(i))
            .map(|((d, xv), gv)| {
                let e = d - eps * xv - gv;
                e * e
            })
            .sum::<f64>()
            .sqrt();
        equation = crate::nabla::max_nan(equation, r);
    }
    let boundary = crate::nabla::norm_diff(x.at(0), x.at(x.len() - 1));
    Ok(LinearResidual { equation, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::TimeScaleSpec;

    fn scale(points: &[f64]) -> Arc<FiniteTimeScale> {
        Arc::new(FiniteTimeScale::from_points(points.to_vec()).unwrap())
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let ts = scale(&[0.0, 0.2, 0.5, 0.9]);
        let g = GridFunction::zeros(ts.clone(), 2);
        let x = solve_linear(&ts, &g).unwrap();
        assert!(x.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_forcing_gives_negated_constant() {
        let ts = scale(&[0.0, 0.2, 0.5, 0.9, 1.7]);
        let g = GridFunction::constant(ts.clone(), &[1.5, -2.0]);
        let x = solve_linear(&ts, &g).unwrap();
        for i in 0..ts.len() {
            assert!((x.at(i)[0] + 1.5).abs() <= 1e-12);
            assert!((x.at(i)[1] - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn residual_vanishes_on_a_sine_forcing() {
        let ts = scale(&[0.0, 0.1, 0.15, 0.6, 0.65, 1.2, 2.0]);
        let g = GridFunction::from_fn(ts.clone(), 1, |t, out| out[0] = (3.0 * t).sin());
        let x = solve_linear(&ts, &g).unwrap();
        let r = periodic_residual(&x, 1.0, &g).unwrap();
        assert!(r.equation <= 1e-12, "{r:?}");
        assert!(r.boundary <= 1e-12, "{r:?}");
    }

    #[test]
    fn negative_eps_is_supported() {
        let ts = Arc::new(TimeScaleSpec::uniform(0.0, 3.0, 0.7).build().unwrap());
        let g = GridFunction::from_fn(ts.clone(), 1, |t, out| out[0] = t * t - 1.0);
        let x = solve_periodic(&ts, -1.0, &g).unwrap();
        let r = periodic_residual(&x, -1.0, &g).unwrap();
        assert!(r.equation <= 1e-12 && r.boundary <= 1e-12, "{r:?}");
        // graininess 1.5 is fine for eps = -1 but not for eps = 1
        let coarse = scale(&[0.0, 1.5, 2.0]);
        let g = GridFunction::zeros(coarse.clone(), 1);
        assert!(solve_periodic(&coarse, -1.0, &g).is_ok());
        assert!(matches!(
            solve_linear(&coarse, &g),
            Err(Error::Regressivity { index: 1, .. })
        ));
    }

    #[test]
    fn rejects_zero_eps_and_foreign_scale() {
        let ts = scale(&[0.0, 0.5]);
        let g = GridFunction::zeros(ts.clone(), 1);
        assert_eq!(solve_periodic(&ts, 0.0, &g), Err(Error::ZeroEps));
        let other = scale(&[0.0, 0.25]);
        assert_eq!(solve_linear(&other, &g), Err(Error::ScaleMismatch));
    }

    #[test]
    fn dense_limit_matches_continuum_solution() {
        let ts = Arc::new(TimeScaleSpec::uniform(0.0, 1.0, 1e-3).build().unwrap());
        let g = GridFunction::constant(ts.clone(), &[1.0]);
        let x = solve_linear(&ts, &g).unwrap();
        let sup = x
            .values()
            .iter()
            .map(|v| (v + 1.0).abs())
            .fold(0.0, crate::nabla::max_nan);
        assert!(sup <= 5e-3);
    }
}
