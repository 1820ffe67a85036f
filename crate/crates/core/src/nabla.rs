//! Nabla derivative, nabla integral and nabla exponential on a finite time scale.
//!
//! Every grid point is left-scattered, so the derivative is the backward
//! difference quotient and the integral over `(t_c, t_d]` telescopes to the sum
//! of `f(t_i) * nu(t_i)` for `c < i <= d`. Index 0 of a derivative is never
//! defined and holds NaN; consumers iterate over
//! [`FiniteTimeScale::kappa_indices`] only.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::timescale::FiniteTimeScale;

/// A function from a finite time scale into `R^n`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    scale: Arc<FiniteTimeScale>,
    dim: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(scale: Arc<FiniteTimeScale>, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if values.len() != dim * scale.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * scale.len(),
                found: values.len(),
            });
        }
        Ok(Self { scale, dim, values })
    }

    pub fn scalar(scale: Arc<FiniteTimeScale>, values: Vec<f64>) -> Result<Self> {
        Self::new(scale, 1, values)
    }

    pub fn zeros(scale: Arc<FiniteTimeScale>, dim: usize) -> Self {
        let values = vec![0.0; dim * scale.len()];
        Self { scale, dim, values }
    }

    pub fn constant(scale: Arc<FiniteTimeScale>, value: &[f64]) -> Self {
        let values = value.repeat(scale.len());
        Self {
            scale,
            dim: value.len(),
            values,
        }
    }

    /// Samples `f(t, out)` at every grid point.
    pub fn from_fn<F>(scale: Arc<FiniteTimeScale>, dim: usize, mut f: F) -> Self
    where
        F: FnMut(f64, &mut [f64]),
    {
        let mut g = Self::zeros(scale, dim);
        for i in 0..g.len() {
            let t = g.scale.points()[i];
            f(t, g.at_mut(i));
        }
        g
    }

    /// Fallible variant of [`GridFunction::from_fn`].
    pub fn try_from_fn<F>(scale: Arc<FiniteTimeScale>, dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, f64, &mut [f64]) -> Result<()>,
    {
        let mut g = Self::zeros(scale, dim);
        for i in 0..g.len() {
            let t = g.scale.points()[i];
            f(i, t, g.at_mut(i))?;
        }
        Ok(g)
    }

    pub fn scale(&self) -> &Arc<FiniteTimeScale> {
        &self.scale
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Scalar value at `i`; only meaningful for `dim == 1`.
    #[inline]
    pub fn scalar_at(&self, i: usize) -> f64 {
        self.values[i * self.dim]
    }

    /// Extracts component `j` as a scalar grid function.
    pub fn component(&self, j: usize) -> GridFunction {
        let values = (0..self.len()).map(|i| self.at(i)[j]).collect();
        GridFunction {
            scale: self.scale.clone(),
            dim: 1,
            values,
        }
    }

    pub fn same_scale(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.scale, &other.scale) || self.scale == other.scale
    }

    pub(crate) fn ensure_compatible(&self, other: &GridFunction) -> Result<()> {
        if !self.same_scale(other) {
            return Err(Error::ScaleMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// `max_i ||self[i] - other[i]||` over the whole grid.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.ensure_compatible(other)?;
        Ok((0..self.len())
            .map(|i| norm_diff(self.at(i), other.at(i)))
            .fold(0.0, max_nan))
    }

    /// Pointwise map into a new function of dimension `dim`.
    pub fn map<F>(&self, dim: usize, mut f: F) -> GridFunction
    where
        F: FnMut(usize, &[f64], &mut [f64]),
    {
        let mut out = GridFunction::zeros(self.scale.clone(), dim);
        for i in 0..self.len() {
            f(i, self.at(i), out.at_mut(i));
        }
        out
    }
}

/// `max` that propagates NaN, so a diverged iterate is never hidden.
#[inline]
pub(crate) fn max_nan(acc: f64, v: f64) -> f64 {
    if acc.is_nan() || v.is_nan() {
        f64::NAN
    } else {
        acc.max(v)
    }
}

#[inline]
pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn norm_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Backward difference quotient `(f[i] - f[i-1]) / nu_i` on the kappa indices.
pub fn nabla_derivative(f: &GridFunction) -> GridFunction {
    let ts = f.scale.clone();
    let dim = f.dim;
    let mut out = GridFunction::zeros(ts.clone(), dim);
    out.at_mut(0).fill(f64::NAN);
    for i in ts.kappa_indices() {
        let nu = ts.nu_at(i);
        let (prev, cur) = (f.at(i - 1), f.at(i));
        for (o, (c, p)) in out.at_mut(i).iter_mut().zip(cur.iter().zip(prev)) {
            *o = (c - p) / nu;
        }
    }
    out
}

/// Nabla integral of `f` over the half-open set `(t_c, t_d]`.
pub fn nabla_integral(f: &GridFunction, c_idx: usize, d_idx: usize) -> Result<Vec<f64>> {
    let n = f.len();
    for idx in [c_idx, d_idx] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
    }
    if c_idx > d_idx {
        return Err(Error::IndexOutOfRange {
            index: c_idx,
            len: d_idx + 1,
        });
    }
    let mut acc = vec![0.0; f.dim];
    for i in c_idx + 1..=d_idx {
        let nu = f.scale.nu_at(i);
        for (a, v) in acc.iter_mut().zip(f.at(i)) {
            *a += v * nu;
        }
    }
    Ok(acc)
}

/// Signed nabla integral: `int_c^d = -int_d^c` when `c > d`.
pub fn nabla_integral_oriented(f: &GridFunction, c_idx: usize, d_idx: usize) -> Result<Vec<f64>> {
    if c_idx <= d_idx {
        nabla_integral(f, c_idx, d_idx)
    } else {
        let mut v = nabla_integral(f, d_idx, c_idx)?;
        v.iter_mut().for_each(|x| *x = -*x);
        Ok(v)
    }
}

/// Cylinder transformation for the nabla exponential.
///
/// `eps` when `h == 0`, otherwise `-ln(1 - h eps) / h`. Requires `h * eps < 1`.
pub fn xi_hat(eps: f64, h: f64) -> Result<f64> {
    let product = h * eps;
    if !(product < 1.0) {
        return Err(Error::RegressivityScalar { product });
    }
    if h == 0.0 {
        Ok(eps)
    } else {
        Ok(-(-product).ln_1p() / h)
    }
}

/// Nabla exponential `e_eps(., t0)` stored in product form.
///
/// `eps` may be any real number for which the scale is regressive
/// (`1 - eps * nu > 0` everywhere); the periodic solver also uses `eps = -1`.
pub fn nabla_exp(ts: &Arc<FiniteTimeScale>, eps: f64, t0_idx: usize) -> Result<GridFunction> {
    let n = ts.len();
    if t0_idx >= n {
        return Err(Error::IndexOutOfRange {
            index: t0_idx,
            len: n,
        });
    }
    ts.check_regressive(eps)?;
    let mut values = vec![0.0; n];
    values[t0_idx] = 1.0;
    for i in t0_idx + 1..n {
        values[i] = values[i - 1] / (1.0 - eps * ts.nu_at(i));
    }
    for i in (0..t0_idx).rev() {
        values[i] = values[i + 1] * (1.0 - eps * ts.nu_at(i + 1));
    }
    GridFunction::scalar(ts.clone(), values)
}

/// Nabla exponential computed as `exp` of the nabla integral of
/// `xi_hat(eps, nu(s))`. Agrees with [`nabla_exp`] to rounding.
pub fn nabla_exp_cylinder(
    ts: &Arc<FiniteTimeScale>,
    eps: f64,
    t0_idx: usize,
) -> Result<GridFunction> {
    let n = ts.len();
    if t0_idx >= n {
        return Err(Error::IndexOutOfRange {
            index: t0_idx,
            len: n,
        });
    }
    let mut xi = vec![0.0; n];
    for i in ts.kappa_indices() {
        xi[i] = xi_hat(eps, ts.nu_at(i))?;
    }
    let xi = GridFunction::scalar(ts.clone(), xi)?;
    let values = (0..n)
        .map(|i| nabla_integral_oriented(&xi, t0_idx, i).map(|v| v[0].exp()))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::scalar(ts.clone(), values)
}

/// Nabla derivative of `t -> ||x(t)||`.
#[derive(Debug, Clone)]
pub struct NormNabla {
    /// Exact backward difference of the norm.
    pub grid: GridFunction,
    /// `<x, x^nabla> / ||x||`, the left-dense chain-rule value; NaN where `x = 0`.
    pub chain_rule: GridFunction,
}

pub fn norm_nabla(x: &GridFunction) -> NormNabla {
    let norms = x.map(1, |_, v, out| out[0] = norm(v));
    let grid = nabla_derivative(&norms);
    let dx = nabla_derivative(x);
    let mut chain_rule = GridFunction::zeros(x.scale.clone(), 1);
    chain_rule.at_mut(0)[0] = f64::NAN;
    for i in x.scale.kappa_indices() {
        let nx = norm(x.at(i));
        chain_rule.at_mut(i)[0] = if nx == 0.0 {
            f64::NAN
        } else {
            dot(x.at(i), dx.at(i)) / nx
        };
    }
    NormNabla { grid, chain_rule }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::TimeScaleSpec;

    fn scale(points: &[f64]) -> Arc<FiniteTimeScale> {
        Arc::new(FiniteTimeScale::from_points(points.to_vec()).unwrap())
    }

    fn sample(ts: &Arc<FiniteTimeScale>, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(ts.clone(), 1, |t, out| out[0] = f(t))
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let ts = scale(&[0.0, 0.3, 1.1, 2.0]);
        let f = GridFunction::constant(ts.clone(), &[2.5, -1.0]);
        let d = nabla_derivative(&f);
        assert!(d.at(0).iter().all(|v| v.is_nan()));
        for i in ts.kappa_indices() {
            assert_eq!(d.at(i), &[0.0, 0.0]);
        }
    }

    #[test]
    fn derivative_of_identity_on_integers() {
        let ts = scale(&[0.0, 1.0, 2.0, 3.0]);
        let d = nabla_derivative(&sample(&ts, |t| t));
        for i in 1..4 {
            assert_eq!(d.scalar_at(i), 1.0);
        }
    }

    #[test]
    fn derivative_of_square_is_two_t_minus_nu() {
        let ts = scale(&[0.0, 1.0, 3.0]);
        let d = nabla_derivative(&sample(&ts, |t| t * t));
        assert_eq!(d.scalar_at(2), 4.0);
        assert_eq!(d.scalar_at(2), 2.0 * 3.0 - 2.0);
    }

    #[test]
    fn integral_examples() {
        let ts = scale(&[0.0, 1.0, 2.0, 3.0]);
        let f = sample(&ts, |t| t);
        assert_eq!(nabla_integral(&f, 0, 3).unwrap(), vec![6.0]);
        assert_eq!(nabla_integral(&f, 0, 1).unwrap(), vec![1.0]);
        assert_eq!(nabla_integral(&f, 1, 3).unwrap(), vec![5.0]);
        assert_eq!(nabla_integral(&f, 2, 2).unwrap(), vec![0.0]);
        let zero = GridFunction::zeros(ts.clone(), 2);
        assert_eq!(nabla_integral(&zero, 0, 3).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            nabla_integral(&f, 0, 4),
            Err(Error::IndexOutOfRange { index: 4, len: 4 })
        ));
        assert_eq!(nabla_integral_oriented(&f, 3, 1).unwrap(), vec![-5.0]);
    }

    #[test]
    fn xi_hat_branches() {
        assert_eq!(xi_hat(1.0, 0.0).unwrap(), 1.0);
        let v = xi_hat(1.0, 0.5).unwrap();
        assert!((v - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
        assert!((v - 1.3862944).abs() < 1e-7);
        assert!(matches!(
            xi_hat(1.0, 1.0),
            Err(Error::RegressivityScalar { .. })
        ));
        assert!(xi_hat(2.0, 0.3).unwrap() > 0.0);
    }

    #[test]
    fn exp_is_one_at_origin_and_matches_product_formula() {
        let ts = Arc::new(TimeScaleSpec::uniform(0.0, 1.0, 0.5).build().unwrap());
        let e = nabla_exp(&ts, 1.0, 0).unwrap();
        assert_eq!(e.scalar_at(0), 1.0);
        assert_eq!(e.scalar_at(2), 4.0);
        let e = nabla_exp(&ts, 1.0, 1).unwrap();
        assert_eq!(e.scalar_at(1), 1.0);
        assert_eq!(e.scalar_at(0), 0.5);
        assert_eq!(e.scalar_at(2), 2.0);
    }

    #[test]
    fn exp_approaches_e_on_fine_grid() {
        let ts = Arc::new(TimeScaleSpec::uniform(0.0, 1.0, 1e-3).build().unwrap());
        let e = nabla_exp(&ts, 1.0, 0).unwrap();
        let last = e.scalar_at(ts.len() - 1);
        assert!((last - std::f64::consts::E).abs() <= 2e-3, "{last}");
    }

    #[test]
    fn exp_rejects_non_regressive_scale() {
        let ts = scale(&[0.0, 1.0, 3.0]);
        assert!(matches!(
            nabla_exp(&ts, 1.0, 0),
            Err(Error::Regressivity { index: 1, .. })
        ));
    }

    #[test]
    fn exp_routes_agree() {
        let ts = scale(&[0.0, 0.1, 0.35, 0.4, 0.9, 1.3]);
        for eps in [1.0, 0.5, -1.0] {
            for t0 in 0..ts.len() {
                let p = nabla_exp(&ts, eps, t0).unwrap();
                let c = nabla_exp_cylinder(&ts, eps, t0).unwrap();
                for i in 0..ts.len() {
                    let (a, b) = (p.scalar_at(i), c.scalar_at(i));
                    assert!((a - b).abs() <= 1e-14 * a.abs(), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn norm_nabla_constant_and_ray() {
        let ts = scale(&[0.0, 1.0, 2.0]);
        let c = GridFunction::constant(ts.clone(), &[3.0, 4.0]);
        let nn = norm_nabla(&c);
        for i in ts.kappa_indices() {
            assert_eq!(nn.grid.scalar_at(i), 0.0);
        }

        let ray = GridFunction::from_fn(ts.clone(), 2, |t, out| {
            out[0] = t;
            out[1] = 0.0;
        });
        let nn = norm_nabla(&ray);
        for i in ts.kappa_indices() {
            assert_eq!(nn.grid.scalar_at(i), 1.0);
            assert_eq!(nn.chain_rule.scalar_at(i), 1.0);
        }
    }

    #[test]
    fn norm_nabla_undefined_diagnostic_at_origin() {
        let ts = scale(&[0.0, 1.0, 2.0]);
        let x = GridFunction::from_fn(ts.clone(), 2, |t, out| {
            out[0] = 1.0 - t;
            out[1] = 0.0;
        });
        let nn = norm_nabla(&x);
        assert!(nn.chain_rule.scalar_at(1).is_nan());
        assert_eq!(nn.grid.scalar_at(1), -1.0);
    }

    #[test]
    fn norm_nabla_unit_circle_converges() {
        let mut prev_gap = f64::INFINITY;
        for h in [1e-2, 1e-3, 1e-4] {
            let ts = Arc::new(TimeScaleSpec::uniform(0.0, 1.0, h).build().unwrap());
            let x = GridFunction::from_fn(ts.clone(), 2, |t, out| {
                out[0] = t.cos();
                out[1] = t.sin();
            });
            let nn = norm_nabla(&x);
            let gap = ts
                .kappa_indices()
                .map(|i| (nn.grid.scalar_at(i) - nn.chain_rule.scalar_at(i)).abs())
                .fold(0.0, f64::max);
            assert!(gap <= h, "h = {h}, gap = {gap}");
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
    }

    #[test]
    fn grid_function_checks_shape() {
        let ts = scale(&[0.0, 1.0]);
        assert!(GridFunction::new(ts.clone(), 2, vec![0.0; 3]).is_err());
        assert!(GridFunction::new(ts.clone(), 0, vec![]).is_err());
        let other = scale(&[0.0, 2.0]);
        let f = GridFunction::zeros(ts, 1);
        let g = GridFunction::zeros(other, 1);
        assert_eq!(f.sup_distance(&g), Err(Error::ScaleMismatch));
    }
}
