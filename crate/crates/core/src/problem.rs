use std::sync::Arc;

use crate::error::{Error, Result};
use crate::nabla::GridFunction;
use crate::rhs::{Rhs, RhsDef};
use crate::timescale::{FiniteTimeScale, TimeScaleSpec};

/// The periodic problem `x^nabla(t) = f(t, x(t))` on `T_kappa`, `x(a) = x(b)`.
#[derive(Debug, Clone)]
pub struct Problem {
    spec: Option<TimeScaleSpec>,
    scale: Arc<FiniteTimeScale>,
    rhs: Rhs,
}

impl Problem {
    /// Realizes the scale and checks graininess `< 1` everywhere.
    pub fn new(spec: TimeScaleSpec, dim: usize, rhs: &RhsDef) -> Result<Self> {
        let scale = Arc::new(spec.build()?);
        let rhs = Rhs::from_def(rhs, dim)?;
        let mut p = Self::with_scale(scale, rhs)?;
        p.spec = Some(spec);
        Ok(p)
    }

    pub fn with_scale(scale: Arc<FiniteTimeScale>, rhs: Rhs) -> Result<Self> {
        scale.check_regressive(1.0)?;
        Ok(Self {
            spec: None,
            scale,
            rhs,
        })
    }

    pub fn spec(&self) -> Option<&TimeScaleSpec> {
        self.spec.as_ref()
    }

    pub fn scale(&self) -> &Arc<FiniteTimeScale> {
        &self.scale
    }

    pub fn rhs(&self) -> &Rhs {
        &self.rhs
    }

    pub fn dim(&self) -> usize {
        self.rhs.dim()
    }

    /// Samples `f(t_i, x[i])` on every kappa index; index 0 is left at zero.
    pub fn rhs_on_grid(&self, x: &GridFunction) -> Result<GridFunction> {
        self.check_function(x)?;
        let mut out = GridFunction::zeros(self.scale.clone(), self.dim());
        for i in self.scale.kappa_indices() {
            let t = self.scale.points()[i];
            self.rhs.eval_into(t, x.at(i), out.at_mut(i))?;
        }
        Ok(out)
    }

    /// `max_i ||x^nabla[i] - f(t_i, x[i])||` over the kappa indices.
    pub fn equation_residual(&self, x: &GridFunction) -> Result<f64> {
        let f = self.rhs_on_grid(x)?;
        let dx = crate::nabla::nabla_derivative(x);
        Ok(self
            .scale
            .kappa_indices()
            .map(|i| crate::nabla::norm_diff(dx.at(i), f.at(i)))
            .fold(0.0, crate::nabla::max_nan))
    }

    pub(crate) fn check_function(&self, x: &GridFunction) -> Result<()> {
        if !(Arc::ptr_eq(&self.scale, x.scale()) || *self.scale == **x.scale()) {
            return Err(Error::ScaleMismatch);
        }
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }
}
