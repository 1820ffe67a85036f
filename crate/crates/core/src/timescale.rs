//! Bounded time scales and their realization as finite grids.
//!
//! A [`TimeScaleSpec`] describes a bounded closed subset of the real line as an
//! ordered union of isolated points and sampled intervals. [`TimeScaleSpec::build`]
//! realizes it as a [`FiniteTimeScale`]: a strictly increasing list of points on
//! which every point is scattered, so backward jumps and graininess are exact.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this are merged when a spec is realized.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "point")]
    IsolatedPoint(f64),
    #[serde(rename = "interval")]
    DenseInterval { lo: f64, hi: f64, step: f64 },
}

impl Component {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Component::IsolatedPoint(p) => (p, p),
            Component::DenseInterval { lo, hi, .. } => (lo, hi),
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidComponent {
            index,
            reason: reason.to_string(),
        };
        match *self {
            Component::IsolatedPoint(p) if !p.is_finite() => Err(invalid("point is not finite")),
            Component::IsolatedPoint(_) => Ok(()),
            Component::DenseInterval { lo, hi, step } => {
                if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
                    Err(invalid("interval bounds and step must be finite"))
                } else if lo >= hi {
                    Err(invalid("interval requires lo < hi"))
                } else if step <= 0.0 {
                    Err(invalid("interval step must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Number of uniform subintervals an interval is split into.
    fn subintervals(lo: f64, hi: f64, step: f64) -> usize {
        let ratio = (hi - lo) / step;
        let nearest = ratio.round();
        // 0.3 / 0.1 must give 3 subintervals, not 4.
        if nearest >= 1.0 && (ratio - nearest).abs() <= 1e-9 * nearest {
            nearest as usize
        } else {
            ratio.ceil().max(1.0) as usize
        }
    }

    fn realize(&self, out: &mut Vec<f64>) {
        match *self {
            Component::IsolatedPoint(p) => out.push(p),
            Component::DenseInterval { lo, hi, step } => {
                let k = Self::subintervals(lo, hi, step);
                let width = hi - lo;
                out.extend((0..k).map(|j| lo + width * (j as f64) / (k as f64)));
                out.push(hi);
            }
        }
    }
}

/// Constructive description of a bounded time scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeScaleSpec {
    pub components: Vec<Component>,
}

impl TimeScaleSpec {
    pub fn new(components: Vec<Component>) -> Self {
        Self { components }
    }

    /// Uniform grid on `[lo, hi]` with the given step.
    pub fn uniform(lo: f64, hi: f64, step: f64) -> Self {
        Self::new(vec![Component::DenseInterval { lo, hi, step }])
    }

    pub fn from_points(points: &[f64]) -> Self {
        Self::new(
            points
                .iter()
                .copied()
                .map(Component::IsolatedPoint)
                .collect(),
        )
    }

    pub fn build(&self) -> Result<FiniteTimeScale> {
        for (i, c) in self.components.iter().enumerate() {
            c.validate(i)?;
        }
        // Neighbouring components may touch (shared endpoint) but not overlap.
        for (i, pair) in self.components.windows(2).enumerate() {
            let (_, prev_hi) = pair[0].bounds();
            let (next_lo, _) = pair[1].bounds();
            if next_lo < prev_hi - MERGE_TOL {
                return Err(Error::OverlappingComponents {
                    first: i,
                    second: i + 1,
                });
            }
        }

        let mut raw = Vec::new();
        for c in &self.components {
            c.realize(&mut raw);
        }

        let mut points: Vec<f64> = Vec::with_capacity(raw.len());
        for p in raw {
            match points.last() {
                Some(&last) if (p - last).abs() <= MERGE_TOL => {}
                _ => points.push(p),
            }
        }
        FiniteTimeScale::from_points(points)
    }
}

/// A realized time scale: strictly increasing points, `a = min`, `b = max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTimeScale {
    points: Vec<f64>,
}

impl FiniteTimeScale {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints {
                found: points.len(),
            });
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidComponent {
                index: i,
                reason: "point is not finite".into(),
            });
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::OverlappingComponents {
                first: i,
                second: i + 1,
            });
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn a(&self) -> f64 {
        self.points[0]
    }

    pub fn b(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    /// Backward jump. The minimum is its own backward jump.
    pub fn rho(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.points[i.saturating_sub(1)])
    }

    /// Forward jump. The maximum is its own forward jump.
    pub fn sigma(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.points[(i + 1).min(self.len() - 1)])
    }

    /// Backward graininess `t_i - rho(t_i)`, defined for `i >= 1`.
    pub fn nu(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        if i == 0 {
            return Err(Error::UndefinedAtMinimum);
        }
        Ok(self.points[i] - self.points[i - 1])
    }

    /// Graininess for an index already known to lie in `kappa_indices`.
    #[inline]
    pub(crate) fn nu_at(&self, i: usize) -> f64 {
        self.points[i] - self.points[i - 1]
    }

    /// Indices of the scale with its (always right-scattered) minimum removed.
    pub fn kappa_indices(&self) -> Range<usize> {
        1..self.len()
    }

    pub fn max_graininess(&self) -> f64 {
        self.kappa_indices()
            .map(|i| self.nu_at(i))
            .fold(0.0, f64::max)
    }

    /// Checks `1 - eps * nu(t) > 0` on the whole scale, reporting the first violation.
    pub fn check_regressive(&self, eps: f64) -> Result<()> {
        for i in self.kappa_indices() {
            let nu = self.nu_at(i);
            if !(eps * nu < 1.0) {
                return Err(Error::Regressivity {
                    index: i,
                    t: self.points[i],
                    nu,
                    eps,
                });
            }
        }
        Ok(())
    }

    /// Index of the grid point equal to `t` within [`MERGE_TOL`].
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = self.points.partition_point(|&p| p < t - MERGE_TOL);
        (pos < self.len() && (self.points[pos] - t).abs() <= MERGE_TOL).then_some(pos)
    }
}
