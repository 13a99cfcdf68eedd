//! Problem constants, loss oracles, and assumption checks.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::DecisionSet;
use crate::quadratic::Quadratic;
use crate::Vector;

/// Relative slack on the gradient bound before a sample is flagged.
pub const GRADIENT_BOUND_SLACK: f64 = 1e-9;

/// Relative tolerance between the declared and the measured diameter.
pub const DIAMETER_TOL: f64 = 1e-9;

/// Horizon, dimension, gradient bound `G` and diameter `D` of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    horizon: usize,
    dim: usize,
    grad_bound: f64,
    diameter: f64,
}

impl ProblemParams {
    pub fn new(horizon: usize, dim: usize, grad_bound: f64, diameter: f64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: "must be at least 1".into(),
            });
        }
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "must be at least 1".into(),
            });
        }
        for (name, v) in [("grad_bound", grad_bound), ("diameter", diameter)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        Ok(Self {
            horizon,
            dim,
            grad_bound,
            diameter,
        })
    }

    /// Parameters whose diameter is read off the decision set.
    pub fn for_set(horizon: usize, grad_bound: f64, set: &DecisionSet) -> Result<Self> {
        Self::new(horizon, set.dim(), grad_bound, set.diameter())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Checks the dimension and that `D` is the set's diameter.
    pub fn check_set(&self, set: &DecisionSet) -> Result<()> {
        check_dim(self.dim, set.dim())?;
        let measured = set.diameter();
        if (measured - self.diameter).abs() > DIAMETER_TOL * self.diameter {
            return Err(Error::InvalidParameter {
                name: "diameter",
                reason: format!(
                    "declared {} but the set has diameter {measured}",
                    self.diameter
                ),
            });
        }
        Ok(())
    }

    /// Rejects gradients that break `||g|| <= G`.
    pub fn check_gradient(&self, round: usize, gradient: &Vector) -> Result<()> {
        check_dim(self.dim, gradient.len())?;
        if gradient.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        let norm = gradient.norm();
        if norm > self.grad_bound * (1.0 + GRADIENT_BOUND_SLACK) {
            return Err(Error::GradientBound {
                round,
                norm,
                bound: self.grad_bound,
            });
        }
        Ok(())
    }
}

/// A played point together with the gradient observed there.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSample {
    pub point: Vector,
    pub gradient: Vector,
}

impl GradientSample {
    pub fn new(point: Vector, gradient: Vector) -> Result<Self> {
        check_dim(point.len(), gradient.len())?;
        Ok(Self { point, gradient })
    }
}

/// Curvature a loss declares about itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum CurvatureClass {
    Convex,
    StronglyConvex { modulus: f64 },
    ExpConcave { alpha: f64 },
}

/// A per-round loss function `f_t`.
pub trait LossOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector;

    /// Both at once; override when they share work.
    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.gradient(x))
    }

    fn curvature(&self) -> CurvatureClass {
        CurvatureClass::Convex
    }

    /// Exact quadratic representation, when the loss is one.
    fn quadratic(&self) -> Option<Quadratic> {
        None
    }
}

impl<T: LossOracle + ?Sized> LossOracle for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (**self).value_and_gradient(x)
    }
    fn curvature(&self) -> CurvatureClass {
        (**self).curvature()
    }
    fn quadratic(&self) -> Option<Quadratic> {
        (**self).quadratic()
    }
}

/// Central finite-difference gradient of `f` at `x`.
pub fn central_difference(f: impl Fn(&Vector) -> f64, x: &Vector, step: f64) -> Vector {
    let mut probe = x.clone();
    Vector::from_iterator(
        x.len(),
        (0..x.len()).map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = f(&probe);
            probe[i] = orig - step;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * step)
        }),
    )
}

/// `||analytic - numeric|| / max(||analytic||, ||numeric||, floor)`.
pub fn relative_gradient_error(analytic: &Vector, numeric: &Vector, floor: f64) -> f64 {
    let scale = analytic.norm().max(numeric.norm()).max(floor);
    (analytic - numeric).norm() / scale
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientViolation {
    pub index: usize,
    pub norm: f64,
}

/// Findings of [`validate_assumptions`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub gradient_violations: Vec<GradientViolation>,
    pub declared_diameter: f64,
    pub measured_diameter: f64,
    pub diameter_ok: bool,
}

impl AssumptionReport {
    pub fn is_clean(&self) -> bool {
        self.gradient_violations.is_empty() && self.diameter_ok
    }
}

/// Lists samples whose gradient exceeds `G` and compares `D` with the set.
pub fn validate_assumptions(
    params: &ProblemParams,
    set: &DecisionSet,
    samples: &[GradientSample],
) -> AssumptionReport {
    let limit = params.grad_bound() * (1.0 + GRADIENT_BOUND_SLACK);
    let gradient_violations = samples
        .iter()
        .enumerate()
        .filter_map(|(index, s)| {
            let norm = s.gradient.norm();
            (norm.is_nan() || norm > limit).then_some(GradientViolation { index, norm })
        })
        .collect();
    let measured = set.diameter();
    AssumptionReport {
        gradient_violations,
        declared_diameter: params.diameter(),
        measured_diameter: measured,
        diameter_ok: (measured - params.diameter()).abs() <= DIAMETER_TOL * params.diameter(),
    }
}
