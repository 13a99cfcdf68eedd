//! Decision sets and the two projections the experts need.
//!
//! Convex OGD experts project in the Euclidean norm. ONS projects in the
//! norm induced by its preconditioner, `argmin_{x in D} (x - y)^T H (x - y)`;
//! for balls that problem reduces to a one-dimensional search over the KKT
//! multiplier of the norm constraint.

use nalgebra::{Cholesky, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::{Matrix, Vector};

/// Slack used for membership tests.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// `| ||y(mu)|| - r |` target for the multiplier search.
pub const MULTIPLIER_TOL: f64 = 1e-10;

/// Iteration cap of the multiplier bisection.
pub const MULTIPLIER_MAX_ITER: usize = 200;

/// Relative stationarity residual accepted for a weighted projection.
pub const KKT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
}

/// A compact convex feasible region containing the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SetRepr", try_from = "SetRepr")]
pub struct DecisionSet {
    shape: Shape,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
enum SetRepr {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl From<DecisionSet> for SetRepr {
    fn from(set: DecisionSet) -> Self {
        match set.shape {
            Shape::Ball { center, radius } => SetRepr::Ball {
                center: center.as_slice().to_vec(),
                radius,
            },
            Shape::Box { lower, upper } => SetRepr::Box {
                lower: lower.as_slice().to_vec(),
                upper: upper.as_slice().to_vec(),
            },
        }
    }
}

impl TryFrom<SetRepr> for DecisionSet {
    type Error = Error;

    fn try_from(repr: SetRepr) -> Result<Self> {
        match repr {
            SetRepr::Ball { center, radius } => DecisionSet::ball(Vector::from_vec(center), radius),
            SetRepr::Box { lower, upper } => {
                DecisionSet::boxed(Vector::from_vec(lower), Vector::from_vec(upper))
            }
        }
    }
}

impl DecisionSet {
    /// Euclidean ball `{x : ||x - center|| <= radius}`.
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidParameter {
                name: "center",
                reason: "dimension must be at least 1".into(),
            });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("must be positive and finite, got {radius}"),
            });
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("ball center"));
        }
        if center.norm() > radius + BOUNDARY_TOL {
            return Err(Error::OriginNotContained);
        }
        Ok(Self {
            shape: Shape::Ball { center, radius },
        })
    }

    /// Ball of the given radius centered at the origin.
    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(Vector::zeros(dim), radius)
    }

    /// Axis-aligned box `lower <= x <= upper`.
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidParameter {
                name: "lower",
                reason: "dimension must be at least 1".into(),
            });
        }
        if lower.iter().chain(upper.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("box bound"));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::InvalidParameter {
                name: "upper",
                reason: "every upper bound must be >= its lower bound".into(),
            });
        }
        if lower.iter().any(|&l| l > 0.0) || upper.iter().any(|&u| u < 0.0) {
            return Err(Error::OriginNotContained);
        }
        Ok(Self {
            shape: Shape::Box { lower, upper },
        })
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Ball { center, .. } => center.len(),
            Shape::Box { lower, .. } => lower.len(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => 2.0 * radius,
            Shape::Box { lower, upper } => (upper - lower).norm(),
        }
    }

    /// `(center, radius)` when the set is a ball.
    pub fn as_ball(&self) -> Option<(&Vector, f64)> {
        match &self.shape {
            Shape::Ball { center, radius } => Some((center, *radius)),
            Shape::Box { .. } => None,
        }
    }

    pub fn contains(&self, x: &Vector) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(match &self.shape {
            Shape::Ball { center, radius } => (x - center).norm() <= radius + BOUNDARY_TOL,
            Shape::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(v, (l, u))| *v >= l - BOUNDARY_TOL && *v <= u + BOUNDARY_TOL),
        })
    }

    /// Closest point of the set in the Euclidean norm.
    pub fn project(&self, y: &Vector) -> Result<Vector> {
        check_dim(self.dim(), y.len())?;
        Ok(match &self.shape {
            Shape::Ball { center, radius } => {
                let offset = y - center;
                let dist = offset.norm();
                if dist <= radius + BOUNDARY_TOL {
                    y.clone()
                } else {
                    center + offset * (radius / dist)
                }
            }
            Shape::Box { lower, upper } => Vector::from_iterator(
                y.len(),
                y.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(v, (l, u))| v.clamp(*l, *u)),
            ),
        })
    }

    /// Closest point of the set in the norm `||v||_H^2 = v^T H v`.
    ///
    /// `H` must be symmetric positive definite; this is checked with a
    /// Cholesky factorization. Boxes are supported only for diagonal `H`,
    /// where the problem separates into per-coordinate clamps.
    pub fn project_weighted(&self, h: &Matrix, y: &Vector) -> Result<WeightedProjection> {
        let d = self.dim();
        check_dim(d, y.len())?;
        check_dim(d, h.nrows())?;
        check_dim(d, h.ncols())?;
        ensure_spd(h)?;

        if self.contains(y)? {
            return Ok(WeightedProjection {
                point: y.clone(),
                multiplier: 0.0,
                residual: 0.0,
                iterations: 0,
            });
        }
        let (center, radius) = match &self.shape {
            Shape::Ball { center, radius } => (center, *radius),
            Shape::Box { lower, upper } => {
                let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || h[(i, j)] == 0.0));
                if !diagonal {
                    return Err(Error::UnsupportedProjection);
                }
                let point = y.zip_zip_map(lower, upper, |v, l, u| v.clamp(l, u));
                return Ok(WeightedProjection {
                    point,
                    multiplier: 0.0,
                    residual: 0.0,
                    iterations: 0,
                });
            }
        };

        // In the eigenbasis of H, y(mu) - c = Q diag(l / (l + mu)) Q^T (y - c),
        // whose norm decreases monotonically in mu.
        let offset = y - center;
        let eig = SymmetricEigen::new(h.clone());
        let coords = eig.eigenvectors.transpose() * &offset;
        let lambdas = &eig.eigenvalues;
        let shrunk_norm = |mu: f64| -> f64 {
            lambdas
                .iter()
                .zip(coords.iter())
                .map(|(l, w)| {
                    let v = l * w / (l + mu);
                    v * v
                })
                .sum::<f64>()
                .sqrt()
        };

        let lambda_max = lambdas.iter().cloned().fold(0.0_f64, f64::max);
        let mut lo = 0.0;
        let mut hi = lambda_max * offset.norm() / radius;
        let mut iterations = 0;
        let mut converged = radius - shrunk_norm(hi) <= MULTIPLIER_TOL;
        while !converged && iterations < MULTIPLIER_MAX_ITER {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            let n = shrunk_norm(mid);
            if n > radius {
                lo = mid;
            } else {
                hi = mid;
                converged = radius - n <= MULTIPLIER_TOL;
            }
        }

        // hi always sits on the feasible side of the constraint.
        let mu = hi;
        let scaled = Vector::from_iterator(
            d,
            lambdas
                .iter()
                .zip(coords.iter())
                .map(|(l, w)| l * w / (l + mu)),
        );
        let point = center + &eig.eigenvectors * scaled;

        let stationarity = h * (&point - y) + (&point - center) * mu;
        let scale = (h * &offset).norm().max(f64::MIN_POSITIVE);
        let residual = stationarity.norm() / scale;
        if !converged || residual > KKT_TOL {
            return Err(Error::ProjectionNotConverged {
                iterations,
                residual: residual.max((radius - shrunk_norm(mu)).abs()),
            });
        }
        Ok(WeightedProjection {
            point,
            multiplier: mu,
            residual,
            iterations,
        })
    }
}

/// Result of an `H`-weighted projection.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedProjection {
    pub point: Vector,
    /// KKT multiplier of the norm constraint; zero for interior inputs.
    pub multiplier: f64,
    /// Relative residual of `H (x - y) + mu (x - c) = 0`.
    pub residual: f64,
    pub iterations: usize,
}

/// Rejects matrices that are asymmetric or fail a Cholesky factorization.
pub fn ensure_spd(h: &Matrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NotPositiveDefinite);
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("weight matrix"));
    }
    let scale = h.amax().max(f64::MIN_POSITIVE);
    let asym = (h - h.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::NotPositiveDefinite);
    }
    match Cholesky::new(h.clone()) {
        Some(_) => Ok(()),
        None => Err(Error::NotPositiveDefinite),
    }
}
