//! Quadratic objectives `q(x) = 1/2 x^T H x + b^T x + c` and a projected
//! gradient minimizer over a decision set.
//!
//! Sums of surrogate losses and of quadratic task losses are quadratic, so
//! comparators for those sums can be found without touching every round.

use nalgebra::SymmetricEigen;

use crate::error::{check_dim, Result};
use crate::geometry::DecisionSet;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub hessian: Matrix,
    pub linear: Vector,
    pub constant: f64,
}

/// Output of [`Quadratic::minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMinimum {
    pub point: Vector,
    pub value: f64,
    /// `L ||x - P(x - grad / L)||` at the returned point.
    pub gradient_mapping_norm: f64,
    pub iterations: usize,
}

impl Quadratic {
    pub fn zero(dim: usize) -> Self {
        Self {
            hessian: Matrix::zeros(dim, dim),
            linear: Vector::zeros(dim),
            constant: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + self.linear.dot(x) + self.constant
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        &self.hessian * x + &self.linear
    }

    pub fn add_assign(&mut self, other: &Quadratic) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        self.hessian += &other.hessian;
        self.linear += &other.linear;
        self.constant += other.constant;
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.hessian *= factor;
        self.linear *= factor;
        self.constant *= factor;
    }

    /// Largest eigenvalue of the (symmetrized) Hessian, floored at zero.
    pub fn smoothness(&self) -> f64 {
        let sym = (&self.hessian + self.hessian.transpose()) * 0.5;
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Projected gradient descent from the origin with constant step `1/L`.
    ///
    /// The iterate with the lowest objective seen is returned. For a linear
    /// objective (`L = 0`) a step long enough to cross the set is used.
    pub fn minimize(&self, set: &DecisionSet, iterations: usize) -> Result<QuadraticMinimum> {
        check_dim(set.dim(), self.dim())?;
        let l = self.smoothness();
        let step = if l > 0.0 {
            1.0 / l
        } else {
            2.0 * set.diameter() / self.linear.norm().max(f64::MIN_POSITIVE)
        };
        let mut x = Vector::zeros(self.dim());
        let mut best = (self.value(&x), x.clone());
        for _ in 0..iterations {
            let next = set.project(&(&x - self.gradient(&x) * step))?;
            let converged = (&next - &x).norm() == 0.0;
            x = next;
            let v = self.value(&x);
            if v < best.0 {
                best = (v, x.clone());
            }
            if converged {
                break;
            }
        }
        let (value, point) = best;
        let mapped = set.project(&(&point - self.gradient(&point) * step))?;
        Ok(QuadraticMinimum {
            gradient_mapping_norm: (&point - mapped).norm() / step,
            point,
            value,
            iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn interior_minimizer() {
        // q(x) = ||x - a||^2 with a inside the ball.
        let a = dvector![0.1, -0.2];
        let q = Quadratic {
            hessian: Matrix::identity(2, 2) * 2.0,
            linear: -&a * 2.0,
            constant: a.norm_squared(),
        };
        let set = DecisionSet::centered_ball(2, 0.5).unwrap();
        let m = q.minimize(&set, 1000).unwrap();
        assert!((m.point - a).norm() < 1e-12);
        assert!(m.value.abs() < 1e-15);
    }

    #[test]
    fn linear_objective_hits_boundary() {
        let q = Quadratic {
            hessian: Matrix::zeros(2, 2),
            linear: dvector![3.0, 4.0],
            constant: 0.0,
        };
        let set = DecisionSet::centered_ball(2, 0.5).unwrap();
        let m = q.minimize(&set, 100).unwrap();
        assert!((m.point - dvector![-0.3, -0.4]).norm() < 1e-12);
        assert!(m.gradient_mapping_norm < 1e-9);
    }

    #[test]
    fn add_and_scale() {
        let mut q = Quadratic::zero(1);
        let p = Quadratic {
            hessian: Matrix::identity(1, 1),
            linear: dvector![1.0],
            constant: 2.0,
        };
        q.add_assign(&p).unwrap();
        q.add_assign(&p).unwrap();
        q.scale(0.5);
        assert_eq!(q, p);
        assert!(q.add_assign(&Quadratic::zero(2)).is_err());
    }
}
