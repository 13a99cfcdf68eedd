//! The three surrogate loss families built from a round's play `x_t` and
//! gradient `g_t`.
//!
//! With `r = (x - x_t)^T g_t`:
//!
//! * exp-concave:      `l(x) = eta r + eta^2 r^2`
//! * strongly convex:  `s(x) = eta r + eta^2 G^2 ||x - x_t||^2`
//! * linear (convex):  `c(x) = eta r + (eta G D)^2`
//!
//! All three vanish or are constant at `x = x_t`, and for admissible `eta`
//! satisfy `exp(-s) <= exp(-l) <= 1 - eta r`, which is what keeps the meta
//! learner's potential from growing.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::quadratic::Quadratic;
use crate::{Matrix, Vector};

/// Slack for the exponential sandwich checks.
pub const EXP_CHECK_SLACK: f64 = 1e-12;

/// Which surrogate an expert minimizes, and therefore which algorithm it runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertKind {
    /// Convex OGD on the linear surrogate `c`.
    Convex,
    /// ONS on the exp-concave surrogate `l`.
    ExpConcave,
    /// Strongly convex OGD on the surrogate `s`.
    StronglyConvex,
}

impl ExpertKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExpertKind::Convex => "c",
            ExpertKind::ExpConcave => "l",
            ExpertKind::StronglyConvex => "s",
        }
    }
}

/// Largest learning rate for which the `l`/`s` sandwich inequality holds.
pub fn max_learning_rate(grad_bound: f64, diameter: f64) -> f64 {
    2.0 / (3.0 * diameter * grad_bound)
}

/// `1 / (2 G D sqrt(T))`, the fixed rate of the convex expert.
pub fn convex_learning_rate(grad_bound: f64, diameter: f64, horizon: usize) -> f64 {
    1.0 / (2.0 * grad_bound * diameter * (horizon as f64).sqrt())
}

/// A round's surrogate: `(x_t, g_t, eta)` plus the constants `G` and `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateContext {
    play: Vector,
    grad: Vector,
    eta: f64,
    grad_bound: f64,
    diameter: f64,
}

impl SurrogateContext {
    /// Fails unless `0 < eta <= 2/(3DG)`.
    pub fn new(
        play: Vector,
        grad: Vector,
        eta: f64,
        grad_bound: f64,
        diameter: f64,
    ) -> Result<Self> {
        check_dim(play.len(), grad.len())?;
        if !(grad_bound > 0.0 && diameter > 0.0) {
            return Err(Error::InvalidParameter {
                name: "grad_bound/diameter",
                reason: "must be positive".into(),
            });
        }
        let max = max_learning_rate(grad_bound, diameter);
        if !(eta > 0.0 && eta <= max) {
            return Err(Error::LearningRate { eta, max });
        }
        if play.iter().chain(grad.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("surrogate input"));
        }
        Ok(Self {
            play,
            grad,
            eta,
            grad_bound,
            diameter,
        })
    }

    /// Context for the linear surrogate with `eta = 1/(2GD sqrt(T))`.
    pub fn convex(
        play: Vector,
        grad: Vector,
        grad_bound: f64,
        diameter: f64,
        horizon: usize,
    ) -> Result<Self> {
        let eta = convex_learning_rate(grad_bound, diameter, horizon);
        Self::new(play, grad, eta, grad_bound, diameter)
    }

    pub fn play(&self) -> &Vector {
        &self.play
    }

    pub fn grad(&self) -> &Vector {
        &self.grad
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    fn offset(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.play.len(), x.len())?;
        Ok(x - &self.play)
    }

    pub fn ell_value(&self, x: &Vector) -> Result<f64> {
        let r = self.offset(x)?.dot(&self.grad);
        Ok(self.eta * r + self.eta * self.eta * r * r)
    }

    /// `eta g + 2 eta^2 g g^T (x - x_t)`.
    pub fn ell_grad(&self, x: &Vector) -> Result<Vector> {
        let r = self.offset(x)?.dot(&self.grad);
        Ok(&self.grad * (self.eta + 2.0 * self.eta * self.eta * r))
    }

    pub fn s_value(&self, x: &Vector) -> Result<f64> {
        let off = self.offset(x)?;
        let r = off.dot(&self.grad);
        let eg = self.eta * self.grad_bound;
        Ok(self.eta * r + eg * eg * off.norm_squared())
    }

    /// `eta g + 2 eta^2 G^2 (x - x_t)`.
    pub fn s_grad(&self, x: &Vector) -> Result<Vector> {
        let off = self.offset(x)?;
        let eg = self.eta * self.grad_bound;
        Ok(&self.grad * self.eta + off * (2.0 * eg * eg))
    }

    pub fn c_value(&self, x: &Vector) -> Result<f64> {
        let r = self.offset(x)?.dot(&self.grad);
        let egd = self.eta * self.grad_bound * self.diameter;
        Ok(self.eta * r + egd * egd)
    }

    /// `eta g`, independent of `x`.
    pub fn c_grad(&self, x: &Vector) -> Result<Vector> {
        self.offset(x)?;
        Ok(&self.grad * self.eta)
    }

    pub fn value(&self, kind: ExpertKind, x: &Vector) -> Result<f64> {
        match kind {
            ExpertKind::Convex => self.c_value(x),
            ExpertKind::ExpConcave => self.ell_value(x),
            ExpertKind::StronglyConvex => self.s_value(x),
        }
    }

    pub fn gradient(&self, kind: ExpertKind, x: &Vector) -> Result<Vector> {
        match kind {
            ExpertKind::Convex => self.c_grad(x),
            ExpertKind::ExpConcave => self.ell_grad(x),
            ExpertKind::StronglyConvex => self.s_grad(x),
        }
    }

    /// The surrogate of the given kind written as an explicit quadratic.
    pub fn quadratic(&self, kind: ExpertKind) -> Quadratic {
        let d = self.play.len();
        let eta = self.eta;
        let gx = self.grad.dot(&self.play);
        match kind {
            ExpertKind::Convex => {
                let egd = eta * self.grad_bound * self.diameter;
                Quadratic {
                    hessian: Matrix::zeros(d, d),
                    linear: &self.grad * eta,
                    constant: -eta * gx + egd * egd,
                }
            }
            ExpertKind::ExpConcave => {
                // eta r + eta^2 r^2 with r = g^T x - g^T x_t
                let e2 = eta * eta;
                Quadratic {
                    hessian: &self.grad * self.grad.transpose() * (2.0 * e2),
                    linear: &self.grad * (eta - 2.0 * e2 * gx),
                    constant: -eta * gx + e2 * gx * gx,
                }
            }
            ExpertKind::StronglyConvex => {
                let k = (eta * self.grad_bound).powi(2);
                Quadratic {
                    hessian: Matrix::identity(d, d) * (2.0 * k),
                    linear: &self.grad * eta - &self.play * (2.0 * k),
                    constant: -eta * gx + k * self.play.norm_squared(),
                }
            }
        }
    }

    /// `exp(-s(x)) <= exp(-l(x)) <= 1 + eta (x_t - x)^T g`, each up to
    /// [`EXP_CHECK_SLACK`].
    pub fn exp_inequality_check(&self, x: &Vector) -> Result<bool> {
        let s = self.s_value(x)?;
        let l = self.ell_value(x)?;
        let linear = 1.0 - self.eta * self.offset(x)?.dot(&self.grad);
        Ok((-s).exp() <= (-l).exp() + EXP_CHECK_SLACK && (-l).exp() <= linear + EXP_CHECK_SLACK)
    }

    /// `exp(-c(x)) <= 1 + eta (x_t - x)^T g` for the linear surrogate.
    pub fn convex_exp_inequality_check(&self, x: &Vector) -> Result<bool> {
        let c = self.c_value(x)?;
        let linear = 1.0 - self.eta * self.offset(x)?.dot(&self.grad);
        Ok((-c).exp() <= linear + EXP_CHECK_SLACK)
    }
}
