//! Expert algorithms run underneath the meta learner.
//!
//! Every expert starts at the origin and only ever sees the broadcast
//! `(x_t, g_t)`, from which it rebuilds its own surrogate for the round.

use std::sync::Arc;

use nalgebra::Cholesky;

use crate::bounds;
use crate::error::{check_dim, Error, Result};
use crate::geometry::DecisionSet;
use crate::problem::ProblemParams;
pub use crate::surrogates::ExpertKind;
use crate::surrogates::SurrogateContext;
use crate::{Matrix, Vector};

/// The inverse preconditioner is recomputed from scratch this often.
pub const REFACTOR_INTERVAL: usize = 512;

/// What the meta learner sends to every expert after a round.
#[derive(Debug, Clone, PartialEq)]
pub struct Broadcast {
    pub play: Vector,
    pub grad: Vector,
}

fn check_eta(expected: f64, ctx: &SurrogateContext) -> Result<()> {
    let got = ctx.eta();
    if (got - expected).abs() <= 1e-12 * expected {
        Ok(())
    } else {
        Err(Error::LearningRateMismatch { expected, got })
    }
}

/// Projected OGD on the linear surrogate, step `D / (eta_c G sqrt(t))`.
#[derive(Debug, Clone)]
pub struct ConvexExpert {
    iterate: Vector,
    round: usize,
    eta: f64,
    grad_bound: f64,
    diameter: f64,
    set: Arc<DecisionSet>,
}

impl ConvexExpert {
    pub fn new(params: &ProblemParams, set: Arc<DecisionSet>) -> Self {
        Self {
            iterate: Vector::zeros(set.dim()),
            round: 1,
            eta: crate::surrogates::convex_learning_rate(
                params.grad_bound(),
                params.diameter(),
                params.horizon(),
            ),
            grad_bound: params.grad_bound(),
            diameter: params.diameter(),
            set,
        }
    }

    pub fn point(&self) -> &Vector {
        &self.iterate
    }

    /// Index `t` of the round the next update belongs to.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Step applied to the surrogate gradient `eta_c g` in the current round.
    pub fn step_size(&self) -> f64 {
        self.diameter / (self.eta * self.grad_bound * (self.round as f64).sqrt())
    }

    pub fn step(&mut self, ctx: &SurrogateContext) -> Result<()> {
        check_eta(self.eta, ctx)?;
        check_dim(self.iterate.len(), ctx.grad().len())?;
        // The surrogate gradient is eta_c g, so eta_c cancels out of the step.
        let scale = self.diameter / (self.grad_bound * (self.round as f64).sqrt());
        let target = &self.iterate - ctx.grad() * scale;
        self.iterate = self.set.project(&target)?;
        self.round += 1;
        Ok(())
    }
}

/// Online Newton step with a Sherman-Morrison maintained inverse.
///
/// `Sigma_1 = I / (beta^2 D^2)`; each update adds `v v^T`, steps to
/// `x - Sigma^{-1} v / beta` and projects in the `Sigma` norm.
#[derive(Debug, Clone)]
pub struct OnlineNewton {
    iterate: Vector,
    beta: f64,
    sigma: Matrix,
    sigma_inv: Matrix,
    updates: usize,
    set: Arc<DecisionSet>,
}

impl OnlineNewton {
    pub fn new(set: Arc<DecisionSet>, beta: f64, diameter: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("must be positive, got {beta}"),
            });
        }
        let d = set.dim();
        let eps = 1.0 / (beta * beta * diameter * diameter);
        Ok(Self {
            iterate: Vector::zeros(d),
            beta,
            sigma: Matrix::identity(d, d) * eps,
            sigma_inv: Matrix::identity(d, d) / eps,
            updates: 0,
            set,
        })
    }

    pub fn point(&self) -> &Vector {
        &self.iterate
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn sigma_inv(&self) -> &Matrix {
        &self.sigma_inv
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn update(&mut self, v: &Vector) -> Result<()> {
        check_dim(self.iterate.len(), v.len())?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("newton gradient"));
        }
        self.sigma.ger(1.0, v, v, 1.0);
        self.updates += 1;
        if self.updates.is_multiple_of(REFACTOR_INTERVAL) {
            self.sigma_inv = Cholesky::new(self.sigma.clone())
                .ok_or(Error::NotPositiveDefinite)?
                .inverse();
        } else {
            let u = &self.sigma_inv * v;
            let denom = 1.0 + v.dot(&u);
            self.sigma_inv.ger(-1.0 / denom, &u, &u, 1.0);
        }
        let target = &self.iterate - (&self.sigma_inv * v) / self.beta;
        self.iterate = self.set.project_weighted(&self.sigma, &target)?.point;
        Ok(())
    }
}

/// ONS run on the exp-concave surrogate with a fixed grid rate `eta`.
#[derive(Debug, Clone)]
pub struct OnsExpert {
    newton: OnlineNewton,
    eta: f64,
    grad_bound: f64,
    diameter: f64,
}

impl OnsExpert {
    /// Surrogate gradient bound `7 / (25 D)` valid for `eta <= 1/(5DG)`.
    pub fn surrogate_grad_bound(diameter: f64) -> f64 {
        7.0 / (25.0 * diameter)
    }

    /// `beta = min(1 / (4 G_l D), 1) / 2`.
    pub fn beta(diameter: f64) -> f64 {
        0.5 * (1.0 / (4.0 * Self::surrogate_grad_bound(diameter) * diameter)).min(1.0)
    }

    pub fn new(params: &ProblemParams, set: Arc<DecisionSet>, eta: f64) -> Result<Self> {
        let max = 1.0 / (5.0 * params.diameter() * params.grad_bound());
        if !(eta > 0.0 && eta <= max * (1.0 + 1e-12)) {
            return Err(Error::LearningRate { eta, max });
        }
        let d = params.diameter();
        Ok(Self {
            newton: OnlineNewton::new(set, Self::beta(d), d)?,
            eta,
            grad_bound: params.grad_bound(),
            diameter: d,
        })
    }

    pub fn point(&self) -> &Vector {
        self.newton.point()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn newton(&self) -> &OnlineNewton {
        &self.newton
    }

    /// Gradient of the round's surrogate at this expert's iterate.
    pub fn surrogate_gradient(&self, ctx: &SurrogateContext) -> Result<Vector> {
        ctx.ell_grad(self.point())
    }

    pub fn step(&mut self, ctx: &SurrogateContext) -> Result<()> {
        check_eta(self.eta, ctx)?;
        let grad = self.surrogate_gradient(ctx)?;
        let norm = grad.norm();
        let analytic =
            self.eta * self.grad_bound + 2.0 * (self.eta * self.grad_bound).powi(2) * self.diameter;
        let limit = Self::surrogate_grad_bound(self.diameter).min(analytic) * (1.0 + 1e-8);
        if norm > limit {
            return Err(Error::Invariant(format!(
                "surrogate gradient norm {norm} exceeds {limit}"
            )));
        }
        self.newton.update(&grad)
    }
}

/// Projected OGD on the strongly convex surrogate, step `1/(2 eta^2 G^2 t)`.
#[derive(Debug, Clone)]
pub struct ScExpert {
    iterate: Vector,
    eta: f64,
    round: usize,
    grad_bound: f64,
    set: Arc<DecisionSet>,
}

impl ScExpert {
    pub fn new(params: &ProblemParams, set: Arc<DecisionSet>, eta: f64) -> Result<Self> {
        let max = crate::surrogates::max_learning_rate(params.grad_bound(), params.diameter());
        if !(eta > 0.0 && eta <= max) {
            return Err(Error::LearningRate { eta, max });
        }
        Ok(Self {
            iterate: Vector::zeros(set.dim()),
            eta,
            round: 1,
            grad_bound: params.grad_bound(),
            set,
        })
    }

    pub fn point(&self) -> &Vector {
        &self.iterate
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn step_size(&self) -> f64 {
        1.0 / (2.0 * (self.eta * self.grad_bound).powi(2) * self.round as f64)
    }

    pub fn step(&mut self, ctx: &SurrogateContext) -> Result<()> {
        check_eta(self.eta, ctx)?;
        let grad = ctx.s_grad(&self.iterate)?;
        let target = &self.iterate - grad * self.step_size();
        self.iterate = self.set.project(&target)?;
        self.round += 1;
        Ok(())
    }
}

/// Surrogate losses an expert reports for one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpertLosses {
    /// Surrogate at the expert's own iterate (drives the weight update).
    pub own: f64,
    /// Surrogate at the meta learner's play.
    pub at_play: f64,
}

#[derive(Debug, Clone)]
pub enum Expert {
    Convex(ConvexExpert),
    ExpConcave(OnsExpert),
    StronglyConvex(ScExpert),
}

impl Expert {
    pub fn kind(&self) -> ExpertKind {
        match self {
            Expert::Convex(_) => ExpertKind::Convex,
            Expert::ExpConcave(_) => ExpertKind::ExpConcave,
            Expert::StronglyConvex(_) => ExpertKind::StronglyConvex,
        }
    }

    pub fn eta(&self) -> f64 {
        match self {
            Expert::Convex(e) => e.eta(),
            Expert::ExpConcave(e) => e.eta(),
            Expert::StronglyConvex(e) => e.eta(),
        }
    }

    pub fn point(&self) -> &Vector {
        match self {
            Expert::Convex(e) => e.point(),
            Expert::ExpConcave(e) => e.point(),
            Expert::StronglyConvex(e) => e.point(),
        }
    }

    /// This expert's surrogate for the broadcast round.
    pub fn context(&self, params: &ProblemParams, b: &Broadcast) -> Result<SurrogateContext> {
        match self {
            Expert::Convex(_) => SurrogateContext::convex(
                b.play.clone(),
                b.grad.clone(),
                params.grad_bound(),
                params.diameter(),
                params.horizon(),
            ),
            _ => SurrogateContext::new(
                b.play.clone(),
                b.grad.clone(),
                self.eta(),
                params.grad_bound(),
                params.diameter(),
            ),
        }
    }

    pub fn step(&mut self, ctx: &SurrogateContext) -> Result<()> {
        match self {
            Expert::Convex(e) => e.step(ctx),
            Expert::ExpConcave(e) => e.step(ctx),
            Expert::StronglyConvex(e) => e.step(ctx),
        }
    }

    /// Evaluates the round's surrogate, then advances the iterate.
    pub fn observe(&mut self, params: &ProblemParams, b: &Broadcast) -> Result<ExpertLosses> {
        let ctx = self.context(params, b)?;
        let kind = self.kind();
        let losses = ExpertLosses {
            own: ctx.value(kind, self.point())?,
            at_play: ctx.value(kind, &b.play)?,
        };
        self.step(&ctx)?;
        Ok(losses)
    }
}

/// Surrogate regret of one expert against the best fixed point in hindsight.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertRegret {
    pub kind: ExpertKind,
    pub eta: f64,
    pub regret: f64,
    pub bound: f64,
    pub comparator: Vector,
    /// Gradient-mapping norm of the comparator search.
    pub comparator_residual: f64,
}

impl ExpertRegret {
    pub fn violated(&self) -> bool {
        self.regret > self.bound
    }

    /// Within 10% of the bound; worth a look given the log-base ambiguity.
    pub fn near_boundary(&self) -> bool {
        !self.violated() && self.regret > 0.9 * self.bound
    }
}

/// Projected gradient iterations used to locate the hindsight comparator.
pub const COMPARATOR_ITERATIONS: usize = 10_000;

/// `sum_t surrogate_t(x^e_t) - min_u sum_t surrogate_t(u)` with the matching
/// allowance (`1 + ln T`, `10 d ln T` or `3/4`).
///
/// `contexts[t]` is the expert's surrogate in round `t` and `points[t]` the
/// expert's iterate when that surrogate was revealed.
pub fn expert_regret_certificate(
    kind: ExpertKind,
    params: &ProblemParams,
    set: &DecisionSet,
    contexts: &[SurrogateContext],
    points: &[Vector],
) -> Result<ExpertRegret> {
    check_dim(contexts.len(), points.len())?;
    let d = set.dim();
    let mut total = crate::quadratic::Quadratic::zero(d);
    let mut incurred = 0.0;
    for (ctx, x) in contexts.iter().zip(points) {
        incurred += ctx.value(kind, x)?;
        total.add_assign(&ctx.quadratic(kind))?;
    }
    let best = total.minimize(set, COMPARATOR_ITERATIONS)?;
    let t = params.horizon();
    let bound = match kind {
        ExpertKind::Convex => bounds::EXPERT_CONVEX_BOUND,
        ExpertKind::ExpConcave => bounds::expert_exp_concave_bound(t, params.dim()),
        ExpertKind::StronglyConvex => bounds::expert_strongly_convex_bound(t),
    };
    Ok(ExpertRegret {
        kind,
        eta: contexts.first().map_or(0.0, |c| c.eta()),
        regret: incurred - best.value,
        bound,
        comparator: best.point,
        comparator_residual: best.gradient_mapping_norm,
    })
}
