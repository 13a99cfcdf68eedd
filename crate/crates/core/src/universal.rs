//! Learners behind one predict/observe interface: Maler, the ONS-only
//! ensemble, plain OGD in both step regimes and standalone ONS. Also the
//! regret diagnostics and the certificates evaluated on recorded rounds.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{check_dim, Error, Result};
use crate::exec::Execution;
use crate::experts::{
    expert_regret_certificate, Broadcast, ConvexExpert, Expert, ExpertRegret, OnlineNewton,
    OnsExpert, ScExpert,
};
use crate::geometry::DecisionSet;
use crate::meta::{meta_regret_certificate, ExpertGrid, Families, MetaRegretReport, MetaState};
use crate::problem::{CurvatureClass, LossOracle, ProblemParams};
use crate::surrogates::{ExpertKind, SurrogateContext};
use crate::Vector;

/// Slack on the potential checks.
pub const POTENTIAL_SLACK: f64 = 1e-9;

/// Per-round state of the meta learner, kept in the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    /// Expert iterates the play was aggregated from.
    pub expert_points: Vec<Vec<f64>>,
    /// Each expert's surrogate at its own iterate.
    pub own_losses: Vec<f64>,
    /// Each expert's surrogate at the play.
    pub play_losses: Vec<f64>,
    /// Log weights after the update.
    pub log_weights: Vec<f64>,
    pub log_normalizer: f64,
    pub log_potential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub round: usize,
    pub play: Vec<f64>,
    pub gradient: Vec<f64>,
    pub meta: Option<MetaRecord>,
}

impl RoundRecord {
    pub fn play_vector(&self) -> Vector {
        Vector::from_column_slice(&self.play)
    }

    pub fn gradient_vector(&self) -> Vector {
        Vector::from_column_slice(&self.gradient)
    }
}

/// An online learner: `predict` then `observe`, once per round.
pub trait Learner: Send {
    fn name(&self) -> &'static str;

    fn params(&self) -> &ProblemParams;

    /// The current decision. Repeated calls before `observe` return the
    /// same vector.
    fn predict(&mut self) -> Result<Vector>;

    /// Feeds the gradient at the last prediction and advances one round.
    fn observe(&mut self, gradient: &Vector) -> Result<RoundRecord>;

    fn rounds_completed(&self) -> usize;

    /// Running `log Phi` for learners that have one.
    fn log_potential(&self) -> Option<f64> {
        None
    }
}

/// One full round against a loss oracle.
pub fn play_round<L: Learner + ?Sized>(
    learner: &mut L,
    oracle: &dyn LossOracle,
) -> Result<RoundRecord> {
    let x = learner.predict()?;
    let g = oracle.gradient(&x);
    learner.observe(&g)
}

/// Predict/observe alternation and horizon tracking.
#[derive(Debug, Clone)]
struct Protocol {
    horizon: usize,
    completed: usize,
    pending: Option<Vector>,
}

impl Protocol {
    fn new(horizon: usize) -> Self {
        Self {
            horizon,
            completed: 0,
            pending: None,
        }
    }

    fn cached(&self) -> Result<Option<Vector>> {
        if self.pending.is_some() {
            return Ok(self.pending.clone());
        }
        if self.completed >= self.horizon {
            return Err(Error::Protocol("horizon exhausted"));
        }
        Ok(None)
    }

    fn begin_observe(&mut self) -> Result<(usize, Vector)> {
        let play = self
            .pending
            .take()
            .ok_or(Error::Protocol("observe without a pending prediction"))?;
        self.completed += 1;
        Ok((self.completed, play))
    }
}

/// Names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LearnerKind {
    #[serde(rename = "maler")]
    Maler,
    #[serde(rename = "metagrad")]
    MetaGrad,
    #[serde(rename = "ogd-convex")]
    OgdConvex,
    #[serde(rename = "ogd-sc")]
    OgdStronglyConvex,
    #[serde(rename = "ons")]
    Ons,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 5] = [
        LearnerKind::Maler,
        LearnerKind::MetaGrad,
        LearnerKind::OgdConvex,
        LearnerKind::OgdStronglyConvex,
        LearnerKind::Ons,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Maler => "maler",
            LearnerKind::MetaGrad => "metagrad",
            LearnerKind::OgdConvex => "ogd-convex",
            LearnerKind::OgdStronglyConvex => "ogd-sc",
            LearnerKind::Ons => "ons",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::UnknownLearner(s.to_string()))
    }
}

/// Builds a learner by kind. Baselines that need a curvature constant read
/// it from `curvature`; `execution` applies to the expert ensembles.
pub fn build_learner(
    kind: LearnerKind,
    params: &ProblemParams,
    set: Arc<DecisionSet>,
    curvature: CurvatureClass,
    execution: Execution,
) -> Result<Box<dyn Learner>> {
    Ok(match kind {
        LearnerKind::Maler => Box::new(MalerLearner::new(params, set)?.with_execution(execution)),
        LearnerKind::MetaGrad => {
            Box::new(MalerLearner::metagrad(params, set)?.with_execution(execution))
        }
        LearnerKind::OgdConvex => Box::new(OgdLearner::convex(params, set)?),
        LearnerKind::OgdStronglyConvex => match curvature {
            CurvatureClass::StronglyConvex { modulus } => {
                Box::new(OgdLearner::strongly_convex(params, set, modulus)?)
            }
            _ => {
                return Err(Error::InvalidParameter {
                    name: "curvature",
                    reason: "ogd-sc needs a strongly convex task".into(),
                })
            }
        },
        LearnerKind::Ons => {
            let g = params.grad_bound();
            let d = params.diameter();
            let alpha = match curvature {
                CurvatureClass::ExpConcave { alpha } => alpha,
                CurvatureClass::StronglyConvex { modulus } => modulus / (g * g),
                CurvatureClass::Convex => 1.0 / (4.0 * g * d),
            };
            Box::new(OnsLearner::new(params, set, ons_beta(alpha, g, d))?)
        }
    })
}

/// `beta = min(alpha, 1 / (4 G D)) / 2`.
pub fn ons_beta(alpha: f64, grad_bound: f64, diameter: f64) -> f64 {
    0.5 * alpha.min(1.0 / (4.0 * grad_bound * diameter))
}

/// The full ensemble: meta learner over convex, ONS and strongly convex
/// experts.
#[derive(Debug, Clone)]
pub struct MalerLearner {
    name: &'static str,
    params: ProblemParams,
    set: Arc<DecisionSet>,
    grid: ExpertGrid,
    experts: Vec<Expert>,
    meta: MetaState,
    execution: Execution,
    protocol: Protocol,
}

impl MalerLearner {
    pub fn new(params: &ProblemParams, set: Arc<DecisionSet>) -> Result<Self> {
        Self::with_families(params, set, Families::ALL)
    }

    /// The meta learner over ONS experts only, priors renormalized.
    pub fn metagrad(params: &ProblemParams, set: Arc<DecisionSet>) -> Result<Self> {
        let mut l = Self::with_families(params, set, Families::EXP_CONCAVE_ONLY)?;
        l.name = "metagrad";
        Ok(l)
    }

    pub fn with_families(
        params: &ProblemParams,
        set: Arc<DecisionSet>,
        families: Families,
    ) -> Result<Self> {
        params.check_set(&set)?;
        let grid = ExpertGrid::with_families(params, families);
        if grid.is_empty() {
            return Err(Error::InvalidParameter {
                name: "families",
                reason: "no expert family selected".into(),
            });
        }
        let experts = grid
            .slots()
            .iter()
            .map(|slot| {
                Ok(match slot.kind {
                    ExpertKind::Convex => Expert::Convex(ConvexExpert::new(params, set.clone())),
                    ExpertKind::ExpConcave => {
                        Expert::ExpConcave(OnsExpert::new(params, set.clone(), slot.eta)?)
                    }
                    ExpertKind::StronglyConvex => {
                        Expert::StronglyConvex(ScExpert::new(params, set.clone(), slot.eta)?)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: "maler",
            meta: MetaState::new(&grid, params.dim()),
            params: *params,
            set,
            grid,
            experts,
            execution: Execution::default(),
            protocol: Protocol::new(params.horizon()),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    pub fn grid(&self) -> &ExpertGrid {
        &self.grid
    }

    pub fn experts(&self) -> &[Expert] {
        &self.experts
    }

    pub fn meta(&self) -> &MetaState {
        &self.meta
    }

    pub fn set(&self) -> &Arc<DecisionSet> {
        &self.set
    }

    /// Predicts, queries the oracle at the play and observes.
    pub fn maler_round(&mut self, oracle: &dyn LossOracle) -> Result<RoundRecord> {
        play_round(self, oracle)
    }
}

impl Learner for MalerLearner {
    fn name(&self) -> &'static str {
        self.name
    }

    fn params(&self) -> &ProblemParams {
        &self.params
    }

    fn predict(&mut self) -> Result<Vector> {
        if let Some(x) = self.protocol.cached()? {
            return Ok(x);
        }
        let points: Vec<Vector> = self.experts.iter().map(|e| e.point().clone()).collect();
        let play = self.meta.aggregate_play(&self.grid, &points)?.clone();
        self.protocol.pending = Some(play.clone());
        Ok(play)
    }

    fn observe(&mut self, gradient: &Vector) -> Result<RoundRecord> {
        if self.protocol.pending.is_none() {
            return Err(Error::Protocol("observe without a pending prediction"));
        }
        self.params
            .check_gradient(self.protocol.completed + 1, gradient)?;
        let (round, play) = self.protocol.begin_observe()?;
        let expert_points: Vec<Vec<f64>> = self
            .experts
            .iter()
            .map(|e| e.point().as_slice().to_vec())
            .collect();
        let broadcast = Broadcast {
            play: play.clone(),
            grad: gradient.clone(),
        };
        let params = self.params;
        let losses = self
            .execution
            .try_map_mut(&mut self.experts, |e| e.observe(&params, &broadcast))?;
        let own: Vec<f64> = losses.iter().map(|l| l.own).collect();
        let log_normalizer = self.meta.update_weights(&own)?;
        Ok(RoundRecord {
            round,
            play: play.as_slice().to_vec(),
            gradient: gradient.as_slice().to_vec(),
            meta: Some(MetaRecord {
                expert_points,
                play_losses: losses.iter().map(|l| l.at_play).collect(),
                own_losses: own,
                log_weights: self.meta.log_weights().to_vec(),
                log_normalizer,
                log_potential: self.meta.log_potential(),
            }),
        })
    }

    fn rounds_completed(&self) -> usize {
        self.protocol.completed
    }

    fn log_potential(&self) -> Option<f64> {
        Some(self.meta.log_potential())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OgdMode {
    /// Step `D / (G sqrt(t))`.
    Convex,
    /// Step `1 / (lambda t)`.
    StronglyConvex { modulus: f64 },
}

/// Projected online gradient descent on the true gradients.
#[derive(Debug, Clone)]
pub struct OgdLearner {
    params: ProblemParams,
    set: Arc<DecisionSet>,
    mode: OgdMode,
    iterate: Vector,
    protocol: Protocol,
}

impl OgdLearner {
    pub fn convex(params: &ProblemParams, set: Arc<DecisionSet>) -> Result<Self> {
        Self::new(params, set, OgdMode::Convex)
    }

    pub fn strongly_convex(
        params: &ProblemParams,
        set: Arc<DecisionSet>,
        modulus: f64,
    ) -> Result<Self> {
        if !(modulus > 0.0 && modulus.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be positive, got {modulus}"),
            });
        }
        Self::new(params, set, OgdMode::StronglyConvex { modulus })
    }

    fn new(params: &ProblemParams, set: Arc<DecisionSet>, mode: OgdMode) -> Result<Self> {
        check_dim(params.dim(), set.dim())?;
        Ok(Self {
            params: *params,
            iterate: Vector::zeros(set.dim()),
            set,
            mode,
            protocol: Protocol::new(params.horizon()),
        })
    }

    pub fn mode(&self) -> OgdMode {
        self.mode
    }

    /// Step size used in 1-based round `t`.
    pub fn step_size(&self, t: usize) -> f64 {
        match self.mode {
            OgdMode::Convex => {
                self.params.diameter() / (self.params.grad_bound() * (t as f64).sqrt())
            }
            OgdMode::StronglyConvex { modulus } => 1.0 / (modulus * t as f64),
        }
    }
}

impl Learner for OgdLearner {
    fn name(&self) -> &'static str {
        match self.mode {
            OgdMode::Convex => "ogd-convex",
            OgdMode::StronglyConvex { .. } => "ogd-sc",
        }
    }

    fn params(&self) -> &ProblemParams {
        &self.params
    }

    fn predict(&mut self) -> Result<Vector> {
        if let Some(x) = self.protocol.cached()? {
            return Ok(x);
        }
        self.protocol.pending = Some(self.iterate.clone());
        Ok(self.iterate.clone())
    }

    fn observe(&mut self, gradient: &Vector) -> Result<RoundRecord> {
        if self.protocol.pending.is_none() {
            return Err(Error::Protocol("observe without a pending prediction"));
        }
        self.params
            .check_gradient(self.protocol.completed + 1, gradient)?;
        let (round, play) = self.protocol.begin_observe()?;
        let target = &play - gradient * self.step_size(round);
        self.iterate = self.set.project(&target)?;
        Ok(RoundRecord {
            round,
            play: play.as_slice().to_vec(),
            gradient: gradient.as_slice().to_vec(),
            meta: None,
        })
    }

    fn rounds_completed(&self) -> usize {
        self.protocol.completed
    }
}

/// Online Newton step on the true gradients.
#[derive(Debug, Clone)]
pub struct OnsLearner {
    params: ProblemParams,
    newton: OnlineNewton,
    protocol: Protocol,
}

impl OnsLearner {
    pub fn new(params: &ProblemParams, set: Arc<DecisionSet>, beta: f64) -> Result<Self> {
        check_dim(params.dim(), set.dim())?;
        Ok(Self {
            params: *params,
            newton: OnlineNewton::new(set, beta, params.diameter())?,
            protocol: Protocol::new(params.horizon()),
        })
    }

    pub fn newton(&self) -> &OnlineNewton {
        &self.newton
    }
}

impl Learner for OnsLearner {
    fn name(&self) -> &'static str {
        "ons"
    }

    fn params(&self) -> &ProblemParams {
        &self.params
    }

    fn predict(&mut self) -> Result<Vector> {
        if let Some(x) = self.protocol.cached()? {
            return Ok(x);
        }
        let x = self.newton.point().clone();
        self.protocol.pending = Some(x.clone());
        Ok(x)
    }

    fn observe(&mut self, gradient: &Vector) -> Result<RoundRecord> {
        if self.protocol.pending.is_none() {
            return Err(Error::Protocol("observe without a pending prediction"));
        }
        self.params
            .check_gradient(self.protocol.completed + 1, gradient)?;
        let (round, play) = self.protocol.begin_observe()?;
        self.newton.update(gradient)?;
        Ok(RoundRecord {
            round,
            play: play.as_slice().to_vec(),
            gradient: gradient.as_slice().to_vec(),
            meta: None,
        })
    }

    fn rounds_completed(&self) -> usize {
        self.protocol.completed
    }
}

/// Regret together with the two variation terms at a fixed comparator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretDiagnostics {
    /// `G^2 sum ||x_t - x*||^2`.
    pub v_s: f64,
    /// `sum ((x_t - x*)^T g_t)^2`.
    pub v_ell: f64,
    /// `sum g_t^T (x_t - x*)`, which upper bounds the true regret.
    pub linearized: f64,
    /// `sum f_t(x_t) - sum f_t(x*)`.
    pub regret: f64,
}

impl RegretDiagnostics {
    /// Adds one round; `loss_gap` is `f_t(x_t) - f_t(x*)`.
    pub fn accumulate(
        &mut self,
        grad_bound: f64,
        play: &Vector,
        gradient: &Vector,
        comparator: &Vector,
        loss_gap: f64,
    ) {
        let diff = play - comparator;
        let inner = gradient.dot(&diff);
        self.v_s += grad_bound * grad_bound * diff.norm_squared();
        self.v_ell += inner * inner;
        self.linearized += inner;
        self.regret += loss_gap;
    }
}

/// One evaluated right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
        }
    }

    pub fn holds(&self) -> bool {
        self.value <= self.bound
    }
}

/// The three simultaneous regret bounds at the offline comparator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretBoundsReport {
    pub diagnostics: RegretDiagnostics,
    pub checks: Vec<BoundCheck>,
}

impl RegretBoundsReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(BoundCheck::holds)
    }
}

/// Checks the measured regret against `2(1+ln3)GD sqrt(T)`,
/// `3 sqrt(V_ell B) + 10GDB` and `3 sqrt(V_s A) + 10GDA`.
pub fn regret_bounds_certificate(
    params: &ProblemParams,
    diagnostics: RegretDiagnostics,
) -> RegretBoundsReport {
    let (g, d, t) = (params.grad_bound(), params.diameter(), params.horizon());
    let r = diagnostics.regret;
    RegretBoundsReport {
        checks: vec![
            BoundCheck::new("convex", r, bounds::worst_case_bound(g, d, t)),
            BoundCheck::new(
                "exp_concave",
                r,
                bounds::exp_concave_bound(diagnostics.v_ell, g, d, t, params.dim()),
            ),
            BoundCheck::new(
                "strongly_convex",
                r,
                bounds::strongly_convex_bound(diagnostics.v_s, g, d, t),
            ),
        ],
        diagnostics,
    }
}

/// The curvature-specific rate: `(10GD + 9G^2/(2 lambda)) A` for strongly
/// convex losses, `(10GD + 9/(2 beta)) B` for exp-concave ones.
pub fn rate_certificate(
    params: &ProblemParams,
    curvature: CurvatureClass,
    regret: f64,
) -> Option<BoundCheck> {
    let (g, d, t) = (params.grad_bound(), params.diameter(), params.horizon());
    match curvature {
        CurvatureClass::Convex => None,
        CurvatureClass::StronglyConvex { modulus } => Some(BoundCheck::new(
            "strongly_convex_rate",
            regret,
            bounds::strongly_convex_rate_bound(g, d, modulus, t),
        )),
        CurvatureClass::ExpConcave { alpha } => Some(BoundCheck::new(
            "exp_concave_rate",
            regret,
            bounds::exp_concave_rate_bound(g, d, alpha, t, params.dim()),
        )),
    }
}

/// Potential never rises and never exceeds zero, up to [`POTENTIAL_SLACK`].
pub fn potential_violations(records: &[RoundRecord]) -> Vec<usize> {
    let mut prev = 0.0;
    let mut bad = Vec::new();
    for r in records {
        if let Some(m) = &r.meta {
            if m.log_potential > prev + POTENTIAL_SLACK || m.log_potential > POTENTIAL_SLACK {
                bad.push(r.round);
            }
            prev = m.log_potential;
        }
    }
    bad
}

fn meta_records(records: &[RoundRecord]) -> Result<Vec<&MetaRecord>> {
    records
        .iter()
        .map(|r| {
            r.meta
                .as_ref()
                .ok_or_else(|| Error::Invariant(format!("round {} has no meta record", r.round)))
        })
        .collect()
}

/// Meta regret of every expert from recorded surrogate losses.
pub fn meta_certificate(grid: &ExpertGrid, records: &[RoundRecord]) -> Result<MetaRegretReport> {
    let metas = meta_records(records)?;
    let at_play: Vec<Vec<f64>> = metas.iter().map(|m| m.play_losses.clone()).collect();
    let own: Vec<Vec<f64>> = metas.iter().map(|m| m.own_losses.clone()).collect();
    meta_regret_certificate(grid, records.len(), &at_play, &own)
}

/// Surrogate regret of every expert against its own hindsight comparator.
pub fn expert_certificates(
    params: &ProblemParams,
    set: &DecisionSet,
    grid: &ExpertGrid,
    records: &[RoundRecord],
    execution: Execution,
) -> Result<Vec<ExpertRegret>> {
    let metas = meta_records(records)?;
    let slots: Vec<(usize, _)> = grid.slots().iter().copied().enumerate().collect();
    execution
        .map(&slots, |(e, slot)| {
            let mut contexts = Vec::with_capacity(records.len());
            let mut points = Vec::with_capacity(records.len());
            for (r, m) in records.iter().zip(&metas) {
                let play = r.play_vector();
                let grad = r.gradient_vector();
                let ctx = match slot.kind {
                    ExpertKind::Convex => SurrogateContext::convex(
                        play,
                        grad,
                        params.grad_bound(),
                        params.diameter(),
                        params.horizon(),
                    )?,
                    _ => SurrogateContext::new(
                        play,
                        grad,
                        slot.eta,
                        params.grad_bound(),
                        params.diameter(),
                    )?,
                };
                contexts.push(ctx);
                let p = m
                    .expert_points
                    .get(*e)
                    .ok_or_else(|| Error::Invariant("missing expert point".into()))?;
                points.push(Vector::from_column_slice(p));
            }
            expert_regret_certificate(slot.kind, params, set, &contexts, &points)
        })
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn ball_setup(horizon: usize, dim: usize) -> (ProblemParams, Arc<DecisionSet>) {
        let set = Arc::new(DecisionSet::centered_ball(dim, 0.5).unwrap());
        (ProblemParams::for_set(horizon, 1.0, &set).unwrap(), set)
    }

    #[test]
    fn expert_multiset_matches_grid() {
        let (params, set) = ball_setup(200, 3);
        let l = MalerLearner::new(&params, set.clone()).unwrap();
        assert_eq!(l.experts().len(), 11);
        let count = |k| l.experts().iter().filter(|e| e.kind() == k).count();
        assert_eq!(count(ExpertKind::Convex), 1);
        assert_eq!(count(ExpertKind::ExpConcave), 5);
        assert_eq!(count(ExpertKind::StronglyConvex), 5);
        let mg = MalerLearner::metagrad(&params, set).unwrap();
        assert_eq!(mg.experts().len(), 5);
        assert_eq!(mg.name(), "metagrad");
    }

    #[test]
    fn zero_gradients_stay_at_origin() {
        let (params, set) = ball_setup(20, 2);
        let mut l = MalerLearner::new(&params, set).unwrap();
        for _ in 0..20 {
            let x = l.predict().unwrap();
            assert_eq!(x, dvector![0.0, 0.0]);
            l.observe(&dvector![0.0, 0.0]).unwrap();
        }
        assert!(l.predict().is_err());
    }

    #[test]
    fn predict_is_idempotent_and_observe_needs_predict() {
        let (params, set) = ball_setup(5, 2);
        let mut l = MalerLearner::new(&params, set).unwrap();
        assert!(matches!(
            l.observe(&dvector![1.0, 0.0]),
            Err(Error::Protocol(_))
        ));
        let a = l.predict().unwrap();
        let b = l.predict().unwrap();
        assert_eq!(a, b);
        l.observe(&dvector![1.0, 0.0]).unwrap();
        assert!(matches!(
            l.observe(&dvector![1.0, 0.0]),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn oversized_gradient_aborts() {
        let (params, set) = ball_setup(5, 2);
        let mut l = MalerLearner::new(&params, set).unwrap();
        l.predict().unwrap();
        assert!(matches!(
            l.observe(&dvector![2.0, 0.0]),
            Err(Error::GradientBound { round: 1, .. })
        ));
    }

    #[test]
    fn ogd_step_sizes() {
        let (params, set) = ball_setup(10, 2);
        let c = OgdLearner::convex(&params, set.clone()).unwrap();
        assert_eq!(c.step_size(1), 1.0);
        let s = OgdLearner::strongly_convex(&params, set.clone(), 2.0).unwrap();
        assert_eq!(s.step_size(4), 0.125);
        assert!(OgdLearner::strongly_convex(&params, set, 0.0).is_err());
    }

    #[test]
    fn ogd_zero_gradient_fixed() {
        let (params, set) = ball_setup(3, 2);
        let mut l = OgdLearner::convex(&params, set).unwrap();
        for _ in 0..3 {
            assert_eq!(l.predict().unwrap(), dvector![0.0, 0.0]);
            l.observe(&dvector![0.0, 0.0]).unwrap();
        }
    }

    #[test]
    fn learner_names_round_trip() {
        for k in LearnerKind::ALL {
            assert_eq!(k.name().parse::<LearnerKind>().unwrap(), k);
        }
        assert!("adam".parse::<LearnerKind>().is_err());
    }

    #[test]
    fn build_learner_needs_curvature_for_sc() {
        let (params, set) = ball_setup(3, 2);
        assert!(build_learner(
            LearnerKind::OgdStronglyConvex,
            &params,
            set.clone(),
            CurvatureClass::Convex,
            Execution::Sequential
        )
        .is_err());
        let l = build_learner(
            LearnerKind::OgdStronglyConvex,
            &params,
            set,
            CurvatureClass::StronglyConvex { modulus: 1.0 },
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(l.name(), "ogd-sc");
    }

    #[test]
    fn bound_constants() {
        let params = ProblemParams::new(100, 2, 1.0, 1.0).unwrap();
        let r = regret_bounds_certificate(&params, RegretDiagnostics::default());
        assert!((r.checks[0].bound - 41.9722).abs() < 1e-3);
        assert!(r.holds());
    }

    #[test]
    fn diagnostics_accumulate() {
        let mut d = RegretDiagnostics::default();
        d.accumulate(
            2.0,
            &dvector![1.0, 0.0],
            &dvector![0.0, 2.0],
            &dvector![0.0, 1.0],
            0.5,
        );
        assert_eq!(d.v_s, 4.0 * 2.0);
        assert_eq!(d.v_ell, 4.0);
        assert_eq!(d.linearized, -2.0);
        assert_eq!(d.regret, 0.5);
    }
}
