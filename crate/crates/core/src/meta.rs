//! The learning-rate grid, prior weights and the tilted exponentially
//! weighted meta learner.
//!
//! Weights live in the log domain. Each round the play is the average of the
//! expert points weighted by `pi_e * eta_e`, and after the gradient arrives
//! every weight is multiplied by `exp(-loss_e)` and renormalized. The
//! normalizers multiply up to the potential `Phi_t`, which must never grow.

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{check_dim, Error, Result};
use crate::problem::ProblemParams;
use crate::surrogates::{convex_learning_rate, ExpertKind};
use crate::Vector;

/// Which expert families take part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Families {
    pub convex: bool,
    pub exp_concave: bool,
    pub strongly_convex: bool,
}

impl Families {
    pub const ALL: Families = Families {
        convex: true,
        exp_concave: true,
        strongly_convex: true,
    };

    pub const EXP_CONCAVE_ONLY: Families = Families {
        convex: false,
        exp_concave: true,
        strongly_convex: false,
    };

    fn includes(&self, kind: ExpertKind) -> bool {
        match kind {
            ExpertKind::Convex => self.convex,
            ExpertKind::ExpConcave => self.exp_concave,
            ExpertKind::StronglyConvex => self.strongly_convex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpertSlot {
    pub kind: ExpertKind,
    pub eta: f64,
    pub prior: f64,
    /// Position `i` on the geometric grid; `None` for the convex expert.
    pub level: Option<usize>,
}

impl ExpertSlot {
    pub fn label(&self) -> String {
        match self.level {
            Some(i) => format!("{}{i}", self.kind.label()),
            None => self.kind.label().to_string(),
        }
    }
}

/// Smallest `k` with `k >= log2(T) / 2`, computed exactly as `4^k >= T`.
pub fn grid_levels(horizon: usize) -> usize {
    let mut k = 0;
    let mut reach: u128 = 1;
    while reach < horizon as u128 {
        reach *= 4;
        k += 1;
    }
    k
}

/// Learning rates `eta_i = 2^-i / (5 D G)`, `i = 0..=k`, the convex rate and
/// the prior weight of every expert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertGrid {
    levels: usize,
    etas: Vec<f64>,
    eta_c: f64,
    normalization: f64,
    families: Families,
    slots: Vec<ExpertSlot>,
}

impl ExpertGrid {
    /// Every family: one convex expert plus `k + 1` ONS and `k + 1`
    /// strongly convex experts.
    pub fn build(params: &ProblemParams) -> Self {
        Self::with_families(params, Families::ALL)
    }

    /// A subset of the families, priors rescaled to sum to one.
    pub fn with_families(params: &ProblemParams, families: Families) -> Self {
        let k = grid_levels(params.horizon());
        let base = 1.0 / (5.0 * params.diameter() * params.grad_bound());
        let mut etas = Vec::with_capacity(k + 1);
        let mut eta = base;
        for _ in 0..=k {
            etas.push(eta);
            eta /= 2.0;
        }
        let eta_c = convex_learning_rate(params.grad_bound(), params.diameter(), params.horizon());
        let normalization = 1.0 + 1.0 / (1.0 + k as f64);

        let mut slots = Vec::new();
        if families.convex {
            slots.push(ExpertSlot {
                kind: ExpertKind::Convex,
                eta: eta_c,
                prior: 1.0 / 3.0,
                level: None,
            });
        }
        for kind in [ExpertKind::ExpConcave, ExpertKind::StronglyConvex] {
            if !families.includes(kind) {
                continue;
            }
            for (i, &eta) in etas.iter().enumerate() {
                let i1 = (i + 1) as f64;
                slots.push(ExpertSlot {
                    kind,
                    eta,
                    prior: normalization / (3.0 * i1 * (i1 + 1.0)),
                    level: Some(i),
                });
            }
        }
        if families != Families::ALL {
            let total: f64 = slots.iter().map(|s| s.prior).sum();
            for s in &mut slots {
                s.prior /= total;
            }
        }
        Self {
            levels: k,
            etas,
            eta_c,
            normalization,
            families,
            slots,
        }
    }

    /// `k = ceil(log2(T) / 2)`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn eta_c(&self) -> f64 {
        self.eta_c
    }

    /// The constant `C = 1 + 1 / (1 + k)`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn families(&self) -> Families {
        self.families
    }

    pub fn slots(&self) -> &[ExpertSlot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn prior_sum(&self) -> f64 {
        self.slots.iter().map(|s| s.prior).sum()
    }
}

/// `log sum exp(v)`, shifted by the maximum.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// `sum_e w_e eta_e x_e / sum_e w_e eta_e` with `w = exp(log_weights)`.
pub fn tilted_average(log_weights: &[f64], etas: &[f64], points: &[Vector]) -> Result<Vector> {
    check_dim(log_weights.len(), points.len())?;
    check_dim(log_weights.len(), etas.len())?;
    let first = points
        .first()
        .ok_or(Error::Invariant("no experts".into()))?;
    let m = log_weights
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut num = Vector::zeros(first.len());
    let mut den = 0.0;
    for ((lw, eta), x) in log_weights.iter().zip(etas).zip(points) {
        check_dim(first.len(), x.len())?;
        let w = (lw - m).exp() * eta;
        num.axpy(w, x, 1.0);
        den += w;
    }
    if !(den > 0.0 && den.is_finite()) {
        return Err(Error::Invariant(format!(
            "degenerate tilted denominator {den}"
        )));
    }
    Ok(num / den)
}

/// Log-domain weights, the current play and the running `log Phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaState {
    log_weights: Vec<f64>,
    last_play: Vector,
    log_potential: f64,
    rounds: usize,
}

impl MetaState {
    pub fn new(grid: &ExpertGrid, dim: usize) -> Self {
        Self {
            log_weights: grid.slots().iter().map(|s| s.prior.ln()).collect(),
            last_play: Vector::zeros(dim),
            log_potential: 0.0,
            rounds: 0,
        }
    }

    /// Starts from explicit log weights (normalized on entry).
    pub fn from_log_weights(log_weights: Vec<f64>, dim: usize) -> Result<Self> {
        if log_weights.is_empty()
            || log_weights
                .iter()
                .any(|v| v.is_nan() || *v == f64::INFINITY)
        {
            return Err(Error::NonFinite("log weight"));
        }
        let z = log_sum_exp(&log_weights);
        Ok(Self {
            log_weights: log_weights.iter().map(|v| v - z).collect(),
            last_play: Vector::zeros(dim),
            log_potential: 0.0,
            rounds: 0,
        })
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|v| v.exp()).collect()
    }

    pub fn last_play(&self) -> &Vector {
        &self.last_play
    }

    /// `log Phi_t`; zero before the first update.
    pub fn log_potential(&self) -> f64 {
        self.log_potential
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Tilted average of the expert points; stored as the current play.
    pub fn aggregate_play(&mut self, grid: &ExpertGrid, points: &[Vector]) -> Result<&Vector> {
        check_dim(grid.len(), points.len())?;
        let etas: Vec<f64> = grid.slots().iter().map(|s| s.eta).collect();
        self.last_play = tilted_average(&self.log_weights, &etas, points)?;
        Ok(&self.last_play)
    }

    /// Multiplies each weight by `exp(-loss)` and renormalizes.
    ///
    /// Returns the round's log normalizer `log Phi_t`-increment, which the
    /// exponential sandwich keeps at or below zero.
    pub fn update_weights(&mut self, losses: &[f64]) -> Result<f64> {
        check_dim(self.log_weights.len(), losses.len())?;
        if losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("surrogate loss"));
        }
        let shifted: Vec<f64> = self
            .log_weights
            .iter()
            .zip(losses)
            .map(|(w, l)| w - l)
            .collect();
        let z = log_sum_exp(&shifted);
        for (w, s) in self.log_weights.iter_mut().zip(shifted) {
            *w = s - z;
        }
        self.log_potential += z;
        self.rounds += 1;
        Ok(z)
    }
}

/// Meta regret of one expert: surrogate at the plays minus surrogate at the
/// expert's own points, summed over rounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaRegretEntry {
    pub slot: ExpertSlot,
    pub regret: f64,
    pub bound: f64,
}

impl MetaRegretEntry {
    pub fn violated(&self) -> bool {
        self.regret > self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaRegretReport {
    pub horizon: usize,
    pub entries: Vec<MetaRegretEntry>,
}

impl MetaRegretReport {
    pub fn violations(&self) -> impl Iterator<Item = &MetaRegretEntry> {
        self.entries.iter().filter(|e| e.violated())
    }

    pub fn is_clean(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Checks every expert's meta regret against `2 ln(sqrt(3)(log2(T)/2 + 3))`
/// (grid experts) or `ln 3` (convex expert).
///
/// `at_play[t][e]` and `own[t][e]` are expert `e`'s surrogate in round `t`
/// evaluated at the play and at its own point.
pub fn meta_regret_certificate(
    grid: &ExpertGrid,
    horizon: usize,
    at_play: &[Vec<f64>],
    own: &[Vec<f64>],
) -> Result<MetaRegretReport> {
    check_dim(at_play.len(), own.len())?;
    let mut totals = vec![0.0; grid.len()];
    for (p, o) in at_play.iter().zip(own) {
        check_dim(grid.len(), p.len())?;
        check_dim(grid.len(), o.len())?;
        for (acc, (lp, lo)) in totals.iter_mut().zip(p.iter().zip(o)) {
            *acc += lp - lo;
        }
    }
    let entries = grid
        .slots()
        .iter()
        .zip(totals)
        .map(|(slot, regret)| MetaRegretEntry {
            slot: *slot,
            regret,
            bound: match slot.kind {
                ExpertKind::Convex => bounds::meta_convex_bound(),
                _ => bounds::meta_grid_bound(horizon),
            },
        })
        .collect();
    Ok(MetaRegretReport { horizon, entries })
}
