//! Offline comparator: an approximate minimizer of the summed losses over
//! the decision set.

use maler_core::quadratic::Quadratic;
use maler_core::{DecisionSet, Execution, LossOracle, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tasks::uniform_in_ball;

pub const COMPARATOR_ITERATIONS: usize = 10_000;

/// Gradient-mapping norm above which the search is reported as unconverged.
pub const MAPPING_TOL: f64 = 1e-4;

const SMOOTHNESS_SAMPLES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub point: Vec<f64>,
    pub value: f64,
    /// Distance between the grid minimizer and the descent result.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparator {
    pub point: Vec<f64>,
    /// Summed loss at `point`.
    pub value: f64,
    pub gradient_mapping_norm: f64,
    pub smoothness: f64,
    pub iterations: usize,
    pub quadratic: bool,
    pub grid: Option<GridCheck>,
}

impl Comparator {
    pub fn vector(&self) -> Vector {
        Vector::from_column_slice(&self.point)
    }

    pub fn converged(&self) -> bool {
        self.gradient_mapping_norm <= MAPPING_TOL
    }
}

/// Summed value and gradient. Terms are added in input order in both modes,
/// so the result does not depend on the execution.
pub fn total<L: LossOracle>(losses: &[L], x: &Vector, execution: Execution) -> (f64, Vector) {
    let terms = execution.map(losses, |l| l.value_and_gradient(x));
    terms
        .into_iter()
        .fold((0.0, Vector::zeros(x.len())), |mut a, b| {
            a.0 += b.0;
            a.1 += b.1;
            a
        })
}

pub fn total_value<L: LossOracle>(losses: &[L], x: &Vector) -> f64 {
    losses.iter().map(|l| l.value(x)).sum()
}

/// Minimizes `sum_t f_t` over the set.
///
/// Exact quadratic losses are summed and minimized in closed form per
/// iteration; otherwise projected gradient descent runs with step
/// `1/(L sqrt(k))`, where `L` is estimated from gradient differences at
/// random feasible pairs. The best iterate is kept. Problems with `d <= 2`
/// on a ball are cross-checked by a coarse-to-fine grid.
pub fn offline_comparator<L: LossOracle>(
    losses: &[L],
    set: &DecisionSet,
    execution: Execution,
) -> Result<Comparator> {
    let d = set.dim();
    let quadratics: Option<Vec<Quadratic>> = losses.iter().map(|l| l.quadratic()).collect();
    let mut out = match quadratics {
        Some(qs) if !qs.is_empty() => {
            let mut sum = Quadratic::zero(d);
            for q in &qs {
                sum.add_assign(q)?;
            }
            let m = sum.minimize(set, COMPARATOR_ITERATIONS)?;
            Comparator {
                value: total_value(losses, &m.point),
                point: m.point.as_slice().to_vec(),
                gradient_mapping_norm: m.gradient_mapping_norm,
                smoothness: sum.smoothness(),
                iterations: m.iterations,
                quadratic: true,
                grid: None,
            }
        }
        _ => descend(losses, set, execution)?,
    };
    if d <= 2 {
        if let Some((c, r)) = set.as_ball() {
            let (p, v) = grid_search(losses, c, r);
            out.grid = Some(GridCheck {
                distance: (&p - out.vector()).norm(),
                point: p.as_slice().to_vec(),
                value: v,
            });
        }
    }
    Ok(out)
}

fn descend<L: LossOracle>(
    losses: &[L],
    set: &DecisionSet,
    execution: Execution,
) -> Result<Comparator> {
    let d = set.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (center, radius) = set
        .as_ball()
        .map(|(c, r)| (c.clone(), r))
        .unwrap_or_else(|| (Vector::zeros(d), set.diameter() / 2.0));
    let mut smooth: f64 = 0.0;
    for _ in 0..SMOOTHNESS_SAMPLES {
        let a = set.project(&(&center + uniform_in_ball(&mut rng, d, radius)))?;
        let b = set.project(&(&center + uniform_in_ball(&mut rng, d, radius)))?;
        let gap = (&a - &b).norm();
        if gap > 0.0 {
            let ga = total(losses, &a, execution).1;
            let gb = total(losses, &b, execution).1;
            smooth = smooth.max((ga - gb).norm() / gap);
        }
    }
    let mut x = Vector::zeros(d);
    let (mut fx, mut gx) = total(losses, &x, execution);
    if smooth <= 1e-12 {
        smooth = (gx.norm() / set.diameter()).max(f64::MIN_POSITIVE);
    }
    let mut best = (fx, x.clone(), gx.clone());
    for k in 1..=COMPARATOR_ITERATIONS {
        let step = 1.0 / (smooth * (k as f64).sqrt());
        x = set.project(&(&x - &gx * step))?;
        (fx, gx) = total(losses, &x, execution);
        if fx < best.0 {
            best = (fx, x.clone(), gx.clone());
        }
    }
    let (value, point, grad) = best;
    let mapped = set.project(&(&point - &grad / smooth))?;
    Ok(Comparator {
        gradient_mapping_norm: smooth * (&point - mapped).norm(),
        point: point.as_slice().to_vec(),
        value,
        smoothness: smooth,
        iterations: COMPARATOR_ITERATIONS,
        quadratic: false,
        grid: None,
    })
}

/// Grid at spacing `1e-2` over the ball, then `1e-3` around the best cell.
fn grid_search<L: LossOracle>(losses: &[L], center: &Vector, radius: f64) -> (Vector, f64) {
    let d = center.len();
    let mut best = (center.clone(), total_value(losses, center));
    let scan = |lo: &Vector, hi: &Vector, h: f64, best: &mut (Vector, f64)| {
        let steps: Vec<usize> = (0..d)
            .map(|i| ((hi[i] - lo[i]) / h).round() as usize)
            .collect();
        let mut idx = vec![0usize; d];
        loop {
            let p = Vector::from_fn(d, |i, _| lo[i] + idx[i] as f64 * h);
            if (&p - center).norm() <= radius {
                let v = total_value(losses, &p);
                if v < best.1 {
                    *best = (p, v);
                }
            }
            let mut i = 0;
            loop {
                if i == d {
                    return;
                }
                idx[i] += 1;
                if idx[i] <= steps[i] {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    };
    let lo = center.add_scalar(-radius);
    let hi = center.add_scalar(radius);
    scan(&lo, &hi, 1e-2, &mut best);
    let around = best.0.clone();
    scan(
        &around.add_scalar(-1e-2),
        &around.add_scalar(1e-2),
        1e-3,
        &mut best,
    );
    best
}
