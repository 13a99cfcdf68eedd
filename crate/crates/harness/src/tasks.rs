//! The two experiment tasks: ridge-regularized least squares on synthetic
//! data and logistic regression on LIBSVM rows.

use std::sync::Arc;

use maler_core::{CurvatureClass, DecisionSet, LossOracle, Matrix, Quadratic, Vector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::libsvm::SparseRow;

/// Uniform draw from the centered ball of the given radius.
pub fn uniform_in_ball(rng: &mut impl Rng, dim: usize, radius: f64) -> Vector {
    loop {
        let dir = Vector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        let n = dir.norm();
        if n > 0.0 {
            return dir * (radius * rng.random::<f64>().powf(1.0 / dim as f64) / n);
        }
    }
}

/// `(1/n) sum (w^T x_i - y_i)^2 + lambda ||w||^2` over one batch.
#[derive(Debug, Clone)]
pub struct RegressionLoss {
    features: Matrix,
    labels: Vector,
    lambda: f64,
}

impl RegressionLoss {
    /// One row of `features` per example.
    pub fn new(features: Matrix, labels: Vector, lambda: f64) -> Result<Self> {
        if features.nrows() != labels.len() || features.nrows() == 0 {
            return Err(Error::Config(format!(
                "{} feature rows for {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Self {
            features,
            labels,
            lambda,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &Vector {
        &self.labels
    }

    fn batch(&self) -> f64 {
        self.labels.len() as f64
    }
}

impl LossOracle for RegressionLoss {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, w: &Vector) -> f64 {
        let resid = &self.features * w - &self.labels;
        resid.norm_squared() / self.batch() + self.lambda * w.norm_squared()
    }

    fn gradient(&self, w: &Vector) -> Vector {
        let resid = &self.features * w - &self.labels;
        self.features.tr_mul(&resid) * (2.0 / self.batch()) + w * (2.0 * self.lambda)
    }

    fn curvature(&self) -> CurvatureClass {
        if self.lambda > 0.0 {
            CurvatureClass::StronglyConvex {
                modulus: 2.0 * self.lambda,
            }
        } else {
            CurvatureClass::Convex
        }
    }

    fn quadratic(&self) -> Option<Quadratic> {
        let d = self.dim();
        let n = self.batch();
        Some(Quadratic {
            hessian: self.features.tr_mul(&self.features) * (2.0 / n)
                + Matrix::identity(d, d) * (2.0 * self.lambda),
            linear: self.features.tr_mul(&self.labels) * (-2.0 / n),
            constant: self.labels.norm_squared() / n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    pub rounds: usize,
    pub dim: usize,
    pub batch: usize,
    pub lambda: f64,
    pub noise_std: f64,
    /// Radius of the decision set; `w_*` is drawn from the same ball.
    pub radius: f64,
    /// Radius of the ball the features are drawn from.
    pub feature_radius: f64,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self {
            rounds: 200,
            dim: 50,
            batch: 200,
            lambda: 0.001,
            noise_std: 0.1,
            radius: 0.5,
            feature_radius: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegressionTask {
    pub w_star: Vector,
    pub losses: Vec<RegressionLoss>,
    pub set: DecisionSet,
    pub grad_bound: f64,
}

/// `max_{||w|| <= R} ||A w + b|| <= ||A||_2 R + ||b||` for a quadratic with
/// Hessian `A` and linear term `b`.
pub fn quadratic_grad_bound(q: &Quadratic, radius: f64) -> f64 {
    q.smoothness() * radius + q.linear.norm()
}

impl RegressionTask {
    pub fn generate(config: &RegressionConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        if config.rounds == 0 || config.dim == 0 || config.batch == 0 {
            return Err(Error::Config(
                "rounds, dim and batch must be positive".into(),
            ));
        }
        if config.noise_std.is_nan() || config.noise_std < 0.0 {
            return Err(Error::Config("noise std must be non-negative".into()));
        }
        let d = config.dim;
        let noise =
            Normal::new(0.0, config.noise_std).map_err(|e| Error::Config(format!("noise: {e}")))?;
        let w_star = uniform_in_ball(rng, d, config.radius);
        let mut losses = Vec::with_capacity(config.rounds);
        for _ in 0..config.rounds {
            let mut x = Matrix::zeros(config.batch, d);
            let mut y = Vector::zeros(config.batch);
            for i in 0..config.batch {
                let row = uniform_in_ball(rng, d, config.feature_radius);
                y[i] = w_star.dot(&row) + noise.sample(rng);
                x.set_row(i, &row.transpose());
            }
            losses.push(RegressionLoss::new(x, y, config.lambda)?);
        }
        let set = DecisionSet::centered_ball(d, config.radius)?;
        let grad_bound = losses
            .iter()
            .map(|l| quadratic_grad_bound(&l.quadratic().expect("quadratic"), config.radius))
            .fold(0.0, f64::max);
        Ok(Self {
            w_star,
            losses,
            set,
            grad_bound,
        })
    }
}

/// Batch logistic loss `(1/n) sum ln(1 + exp(-y w^T x))` over sparse rows.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    rows: Arc<Vec<SparseRow>>,
    batch: Vec<usize>,
    dim: usize,
    alpha: f64,
}

/// `ln(1 + e^u)` without overflow.
pub fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-u})`.
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl LogisticLoss {
    pub fn new(
        rows: Arc<Vec<SparseRow>>,
        batch: Vec<usize>,
        dim: usize,
        alpha: f64,
    ) -> Result<Self> {
        if batch.is_empty() {
            return Err(Error::Config("empty logistic batch".into()));
        }
        if let Some(&i) = batch
            .iter()
            .find(|&&i| i >= rows.len() || rows[i].max_index() > dim)
        {
            return Err(Error::Config(format!(
                "row {i} does not fit dimension {dim}"
            )));
        }
        Ok(Self {
            rows,
            batch,
            dim,
            alpha,
        })
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseRow> {
        self.batch.iter().map(|&i| &self.rows[i])
    }
}

impl LossOracle for LogisticLoss {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, w: &Vector) -> f64 {
        let w = w.as_slice();
        let total: f64 = self.rows().map(|r| softplus(-r.label * r.dot(w))).sum();
        total / self.batch.len() as f64
    }

    fn gradient(&self, w: &Vector) -> Vector {
        self.value_and_gradient(w).1
    }

    fn value_and_gradient(&self, w: &Vector) -> (f64, Vector) {
        let ws = w.as_slice();
        let mut value = 0.0;
        let mut g = Vector::zeros(self.dim);
        for r in self.rows() {
            let margin = -r.label * r.dot(ws);
            let e = (-margin.abs()).exp();
            value += margin.max(0.0) + e.ln_1p();
            let s = if margin >= 0.0 {
                1.0 / (1.0 + e)
            } else {
                e / (1.0 + e)
            };
            let coef = -r.label * s;
            for (i, v) in &r.entries {
                g[i - 1] += coef * v;
            }
        }
        let n = self.batch.len() as f64;
        (value / n, g / n)
    }

    fn curvature(&self) -> CurvatureClass {
        CurvatureClass::ExpConcave { alpha: self.alpha }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationConfig {
    pub rounds: usize,
    pub batch: usize,
    pub radius: f64,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            batch: 200,
            radius: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationTask {
    pub rows: Arc<Vec<SparseRow>>,
    pub losses: Vec<LogisticLoss>,
    pub set: DecisionSet,
    pub grad_bound: f64,
    pub dim: usize,
    pub alpha: f64,
}

impl ClassificationTask {
    /// Scales every row by the largest row norm, shuffles with `rng` and cuts
    /// consecutive batches, wrapping around when the rows run out.
    pub fn build(
        mut rows: Vec<SparseRow>,
        config: &ClassificationConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Config("no rows in data set".into()));
        }
        if config.rounds == 0 || config.batch == 0 {
            return Err(Error::Config("rounds and batch must be positive".into()));
        }
        let dim = rows
            .iter()
            .map(SparseRow::max_index)
            .max()
            .unwrap_or(0)
            .max(1);
        let max_norm = rows.iter().map(SparseRow::norm).fold(0.0, f64::max);
        if max_norm > 0.0 {
            for r in &mut rows {
                for (_, v) in &mut r.entries {
                    *v /= max_norm;
                }
            }
        }
        rows.shuffle(rng);
        let rows = Arc::new(rows);
        let scaled_max = rows.iter().map(SparseRow::norm).fold(0.0, f64::max);
        let alpha = (-config.radius * scaled_max).exp();
        let losses = (0..config.rounds)
            .map(|t| {
                let batch = (0..config.batch)
                    .map(|i| (t * config.batch + i) % rows.len())
                    .collect();
                LogisticLoss::new(rows.clone(), batch, dim, alpha)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            losses,
            set: DecisionSet::centered_ball(dim, config.radius)?,
            grad_bound: scaled_max.max(f64::MIN_POSITIVE),
            dim,
            alpha,
            rows,
        })
    }
}

/// Group sizes of a one-hot census-style encoding over 123 binary features.
const GROUP_SIZES: [usize; 14] = [5, 8, 16, 16, 7, 14, 6, 5, 2, 3, 3, 3, 4, 31];

/// Text of a synthetic LIBSVM file shaped like the `a9a` census data: one
/// active binary feature per categorical group, labels from a random
/// logistic model.
pub fn synthetic_libsvm(rows: usize, rng: &mut ChaCha8Rng) -> String {
    let dim: usize = GROUP_SIZES.iter().sum();
    let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
    let mut out = String::new();
    for _ in 0..rows {
        let mut idx = Vec::with_capacity(GROUP_SIZES.len());
        let mut offset = 0;
        for size in GROUP_SIZES {
            idx.push(offset + rng.random_range(0..size) + 1);
            offset += size;
        }
        let score: f64 = idx.iter().map(|i| w[i - 1]).sum::<f64>() * 0.5 - 0.8;
        let label = if rng.random::<f64>() < sigmoid(score) {
            "+1"
        } else {
            "-1"
        };
        out.push_str(label);
        for i in idx {
            out.push_str(&format!(" {i}:1"));
        }
        out.push('\n');
    }
    out
}
