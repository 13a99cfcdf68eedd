//! Random loss streams that satisfy the gradient and diameter assumptions,
//! used to exercise the certificates.

use std::sync::Arc;

use maler_core::{
    CurvatureClass, DecisionSet, LossOracle, Matrix, ProblemParams, Quadratic, Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tasks::{sigmoid, softplus, uniform_in_ball};

#[derive(Debug, Clone)]
pub enum FuzzLoss {
    /// `g^T x`.
    Linear { g: Vector },
    /// `(lambda/2) ||x - a||^2`.
    Quadratic { modulus: f64, center: Vector },
    /// `ln(1 + exp(-y z^T x))`.
    Logistic { z: Vector, y: f64, alpha: f64 },
}

impl LossOracle for FuzzLoss {
    fn dim(&self) -> usize {
        match self {
            FuzzLoss::Linear { g } => g.len(),
            FuzzLoss::Quadratic { center, .. } => center.len(),
            FuzzLoss::Logistic { z, .. } => z.len(),
        }
    }

    fn value(&self, x: &Vector) -> f64 {
        match self {
            FuzzLoss::Linear { g } => g.dot(x),
            FuzzLoss::Quadratic { modulus, center } => 0.5 * modulus * (x - center).norm_squared(),
            FuzzLoss::Logistic { z, y, .. } => softplus(-y * z.dot(x)),
        }
    }

    fn gradient(&self, x: &Vector) -> Vector {
        match self {
            FuzzLoss::Linear { g } => g.clone(),
            FuzzLoss::Quadratic { modulus, center } => (x - center) * *modulus,
            FuzzLoss::Logistic { z, y, .. } => z * (-y * sigmoid(-y * z.dot(x))),
        }
    }

    fn curvature(&self) -> CurvatureClass {
        match self {
            FuzzLoss::Linear { .. } => CurvatureClass::Convex,
            FuzzLoss::Quadratic { modulus, .. } => {
                CurvatureClass::StronglyConvex { modulus: *modulus }
            }
            FuzzLoss::Logistic { alpha, .. } => CurvatureClass::ExpConcave { alpha: *alpha },
        }
    }

    fn quadratic(&self) -> Option<Quadratic> {
        let d = self.dim();
        match self {
            FuzzLoss::Linear { g } => Some(Quadratic {
                hessian: Matrix::zeros(d, d),
                linear: g.clone(),
                constant: 0.0,
            }),
            FuzzLoss::Quadratic { modulus, center } => Some(Quadratic {
                hessian: Matrix::identity(d, d) * *modulus,
                linear: center * -*modulus,
                constant: 0.5 * modulus * center.norm_squared(),
            }),
            FuzzLoss::Logistic { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamFamily {
    Linear,
    StronglyConvex,
    Logistic,
    Mixed,
}

impl StreamFamily {
    pub const ALL: [StreamFamily; 4] = [
        StreamFamily::Linear,
        StreamFamily::StronglyConvex,
        StreamFamily::Logistic,
        StreamFamily::Mixed,
    ];
}

#[derive(Debug, Clone)]
pub struct FuzzStream {
    pub family: StreamFamily,
    pub params: ProblemParams,
    pub set: Arc<DecisionSet>,
    pub curvature: CurvatureClass,
    pub losses: Vec<FuzzLoss>,
}

/// Knobs for [`fuzz_stream`]; `None` fields are drawn at random.
#[derive(Debug, Clone, Copy, Default)]
pub struct FuzzOptions {
    pub radius: Option<f64>,
    pub grad_bound: Option<f64>,
    /// Strong convexity modulus of quadratic streams.
    pub modulus: Option<f64>,
}

/// A random stream of the given family. The gradient bound `G` is exact for
/// the generated losses over the whole set.
pub fn fuzz_stream(
    family: StreamFamily,
    dim: usize,
    horizon: usize,
    seed: u64,
    options: FuzzOptions,
) -> Result<FuzzStream> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = options
        .radius
        .unwrap_or_else(|| rng.random_range(0.25..2.0));
    let diameter = 2.0 * radius;
    let set = Arc::new(DecisionSet::centered_ball(dim, radius)?);
    let drift = uniform_in_ball(&mut rng, dim, 1.0);

    let (g, curvature, losses) = match family {
        StreamFamily::Linear => {
            let g = options
                .grad_bound
                .unwrap_or_else(|| rng.random_range(0.5..3.0));
            let losses = (0..horizon)
                .map(|_| {
                    let v = (&drift + uniform_in_ball(&mut rng, dim, 1.0)) * (0.5 * g);
                    FuzzLoss::Linear { g: v }
                })
                .collect();
            (g, CurvatureClass::Convex, losses)
        }
        StreamFamily::StronglyConvex => {
            let modulus = options
                .modulus
                .unwrap_or_else(|| rng.random_range(0.1..2.0));
            let mean = uniform_in_ball(&mut rng, dim, 0.6 * radius);
            let losses = (0..horizon)
                .map(|_| FuzzLoss::Quadratic {
                    modulus,
                    center: &mean + uniform_in_ball(&mut rng, dim, 0.4 * radius),
                })
                .collect();
            // ||x - a|| <= D for x, a in the set.
            (
                modulus * diameter,
                CurvatureClass::StronglyConvex { modulus },
                losses,
            )
        }
        StreamFamily::Logistic => {
            let g = options
                .grad_bound
                .unwrap_or_else(|| rng.random_range(0.5..3.0));
            let alpha = (-radius * g).exp();
            let w = uniform_in_ball(&mut rng, dim, radius);
            let losses = (0..horizon)
                .map(|_| {
                    let z = uniform_in_ball(&mut rng, dim, g);
                    let p = sigmoid(4.0 * w.dot(&z));
                    let y = if rng.random::<f64>() < p { 1.0 } else { -1.0 };
                    FuzzLoss::Logistic { z, y, alpha }
                })
                .collect();
            (g, CurvatureClass::ExpConcave { alpha }, losses)
        }
        StreamFamily::Mixed => {
            let g = options
                .grad_bound
                .unwrap_or_else(|| rng.random_range(0.5..3.0));
            let modulus = g / diameter;
            let alpha = (-radius * g).exp();
            let losses = (0..horizon)
                .map(|_| match rng.random_range(0..3) {
                    0 => FuzzLoss::Linear {
                        g: (&drift + uniform_in_ball(&mut rng, dim, 1.0)) * (0.5 * g),
                    },
                    1 => FuzzLoss::Quadratic {
                        modulus,
                        center: uniform_in_ball(&mut rng, dim, radius),
                    },
                    _ => FuzzLoss::Logistic {
                        z: uniform_in_ball(&mut rng, dim, g),
                        y: if rng.random::<bool>() { 1.0 } else { -1.0 },
                        alpha,
                    },
                })
                .collect();
            (g, CurvatureClass::Convex, losses)
        }
    };
    Ok(FuzzStream {
        family,
        params: ProblemParams::for_set(horizon, g, &set)?,
        set,
        curvature,
        losses,
    })
}
