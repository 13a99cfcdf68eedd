#![allow(dead_code)]

use maler_core::Vector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(rng: &mut impl Rng, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| StandardNormal.sample(rng))
}

/// Uniform draw from the ball of the given radius around the origin.
pub fn in_ball(rng: &mut impl Rng, dim: usize, radius: f64) -> Vector {
    let dir = gaussian(rng, dim);
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    dir.normalize() * r
}

/// Random direction with norm in `[lo, hi]`.
pub fn with_norm_between(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> Vector {
    gaussian(rng, dim).normalize() * rng.random_range(lo..=hi)
}
