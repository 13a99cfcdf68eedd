//! Right-hand sides of the regret guarantees, as plain functions of the
//! problem constants. `ln` is the natural logarithm throughout; the only
//! base-2 logarithm is the one inside the prior-dependent meta constant.

/// Meta regret allowance for each grid expert: `2 ln(sqrt(3) (log2(T)/2 + 3))`.
pub fn meta_grid_bound(horizon: usize) -> f64 {
    let t = horizon as f64;
    2.0 * (3.0_f64.sqrt() * (0.5 * t.log2() + 3.0)).ln()
}

/// Meta regret allowance for the convex expert, `ln 3`.
pub fn meta_convex_bound() -> f64 {
    3.0_f64.ln()
}

/// Surrogate regret allowance of a strongly convex expert, `1 + ln T`.
pub fn expert_strongly_convex_bound(horizon: usize) -> f64 {
    1.0 + (horizon as f64).ln()
}

/// Surrogate regret allowance of an ONS expert, `10 d ln T`.
pub fn expert_exp_concave_bound(horizon: usize, dim: usize) -> f64 {
    10.0 * dim as f64 * (horizon as f64).ln()
}

/// Surrogate regret allowance of the convex expert.
pub const EXPERT_CONVEX_BOUND: f64 = 0.75;

/// `A = meta + 1 + ln T`.
pub fn constant_a(horizon: usize) -> f64 {
    meta_grid_bound(horizon) + expert_strongly_convex_bound(horizon)
}

/// `B = meta + 10 d ln T`.
pub fn constant_b(horizon: usize, dim: usize) -> f64 {
    meta_grid_bound(horizon) + expert_exp_concave_bound(horizon, dim)
}

/// Worst-case bound `2 (1 + ln 3) G D sqrt(T)`.
pub fn worst_case_bound(grad_bound: f64, diameter: f64, horizon: usize) -> f64 {
    2.0 * (1.0 + 3.0_f64.ln()) * grad_bound * diameter * (horizon as f64).sqrt()
}

/// `3 sqrt(V_l B) + 10 G D B`.
pub fn exp_concave_bound(
    v_ell: f64,
    grad_bound: f64,
    diameter: f64,
    horizon: usize,
    dim: usize,
) -> f64 {
    let b = constant_b(horizon, dim);
    3.0 * (v_ell.max(0.0) * b).sqrt() + 10.0 * grad_bound * diameter * b
}

/// `3 sqrt(V_s A) + 10 G D A`.
pub fn strongly_convex_bound(v_s: f64, grad_bound: f64, diameter: f64, horizon: usize) -> f64 {
    let a = constant_a(horizon);
    3.0 * (v_s.max(0.0) * a).sqrt() + 10.0 * grad_bound * diameter * a
}

/// `(10 G D + 9 G^2 / (2 lambda)) A` for lambda-strongly convex losses.
pub fn strongly_convex_rate_bound(
    grad_bound: f64,
    diameter: f64,
    modulus: f64,
    horizon: usize,
) -> f64 {
    (10.0 * grad_bound * diameter + 9.0 * grad_bound * grad_bound / (2.0 * modulus))
        * constant_a(horizon)
}

/// `(10 G D + 9 / (2 beta)) B` with `beta = min(alpha, 1/(4GD)) / 2`.
pub fn exp_concave_rate_bound(
    grad_bound: f64,
    diameter: f64,
    alpha: f64,
    horizon: usize,
    dim: usize,
) -> f64 {
    let beta = 0.5 * alpha.min(1.0 / (4.0 * grad_bound * diameter));
    (10.0 * grad_bound * diameter + 9.0 / (2.0 * beta)) * constant_b(horizon, dim)
}
