//! Totally negatively skewed stable draws normalized to `E e^{θX₁} = e^{θ^α}`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Exp1;

/// Scale making the Chambers–Mallows–Stuck draw satisfy `ψ(θ) = θ^α`.
pub fn stable_scale(alpha: f64) -> f64 {
    (PI * alpha / 2.0).cos().abs().powf(1.0 / alpha)
}

/// Standard draw `S_α(σ, −1, 0)` with `σ` from [`stable_scale`].
pub fn stable_unit<G: Rng + ?Sized>(alpha: f64, rng: &mut G) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = rng.sample(Exp1);
    let beta = -1.0;
    let tan = (PI * alpha / 2.0).tan();
    let b = (beta * tan).atan() / alpha;
    let s = (1.0 + beta * beta * tan * tan).powf(1.0 / (2.0 * alpha));
    let lead = s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha);
    let tail = ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
    stable_scale(alpha) * lead * tail
}

/// Increment over a time step `dt`: `dt^{1/α} X₁`.
pub fn stable_increment<G: Rng + ?Sized>(alpha: f64, dt: f64, rng: &mut G) -> f64 {
    debug_assert!(alpha > 1.0 && alpha <= 2.0 && dt > 0.0);
    // guard the measure-zero endpoint v = ±π/2
    loop {
        let x = stable_unit(alpha, rng);
        if x.is_finite() {
            return dt.powf(1.0 / alpha) * x;
        }
    }
}
