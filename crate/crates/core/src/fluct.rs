//! Fluctuation identities at an independent matrix-exponential horizon.
//!
//! Every operation evaluates a closed matrix expression in `Φ(−T)`, `W₋T`
//! and `Z₋T` and contracts it with the horizon's `α` on the left and `l`
//! (or `t`) on the right.

use log::warn;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, expm, row_times, Lu, Matrix};
use crate::quadrature::{adaptive, QuadOptions};
use crate::scalar::{lit, re, unit_scale, Cx, Real};
use crate::scale::{ScaleEval, Z_QUAD_TOL};

/// Probabilities further than this outside `[0, 1]` raise an error.
pub const PROBABILITY_TOL: f64 = 1e-6;
/// Probabilities within this of `[0, 1]` are clamped silently.
pub const PROBABILITY_SLACK: f64 = 1e-9;
/// Relative offset of the symmetric evaluations used for removable
/// singularities.
pub const LIMIT_STEP: f64 = 1e-6;

/// Clamps a computed probability into `[0, 1]`, or fails when it is off by
/// more than [`PROBABILITY_TOL`].
pub fn clamp_probability<R: Real>(v: R) -> Result<R> {
    if !v.is_finite() {
        return Err(Error::NonFinite("probability".into()));
    }
    let tol = R::tol(PROBABILITY_TOL);
    if v < -tol || v > R::one() + tol {
        return Err(Error::ProbabilityOutOfRange(v.as_f64()));
    }
    let slack = R::tol(PROBABILITY_SLACK);
    if v < -slack || v > R::one() + slack {
        warn!("clamping probability {v} into [0, 1]");
    }
    Ok(v.max(R::zero()).min(R::one()))
}

struct Vectors<R: Real> {
    alpha: Vec<R>,
    l: Vec<R>,
    t: Vec<R>,
}

fn vectors<R: Real>(ev: &ScaleEval<R>) -> Result<Vectors<R>> {
    let h = ev.horizon()?;
    Ok(Vectors {
        alpha: h.alpha().to_vec(),
        l: h.l().to_vec(),
        t: h.exit().to_vec(),
    })
}

fn row<R: Real>(alpha: &[R], m: &Matrix<R>) -> Vec<R> {
    row_times(alpha, m).into_iter().map(|z| z.re).collect()
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |s, (x, y)| s + *x * *y)
}

fn inverse_or<R: Real>(m: &Matrix<R>, err: Error) -> Result<Matrix<R>> {
    match Lu::new(m) {
        Ok(lu) => Ok(lu.solve(&Matrix::identity(m.dim()))),
        Err(Error::SingularMatrix { .. }) => Err(err),
        Err(e) => Err(e),
    }
}

fn nonnegative<R: Real>(name: &str, v: R) -> Result<()> {
    if v >= R::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be nonnegative")))
    }
}

fn exp_neg_phi<R: Real>(ev: &ScaleEval<R>, x: R) -> Result<Matrix<R>> {
    Ok(expm(&ev.phi_matrix()?.scale_re(-x)))
}

/// `P(τ_x⁺ < T) = α e^{−Φ(−T)x} l`.
pub fn p_up_before_horizon<R: Real>(ev: &ScaleEval<R>, x: R) -> Result<R> {
    nonnegative("x", x)?;
    let v = vectors(ev)?;
    clamp_probability(exp_neg_phi(ev, x)?.bilinear(&v.alpha, &v.l).re)
}

/// Density of the supremum, `α e^{−Φ(−T)x} Φ(−T) l`.
pub fn sup_density<R: Real>(ev: &ScaleEval<R>, x: R) -> Result<R> {
    nonnegative("x", x)?;
    let v = vectors(ev)?;
    let m = &exp_neg_phi(ev, x)? * ev.phi_matrix()?;
    Ok(m.bilinear(&v.alpha, &v.l).re)
}

/// `P(τ_x⁺ < τ₋ᵧ⁻ ∧ T) = α W₋T(y) W₋T(x+y)⁻¹ l`, evaluated through the
/// normalized scale matrix.
pub fn p_two_sided_up<R: Real>(ev: &ScaleEval<R>, x: R, y: R) -> Result<R> {
    nonnegative("x", x)?;
    nonnegative("y", y)?;
    if x + y == R::zero() {
        return Err(Error::InvalidParameter("x + y must be positive".into()));
    }
    if y == R::zero() && ev.drift_constant() == R::zero() {
        return Ok(R::zero());
    }
    let v = vectors(ev)?;
    let num = ev.w_normalized(y)?;
    let den = inverse_or(&ev.w_normalized(x + y)?, Error::SingularScaleMatrix)?;
    let m = &(&num * &den) * &exp_neg_phi(ev, x)?;
    clamp_probability(m.bilinear(&v.alpha, &v.l).re)
}

/// `E_x(e^{−θR_{η_a}}; η_a < T) = α Z₋T(θ,x) Z₋T(θ,a)⁻¹ l` for the process
/// reflected at its infimum.
pub fn reflected_passage<R: Real>(ev: &ScaleEval<R>, x: R, a: R, theta: R) -> Result<R> {
    check_interval(x, a)?;
    nonnegative("θ", theta)?;
    let v = vectors(ev)?;
    let zx = ev.z_matrix(theta, x)?.value;
    let za = inverse_or(&ev.z_matrix(theta, a)?.value, Error::SingularScaleMatrix)?;
    clamp_probability((&zx * &za).bilinear(&v.alpha, &v.l).re)
}

fn check_interval<R: Real>(x: R, a: R) -> Result<()> {
    if x >= R::zero() && x <= a && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("need 0 ≤ x ≤ a, got x = {x}, a = {a}")))
    }
}

/// `E_x(e^{θX_{τ₀⁻}}; τ₀⁻ < τ_a⁺ ∧ T) = α(Z₋T(θ,x) − W₋T(x) Z₋T(θ,a) W₋T(a)⁻¹) l`.
pub fn down_exit_two_sided<R: Real>(ev: &ScaleEval<R>, x: R, a: R, theta: R) -> Result<R> {
    check_interval(x, a)?;
    if a == R::zero() {
        return Err(Error::InvalidParameter("a must be positive".into()));
    }
    nonnegative("θ", theta)?;
    let v = vectors(ev)?;
    let zx = ev.z_matrix(theta, x)?.value;
    let za = ev.z_matrix(theta, a)?.value;
    let wa = inverse_or(&ev.w_matrix(a)?, Error::SingularScaleMatrix)?;
    let m = &zx - &(&(&ev.w_matrix(x)? * &za) * &wa);
    clamp_probability(m.bilinear(&v.alpha, &v.l).re)
}

/// `E_x(e^{θX_{τ₀⁻}}; τ₀⁻ < T) = α(Z₋T(θ,x) − W₋T(x)(ψ(θ)I + T)(θI − Φ(−T))⁻¹) l`.
///
/// When `θ` is within [`LIMIT_STEP`] (relative) of an eigenvalue of `Φ(−T)`
/// the removable singularity is resolved by averaging the evaluations at
/// `θ(1 ± LIMIT_STEP)`, which cancels the first-order error.
pub fn down_exit_one_sided<R: Real>(ev: &ScaleEval<R>, x: R, theta: R) -> Result<R> {
    nonnegative("x", x)?;
    nonnegative("θ", theta)?;
    let scale = unit_scale(theta);
    let near = eigenvalues(ev.phi_matrix()?)?
        .iter()
        .any(|m| (*m - re(theta)).norm() <= R::tol(LIMIT_STEP) * scale);
    let v = if near && theta > R::zero() {
        let d = R::tol(LIMIT_STEP);
        let up = one_sided_raw(ev, x, theta * (R::one() + d))?;
        let dn = one_sided_raw(ev, x, theta * (R::one() - d))?;
        (up + dn) / lit(2.0)
    } else {
        one_sided_raw(ev, x, theta)?
    };
    clamp_probability(v)
}

fn one_sided_raw<R: Real>(ev: &ScaleEval<R>, x: R, theta: R) -> Result<R> {
    let v = vectors(ev)?;
    let phi = ev.phi_matrix()?;
    let psi = ev.model().psi(re(theta))?;
    let resolvent = (-ev.neg_generator()).shift(psi);
    let shifted = (-phi).shift(re(theta));
    let inv = inverse_or(&shifted, Error::EigenvalueCollision)?;
    let zx = ev.z_matrix(theta, x)?.value;
    let m = &zx - &(&(&ev.w_matrix(x)? * &resolvent) * &inv);
    Ok(m.bilinear(&v.alpha, &v.l).re)
}

/// Density of `X_T` on `{T < τ₋ₐ⁻ ∧ τ_b⁺}`:
/// `α(W₋T(a) W₋T(a+b)⁻¹ W₋T(b−x) − W₋T(−x)) t`, with `W₋T` zero on the
/// negative half-line.
///
/// Contracting with `l` instead of `t` gives the expected occupation density
/// `E ∫₀^{T ∧ τ} 1{X_s ∈ dx} ds`; see [`two_barrier_occupation`].
pub fn two_barrier_density<R: Real>(ev: &ScaleEval<R>, a: R, b: R, x: R) -> Result<R> {
    two_barrier(ev, a, b, x, false)
}

fn two_barrier<R: Real>(ev: &ScaleEval<R>, a: R, b: R, x: R, occupation: bool) -> Result<R> {
    if !(a > R::zero() && b > R::zero() && x > -a && x < b) {
        return Err(Error::InvalidParameter(format!(
            "need a, b > 0 and −a < x < b, got a = {a}, b = {b}, x = {x}"
        )));
    }
    let v = vectors(ev)?;
    let wab = inverse_or(&ev.w_matrix(a + b)?, Error::SingularScaleMatrix)?;
    let mut m = &(&ev.w_matrix(a)? * &wab) * &ev.w_matrix(b - x)?;
    if x < R::zero() {
        m = &m - &ev.w_matrix(-x)?;
    }
    Ok(m.bilinear(&v.alpha, if occupation { &v.l } else { &v.t }).re)
}

/// Expected occupation density of `x` before `T ∧ τ₋ₐ⁻ ∧ τ_b⁺`.
pub fn two_barrier_occupation<R: Real>(ev: &ScaleEval<R>, a: R, b: R, x: R) -> Result<R> {
    two_barrier(ev, a, b, x, true)
}

/// `(−T)⁻¹ e^{−Φ(−T)x}`: the supremum factor of the Wiener–Hopf
/// factorization, `∫₀^∞ e^{Tt} P(X̄_t > x) dt`.
pub fn sup_factor_matrix<R: Real>(ev: &ScaleEval<R>, x: R) -> Result<Matrix<R>> {
    nonnegative("x", x)?;
    let inv = inverse_or(ev.neg_generator(), Error::SingularMatrix {
        pivot: 0.0,
        threshold: 0.0,
    })?;
    Ok(&inv * &exp_neg_phi(ev, x)?)
}

/// `Φ(−T)⁻¹ W₋T(x) − ∫₀ˣ W₋T`: the infimum factor,
/// `∫₀^∞ e^{Tt} P(−X̲_t ≤ x) dt`.
pub fn inf_factor_matrix<R: Real>(ev: &ScaleEval<R>, x: R) -> Result<Matrix<R>> {
    nonnegative("x", x)?;
    let phi_inv = inverse_or(ev.phi_matrix()?, Error::SingularScaleMatrix)?;
    Ok(&phi_inv * &ev.w_deficit_matrix(x)?)
}

/// `α (−T)⁻¹ e^{−Φ(−T)x}`.
pub fn wh_sup_factor<R: Real>(ev: &ScaleEval<R>, x: R) -> Result<Vec<R>> {
    Ok(row(&vectors(ev)?.alpha, &sup_factor_matrix(ev, x)?))
}

/// `α (Φ(−T)⁻¹ W₋T(x) − ∫₀ˣ W₋T)`.
pub fn wh_inf_factor_cdf<R: Real>(ev: &ScaleEval<R>, x: R) -> Result<Vec<R>> {
    Ok(row(&vectors(ev)?.alpha, &inf_factor_matrix(ev, x)?))
}

/// `P(−X̲_T ≤ y)`.
pub fn inf_cdf<R: Real>(ev: &ScaleEval<R>, y: R) -> Result<R> {
    let v = vectors(ev)?;
    clamp_probability(dot(&wh_inf_factor_cdf(ev, y)?, &v.t))
}

/// Density of `−X̲_T` at `y > 0`: `α Φ(−T)⁻¹ (W′₋T(y) − Φ(−T) W₋T(y)) t`.
pub fn inf_density<R: Real>(ev: &ScaleEval<R>, y: R) -> Result<R> {
    nonnegative("y", y)?;
    let v = vectors(ev)?;
    let phi_inv = inverse_or(ev.phi_matrix()?, Error::SingularScaleMatrix)?;
    Ok((&phi_inv * &ev.wh_kernel_matrix(y)?).bilinear(&v.alpha, &v.t).re)
}

/// `P(X̲_T = 0) = c α Φ(−T)⁻¹ t`.
pub fn inf_atom<R: Real>(ev: &ScaleEval<R>) -> Result<R> {
    let c = ev.drift_constant();
    if c == R::zero() {
        return Ok(R::zero());
    }
    let v = vectors(ev)?;
    let phi_inv = inverse_or(ev.phi_matrix()?, Error::SingularScaleMatrix)?;
    Ok(phi_inv.bilinear(&v.alpha, &v.t).re * c)
}

/// Joint law of `(X̄_T, X̄_T − X_T)` at `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WhDensity<R: Real> {
    /// Density in both arguments for `y > 0`.
    pub density: R,
    /// Density in `x` of the atom at `y = 0`.
    pub atom: R,
}

/// `α e^{−Φ(−T)x} (c δ₀(dy) + (W′₋T(y) − Φ(−T) W₋T(y)) dy) t`.
pub fn wh_joint_density<R: Real>(ev: &ScaleEval<R>, x: R, y: R) -> Result<WhDensity<R>> {
    nonnegative("x", x)?;
    nonnegative("y", y)?;
    let v = vectors(ev)?;
    let e = exp_neg_phi(ev, x)?;
    let density = (&e * &ev.wh_kernel_matrix(y)?).bilinear(&v.alpha, &v.t).re;
    let atom = e.bilinear(&v.alpha, &v.t).re * ev.drift_constant();
    Ok(WhDensity { density, atom })
}

/// `E e^{−uX̄_T − v(X̄_T − X_T)} = α(uI + Φ)⁻¹(vI − Φ)(ψ(v)I + T)⁻¹ t`.
pub fn wh_bivariate_transform<R: Real>(ev: &ScaleEval<R>, u: R, v: R) -> Result<R> {
    nonnegative("u", u)?;
    nonnegative("v", v)?;
    let vecs = vectors(ev)?;
    let psi = ev.model().psi(re(v))?;
    let near = |q: Cx<R>| (q - psi).norm() <= R::tol(LIMIT_STEP) * unit_scale(psi.re);
    if ev.eigenvalues().iter().any(|l| near(*l)) {
        if !ev.is_spectral() {
            return Err(Error::EigenvalueCollision);
        }
        // (v − Φ(q))/(ψ(v) − q) → Φ′(ψ(v)) = 1/ψ′(v)
        let dpsi = ev.model().psi_prime(re(v))?;
        let m = ev.lift(|k| {
            let q = k.q();
            let p = k.phi()?;
            let ratio = if near(q) {
                dpsi.inv()
            } else {
                (re(v) - p) / (psi - q)
            };
            Ok(ratio / (p + re(u)))
        })?;
        return Ok(m.bilinear(&vecs.alpha, &vecs.t).re);
    }
    let phi = ev.phi_matrix()?;
    let a = inverse_or(&phi.shift(re(u)), Error::EigenvalueCollision)?;
    let b = (-phi).shift(re(v));
    let c = inverse_or(&(-ev.neg_generator()).shift(psi), Error::EigenvalueCollision)?;
    Ok((&(&a * &b) * &c).bilinear(&vecs.alpha, &vecs.t).re)
}

/// `e^u E((e^{−u} − e^{X̲_T})⁺ e^{β(X_T − X̲_T)})`.
///
/// Evaluates
/// `α(Φ(Φ − βI)⁻¹ Z₋T(0,u) + (−T)(Φ − I)(Φ − βI)⁻¹(T + ψ(1)I)⁻¹ Z₋T(1,u)) l`.
/// When `ψ(1)` is an eigenvalue of `−T` the second term has a removable
/// singularity; it is then evaluated eigenvalue by eigenvalue with the
/// scalar limit `q(Φ(q) − 1)/(ψ(1) − q) → −ψ(1)/ψ′(1)`.
pub fn option_price<R: Real>(ev: &ScaleEval<R>, u: R, beta: R) -> Result<R> {
    nonnegative("u", u)?;
    if !beta.is_finite() {
        return Err(Error::InvalidParameter("β must be finite".into()));
    }
    let model = ev.model();
    let phi0 = model.phi(Cx::zero())?.re;
    if beta > phi0 {
        let psi_beta = model.psi(re(beta))?.re;
        if ev.eigenvalues().iter().any(|l| !(l.re > psi_beta)) {
            return Err(Error::BetaDomain(format!(
                "β = {beta} > Φ(0) needs every eigenvalue of −T to have real part above ψ(β) = {psi_beta}"
            )));
        }
    }
    let psi1 = model.psi(re(R::one()))?.re;
    let collide = ev
        .eigenvalues()
        .iter()
        .any(|l| (*l - re(psi1)).norm() <= R::tol(LIMIT_STEP) * unit_scale(psi1));
    let v = vectors(ev)?;
    let phi = ev.phi_matrix()?;
    let shifted = inverse_or(&phi.shift(re(-beta)), Error::EigenvalueCollision)?;
    let z0 = ev.z_matrix(R::zero(), u)?.value;
    let first = &(phi * &shifted) * &z0;
    let value = if collide {
        if !ev.is_spectral() {
            return Err(Error::EigenvalueCollision);
        }
        let dpsi1 = model.psi_prime(re(R::one()))?;
        let second = ev.lift(|k| {
            let q = k.q();
            let p = k.phi()?;
            let ratio = if (q - re(psi1)).norm() <= R::tol(LIMIT_STEP) * unit_scale(psi1) {
                -re(psi1) / dpsi1
            } else {
                q * (p - re(R::one())) / (re(psi1) - q)
            };
            Ok(ratio / (p - re(beta)) * ev.z_scalar(k, R::one(), u)?)
        })?;
        (&first + &second).bilinear(&v.alpha, &v.l).re
    } else {
        let z1 = ev.z_matrix(R::one(), u)?.value;
        let res = inverse_or(&(-ev.neg_generator()).shift(re(psi1)), Error::EigenvalueCollision)?;
        let second = &(&(&(ev.neg_generator() * &phi.shift(re(-R::one()))) * &shifted) * &res) * &z1;
        (&first + &second).bilinear(&v.alpha, &v.l).re
    };
    if value < -R::tol(PROBABILITY_TOL) {
        return Err(Error::ProbabilityOutOfRange(value.as_f64()));
    }
    Ok(value.max(R::zero()))
}

/// `P(τ_x⁺ < τ̂₀)` for a process observed at the epochs of a renewal process
/// with phase-type inter-arrival times:
/// `α e^{−Φ(−T)x}(I − ∫₀ˣ W₋T₋tα(y) tα e^{−Φ(−T)y} dy)⁻¹ 1`.
pub fn ph_observation_ruin<R: Real>(ev: &ScaleEval<R>, x: R) -> Result<R> {
    nonnegative("x", x)?;
    let horizon = ev.horizon()?;
    if !horizon.is_phase_type() {
        return Err(Error::NotPhaseType(
            "inter-observation law needs a probability vector and a sub-intensity matrix".into(),
        ));
    }
    let n = ev.dim();
    let alpha = horizon.alpha();
    let t = horizon.exit();
    let restart = Matrix::from_fn(n, |i, j| re(t[i] * alpha[j]));
    let augmented = ScaleEval::from_generator(ev.model().clone(), ev.neg_generator() - &restart)?;
    let phi = ev.phi_matrix()?.clone();
    let integral: Matrix<R> = if x == R::zero() {
        Matrix::zeros(n)
    } else {
        adaptive(
            |s: R| {
                let y = s * s;
                let m = &(&augmented.w_matrix(y)? * &restart) * &expm(&phi.scale_re(-y));
                Ok(m.scale_re(lit::<R>(2.0) * s))
            },
            R::zero(),
            x.sqrt(),
            QuadOptions {
                abs_tol: Z_QUAD_TOL,
                rel_tol: Z_QUAD_TOL,
                ..QuadOptions::default()
            },
        )?
    };
    let inner = inverse_or(
        &integral.scale_re(-R::one()).shift(re(R::one())),
        Error::SingularMatrix {
            pivot: 0.0,
            threshold: 0.0,
        },
    )?;
    let m = &exp_neg_phi(ev, x)? * &inner;
    let ones = vec![R::one(); n];
    clamp_probability(m.bilinear(alpha, &ones).re)
}
