//! Inversion of `h(θ)/(θ^α − q)` along the negative real axis for the
//! stable family.
//!
//! The Bromwich integral is deformed onto a keyhole around the branch cut.
//! What remains is a sum of pole residues (the root `Φ(q)` and, for α near 2,
//! secondary roots on the principal sheet) plus a real-line integral whose
//! integrand decays like `e^{−rx}`. Unlike the Taylor series this has no
//! cancellation for large `x`.

use num_traits::Zero;

use crate::error::Result;
use crate::quadrature::{adaptive, GaussLegendre, QuadOptions};
use crate::scalar::{cpowf, cx, lit, re, Cx, Real};

/// Multiplier `h(θ)` applied to the transform `1/(ψ(θ) − q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Weight {
    /// `W_q`.
    Value,
    /// `W′_q`.
    Derivative,
    /// `∫₀ˣ W_q`.
    Integral,
    /// `W′_q − Φ(q) W_q`.
    WhKernel,
    /// `W_q − Φ(q) ∫₀ˣ W_q`.
    Deficit,
}

impl Weight {
    fn eval<R: Real>(self, theta: Cx<R>, phi: Cx<R>) -> Cx<R> {
        match self {
            Weight::Value => re(R::one()),
            Weight::Derivative => theta,
            Weight::Integral => Cx::<R>::new(R::one(), R::zero()) / theta,
            Weight::WhKernel => theta - phi,
            Weight::Deficit => Cx::<R>::new(R::one(), R::zero()) - phi / theta,
        }
    }
}

/// Roots of `θ^α = q` on the principal sheet other than `Φ(q)`.
fn secondary_roots<R: Real>(alpha: R, q: Cx<R>, phi: Cx<R>) -> Vec<Cx<R>> {
    if alpha == lit(2.0) {
        return vec![-phi];
    }
    let modulus = q.norm().powf(R::one() / alpha);
    let arg = q.arg();
    let pi = R::PI();
    let mut out = Vec::new();
    for k in [-1.0, 1.0] {
        let a = (arg + lit::<R>(2.0 * k) * pi) / alpha;
        if a.abs() < pi - lit(1e-12) {
            out.push(Cx::from_polar(modulus, a));
        }
    }
    out
}

fn psi_prime<R: Real>(alpha: R, theta: Cx<R>) -> Cx<R> {
    cpowf(theta, alpha - R::one()) * alpha
}

/// Inverse transform of `h(θ)/(θ^α − q)` at `x > 0`; with `normalized` the
/// result is multiplied by `e^{−Φ(q)x}`.
pub(crate) fn invert<R: Real>(
    alpha: R,
    q: Cx<R>,
    phi: Cx<R>,
    x: R,
    weight: Weight,
    normalized: bool,
) -> Result<Cx<R>> {
    let phi_part = if matches!(weight, Weight::WhKernel | Weight::Deficit) {
        Cx::zero()
    } else {
        weight.eval(phi, phi) / psi_prime(alpha, phi)
    };
    let mut rest = Cx::<R>::zero();
    for theta in secondary_roots(alpha, q, phi) {
        rest += weight.eval(theta, phi) * (theta * x).exp() / psi_prime(alpha, theta);
    }
    match weight {
        Weight::Integral => rest -= Cx::<R>::new(R::one(), R::zero()) / q,
        Weight::Deficit => rest += phi / q,
        _ => {}
    }
    if alpha < lit(2.0) {
        rest += cut_integral(alpha, q, phi, x, weight)?;
    }
    if normalized {
        Ok(phi_part + rest * (-phi * x).exp())
    } else if phi_part.is_zero() {
        Ok(rest)
    } else {
        Ok(phi_part * (phi * x).exp() + rest)
    }
}

/// `(1/2πi) ∫₀^∞ h(−r) [F(re^{−iπ}) − F(re^{iπ})] e^{−rx} dr` with
/// `F(θ) = 1/(θ^α − q)`.
fn cut_integral<R: Real>(alpha: R, q: Cx<R>, phi: Cx<R>, x: R, weight: Weight) -> Result<Cx<R>> {
    let pi = R::PI();
    let up = Cx::from_polar(R::one(), pi * alpha);
    let down = up.conj();
    let integrand = |r: R| -> Result<Cx<R>> {
        if r == R::zero() {
            return Ok(Cx::zero());
        }
        let ra = r.powf(alpha);
        let jump = (up - down) * ra / ((down * ra - q) * (up * ra - q));
        Ok(weight.eval(re(-r), phi) * jump * (-r * x).exp())
    };
    let end = lit::<R>(45.0) / x;
    let rs = q.norm().powf(R::one() / alpha);
    let mut cuts = vec![R::zero(), end];
    for c in [
        rs / lit(8.0),
        rs / lit(2.0),
        rs,
        rs * lit(2.0),
        rs * lit(8.0),
        R::one() / x,
        lit::<R>(5.0) / x,
    ] {
        if c > R::zero() && c < end {
            cuts.push(c);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    cuts.dedup();
    // absolute tolerance relative to the integral of |integrand|
    let coarse = GaussLegendre::<R>::new(15);
    let mut mass = R::zero();
    for w in cuts.windows(2) {
        mass += coarse.integrate(|r| Ok(integrand(r)?.norm()), w[0], w[1])?;
    }
    let opts = QuadOptions {
        abs_tol: (mass * lit(1e-13)).max(R::min_positive_value()).as_f64(),
        rel_tol: 1e-12,
        order: 15,
        max_depth: 40,
    };
    let mut acc = Cx::<R>::zero();
    for w in cuts.windows(2) {
        acc += adaptive(integrand, w[0], w[1], opts)?;
    }
    Ok(acc / cx(R::zero(), lit::<R>(2.0) * pi))
}
