//! Spectrally negative Lévy models: Laplace exponent `ψ`, its right
//! inverse `Φ` and the matrix exponent `Φ(−T)`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{inverse, matfn, matfn_real, AnalyticFn, Domain, Matrix, Poly};
use crate::me::MeDist;
use crate::scalar::{cpowf, lit, re, Cx, Real};

/// Homotopy steps for complex `Φ(q)`, and the retry count.
pub const HOMOTOPY_STEPS: usize = 16;
pub const HOMOTOPY_RETRY_STEPS: usize = 64;
/// Residual bound for `ψ(Φ(−T)) + T`, relative to `max(1, ‖T‖∞)`.
pub const PHI_RESIDUAL_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub enum LevyModel<R: Real> {
    /// `ψ(θ) = σ²θ²/2 + γθ`.
    BrownianDrift { sigma: R, gamma: R },
    /// `ψ(θ) = σ²θ²/2 + cθ − λ(1 − E e^{−θJ})` with ME jump sizes `J`.
    CramerLundberg {
        premium: R,
        intensity: R,
        jumps: MeDist<R>,
        sigma: R,
    },
    /// `ψ(θ) = θ^α`.
    Stable { alpha: R },
}

impl<R: Real> LevyModel<R> {
    pub fn brownian(sigma: R, gamma: R) -> Result<Self> {
        if !(sigma >= R::zero()) || !gamma.is_finite() || !sigma.is_finite() {
            return Err(Error::InvalidParameter("σ must be a nonnegative number".into()));
        }
        if sigma == R::zero() && !(gamma > R::zero()) {
            return Err(Error::InvalidParameter(
                "a driftless or decreasing path needs σ > 0".into(),
            ));
        }
        Ok(Self::BrownianDrift { sigma, gamma })
    }

    pub fn cramer_lundberg(premium: R, intensity: R, jumps: MeDist<R>, sigma: R) -> Result<Self> {
        if !(premium > R::zero()) {
            return Err(Error::InvalidParameter("premium rate must be positive".into()));
        }
        if !(intensity >= R::zero()) || !(sigma >= R::zero()) {
            return Err(Error::InvalidParameter(
                "jump intensity and σ must be nonnegative".into(),
            ));
        }
        if (jumps.defect() - R::one()).abs() > R::tol(1e-9) {
            return Err(Error::InvalidParameter("jump law must have unit mass".into()));
        }
        Ok(Self::CramerLundberg {
            premium,
            intensity,
            jumps,
            sigma,
        })
    }

    pub fn stable(alpha: R) -> Result<Self> {
        if !(alpha > R::one() && alpha <= lit(2.0)) {
            return Err(Error::InvalidParameter(format!(
                "stable index {alpha} outside (1, 2]"
            )));
        }
        Ok(Self::Stable { alpha })
    }

    pub fn is_bounded_variation(&self) -> bool {
        match self {
            Self::BrownianDrift { sigma, .. } | Self::CramerLundberg { sigma, .. } => {
                *sigma == R::zero()
            }
            Self::Stable { .. } => false,
        }
    }

    /// `W_q(0) = 1/d` for bounded variation with drift `d`, else `0`.
    pub fn drift_constant(&self) -> R {
        match self {
            Self::BrownianDrift { sigma, gamma } if *sigma == R::zero() => R::one() / *gamma,
            Self::CramerLundberg { sigma, premium, .. } if *sigma == R::zero() => {
                R::one() / *premium
            }
            _ => R::zero(),
        }
    }

    pub fn psi(&self, theta: Cx<R>) -> Result<Cx<R>> {
        match self {
            Self::BrownianDrift { sigma, gamma } => {
                Ok(theta * theta * (*sigma * *sigma / lit(2.0)) + theta * *gamma)
            }
            Self::CramerLundberg {
                premium,
                intensity,
                jumps,
                sigma,
            } => {
                let base = theta * theta * (*sigma * *sigma / lit(2.0)) + theta * *premium;
                if *intensity == R::zero() {
                    return Ok(base);
                }
                let lt = jumps.laplace(theta)?;
                Ok(base - (re(R::one()) - lt) * *intensity)
            }
            Self::Stable { alpha } => {
                if theta.im == R::zero() && theta.re < R::zero() {
                    return Err(Error::BranchCut);
                }
                Ok(cpowf(theta, *alpha))
            }
        }
    }

    pub fn psi_prime(&self, theta: Cx<R>) -> Result<Cx<R>> {
        match self {
            Self::BrownianDrift { sigma, gamma } => Ok(theta * (*sigma * *sigma) + re(*gamma)),
            Self::CramerLundberg {
                premium,
                intensity,
                jumps,
                sigma,
            } => {
                let base = theta * (*sigma * *sigma) + re(*premium);
                if *intensity == R::zero() {
                    return Ok(base);
                }
                Ok(base + jumps.laplace_derivative(theta)? * *intensity)
            }
            Self::Stable { alpha } => {
                if theta.im == R::zero() && theta.re <= R::zero() {
                    return Err(Error::BranchCut);
                }
                Ok(cpowf(theta, *alpha - R::one()) * *alpha)
            }
        }
    }

    /// `ψ(θ) − q = P(θ)/D(θ)` for the rational families.
    pub fn rational_parts(&self, q: Cx<R>) -> Option<(Poly<R>, Poly<R>)> {
        let quad = |sigma: R, drift: R, shift: Cx<R>| {
            let mut c = vec![-shift, re(drift)];
            if sigma != R::zero() {
                c.push(re(sigma * sigma / lit(2.0)));
            }
            Poly::new(c)
        };
        match self {
            Self::BrownianDrift { sigma, gamma } => {
                Some((quad(*sigma, *gamma, q), Poly::new(vec![re(R::one())])))
            }
            Self::CramerLundberg {
                premium,
                intensity,
                jumps,
                sigma,
            } => {
                if *intensity == R::zero() {
                    return Some((quad(*sigma, *premium, q), Poly::new(vec![re(R::one())])));
                }
                let (num, den) = jumps.laplace_rational();
                let head = quad(*sigma, *premium, q + re(*intensity));
                let p = head.mul(&den).add(&num.scale(re(*intensity)));
                Some((p, den))
            }
            Self::Stable { .. } => None,
        }
    }

    /// Minimiser of `ψ` on `[0, ∞)`.
    fn psi_argmin(&self) -> Result<R> {
        let d0 = self.psi_prime(re(R::epsilon()))?;
        if d0.re >= R::zero() {
            return Ok(R::zero());
        }
        let mut hi = R::one();
        while self.psi_prime(re(hi))?.re < R::zero() {
            hi = hi * lit(2.0);
            if hi > lit(1e12) {
                return Err(Error::NoConvergence("ψ has no minimiser".into()));
            }
        }
        let mut lo = R::zero();
        for _ in 0..200 {
            let mid = (lo + hi) / lit(2.0);
            if self.psi_prime(re(mid))?.re < R::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    fn phi_real(&self, q: R) -> Result<R> {
        if q < R::zero() {
            return Err(Error::InvalidParameter(format!("q = {q} must be nonnegative")));
        }
        let lo0 = self.psi_argmin()?;
        if q == R::zero() && lo0 == R::zero() {
            return Ok(R::zero());
        }
        let f = |x: R| -> Result<R> { Ok(self.psi(re(x))?.re - q) };
        let mut lo = lo0;
        let mut hi = (lo0 * lit(2.0)).max(R::one());
        while f(hi)? < R::zero() {
            lo = hi;
            hi = hi * lit(2.0);
            if hi > lit(1e15) {
                return Err(Error::NoConvergence("ψ does not reach q".into()));
            }
        }
        for _ in 0..100 {
            let mid = (lo + hi) / lit(2.0);
            if f(mid)? < R::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= R::tol(1e-6) * hi {
                break;
            }
        }
        let mut x = (lo + hi) / lit(2.0);
        for _ in 0..50 {
            let d = self.psi_prime(re(x))?.re;
            if d <= R::zero() {
                break;
            }
            let step = f(x)? / d;
            let cand = x - step;
            if !(cand > lo0) {
                break;
            }
            x = cand;
            if step.abs() <= R::epsilon() * lit(4.0) * x.max(R::one()) {
                break;
            }
        }
        Ok(x)
    }

    fn newton(&self, mut theta: Cx<R>, q: Cx<R>) -> Result<Cx<R>> {
        for _ in 0..60 {
            let d = self.psi_prime(theta)?;
            if d.is_zero() {
                return Err(Error::NoConvergence("ψ′ vanished in Newton step".into()));
            }
            let step = (self.psi(theta)? - q) / d;
            theta -= step;
            if step.norm() <= R::epsilon() * lit(8.0) * theta.norm().max(R::one()) {
                break;
            }
        }
        Ok(theta)
    }

    fn phi_homotopy(&self, q: Cx<R>, steps: usize) -> Result<Cx<R>> {
        let start = q.norm();
        let mut theta = re(self.phi_real(start)?);
        let guard = -R::tol(1e-12) * start.max(R::one());
        for k in 1..=steps {
            let s = lit::<R>(k as f64) / lit(steps as f64);
            let qs = re(start) + (q - re(start)) * s;
            theta = self.newton(theta, qs)?;
            if !(theta.re > guard) || !theta.re.is_finite() {
                return Err(Error::LeftHalfPlane);
            }
        }
        let resid = (self.psi(theta)? - q).norm();
        if !(resid <= R::tol(1e-10) * q.norm().max(R::one())) {
            return Err(Error::NoConvergence(format!(
                "ψ(Φ(q)) − q residual {:e}",
                resid.as_f64()
            )));
        }
        Ok(theta)
    }

    /// Right inverse `Φ(q)`, the root of `ψ(θ) = q` with `Re θ > 0`.
    pub fn phi(&self, q: Cx<R>) -> Result<Cx<R>> {
        if q.re < R::zero() || (q.re == R::zero() && q.im != R::zero()) {
            return Err(Error::DomainViolation {
                re: q.re.as_f64(),
                im: q.im.as_f64(),
            });
        }
        if q.im == R::zero() {
            return Ok(re(self.phi_real(q.re)?));
        }
        match self.phi_homotopy(q, HOMOTOPY_STEPS) {
            Ok(v) => Ok(v),
            Err(Error::LeftHalfPlane) | Err(Error::NoConvergence(_)) => {
                self.phi_homotopy(q, HOMOTOPY_RETRY_STEPS)
            }
            Err(e) => Err(e),
        }
    }

    /// `ψ(M)` by matrix arithmetic for the rational families and through the
    /// spectrum of `M` for the stable family.
    pub fn psi_matrix(&self, m: &Matrix<R>) -> Result<Matrix<R>> {
        let n = m.dim();
        match self {
            Self::BrownianDrift { sigma, gamma } => {
                let mut out = (m * m).scale_re(*sigma * *sigma / lit(2.0));
                out.axpy(re(*gamma), m);
                Ok(out)
            }
            Self::CramerLundberg {
                premium,
                intensity,
                jumps,
                sigma,
            } => {
                let mut out = (m * m).scale_re(*sigma * *sigma / lit(2.0));
                out.axpy(re(*premium), m);
                if *intensity == R::zero() {
                    return Ok(out);
                }
                // L(M) = (α ⊗ I)(I ⊗ M − T_J ⊗ I)⁻¹(t ⊗ I)
                let pj = jumps.dim();
                let tj = jumps.generator();
                let big = Matrix::from_fn(pj * n, |r, c| {
                    let (a, i) = (r / n, r % n);
                    let (b, j) = (c / n, c % n);
                    let mut v = if i == j { -tj[(a, b)] } else { Cx::zero() };
                    if a == b {
                        v += m[(i, j)];
                    }
                    v
                });
                let inv = inverse(&big)?;
                let mut lt = Matrix::zeros(n);
                for a in 0..pj {
                    for b in 0..pj {
                        let w = jumps.alpha()[a] * jumps.exit()[b];
                        if w == R::zero() {
                            continue;
                        }
                        let block = Matrix::from_fn(n, |i, j| inv[(a * n + i, b * n + j)]);
                        lt.axpy(re(w), &block);
                    }
                }
                out = out.shift(re(-*intensity));
                out.axpy(re(*intensity), &lt);
                Ok(out)
            }
            Self::Stable { alpha } => {
                let a = *alpha;
                matfn(m, &AnalyticFn::new(Domain::CutPlane, move |z: Cx<R>| z.powf(a)))
            }
        }
    }

    /// `Φ(−T)` with its residual `‖ψ(Φ(−T)) + T‖∞`.
    pub fn phi_matrix(&self, horizon: &MeDist<R>) -> Result<PhiMatrix<R>> {
        let neg_t = -horizon.generator();
        let f = AnalyticFn::fallible(Domain::RightHalfPlane, |q| self.phi(q));
        let value = matfn_real(&neg_t, &f)?;
        let back = self.psi_matrix(&value)?;
        let residual = (&back - &neg_t).norm_inf();
        let threshold = R::tol(PHI_RESIDUAL_TOL) * neg_t.norm_inf().max(R::one());
        if !(residual <= threshold) {
            return Err(Error::ResidualTooLarge {
                residual: residual.as_f64(),
                threshold: threshold.as_f64(),
            });
        }
        Ok(PhiMatrix { value, residual })
    }
}

/// `Φ(−T)` for a horizon, with its residual.
#[derive(Clone, Debug)]
pub struct PhiMatrix<R: Real> {
    pub value: Matrix<R>,
    pub residual: R,
}

impl<R: Real> PhiMatrix<R> {
    /// `−Φ(−T)` has nonnegative off-diagonals and nonpositive row sums.
    pub fn is_sub_intensity(&self, tol: R) -> bool {
        let n = self.value.dim();
        (0..n).all(|i| {
            let mut row = R::zero();
            for j in 0..n {
                let g = -self.value.re(i, j);
                if i != j && g < -tol {
                    return false;
                }
                row += g;
            }
            row <= tol
        })
    }
}
