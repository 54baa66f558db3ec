//! Scale functions: scalar `W_q` for complex `q`, the matrix scale function
//! `W₋T`, its right derivative and the second scale function `Z₋T(θ, x)`.
//!
//! Matrix quantities are lifted from scalar kernels at the eigenvalues of
//! `−T` through the spectral projectors, with a Cauchy-integral fallback for
//! repeated eigenvalues.

mod hankel;
mod kernel;
mod oracle;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::levy::{LevyModel, PhiMatrix};
use crate::linalg::{eigenvalues, matfn_contour, matfn_series, AnalyticFn, Domain, Matrix, Spectrum, CONTOUR_NODES, SERIES_MAX_TERMS};
use crate::me::MeDist;
use crate::quadrature::{adaptive, QuadOptions};
use crate::scalar::{lit, re, Cx, Real};
use crate::special::{regularized_lower_gamma, MlSeries};

pub use kernel::{ScalarScale, ML_SWITCH, ROOT_SEPARATION_TOL};
pub use oracle::{w_matrix_series_oracle, ORACLE_TERM_TOL};

use kernel::StableSeries;

/// Imaginary residue allowed when a lifted matrix is made real.
pub const REALNESS_TOL: f64 = 1e-9;
/// Panel tolerance of the `Z` quadrature.
pub const Z_QUAD_TOL: f64 = 1e-10;

/// A model and a generator `−T`, with the per-eigenvalue kernels cached.
#[derive(Clone, Debug)]
pub struct ScaleEval<R: Real> {
    model: LevyModel<R>,
    horizon: Option<MeDist<R>>,
    neg_t: Matrix<R>,
    eigs: Vec<Cx<R>>,
    spectrum: Option<Spectrum<R>>,
    kernels: Vec<ScalarScale<R>>,
    series: Option<Arc<StableSeries<R>>>,
    phi: Option<PhiMatrix<R>>,
}

/// `Z₋T(θ, x)`.
#[derive(Clone, Debug)]
pub struct ZValue<R: Real> {
    pub theta: R,
    pub x: R,
    pub value: Matrix<R>,
}

impl<R: Real> ScaleEval<R> {
    /// Context for a model killed at `horizon`; computes `Φ(−T)`.
    pub fn new(model: LevyModel<R>, horizon: MeDist<R>) -> Result<Self> {
        let phi = model.phi_matrix(&horizon)?;
        let neg_t = -horizon.generator();
        let mut ev = Self::from_generator(model, neg_t)?;
        ev.phi = Some(phi);
        ev.horizon = Some(horizon);
        Ok(ev)
    }

    /// Context for an arbitrary matrix `−T` with spectrum in the closed right
    /// half-plane; `Φ(−T)` is not formed.
    pub fn from_generator(model: LevyModel<R>, neg_t: Matrix<R>) -> Result<Self> {
        let series = match &model {
            LevyModel::Stable { alpha } => Some(Arc::new(StableSeries::new(*alpha))),
            _ => None,
        };
        let (spectrum, eigs) = match Spectrum::new(&neg_t) {
            Ok(s) => {
                let e = s.eigenvalues().to_vec();
                (Some(s), e)
            }
            Err(Error::MultipleRoots { .. }) => (None, eigenvalues(&neg_t)?),
            Err(e) => return Err(e),
        };
        for l in &eigs {
            if l.re < -R::tol(1e-12) * l.norm().max(R::one()) {
                return Err(Error::DomainViolation {
                    re: l.re.as_f64(),
                    im: l.im.as_f64(),
                });
            }
        }
        let snap = R::tol(1e-12) * neg_t.norm_inf().max(R::one());
        let kernels = if spectrum.is_some() {
            eigs.iter()
                .map(|l| {
                    let q = if l.norm() <= snap {
                        Cx::new(R::zero(), R::zero())
                    } else if l.re < R::zero() {
                        Cx::new(R::zero(), l.im)
                    } else {
                        *l
                    };
                    ScalarScale::with_series(&model, q, series.as_ref())
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            model,
            horizon: None,
            neg_t,
            eigs,
            spectrum,
            kernels,
            series,
            phi: None,
        })
    }

    pub fn model(&self) -> &LevyModel<R> {
        &self.model
    }

    /// The horizon, when built by [`ScaleEval::new`].
    pub fn horizon(&self) -> Result<&MeDist<R>> {
        self.horizon
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("context has no horizon".into()))
    }

    pub fn neg_generator(&self) -> &Matrix<R> {
        &self.neg_t
    }

    pub fn dim(&self) -> usize {
        self.neg_t.dim()
    }

    /// Eigenvalues of `−T` with multiplicity.
    pub fn eigenvalues(&self) -> &[Cx<R>] {
        &self.eigs
    }

    /// Whether matrix functions use spectral projectors (simple spectrum).
    pub fn is_spectral(&self) -> bool {
        self.spectrum.is_some()
    }

    /// `Φ(−T)` with its residual.
    pub fn phi(&self) -> Result<&PhiMatrix<R>> {
        self.phi
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("context has no horizon".into()))
    }

    pub fn phi_matrix(&self) -> Result<&Matrix<R>> {
        Ok(&self.phi()?.value)
    }

    /// `W_q(0)`: `1/d` for bounded variation with drift `d`, else 0.
    pub fn drift_constant(&self) -> R {
        self.model.drift_constant()
    }

    /// Scalar kernel at an arbitrary `q`.
    pub fn kernel(&self, q: Cx<R>) -> Result<ScalarScale<R>> {
        ScalarScale::with_series(&self.model, q, self.series.as_ref())
    }

    /// Cached kernels at the eigenvalues of `−T` (empty without a simple
    /// spectrum).
    pub fn kernels(&self) -> &[ScalarScale<R>] {
        &self.kernels
    }

    /// `f(−T)` for a function given through the scalar kernels, as a real
    /// matrix.
    pub fn lift(&self, f: impl Fn(&ScalarScale<R>) -> Result<Cx<R>> + Send + Sync) -> Result<Matrix<R>> {
        let m = match &self.spectrum {
            Some(spec) => {
                let values = self.kernels.iter().map(&f).collect::<Result<Vec<_>>>()?;
                spec.combine(&values)
            }
            None => {
                let g = AnalyticFn::fallible(Domain::RightHalfPlane, |q| f(&self.kernel(q)?));
                matfn_contour(&self.neg_t, &self.eigs, &g, CONTOUR_NODES)?
            }
        };
        m.realify(R::tol(REALNESS_TOL))
    }

    /// `W_q(x)`.
    pub fn w_scalar(&self, q: Cx<R>, x: R) -> Result<Cx<R>> {
        self.kernel(q)?.w(x)
    }

    /// `W₋T(x)`.
    pub fn w_matrix(&self, x: R) -> Result<Matrix<R>> {
        self.lift(|k| k.w(x))
    }

    /// Right derivative `W′₋T(x)`; [`Error::SingularAtZero`] at `x = 0` for
    /// unbounded variation with a singular derivative.
    pub fn w_prime_matrix(&self, x: R) -> Result<Matrix<R>> {
        self.lift(|k| k.w_prime(x))
    }

    /// `∫₀ˣ W₋T(y) dy`.
    pub fn w_integral_matrix(&self, x: R) -> Result<Matrix<R>> {
        self.lift(|k| k.w_integral(x))
    }

    /// `W₋T(x) − Φ(−T) ∫₀ˣ W₋T`, bounded for large `x`.
    pub fn w_deficit_matrix(&self, x: R) -> Result<Matrix<R>> {
        self.lift(|k| k.w_deficit(x))
    }

    /// `e^{−Φ(−T)x} W₋T(x)`, bounded for large `x`.
    pub fn w_normalized(&self, x: R) -> Result<Matrix<R>> {
        self.lift(|k| k.w_normalized(x))
    }

    /// `W′₋T(y) − Φ(−T) W₋T(y)`.
    pub fn wh_kernel_matrix(&self, y: R) -> Result<Matrix<R>> {
        self.lift(|k| k.wh_kernel(y))
    }

    /// `∫₀ˣ e^{−θy} W₋T(y) dy` by adaptive Gauss–Legendre in `y = s²`.
    pub fn discounted_w_integral(&self, theta: R, x: R) -> Result<Matrix<R>> {
        if x == R::zero() {
            return Ok(Matrix::zeros(self.dim()));
        }
        adaptive(
            |s: R| {
                let y = s * s;
                Ok(self.w_matrix(y)?.scale_re((-theta * y).exp() * lit::<R>(2.0) * s))
            },
            R::zero(),
            x.sqrt(),
            QuadOptions {
                abs_tol: Z_QUAD_TOL,
                rel_tol: Z_QUAD_TOL,
                ..QuadOptions::default()
            },
        )
    }

    /// `Z₋T(θ, x) = e^{θx}(I − (ψ(θ)I + T) ∫₀ˣ e^{−θy} W₋T(y) dy)` for real
    /// `θ ≥ 0`. At `θ = 0` the integral is taken in closed form.
    pub fn z_matrix(&self, theta: R, x: R) -> Result<ZValue<R>> {
        if !(theta >= R::zero()) || !(x >= R::zero()) {
            return Err(Error::InvalidParameter(format!(
                "Z needs θ ≥ 0 and x ≥ 0, got θ = {theta}, x = {x}"
            )));
        }
        let n = self.dim();
        let value = if x == R::zero() {
            Matrix::identity(n)
        } else if theta == R::zero() {
            let mut z = &self.neg_t * &self.w_integral_matrix(x)?;
            z = z.shift(re(R::one()));
            z
        } else {
            let integral = self.discounted_w_integral(theta, x)?;
            let psi = self.model.psi(re(theta))?;
            let resolvent = (-&self.neg_t).shift(psi);
            let inner = (&resolvent * &integral).scale_re(-R::one()).shift(re(R::one()));
            inner.scale_re((theta * x).exp())
        };
        Ok(ZValue { theta, x, value })
    }

    /// Scalar `Z_q(θ, x)` for the kernel `k` at rate `q`.
    pub fn z_scalar(&self, k: &ScalarScale<R>, theta: R, x: R) -> Result<Cx<R>> {
        let q = k.q();
        if x == R::zero() {
            return Ok(re(R::one()));
        }
        if theta == R::zero() {
            return Ok(re(R::one()) + q * k.w_integral(x)?);
        }
        let integral = adaptive(
            |s: R| {
                let y = s * s;
                Ok(k.w(y)? * ((-theta * y).exp() * lit::<R>(2.0) * s))
            },
            R::zero(),
            x.sqrt(),
            QuadOptions {
                abs_tol: Z_QUAD_TOL,
                rel_tol: Z_QUAD_TOL,
                ..QuadOptions::default()
            },
        )?;
        let psi = self.model.psi(re(theta))?;
        Ok((re(R::one()) - (psi - q) * integral) * (theta * x).exp())
    }

    /// Transform `(ψ(θ)I + T)⁻¹` of `W₋T` at real `θ`.
    pub fn resolvent(&self, theta: R) -> Result<Matrix<R>> {
        let psi = self.model.psi(re(theta))?;
        crate::linalg::inverse(&(-&self.neg_t).shift(psi))
    }

    fn stable_alpha(&self) -> Result<R> {
        match self.model {
            LevyModel::Stable { alpha } => Ok(alpha),
            _ => Err(Error::InvalidParameter("stable family required".into())),
        }
    }

    /// Stable family: `Z₋T(0, x) = E_{α,1}(−T x^α)`.
    pub fn stable_z_zero(&self, x: R) -> Result<Matrix<R>> {
        let alpha = self.stable_alpha()?;
        let ml = MlSeries::new(alpha, R::one());
        let xa = x.powf(alpha);
        self.lift(|k| Ok(ml.estimate(k.q() * xa)?.value))
    }

    /// Stable family: `Z₋T(θ, x)` through the incomplete-gamma series for
    /// `∫₀ˣ e^{−θy} W₋T(y) dy`, `θ > 0`.
    pub fn stable_z_series(&self, theta: R, x: R) -> Result<Matrix<R>> {
        let alpha = self.stable_alpha()?;
        if !(theta > R::zero()) {
            return Err(Error::InvalidParameter("series route needs θ > 0".into()));
        }
        let scale = theta.powf(-alpha);
        let m = self.neg_t.scale_re(scale);
        let y = theta * x;
        let sum = matfn_series(
            &m,
            |n| re(regularized_lower_gamma(alpha * lit::<R>(n as f64) + alpha, y)),
            R::epsilon(),
            None,
            SERIES_MAX_TERMS,
        )?;
        let integral = sum.scale_re(scale);
        let psi = self.model.psi(re(theta))?;
        let resolvent = (-&self.neg_t).shift(psi);
        let inner = (&resolvent * &integral).scale_re(-R::one()).shift(re(R::one()));
        inner.scale_re((theta * x).exp()).realify(R::tol(REALNESS_TOL))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sec7() -> MeDist<f64> {
        MeDist::new(
            vec![-8.0 / 9.0, -34.0 / 9.0, 17.0 / 3.0],
            vec![
                vec![0.0, -17.0, 17.0],
                vec![3.0, 2.0, -6.0],
                vec![2.0, 2.0, -5.0],
            ],
            vec![0.0, 1.0, 1.0],
        )
        .unwrap()
    }

    fn stable_ev() -> ScaleEval<f64> {
        ScaleEval::new(LevyModel::stable(1.5).unwrap(), sec7()).unwrap()
    }

    #[test]
    fn zero_at_origin_for_unbounded_variation() {
        let ev = stable_ev();
        assert!(ev.w_matrix(0.0).unwrap().max_abs() == 0.0);
        assert_eq!(ev.z_matrix(1.0, 0.0).unwrap().value, Matrix::identity(3));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let ev = stable_ev();
        let h = 1e-5;
        let fd = (&ev.w_matrix(0.7 + h).unwrap() - &ev.w_matrix(0.7 - h).unwrap()).scale_re(0.5 / h);
        assert!(fd.max_abs_diff(&ev.w_prime_matrix(0.7).unwrap()) < 1e-5);
    }

    #[test]
    fn z_routes_agree() {
        let ev = stable_ev();
        let quad = ev.z_matrix(1.0, 0.5).unwrap().value;
        let series = ev.stable_z_series(1.0, 0.5).unwrap();
        assert!(quad.max_abs_diff(&series) < 1e-7, "{}", quad.max_abs_diff(&series));
        let z0 = ev.z_matrix(0.0, 0.8).unwrap().value;
        assert!(z0.max_abs_diff(&ev.stable_z_zero(0.8).unwrap()) < 1e-10);
    }

    #[test]
    fn integral_identity() {
        let ev = stable_ev();
        let x = 0.9;
        let lhs = ev.w_integral_matrix(x).unwrap();
        let z = ev.z_matrix(0.0, x).unwrap().value.shift(Cx::new(-1.0, 0.0));
        let rhs = &z * &crate::linalg::inverse(ev.neg_generator()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-8);
    }

    #[test]
    fn normalized_matches_plain_and_stays_bounded() {
        let ev = stable_ev();
        let phi = ev.phi_matrix().unwrap().clone();
        for x in [0.5, 2.0] {
            let plain = &crate::linalg::expm(&phi.scale_re(-x)) * &ev.w_matrix(x).unwrap();
            assert!(plain.max_abs_diff(&ev.w_normalized(x).unwrap()) < 1e-8);
        }
        assert!(ev.w_normalized(40.0).unwrap().max_abs() < 10.0);
    }

    #[test]
    fn repeated_eigenvalues_use_contour() {
        let ev = ScaleEval::new(
            LevyModel::brownian(1.0, 0.5).unwrap(),
            MeDist::<f64>::erlang(2, 3.0).unwrap(),
        )
        .unwrap();
        assert!(!ev.is_spectral());
        // checked through the transform at θ = 5
        let theta = 5.0;
        let big: Matrix<f64> = adaptive(
            |x: f64| Ok(ev.w_matrix(x)?.scale_re((-theta * x).exp())),
            0.0,
            25.0,
            QuadOptions::default(),
        )
        .unwrap();
        assert!(big.max_abs_diff(&ev.resolvent(theta).unwrap()) < 1e-8);
    }
}
