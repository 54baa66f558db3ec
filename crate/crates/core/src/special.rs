//! Gamma, incomplete gamma and Mittag-Leffler functions.

use std::sync::OnceLock;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Spectrum};
use crate::scalar::{lit, re, Cx, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<R: Real>(x: R) -> R {
    if x < lit(0.5) {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let s = (R::PI() * x).sin().abs();
        return R::PI().ln() - s.ln() - ln_gamma(R::one() - x);
    }
    let x = x - R::one();
    let mut a = lit::<R>(LANCZOS[0]);
    let t = x + lit(LANCZOS_G + 0.5);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += lit::<R>(*c) / (x + lit(i as f64));
    }
    lit::<R>(0.5) * R::TAU().ln() + (x + lit(0.5)) * t.ln() - t + a.ln()
}

/// `Γ(x)` for real `x` away from the poles.
pub fn gamma<R: Real>(x: R) -> R {
    if x < lit(0.5) {
        return R::PI() / ((R::PI() * x).sin() * gamma(R::one() - x));
    }
    ln_gamma(x).exp()
}

/// Lower incomplete gamma `γ(β, y) = ∫₀^y s^{β−1}e^{−s} ds`.
pub fn lower_incomplete_gamma<R: Real>(beta: R, y: R) -> R {
    assert!(beta > R::zero(), "shape must be positive");
    if y <= R::zero() {
        return R::zero();
    }
    let log_prefactor = beta * y.ln() - y;
    if y < beta + R::one() {
        return gamma_series(beta, y) * log_prefactor.exp();
    }
    gamma(beta) - log_prefactor.exp() * gamma_continued_fraction(beta, y)
}

/// Regularized lower incomplete gamma `γ(β, y)/Γ(β)`, safe for large `β`.
pub fn regularized_lower_gamma<R: Real>(beta: R, y: R) -> R {
    assert!(beta > R::zero(), "shape must be positive");
    if y <= R::zero() {
        return R::zero();
    }
    let log_prefactor = beta * y.ln() - y - ln_gamma(beta);
    if y < beta + R::one() {
        return gamma_series(beta, y) * log_prefactor.exp();
    }
    R::one() - log_prefactor.exp() * gamma_continued_fraction(beta, y)
}

/// `Σ yⁿ/(β(β+1)…(β+n))`.
fn gamma_series<R: Real>(beta: R, y: R) -> R {
    let mut term = R::one() / beta;
    let mut sum = term;
    let mut b = beta;
    for _ in 0..10_000 {
        b += R::one();
        term *= y / b;
        sum += term;
        if term.abs() < sum.abs() * R::epsilon() {
            break;
        }
    }
    sum
}

/// Lentz continued fraction for `Γ(β, y) e^{y} y^{−β}`.
fn gamma_continued_fraction<R: Real>(beta: R, y: R) -> R {
    let tiny = R::min_positive_value() / R::epsilon();
    let mut b = y + R::one() - beta;
    let mut c = R::one() / tiny;
    let mut d = R::one() / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -lit::<R>(i as f64) * (lit::<R>(i as f64) - beta);
        b += lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = R::one() / d;
        let delta = d * c;
        h *= delta;
        if (delta - R::one()).abs() < R::epsilon() {
            break;
        }
    }
    h
}

/// Default relative cancellation bound for [`mittag_leffler`].
pub const ML_CANCELLATION_TOL: f64 = 1e-8;
const ML_CACHED_TERMS: usize = 512;
const ML_MAX_TERMS: usize = 20_000;

/// Mittag-Leffler value with an absolute rounding-error estimate.
#[derive(Clone, Copy, Debug)]
pub struct MlValue<R: Real> {
    pub value: Cx<R>,
    pub error: R,
}

impl<R: Real> MlValue<R> {
    /// `error / |value|`.
    pub fn cancellation(&self) -> R {
        let v = self.value.norm();
        if v == R::zero() {
            if self.error == R::zero() {
                R::zero()
            } else {
                R::infinity()
            }
        } else {
            self.error / v
        }
    }
}

/// Taylor series of `E_{α,β}` with cached `ln Γ(αn + β)`.
#[derive(Debug)]
pub struct MlSeries<R: Real> {
    alpha: R,
    beta: R,
    log_coeff: OnceLock<Vec<R>>,
}

impl<R: Real> Clone for MlSeries<R> {
    fn clone(&self) -> Self {
        Self::new(self.alpha, self.beta)
    }
}

impl<R: Real> MlSeries<R> {
    pub fn new(alpha: R, beta: R) -> Self {
        assert!(alpha > R::zero() && beta > R::zero(), "ML parameters must be positive");
        Self {
            alpha,
            beta,
            log_coeff: OnceLock::new(),
        }
    }

    pub fn alpha(&self) -> R {
        self.alpha
    }

    pub fn beta(&self) -> R {
        self.beta
    }

    fn log_gamma_term(&self, n: usize) -> R {
        let cache = self.log_coeff.get_or_init(|| {
            (0..ML_CACHED_TERMS)
                .map(|k| ln_gamma(self.alpha * lit(k as f64) + self.beta))
                .collect()
        });
        match cache.get(n) {
            Some(v) => *v,
            None => ln_gamma(self.alpha * lit(n as f64) + self.beta),
        }
    }

    /// `n`-th Taylor coefficient `1/Γ(αn + β)`.
    pub fn coeff(&self, n: usize) -> R {
        (-self.log_gamma_term(n)).exp()
    }

    /// Sum with a rounding-error estimate; never fails on cancellation.
    pub fn estimate(&self, z: Cx<R>) -> Result<MlValue<R>> {
        if z.is_zero() {
            return Ok(MlValue {
                value: re(self.coeff(0)),
                error: R::zero(),
            });
        }
        let log_z = z.ln();
        let stop = lit::<R>(1e-16).max(R::epsilon());
        // Kahan-compensated complex sum
        let mut sum = Cx::zero();
        let mut comp = Cx::zero();
        let mut abs_sum = R::zero();
        let mut quiet = 0;
        let mut prev_mag = R::infinity();
        for n in 0..ML_MAX_TERMS {
            let log_mag = log_z * lit::<R>(n as f64) - re(self.log_gamma_term(n));
            let term = log_mag.exp();
            let mag = term.norm();
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            abs_sum += mag;
            if mag <= stop * sum.norm() && mag <= prev_mag {
                quiet += 1;
                if quiet >= 3 {
                    let error = R::epsilon() * lit(4.0) * abs_sum;
                    if !sum.re.is_finite() || !sum.im.is_finite() {
                        return Err(Error::NonFinite("Mittag-Leffler sum".into()));
                    }
                    return Ok(MlValue { value: sum, error });
                }
            } else {
                quiet = 0;
            }
            prev_mag = mag;
            if !mag.is_finite() {
                return Err(Error::NonFinite("Mittag-Leffler term".into()));
            }
        }
        Err(Error::NoConvergence(format!(
            "Mittag-Leffler series at |z| = {}",
            z.norm()
        )))
    }

    /// Sum, failing with [`Error::CancellationWarning`] when the estimated
    /// relative rounding error exceeds [`ML_CANCELLATION_TOL`].
    pub fn eval(&self, z: Cx<R>) -> Result<Cx<R>> {
        let v = self.estimate(z)?;
        let c = v.cancellation();
        if c > R::tol(ML_CANCELLATION_TOL) {
            return Err(Error::CancellationWarning(c.as_f64()));
        }
        Ok(v.value)
    }
}

/// `E_{α,β}(z)`.
pub fn mittag_leffler<R: Real>(alpha: R, beta: R, z: Cx<R>) -> Result<Cx<R>> {
    MlSeries::new(alpha, beta).eval(z)
}

/// `E_{α,β}(M)` via the spectrum of `M`.
pub fn mittag_leffler_matrix<R: Real>(
    alpha: R,
    beta: R,
    spec: &Spectrum<R>,
) -> Result<Matrix<R>> {
    let ml = MlSeries::new(alpha, beta);
    spec.apply(|z| ml.eval(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matfn_series, SERIES_MAX_TERMS};

    fn c(x: f64) -> Cx<f64> {
        Cx::new(x, 0.0)
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(5.0f64) - 24.0).abs() < 1e-12);
        assert!((gamma(0.5f64) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gamma(0.3f64) - 2.991_568_987_687_590_7).abs() < 1e-13);
        assert!((ln_gamma(50.5f64) - 146.519_255_490_720_63).abs() < 1e-11);
    }

    #[test]
    fn ml_reduces_to_exp_and_cosh() {
        let e = mittag_leffler(1.0, 1.0, c(1.0)).unwrap();
        assert!((e.re - 1f64.exp()).abs() < 1e-14);
        let ch = mittag_leffler(2.0, 1.0, c(4.0)).unwrap();
        assert!((ch.re - 2f64.cosh()).abs() < 1e-13);
    }

    /// Error-free two-sum accumulator.
    fn dd_add(hi: &mut f64, lo: &mut f64, x: f64) {
        let s = *hi + x;
        let bp = s - *hi;
        let err = (*hi - (s - bp)) + (x - bp);
        *hi = s;
        *lo += err;
    }

    #[test]
    fn ml_matches_double_double_oracle() {
        // term-by-term oracle: Γ by the recurrence Γ(x+1) = xΓ(x) from
        // the two seeds Γ(1.5) and Γ(3)
        let mut hi = 0.0;
        let mut lo = 0.0;
        let seeds = [std::f64::consts::PI.sqrt() / 2.0, 2.0];
        for n in 0..200usize {
            let arg = 1.5 * n as f64 + 1.5;
            let (mut g, mut x) = if n % 2 == 0 { (seeds[0], 1.5) } else { (seeds[1], 3.0) };
            while x < arg - 0.5 {
                g *= x;
                x += 1.0;
            }
            if !g.is_finite() {
                break;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            dd_add(&mut hi, &mut lo, sign / g);
        }
        let oracle = hi + lo;
        let v = mittag_leffler(1.5, 1.5, c(-1.0)).unwrap();
        assert!((v.re - oracle).abs() < 1e-10);
        // reference to 40 digits
        assert!((v.re - 0.706_528_037_064_175_8).abs() < 1e-13);
    }

    #[test]
    fn ml_recurrence() {
        let zs = [c(-2.5), Cx::new(1.0, 2.0), Cx::new(-3.0, -0.5)];
        for z in zs {
            let lhs = mittag_leffler(1.5, 0.7, z).unwrap();
            let rhs = z * mittag_leffler(1.5, 2.2, z).unwrap() + 1.0 / gamma(0.7);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn ml_cancellation_is_flagged() {
        let err = mittag_leffler(1.5, 1.0, c(-200.0)).unwrap_err();
        assert!(matches!(err, Error::CancellationWarning(_)));
        let est = MlSeries::new(1.5, 1.0).estimate(c(-200.0)).unwrap();
        assert!(est.error > 0.0);
    }

    #[test]
    fn ml_matrix_zero_and_diagonal() {
        let s = Spectrum::new(&Matrix::diag(&[c(0.0), c(1.0)])).unwrap();
        let m = mittag_leffler_matrix(1.5, 1.5, &s).unwrap();
        assert!((m.re(0, 0) - 1.0 / gamma(1.5)).abs() < 1e-14);
        assert!((m.re(1, 1) - mittag_leffler(1.5, 1.5, c(1.0)).unwrap().re).abs() < 1e-14);
        assert!(m.re(0, 1).abs() < 1e-14);
    }

    #[test]
    fn ml_matrix_spectral_matches_series() {
        let t = Matrix::from_real_rows(&[
            vec![0.0, -17.0, 17.0],
            vec![3.0, 2.0, -6.0],
            vec![2.0, 2.0, -5.0],
        ])
        .unwrap();
        let m = t.scale_re(-1.0);
        let spec = Spectrum::new(&m).unwrap();
        let a = mittag_leffler_matrix(1.5, 1.5, &spec).unwrap();
        let ml = MlSeries::new(1.5f64, 1.5);
        let b = matfn_series(&m, |k| c(ml.coeff(k)), 1e-16, None, SERIES_MAX_TERMS).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-8, "{}", a.max_abs_diff(&b));
    }

    #[test]
    fn incomplete_gamma() {
        let v = lower_incomplete_gamma(1.0f64, 1.0);
        assert!((v - (1.0 - (-1f64).exp())).abs() < 1e-14);
        assert_eq!(lower_incomplete_gamma(2.0f64, 0.0), 0.0);
        let q = crate::quadrature::integrate_real(|s: f64| s.sqrt() * (-s).exp(), 0.0, 2.0, 1e-13)
            .unwrap();
        assert!((lower_incomplete_gamma(1.5, 2.0) - q).abs() < 1e-10);
        assert!((lower_incomplete_gamma(1.5f64, 2.0) - 0.654_510_373_451_777_3).abs() < 1e-12);
        assert!((lower_incomplete_gamma(2.5f64, 50.0) / gamma(2.5) - 1.0).abs() < 1e-12);
    }
}
