//! Scalar scale functions `W_q` for complex `q`.

use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::linalg::{poly_roots, separation};
use crate::scalar::{cpowf, lit, re, Cx, Real};
use crate::special::MlSeries;

use super::hankel::{self, Weight};

/// Below this value of `|q|^{1/α}·x` the stable kernels sum the Taylor
/// series; above it they use the cut representation.
pub const ML_SWITCH: f64 = 3.0;
/// Relative separation below which roots of `ψ(z) = q` count as confluent.
pub const ROOT_SEPARATION_TOL: f64 = 1e-7;

/// Mittag-Leffler series shared by every stable kernel of one model.
#[derive(Debug)]
pub(crate) struct StableSeries<R: Real> {
    alpha: R,
    /// `E_{α,α}`: the scale function.
    value: MlSeries<R>,
    /// `E_{α,α−1}`: its derivative.
    derivative: MlSeries<R>,
    /// `E_{α,α+1}`: its integral.
    integral: MlSeries<R>,
}

impl<R: Real> StableSeries<R> {
    pub(crate) fn new(alpha: R) -> Self {
        Self {
            alpha,
            value: MlSeries::new(alpha, alpha),
            derivative: MlSeries::new(alpha, alpha - R::one()),
            integral: MlSeries::new(alpha, alpha + R::one()),
        }
    }
}

#[derive(Clone, Debug)]
enum Kind<R: Real> {
    Stable(Arc<StableSeries<R>>),
    /// `W_q(x) = Σ wᵢ e^{zᵢx}` over the distinct roots of `ψ(z) = q`.
    Rational { roots: Vec<Cx<R>>, weights: Vec<Cx<R>> },
    /// `W_0(x) = slope·x` for driftless Brownian motion.
    Linear { slope: R },
}

/// `W_q` for one fixed `q`.
#[derive(Clone, Debug)]
pub struct ScalarScale<R: Real> {
    q: Cx<R>,
    phi: Option<Cx<R>>,
    kind: Kind<R>,
}

impl<R: Real> ScalarScale<R> {
    /// Builds the kernel of `model` at `q`.
    pub fn new(model: &LevyModel<R>, q: Cx<R>) -> Result<Self> {
        let series = match model {
            LevyModel::Stable { alpha } => Some(Arc::new(StableSeries::new(*alpha))),
            _ => None,
        };
        Self::with_series(model, q, series.as_ref())
    }

    pub(crate) fn with_series(
        model: &LevyModel<R>,
        q: Cx<R>,
        series: Option<&Arc<StableSeries<R>>>,
    ) -> Result<Self> {
        let phi_ok = q.re > R::zero() || q.is_zero();
        match model {
            LevyModel::Stable { alpha } => {
                let series = match series {
                    Some(s) => Arc::clone(s),
                    None => Arc::new(StableSeries::new(*alpha)),
                };
                let phi = phi_ok.then(|| cpowf(q, R::one() / *alpha));
                Ok(Self {
                    q,
                    phi,
                    kind: Kind::Stable(series),
                })
            }
            LevyModel::BrownianDrift { sigma, gamma }
                if q.is_zero() && *gamma == R::zero() =>
            {
                Ok(Self {
                    q,
                    phi: Some(Cx::zero()),
                    kind: Kind::Linear {
                        slope: lit::<R>(2.0) / (*sigma * *sigma),
                    },
                })
            }
            _ => {
                let (p, d) = model
                    .rational_parts(q)
                    .expect("non-stable families are rational");
                let roots = poly_roots(&p)?;
                let scale = roots.iter().fold(R::one(), |m, z| m.max(z.norm()));
                if roots.len() > 1 && separation(&roots) < R::tol(ROOT_SEPARATION_TOL) * scale {
                    return Err(Error::ConfluentRoots);
                }
                let dp = p.derivative();
                let weights: Vec<Cx<R>> = roots.iter().map(|z| d.eval(*z) / dp.eval(*z)).collect();
                let phi = if phi_ok {
                    roots
                        .iter()
                        .copied()
                        .max_by(|a, b| a.re.partial_cmp(&b.re).expect("finite roots"))
                } else {
                    None
                };
                Ok(Self {
                    q,
                    phi,
                    kind: Kind::Rational { roots, weights },
                })
            }
        }
    }

    pub fn q(&self) -> Cx<R> {
        self.q
    }

    /// `Φ(q)`; defined for `Re q > 0` and `q = 0`.
    pub fn phi(&self) -> Result<Cx<R>> {
        self.phi.ok_or(Error::DomainViolation {
            re: self.q.re.as_f64(),
            im: self.q.im.as_f64(),
        })
    }

    /// Roots of `ψ(z) = q` and their weights `1/ψ′(z)` (rational families).
    pub fn roots(&self) -> Option<(&[Cx<R>], &[Cx<R>])> {
        match &self.kind {
            Kind::Rational { roots, weights } => Some((roots, weights)),
            _ => None,
        }
    }

    fn stable_regime(&self, alpha: R, x: R) -> bool {
        self.q.is_zero() || self.q.norm().powf(R::one() / alpha) * x <= lit(ML_SWITCH)
    }

    fn stable_eval(&self, s: &StableSeries<R>, x: R, weight: Weight, normalized: bool) -> Result<Cx<R>> {
        let a = s.alpha;
        if !self.stable_regime(a, x) {
            return hankel::invert(a, self.q, self.phi()?, x, weight, normalized);
        }
        let z = self.q * x.powf(a);
        let value = |ml: &MlSeries<R>, power: R| -> Result<Cx<R>> {
            Ok(ml.estimate(z)?.value * x.powf(power))
        };
        let raw = match weight {
            Weight::Value if x == R::zero() => Cx::zero(),
            Weight::Value => value(&s.value, a - R::one())?,
            Weight::Derivative | Weight::WhKernel if x == R::zero() && a < lit(2.0) => {
                return Err(Error::SingularAtZero)
            }
            Weight::Derivative => value(&s.derivative, a - lit(2.0))?,
            Weight::Integral => value(&s.integral, a)?,
            Weight::WhKernel => {
                value(&s.derivative, a - lit(2.0))? - self.phi()? * value(&s.value, a - R::one())?
            }
            Weight::Deficit if x == R::zero() => Cx::zero(),
            Weight::Deficit => {
                value(&s.value, a - R::one())? - self.phi()? * value(&s.integral, a)?
            }
        };
        if normalized {
            Ok(raw * (-self.phi()? * x).exp())
        } else {
            Ok(raw)
        }
    }

    fn rational_eval(&self, x: R, weight: Weight, normalized: bool) -> Result<Cx<R>> {
        let shift = if normalized { self.phi()? } else { Cx::zero() };
        match &self.kind {
            Kind::Linear { slope } => {
                let v = match weight {
                    Weight::Value | Weight::Deficit => *slope * x,
                    Weight::Derivative | Weight::WhKernel => *slope,
                    Weight::Integral => *slope * x * x / lit(2.0),
                };
                Ok(re(v))
            }
            Kind::Rational { roots, weights } => {
                let phi = if matches!(weight, Weight::WhKernel | Weight::Deficit) {
                    Some(self.phi()?)
                } else {
                    None
                };
                let mut acc = Cx::zero();
                for (z, w) in roots.iter().zip(weights) {
                    let term = match weight {
                        Weight::Value => *w * ((*z - shift) * x).exp(),
                        Weight::Derivative => *w * *z * ((*z - shift) * x).exp(),
                        Weight::Integral => {
                            *w * exp_integral(*z, x) * (-shift * x).exp()
                        }
                        Weight::WhKernel => {
                            let phi = phi.expect("set above");
                            if *z == phi {
                                continue;
                            }
                            *w * (*z - phi) * ((*z - shift) * x).exp()
                        }
                        Weight::Deficit => {
                            let phi = phi.expect("set above");
                            if *z == phi {
                                *w
                            } else {
                                *w * ((*z * x).exp() - phi * exp_integral(*z, x))
                            }
                        }
                    };
                    acc += term;
                }
                Ok(acc)
            }
            Kind::Stable(_) => unreachable!("handled by stable_eval"),
        }
    }

    fn eval(&self, x: R, weight: Weight, normalized: bool) -> Result<Cx<R>> {
        if !(x >= R::zero()) {
            return Err(Error::InvalidParameter(format!("x = {x} must be nonnegative")));
        }
        match &self.kind {
            Kind::Stable(s) => self.stable_eval(s, x, weight, normalized),
            _ => self.rational_eval(x, weight, normalized),
        }
    }

    /// `W_q(x)`.
    pub fn w(&self, x: R) -> Result<Cx<R>> {
        self.eval(x, Weight::Value, false)
    }

    /// Right derivative `W′_q(x)`.
    pub fn w_prime(&self, x: R) -> Result<Cx<R>> {
        self.eval(x, Weight::Derivative, false)
    }

    /// `∫₀ˣ W_q(y) dy`.
    pub fn w_integral(&self, x: R) -> Result<Cx<R>> {
        self.eval(x, Weight::Integral, false)
    }

    /// `e^{−Φ(q)x} W_q(x)`.
    pub fn w_normalized(&self, x: R) -> Result<Cx<R>> {
        self.eval(x, Weight::Value, true)
    }

    /// `W′_q(x) − Φ(q) W_q(x)`, the density part of the law of the infimum.
    pub fn wh_kernel(&self, x: R) -> Result<Cx<R>> {
        self.eval(x, Weight::WhKernel, false)
    }

    /// `W_q(x) − Φ(q) ∫₀ˣ W_q`, bounded in `x`; divided by `Φ(q)` it is the
    /// infimum factor.
    pub fn w_deficit(&self, x: R) -> Result<Cx<R>> {
        self.eval(x, Weight::Deficit, false)
    }

    /// `(∫ W, ∫ s·W)` over `[a, b]`, in closed form.
    pub fn moments(&self, a: R, b: R) -> Result<(Cx<R>, Cx<R>)> {
        match &self.kind {
            Kind::Linear { slope } => Ok((
                re(*slope * (b * b - a * a) / lit(2.0)),
                re(*slope * (b * b * b - a * a * a) / lit(3.0)),
            )),
            Kind::Rational { roots, weights } => {
                let h = b - a;
                let mut m0 = Cx::zero();
                let mut m1 = Cx::zero();
                for (z, w) in roots.iter().zip(weights) {
                    let (e1, e2) = exp_moments(*z, h);
                    let base = *w * (*z * a).exp();
                    m0 += base * e1;
                    m1 += base * (e1 * a + e2);
                }
                Ok((m0, m1))
            }
            Kind::Stable(s) if self.q.is_zero() => {
                let al = s.alpha;
                let g = crate::special::gamma(al);
                Ok((
                    re((b.powf(al) - a.powf(al)) / (al * g)),
                    re((b.powf(al + R::one()) - a.powf(al + R::one())) / ((al + R::one()) * g)),
                ))
            }
            Kind::Stable(_) => Err(Error::InvalidParameter(
                "closed-form moments need q = 0 for the stable family".into(),
            )),
        }
    }
}

/// `(e^{zx} − 1)/z`, continuous at `z = 0`.
fn exp_integral<R: Real>(z: Cx<R>, x: R) -> Cx<R> {
    exp_moments(z, x).0
}

/// `(∫₀ʰ e^{zt} dt, ∫₀ʰ t e^{zt} dt)` without cancellation for small `zh`.
fn exp_moments<R: Real>(z: Cx<R>, h: R) -> (Cx<R>, Cx<R>) {
    let u = z * h;
    if u.norm() < lit(0.5) {
        let mut e1 = Cx::zero();
        let mut e2 = Cx::zero();
        let mut pow = re(R::one());
        let mut fact = R::one();
        for n in 0..30 {
            let nf = lit::<R>(n as f64);
            if n > 0 {
                fact *= nf;
                pow *= u;
            }
            e1 += pow / (fact * (nf + R::one()));
            e2 += pow / (fact * (nf + lit(2.0)));
        }
        (e1 * h, e2 * h * h)
    } else {
        let one = Cx::<R>::new(R::one(), R::zero());
        let ez = u.exp();
        let e1 = (ez - one) / z;
        let e2 = ez * h / z - (ez - one) / (z * z);
        (e1, e2)
    }
}
