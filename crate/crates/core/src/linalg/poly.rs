//! Characteristic polynomials, Aberth–Ehrlich root finding and spectra.

use num_traits::{One, Zero};

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{lit, re, Cx, Real};

/// Iteration cap for the simultaneous root iteration.
pub const ABERTH_MAX_ITER: usize = 200;
/// Residual bound relative to the coefficient scale `Σ|cᵢ||z|ⁱ`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;
/// Minimum separation, relative to `max(1, max|λ|)`, for a simple spectrum.
pub const SEPARATION_TOL: f64 = 1e-7;

/// Polynomial with ascending coefficients `c₀ + c₁z + … + cₙzⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<R: Real> {
    pub coeffs: Vec<Cx<R>>,
}

impl<R: Real> Poly<R> {
    pub fn new(coeffs: Vec<Cx<R>>) -> Self {
        Self { coeffs }
    }

    /// Monic polynomial `Π (z − rᵢ)`.
    pub fn from_roots(roots: &[Cx<R>]) -> Self {
        let mut c = vec![Cx::one()];
        for r in roots {
            let mut next = vec![Cx::zero(); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] += *ci;
                next[i] -= *ci * *r;
            }
            c = next;
        }
        Self { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Cx<R>) -> Cx<R> {
        self.coeffs.iter().rev().fold(Cx::zero(), |acc, c| acc * z + *c)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Cx<R>) -> (Cx<R>, Cx<R>) {
        let mut p = Cx::zero();
        let mut dp = Cx::zero();
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + *c;
        }
        (p, dp)
    }

    /// `Σ |cᵢ| |z|ⁱ`, the natural scale of a residual at `z`.
    pub fn abs_scale(&self, z: Cx<R>) -> R {
        let a = z.norm();
        self.coeffs.iter().rev().fold(R::zero(), |acc, c| acc * a + c.norm())
    }

    pub fn derivative(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| *c * lit::<R>(i as f64))
            .collect::<Vec<_>>();
        Self {
            coeffs: if c.is_empty() { vec![Cx::zero()] } else { c },
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut c = vec![Cx::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += *a * *b;
            }
        }
        Self { coeffs: c }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Cx<R>], i: usize| v.get(i).copied().unwrap_or_else(Cx::zero);
        Self {
            coeffs: (0..n)
                .map(|i| get(&self.coeffs, i) + get(&other.coeffs, i))
                .collect(),
        }
    }

    pub fn scale(&self, s: Cx<R>) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| *c * s).collect(),
        }
    }

    /// Drops leading coefficients below `tol` times the largest one.
    pub fn trim(mut self, tol: R) -> Self {
        let big = self.coeffs.iter().fold(R::zero(), |m, c| m.max(c.norm()));
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().norm() <= tol * big {
            self.coeffs.pop();
        }
        self
    }
}

/// Faddeev–LeVerrier output: `det(zI − M)` and the adjugate expansion
/// `adj(zI − M) = Σₖ adj[k]·z^(p−1−k)`.
#[derive(Clone, Debug)]
pub struct CharPoly<R: Real> {
    pub poly: Poly<R>,
    pub adjugate: Vec<Matrix<R>>,
}

pub fn char_poly_full<R: Real>(m: &Matrix<R>) -> CharPoly<R> {
    let n = m.dim();
    let mut coeffs = vec![Cx::zero(); n + 1];
    coeffs[n] = Cx::one();
    let mut adjugate = Vec::with_capacity(n);
    let mut mk = Matrix::zeros(n);
    for k in 1..=n {
        mk = (m * &mk).shift(coeffs[n + 1 - k]);
        let am = m * &mk;
        coeffs[n - k] = -am.trace() / lit::<R>(k as f64);
        adjugate.push(mk.clone());
    }
    CharPoly {
        poly: Poly::new(coeffs),
        adjugate,
    }
}

/// Monic characteristic polynomial `det(zI − M)`.
pub fn char_poly<R: Real>(m: &Matrix<R>) -> Poly<R> {
    char_poly_full(m).poly
}

/// All roots of a polynomial with nonzero leading coefficient.
///
/// Aberth–Ehrlich simultaneous iteration followed by a Newton polish. Roots
/// are returned sorted by real then imaginary part.
pub fn poly_roots<R: Real>(p: &Poly<R>) -> Result<Vec<Cx<R>>> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::InvalidParameter("polynomial of degree 0".into()));
    }
    let lead = p.coeffs[n];
    if lead.is_zero() {
        return Err(Error::InvalidParameter("zero leading coefficient".into()));
    }
    let monic = p.scale(Cx::<R>::one() / lead);
    if n == 1 {
        return Ok(vec![-monic.coeffs[0]]);
    }

    let centre = -monic.coeffs[n - 1] / lit::<R>(n as f64);
    let radius = (0..n)
        .map(|k| monic.coeffs[k].norm().powf(R::one() / lit(n as f64 - k as f64)))
        .fold(R::zero(), R::max)
        .max(R::tol(1e-3));
    let offset = lit::<R>(0.4);
    let mut z: Vec<Cx<R>> = (0..n)
        .map(|k| {
            let ang = R::TAU() * lit(k as f64) / lit(n as f64) + offset;
            centre + Cx::from_polar(radius, ang)
        })
        .collect();

    let eps = R::epsilon() * lit(4.0);
    for _ in 0..ABERTH_MAX_ITER {
        let mut moved = R::zero();
        for k in 0..n {
            let (pv, dpv) = monic.eval_with_derivative(z[k]);
            if pv.is_zero() {
                continue;
            }
            let ratio = pv / dpv;
            let mut s = Cx::zero();
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if !d.is_zero() {
                        s += Cx::<R>::one() / d;
                    }
                }
            }
            let denom = Cx::<R>::one() - ratio * s;
            let step = if denom.is_zero() || !dpv.norm().is_finite() || dpv.is_zero() {
                pv * lit::<R>(1e-3)
            } else {
                ratio / denom
            };
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / (R::one() + z[k].norm()));
            }
        }
        if moved <= eps {
            break;
        }
    }

    for zk in z.iter_mut() {
        for _ in 0..2 {
            let (pv, dpv) = monic.eval_with_derivative(*zk);
            if dpv.is_zero() {
                break;
            }
            let cand = *zk - pv / dpv;
            if monic.eval(cand).norm() < pv.norm() {
                *zk = cand;
            } else {
                break;
            }
        }
    }

    let floor = monic.coeffs.iter().fold(R::zero(), |m, c| m.max(c.norm())) * R::epsilon();
    for zk in &z {
        let resid = monic.eval(*zk).norm();
        let scale = monic.abs_scale(*zk).max(floor);
        if !(resid <= R::tol(ROOT_RESIDUAL_TOL) * scale) {
            return Err(Error::NoConvergence(format!(
                "polynomial root residual {:e} at ({}, {})",
                resid.as_f64(),
                zk.re,
                zk.im
            )));
        }
    }
    sort_roots(&mut z);
    Ok(z)
}

fn sort_roots<R: Real>(z: &mut [Cx<R>]) {
    z.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Minimum pairwise distance; infinite for a single value.
pub fn separation<R: Real>(z: &[Cx<R>]) -> R {
    let mut sep = R::infinity();
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            sep = sep.min((z[i] - z[j]).norm());
        }
    }
    sep
}

/// Eigenvalues with multiplicity, without a separation requirement.
pub fn eigenvalues<R: Real>(m: &Matrix<R>) -> Result<Vec<Cx<R>>> {
    m.check_finite()?;
    if m.dim() == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    poly_roots(&char_poly(m))
}

/// Roots of a monic polynomial as a [`Spectrum`] of its companion matrix.
pub fn roots<R: Real>(p: &Poly<R>) -> Result<Spectrum<R>> {
    let n = p.degree();
    let lead = p.coeffs[n];
    let comp = Matrix::from_fn(n, |i, j| {
        if i + 1 == j {
            Cx::one()
        } else if i == n - 1 {
            -p.coeffs[j] / lead
        } else {
            Cx::zero()
        }
    });
    let z = poly_roots(p)?;
    Spectrum::from_eigenvalues(&comp, z)
}

/// Simple spectrum of a matrix together with its Lagrange–Sylvester
/// projectors `Pₖ = Πⱼ≠ₖ (M − λⱼI)/(λₖ − λⱼ)`, so that `f(M) = Σ f(λₖ)Pₖ`.
#[derive(Clone, Debug)]
pub struct Spectrum<R: Real> {
    eigenvalues: Vec<Cx<R>>,
    separation: R,
    source: Matrix<R>,
    projectors: Vec<Matrix<R>>,
}

impl<R: Real> Spectrum<R> {
    /// Fails with [`Error::MultipleRoots`] unless the eigenvalues are distinct.
    pub fn new(m: &Matrix<R>) -> Result<Self> {
        let z = eigenvalues(m)?;
        Self::from_eigenvalues(m, z)
    }

    fn from_eigenvalues(m: &Matrix<R>, z: Vec<Cx<R>>) -> Result<Self> {
        let sep = separation(&z);
        let big = z.iter().fold(R::one(), |acc, l| acc.max(l.norm()));
        let threshold = R::tol(SEPARATION_TOL) * big;
        if sep < threshold {
            return Err(Error::MultipleRoots {
                separation: sep.as_f64(),
                threshold: threshold.as_f64(),
            });
        }
        let n = m.dim();
        let projectors = (0..n)
            .map(|k| {
                let mut p = Matrix::identity(n);
                for j in 0..n {
                    if j != k {
                        let factor = m.shift(-z[j]).scale(Cx::<R>::one() / (z[k] - z[j]));
                        p = &p * &factor;
                    }
                }
                p
            })
            .collect();
        Ok(Self {
            eigenvalues: z,
            separation: sep,
            source: m.clone(),
            projectors,
        })
    }

    pub fn eigenvalues(&self) -> &[Cx<R>] {
        &self.eigenvalues
    }

    pub fn separation(&self) -> R {
        self.separation
    }

    pub fn source(&self) -> &Matrix<R> {
        &self.source
    }

    pub fn projectors(&self) -> &[Matrix<R>] {
        &self.projectors
    }

    /// `Σ g(λₖ)Pₖ` for precomputed values `g(λₖ)`.
    pub fn combine(&self, values: &[Cx<R>]) -> Matrix<R> {
        assert_eq!(values.len(), self.projectors.len());
        let mut out = Matrix::zeros(self.source.dim());
        for (v, p) in values.iter().zip(&self.projectors) {
            out.axpy(*v, p);
        }
        out
    }

    /// `Σ f(λₖ)Pₖ`.
    pub fn apply(&self, mut f: impl FnMut(Cx<R>) -> Result<Cx<R>>) -> Result<Matrix<R>> {
        let values = self
            .eigenvalues
            .iter()
            .map(|l| f(*l))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.combine(&values))
    }

    /// Largest real part (spectral abscissa).
    pub fn abscissa(&self) -> R {
        self.eigenvalues
            .iter()
            .fold(R::neg_infinity(), |acc, l| acc.max(l.re))
    }
}

/// Constructs `P·diag(λ)·P⁻¹` for testing with a known spectrum.
#[doc(hidden)]
pub fn with_spectrum<R: Real>(lambda: &[Cx<R>], p: &Matrix<R>) -> Result<Matrix<R>> {
    let d = Matrix::diag(lambda);
    let pinv = super::inverse(p)?;
    Ok(&(p * &d) * &pinv)
}

/// Polynomial with real ascending coefficients.
pub fn real_poly<R: Real>(c: &[f64]) -> Poly<R> {
    Poly::new(c.iter().map(|v| re(lit(*v))).collect())
}
