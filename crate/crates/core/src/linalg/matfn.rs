//! Functions of matrices: Lagrange–Sylvester, power series and Cauchy contour.

use num_traits::Zero;

use super::poly::{eigenvalues, Spectrum};
use super::{Lu, Matrix};
use crate::error::{Error, Result};
use crate::scalar::{lit, re, Cx, Real};

/// Consecutive small terms required to stop a series.
pub const SERIES_QUIET_TERMS: usize = 3;
/// Default term cap for [`matfn_series`].
pub const SERIES_MAX_TERMS: usize = 10_000;
/// Initial trapezoid node count on the contour.
pub const CONTOUR_NODES: usize = 64;
/// Node cap for the doubling loop.
pub const CONTOUR_MAX_NODES: usize = 8192;
/// Radius multiplier for the enclosing circle.
pub const CONTOUR_RADIUS_FACTOR: f64 = 1.5;
/// Stopping tolerance for node doubling.
pub const CONTOUR_TOL: f64 = 1e-9;

/// Where a scalar function is analytic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Entire,
    /// `Re z > 0`.
    RightHalfPlane,
    /// `ℂ` minus the nonpositive real axis.
    CutPlane,
}

impl Domain {
    pub fn contains<R: Real>(self, z: Cx<R>) -> bool {
        match self {
            Domain::Entire => true,
            Domain::RightHalfPlane => z.re > R::zero(),
            Domain::CutPlane => !(z.im == R::zero() && z.re <= R::zero()),
        }
    }

    /// Distance from `z` to the complement of the domain.
    pub fn boundary_distance<R: Real>(self, z: Cx<R>) -> R {
        match self {
            Domain::Entire => R::infinity(),
            Domain::RightHalfPlane => z.re.max(R::zero()),
            Domain::CutPlane => {
                if z.re >= R::zero() {
                    z.norm()
                } else {
                    z.im.abs()
                }
            }
        }
    }
}

type Eval<'a, R> = dyn Fn(Cx<R>) -> Result<Cx<R>> + Send + Sync + 'a;

/// A scalar function together with its domain of analyticity.
pub struct AnalyticFn<'a, R: Real> {
    f: Box<Eval<'a, R>>,
    domain: Domain,
}

impl<'a, R: Real> AnalyticFn<'a, R> {
    pub fn new(domain: Domain, f: impl Fn(Cx<R>) -> Cx<R> + Send + Sync + 'a) -> Self {
        Self {
            f: Box::new(move |z| Ok(f(z))),
            domain,
        }
    }

    pub fn fallible(
        domain: Domain,
        f: impl Fn(Cx<R>) -> Result<Cx<R>> + Send + Sync + 'a,
    ) -> Self {
        Self {
            f: Box::new(f),
            domain,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn eval(&self, z: Cx<R>) -> Result<Cx<R>> {
        if !self.domain.contains(z) {
            return Err(Error::DomainViolation {
                re: z.re.as_f64(),
                im: z.im.as_f64(),
            });
        }
        (self.f)(z)
    }

    pub fn identity() -> Self {
        Self::new(Domain::Entire, |z| z)
    }

    pub fn exp() -> Self {
        Self::new(Domain::Entire, |z: Cx<R>| z.exp())
    }

    /// Principal power `z^p`.
    pub fn powf(p: R) -> Self {
        Self::new(Domain::CutPlane, move |z: Cx<R>| z.powf(p))
    }
}

/// Lagrange–Sylvester evaluation `Σ f(λₖ)Pₖ`.
pub fn matfn_spectral<R: Real>(spec: &Spectrum<R>, f: &AnalyticFn<'_, R>) -> Result<Matrix<R>> {
    spec.apply(|l| f.eval(l))
}

/// `Σ aₖMᵏ` until [`SERIES_QUIET_TERMS`] consecutive terms fall below
/// `tol·max(1, ‖sum‖∞)`.
///
/// `radius` is the radius of convergence; `None` means entire.
pub fn matfn_series<R: Real>(
    m: &Matrix<R>,
    mut coeff: impl FnMut(usize) -> Cx<R>,
    tol: R,
    radius: Option<R>,
    max_terms: usize,
) -> Result<Matrix<R>> {
    if let Some(rad) = radius {
        if m.norm_inf() >= rad {
            return Err(Error::DomainViolation {
                re: m.norm_inf().as_f64(),
                im: 0.0,
            });
        }
    }
    let n = m.dim();
    let mut power = Matrix::identity(n);
    let mut sum = Matrix::zeros(n);
    let mut quiet = 0;
    for k in 0..max_terms {
        let term = power.scale(coeff(k));
        sum = &sum + &term;
        let tn = term.norm_inf();
        if !tn.is_finite() {
            return Err(Error::NonFinite("series term".into()));
        }
        if tn <= tol * sum.norm_inf().max(R::one()) {
            quiet += 1;
            if quiet >= SERIES_QUIET_TERMS {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
        power = &power * m;
    }
    Err(Error::NoConvergence(format!(
        "matrix series after {max_terms} terms"
    )))
}

/// Circle used by the contour evaluator.
#[derive(Clone, Copy, Debug)]
struct Circle<R: Real> {
    centre: Cx<R>,
    radius: R,
}

fn enclosing_circle<R: Real>(z: &[Cx<R>], domain: Domain) -> Option<Circle<R>> {
    let n = lit::<R>(z.len() as f64);
    let centre = z.iter().fold(Cx::zero(), |a, b| a + *b) / n;
    let spread = z.iter().fold(R::zero(), |a, b| a.max((*b - centre).norm()));
    let min_radius = lit::<R>(0.1) * centre.norm().max(R::one());
    let mut radius = (lit::<R>(CONTOUR_RADIUS_FACTOR) * spread).max(min_radius);
    let d = domain.boundary_distance(centre);
    if radius < d {
        return Some(Circle { centre, radius });
    }
    // shrink toward the spectrum while keeping a margin on both sides
    if spread > R::zero() && d > lit::<R>(1.2) * spread {
        radius = (spread + d) / lit(2.0);
        return Some(Circle { centre, radius });
    }
    if spread == R::zero() && d > R::zero() {
        return Some(Circle {
            centre,
            radius: d / lit(2.0),
        });
    }
    None
}

/// Disjoint circles around clusters of eigenvalues, each inside the domain.
fn cluster_circles<R: Real>(z: &[Cx<R>], domain: Domain) -> Result<Vec<Circle<R>>> {
    let big = z.iter().fold(R::one(), |a, b| a.max(b.norm()));
    let merge = lit::<R>(1e-4) * big;
    let mut clusters: Vec<Vec<Cx<R>>> = Vec::new();
    for l in z {
        match clusters
            .iter_mut()
            .find(|c| c.iter().any(|m| (*m - *l).norm() <= merge))
        {
            Some(c) => c.push(*l),
            None => clusters.push(vec![*l]),
        }
    }
    let centres: Vec<(Cx<R>, R)> = clusters
        .iter()
        .map(|c| {
            let ctr = c.iter().fold(Cx::zero(), |a, b| a + *b) / lit::<R>(c.len() as f64);
            let spread = c.iter().fold(R::zero(), |a, b| a.max((*b - ctr).norm()));
            (ctr, spread)
        })
        .collect();
    let mut out = Vec::with_capacity(centres.len());
    for (i, (ctr, spread)) in centres.iter().enumerate() {
        let gap = centres
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (c, s))| (*c - *ctr).norm() - *s)
            .fold(R::infinity(), R::min);
        let d = domain.boundary_distance(*ctr);
        let radius = (lit::<R>(0.45) * gap).min(lit::<R>(0.6) * d);
        if !(radius > lit::<R>(1.5) * *spread) || !radius.is_finite() {
            return Err(Error::ContourLeavesDomain);
        }
        out.push(Circle {
            centre: *ctr,
            radius,
        });
    }
    Ok(out)
}

fn trapezoid<R: Real>(
    m: &Matrix<R>,
    f: &AnalyticFn<'_, R>,
    c: Circle<R>,
    nodes: usize,
    rotation: R,
) -> Result<Matrix<R>> {
    let dim = m.dim();
    let neg_m = -m;
    let mut acc = Matrix::zeros(dim);
    for k in 0..nodes {
        let ang = R::TAU() * (lit::<R>(k as f64) + rotation) / lit(nodes as f64);
        let w = Cx::from_polar(c.radius, ang);
        let z = c.centre + w;
        let fz = f.eval(z)?;
        let lu = Lu::new(&neg_m.shift(z))?;
        let res = lu.solve(&Matrix::identity(dim));
        acc.axpy(fz * w, &res);
    }
    Ok(acc.scale(re(R::one() / lit(nodes as f64))))
}

fn trapezoid_converged<R: Real>(
    m: &Matrix<R>,
    f: &AnalyticFn<'_, R>,
    c: Circle<R>,
    nodes: usize,
) -> Result<Matrix<R>> {
    let attempt = |rotation: R| -> Result<Matrix<R>> {
        let mut n = nodes.max(4);
        let mut prev = trapezoid(m, f, c, n, rotation)?;
        loop {
            n *= 2;
            let next = trapezoid(m, f, c, n, rotation)?;
            let change = next.max_abs_diff(&prev);
            if change <= R::tol(CONTOUR_TOL) * next.max_abs().max(R::one()) {
                return Ok(next);
            }
            if n >= CONTOUR_MAX_NODES {
                return Err(Error::NoConvergence(format!(
                    "contour quadrature change {:e} at {n} nodes",
                    change.as_f64()
                )));
            }
            prev = next;
        }
    };
    match attempt(R::zero()) {
        Err(Error::SingularMatrix { .. }) => attempt(lit(0.5)),
        other => other,
    }
}

/// Cauchy-integral evaluation of `f(M)` by the trapezoid rule.
///
/// Uses one circle around the whole spectrum when it fits in the domain and
/// otherwise one small circle per eigenvalue cluster.
pub fn matfn_contour<R: Real>(
    m: &Matrix<R>,
    eigs: &[Cx<R>],
    f: &AnalyticFn<'_, R>,
    nodes: usize,
) -> Result<Matrix<R>> {
    for l in eigs {
        if !f.domain().contains(*l) {
            return Err(Error::DomainViolation {
                re: l.re.as_f64(),
                im: l.im.as_f64(),
            });
        }
    }
    if let Some(c) = enclosing_circle(eigs, f.domain()) {
        return trapezoid_converged(m, f, c, nodes);
    }
    let mut acc = Matrix::zeros(m.dim());
    for c in cluster_circles(eigs, f.domain())? {
        acc = &acc + &trapezoid_converged(m, f, c, nodes)?;
    }
    Ok(acc)
}

/// Evaluator selection for [`matfn_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Contour,
}

/// `f(M)` by the spectral method, falling back to the contour method for
/// repeated eigenvalues.
pub fn matfn<R: Real>(m: &Matrix<R>, f: &AnalyticFn<'_, R>) -> Result<Matrix<R>> {
    match Spectrum::new(m) {
        Ok(spec) => matfn_spectral(&spec, f),
        Err(Error::MultipleRoots { .. }) => {
            let eigs = eigenvalues(m)?;
            matfn_contour(m, &eigs, f, CONTOUR_NODES)
        }
        Err(e) => Err(e),
    }
}

pub fn matfn_with<R: Real>(
    m: &Matrix<R>,
    f: &AnalyticFn<'_, R>,
    method: Method,
) -> Result<Matrix<R>> {
    match method {
        Method::Spectral => matfn_spectral(&Spectrum::new(m)?, f),
        Method::Contour => matfn_contour(m, &eigenvalues(m)?, f, CONTOUR_NODES),
    }
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm<R: Real>(m: &Matrix<R>) -> Matrix<R> {
    let norm = m.norm_inf();
    let mut s = 0i32;
    let half = lit::<R>(0.5);
    let mut scaled_norm = norm;
    while scaled_norm > half {
        scaled_norm = scaled_norm * half;
        s += 1;
    }
    let a = m.scale(re(lit::<R>(2.0).powi(-s)));
    let n = m.dim();
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..=30 {
        term = (&term * &a).scale(re(R::one() / lit(k as f64)));
        sum = &sum + &term;
        if term.max_abs() <= R::epsilon() * sum.max_abs() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `f(M)` for real `M` and a function respecting conjugation, as a real
/// matrix. The imaginary residue is checked against `1e-9·max(1, ‖·‖∞)`.
pub fn matfn_real<R: Real>(m: &Matrix<R>, f: &AnalyticFn<'_, R>) -> Result<Matrix<R>> {
    matfn(m, f)?.realify(R::tol(1e-9))
}
