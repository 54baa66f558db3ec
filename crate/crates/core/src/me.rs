//! Matrix-exponential distributions.
//!
//! A representation `(α, T, t)` has density `α·e^{Tx}·t`. It may be
//! defective, in which case its total mass `α·(−T)⁻¹t` is below one.

use std::io::Read;
use std::path::Path;

use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{char_poly_full, eigenvalues, expm, inverse, Lu, Matrix, Poly, Spectrum};
use crate::scalar::{lit, re, Cx, Real};

/// Step of the density positivity grid.
pub const GRID_STEP: f64 = 0.01;
/// Right end of the density positivity grid.
pub const GRID_END: f64 = 20.0;
/// Lowest admissible density value on the grid.
pub const DENSITY_FLOOR: f64 = -1e-9;

/// Cached spectral expansion: `f(x) = Σ cₖe^{−λₖx}` and
/// `α·e^{Tx}·l = Σ dₖe^{−λₖx}`.
#[derive(Clone, Debug)]
struct ExpCache<R: Real> {
    rate: Vec<Cx<R>>,
    density_w: Vec<Cx<R>>,
    tail_w: Vec<Cx<R>>,
}

/// Matrix-exponential representation with cached `l = (−T)⁻¹t`.
#[derive(Clone, Debug)]
pub struct MeDist<R: Real> {
    alpha: Vec<R>,
    gen: Matrix<R>,
    exit: Vec<R>,
    l: Vec<R>,
    defect: R,
    canonical: bool,
    cache: Option<ExpCache<R>>,
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |acc, (x, y)| acc + *x * *y)
}

fn cvec<R: Real>(v: &[R]) -> Vec<Cx<R>> {
    v.iter().map(|x| re(*x)).collect()
}

impl<R: Real> MeDist<R> {
    /// Validates and caches a representation.
    pub fn new(alpha: Vec<R>, gen: Vec<Vec<R>>, exit: Vec<R>) -> Result<Self> {
        let gen = Matrix::from_real_rows(&gen)?;
        Self::from_matrix(alpha, gen, exit)
    }

    /// Canonical-form constructor: `t = −T·1`.
    pub fn with_exit_from_rows(alpha: Vec<R>, gen: Vec<Vec<R>>) -> Result<Self> {
        let exit = gen
            .iter()
            .map(|row| -row.iter().fold(R::zero(), |a, b| a + *b))
            .collect();
        Self::new(alpha, gen, exit)
    }

    pub fn from_matrix(alpha: Vec<R>, gen: Matrix<R>, exit: Vec<R>) -> Result<Self> {
        let p = gen.dim();
        for v in [&alpha, &exit] {
            if v.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("representation vector".into()));
            }
        }
        if gen.max_imag() != R::zero() {
            return Err(Error::InvalidRepresentation("generator must be real".into()));
        }
        for ev in eigenvalues(&gen)? {
            if !(ev.re < R::zero()) {
                return Err(Error::InvalidRepresentation(format!(
                    "generator eigenvalue ({}, {}) not in the open left half-plane",
                    ev.re, ev.im
                )));
            }
        }
        let neg = -&gen;
        let l: Vec<R> = Lu::new(&neg)?
            .solve_vec(&cvec(&exit))
            .iter()
            .map(|z| z.re)
            .collect();
        let defect = dot(&alpha, &l);
        if !(defect > R::zero()) || defect > R::one() + R::tol(1e-9) {
            return Err(Error::InvalidRepresentation(format!(
                "total mass {defect} outside (0, 1]"
            )));
        }
        let cache = match Spectrum::new(&gen) {
            Ok(spec) => {
                let (mut rate, mut dw, mut tw) = (vec![], vec![], vec![]);
                let (a, t, lc) = (cvec(&alpha), cvec(&exit), cvec(&l));
                for (mu, proj) in spec.eigenvalues().iter().zip(spec.projectors()) {
                    let row = proj.vec_mul(&a);
                    let dotc = |v: &[Cx<R>]| row.iter().zip(v).fold(Cx::zero(), |s, (x, y)| s + *x * *y);
                    rate.push(-*mu);
                    dw.push(dotc(&t));
                    tw.push(dotc(&lc));
                }
                Some(ExpCache {
                    rate,
                    density_w: dw,
                    tail_w: tw,
                })
            }
            Err(Error::MultipleRoots { .. }) => None,
            Err(e) => return Err(e),
        };
        let canonical = is_canonical(&alpha, &gen, &exit);
        let dist = Self {
            alpha,
            gen,
            exit,
            l,
            defect,
            canonical,
            cache,
        };
        dist.check_density_grid()?;
        Ok(dist)
    }

    fn check_density_grid(&self) -> Result<()> {
        let step = expm(&self.gen.scale_re(lit(GRID_STEP)));
        let t = cvec(&self.exit);
        let mut row = cvec(&self.alpha);
        let n = (GRID_END / GRID_STEP).round() as usize;
        // rounding grows by about one epsilon of the initial terms per step
        let size = row.iter().zip(&t).fold(R::one(), |s, (a, b)| s + a.norm() * b.norm());
        let drift = R::epsilon() * lit(16.0) * size;
        for k in 0..=n {
            let f = row.iter().zip(&t).fold(R::zero(), |s, (a, b)| s + (*a * *b).re);
            let floor = R::tol(-DENSITY_FLOOR).max(drift * lit((k + 1) as f64));
            if f < -floor {
                return Err(Error::InvalidRepresentation(format!(
                    "density {f} < 0 at x = {}",
                    k as f64 * GRID_STEP
                )));
            }
            row = step.vec_mul(&row);
        }
        Ok(())
    }

    /// Exponential distribution with rate `q`.
    pub fn exponential(q: R) -> Result<Self> {
        if !(q > R::zero()) {
            return Err(Error::InvalidParameter(format!("rate {q} must be positive")));
        }
        Self::new(vec![R::one()], vec![vec![-q]], vec![q])
    }

    /// Erlang distribution with `k` phases of rate `rate`.
    pub fn erlang(k: usize, rate: R) -> Result<Self> {
        if k == 0 || !(rate > R::zero()) {
            return Err(Error::InvalidParameter("Erlang needs k ≥ 1 and rate > 0".into()));
        }
        let gen = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if i == j {
                            -rate
                        } else if j == i + 1 {
                            rate
                        } else {
                            R::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut alpha = vec![R::zero(); k];
        alpha[0] = R::one();
        Self::with_exit_from_rows(alpha, gen)
    }

    pub fn dim(&self) -> usize {
        self.gen.dim()
    }

    pub fn alpha(&self) -> &[R] {
        &self.alpha
    }

    /// The generator `T`.
    pub fn generator(&self) -> &Matrix<R> {
        &self.gen
    }

    /// The exit vector `t`.
    pub fn exit(&self) -> &[R] {
        &self.exit
    }

    /// `l = (−T)⁻¹t`.
    pub fn l(&self) -> &[R] {
        &self.l
    }

    /// Total mass `α·l`.
    pub fn defect(&self) -> R {
        self.defect
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Smallest decay rate `min Re λₖ` over the eigenvalues `λₖ` of `−T`.
    pub fn decay_rate(&self) -> Result<R> {
        Ok(eigenvalues(&self.gen)?
            .iter()
            .fold(R::infinity(), |m, z| m.min(-z.re)))
    }

    /// `α·e^{Tx}·v` for a real column `v`.
    fn propagate(&self, x: R, v: &[R]) -> R {
        let e = expm(&self.gen.scale_re(x));
        e.bilinear(&self.alpha, v).re
    }

    pub fn density(&self, x: R) -> R {
        let f = match &self.cache {
            Some(c) => c
                .rate
                .iter()
                .zip(&c.density_w)
                .fold(R::zero(), |s, (l, w)| s + (*w * (-*l * x).exp()).re),
            None => self.propagate(x, &self.exit),
        };
        if f < R::zero() && f >= -R::tol(-DENSITY_FLOOR) {
            R::zero()
        } else {
            f
        }
    }

    /// Mass above `x`: `α·e^{Tx}·l`.
    pub fn tail(&self, x: R) -> R {
        match &self.cache {
            Some(c) => c
                .rate
                .iter()
                .zip(&c.tail_w)
                .fold(R::zero(), |s, (l, w)| s + (*w * (-*l * x).exp()).re),
            None => self.propagate(x, &self.l),
        }
    }

    /// Mass on `[0, x]`.
    pub fn cdf(&self, x: R) -> R {
        if x <= R::zero() {
            return R::zero();
        }
        self.defect - self.tail(x)
    }

    /// `α(sI − T)⁻¹t`.
    pub fn laplace(&self, s: Cx<R>) -> Result<Cx<R>> {
        if let Some(c) = &self.cache {
            return Ok(c
                .rate
                .iter()
                .zip(&c.density_w)
                .fold(Cx::zero(), |acc, (l, w)| acc + *w / (s + *l)));
        }
        let lu = Lu::new(&(-&self.gen).shift(s))?;
        let x = lu.solve_vec(&cvec(&self.exit));
        Ok(x.iter().zip(&self.alpha).fold(Cx::zero(), |a, (v, w)| a + *v * *w))
    }

    /// Derivative of [`MeDist::laplace`] in `s`.
    pub fn laplace_derivative(&self, s: Cx<R>) -> Result<Cx<R>> {
        if let Some(c) = &self.cache {
            return Ok(c.rate.iter().zip(&c.density_w).fold(Cx::zero(), |acc, (l, w)| {
                let d = s + *l;
                acc - *w / (d * d)
            }));
        }
        let lu = Lu::new(&(-&self.gen).shift(s))?;
        let x = lu.solve_vec(&lu.solve_vec(&cvec(&self.exit)));
        Ok(-x.iter().zip(&self.alpha).fold(Cx::zero(), |a, (v, w)| a + *v * *w))
    }

    /// Numerator and denominator of the Laplace transform, `N(s)/det(sI − T)`.
    pub fn laplace_rational(&self) -> (Poly<R>, Poly<R>) {
        let cp = char_poly_full(&self.gen);
        let p = self.dim();
        let a = cvec(&self.alpha);
        let t = cvec(&self.exit);
        let mut num = vec![Cx::zero(); p];
        for (k, adj) in cp.adjugate.iter().enumerate() {
            let v = adj.mul_vec(&t);
            num[p - 1 - k] = a.iter().zip(&v).fold(Cx::zero(), |s, (x, y)| s + *x * *y);
        }
        (Poly::new(num), cp.poly)
    }

    /// First moment of the (possibly defective) law.
    pub fn mean(&self) -> Result<R> {
        let neg = -&self.gen;
        let l2 = Lu::new(&neg)?.solve_vec(&cvec(&self.l));
        Ok(l2.iter().zip(&self.alpha).fold(R::zero(), |a, (v, w)| a + v.re * *w))
    }

    /// Law of `T ∧ e_δ`: `(α, T − δI, t + δl)`.
    pub fn kill_min(&self, delta: R) -> Result<Self> {
        check_rate(delta)?;
        let exit = self
            .exit
            .iter()
            .zip(&self.l)
            .map(|(t, l)| *t + delta * *l)
            .collect();
        Self::from_matrix(self.alpha.clone(), self.gen.shift(re(-delta)), exit)
    }

    /// Discounted law `(α, T − δI, t)` with mass `α(δI − T)⁻¹t`.
    pub fn kill_discount(&self, delta: R) -> Result<Self> {
        check_rate(delta)?;
        Self::from_matrix(self.alpha.clone(), self.gen.shift(re(-delta)), self.exit.clone())
    }

    /// Similarity transform by `diag(l)` giving `t = −T·1` and `α·1 = 1`.
    ///
    /// Returns the representation unchanged, with `canonical = false`, when
    /// `l` has a zero entry or the law is defective.
    pub fn canonicalize(&self) -> Self {
        if self.canonical {
            return self.clone();
        }
        let small = R::tol(1e-12);
        if self.l.iter().any(|v| v.abs() <= small)
            || (self.defect - R::one()).abs() > R::tol(1e-9)
        {
            return self.clone();
        }
        let p = self.dim();
        let l = &self.l;
        let gen = Matrix::from_fn(p, |i, j| self.gen[(i, j)] * (l[j] / l[i]));
        let exit: Vec<R> = (0..p).map(|i| self.exit[i] / l[i]).collect();
        let alpha: Vec<R> = (0..p).map(|i| self.alpha[i] * l[i]).collect();
        let cache = self.cache.as_ref().map(|c| c.clone());
        Self {
            alpha,
            gen,
            exit,
            l: vec![R::one(); p],
            defect: self.defect,
            canonical: true,
            cache,
        }
    }

    /// Phase-type structure: probability `α`, sub-intensity `T`, `t ≥ 0`.
    pub fn is_phase_type(&self) -> bool {
        let tol = R::tol(1e-12);
        let p = self.dim();
        let asum = self.alpha.iter().fold(R::zero(), |a, b| a + *b);
        if self.alpha.iter().any(|a| *a < -tol) || asum > R::one() + tol {
            return false;
        }
        if self.exit.iter().any(|v| *v < -tol) {
            return false;
        }
        for i in 0..p {
            let mut row = R::zero();
            for j in 0..p {
                let v = self.gen.re(i, j);
                if i != j && v < -tol {
                    return false;
                }
                row += v;
            }
            if row > tol {
                return false;
            }
        }
        true
    }

    /// Inverse-CDF draw: doubling bracket, bisection, Newton polish.
    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> Result<R> {
        if self.defect < R::one() - R::tol(1e-9) {
            return Err(Error::DefectiveSample(self.defect.as_f64()));
        }
        let u: R = lit(rng.random::<f64>());
        Ok(self.quantile(u))
    }

    /// Smallest `x` with `cdf(x) ≥ u·defect`, to about `1e-10`.
    pub fn quantile(&self, u: R) -> R {
        let target = u * self.defect;
        let mut lo = R::zero();
        let mut hi = R::one();
        let cap = lit::<R>(1e12);
        while self.cdf(hi) < target && hi < cap {
            lo = hi;
            hi = hi * lit(2.0);
        }
        let tol = R::tol(1e-10);
        while hi - lo > tol * hi.max(R::one()) {
            let mid = (lo + hi) / lit(2.0);
            if self.cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = (lo + hi) / lit(2.0);
        for _ in 0..2 {
            let f = self.density(x);
            if f <= R::zero() {
                break;
            }
            let cand = x - (self.cdf(x) - target) / f;
            if cand >= lo && cand <= hi {
                x = cand;
            } else {
                break;
            }
        }
        x
    }
}

fn check_rate<R: Real>(delta: R) -> Result<()> {
    if delta > R::zero() && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("killing rate {delta} must be positive")))
    }
}

fn is_canonical<R: Real>(alpha: &[R], gen: &Matrix<R>, exit: &[R]) -> bool {
    let tol = R::tol(1e-12);
    let asum = alpha.iter().fold(R::zero(), |a, b| a + *b);
    if (asum - R::one()).abs() > tol {
        return false;
    }
    (0..gen.dim()).all(|i| {
        let row = (0..gen.dim()).fold(R::zero(), |a, j| a + gen.re(i, j));
        (exit[i] + row).abs() <= tol * gen.norm_inf().max(R::one())
    })
}

/// Density given as `Σ cₖe^{−λₖx}` with terms closed under conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTermList<R: Real> {
    terms: Vec<(Cx<R>, Cx<R>)>,
}

impl<R: Real> ExpTermList<R> {
    /// Validates conjugation closure, `Re λ > 0`, a real total mass and
    /// density positivity on the grid.
    pub fn new(terms: Vec<(Cx<R>, Cx<R>)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidRepresentation("no exponential terms".into()));
        }
        let scale = terms.iter().fold(R::one(), |m, (c, l)| m.max(c.norm()).max(l.norm()));
        let tol = R::tol(1e-9) * scale;
        for (c, l) in &terms {
            if !(l.re > R::zero()) {
                return Err(Error::InvalidRepresentation(format!(
                    "rate ({}, {}) needs positive real part",
                    l.re, l.im
                )));
            }
            if l.im.abs() <= tol {
                if c.im.abs() > tol {
                    return Err(Error::ConjugationViolation(format!(
                        "real rate {} carries complex weight",
                        l.re
                    )));
                }
            } else {
                let partner = terms
                    .iter()
                    .any(|(c2, l2)| (*l2 - l.conj()).norm() <= tol && (*c2 - c.conj()).norm() <= tol);
                if !partner {
                    return Err(Error::ConjugationViolation(format!(
                        "rate ({}, {}) has no conjugate partner",
                        l.re, l.im
                    )));
                }
            }
        }
        let list = Self { terms };
        let mass = list.terms.iter().fold(Cx::<R>::zero(), |a, (c, l)| a + *c / *l);
        if mass.im.abs() > tol {
            return Err(Error::ConjugationViolation(format!(
                "total mass has imaginary part {}",
                mass.im
            )));
        }
        let n = (GRID_END / GRID_STEP).round() as usize;
        for k in 0..=n {
            let x = lit::<R>(k as f64 * GRID_STEP);
            let f = list.density(x);
            if f < -R::tol(-DENSITY_FLOOR) {
                return Err(Error::InvalidRepresentation(format!(
                    "density {f} < 0 at x = {}",
                    k as f64 * GRID_STEP
                )));
            }
        }
        Ok(list)
    }

    pub fn terms(&self) -> &[(Cx<R>, Cx<R>)] {
        &self.terms
    }

    pub fn density(&self, x: R) -> R {
        self.terms
            .iter()
            .fold(R::zero(), |a, (c, l)| a + (*c * (-*l * x).exp()).re)
    }

    /// Reads the `re_c,im_c,re_lambda,im_lambda[,pair]` CSV format.
    pub fn from_csv_reader(rd: impl Read) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(rd);
        let headers = reader
            .headers()
            .map_err(|e| parse_err("header", e.to_string()))?
            .clone();
        let want = ["re_c", "im_c", "re_lambda", "im_lambda"];
        if headers.len() < 4 || headers.iter().take(4).ne(want.iter().copied()) {
            return Err(parse_err(
                "line 1",
                format!("expected header {}", want.join(",")),
            ));
        }
        let has_pair = headers.get(4) == Some("pair");
        let mut terms = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| parse_err("record", e.to_string()))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let loc = format!("line {line}");
            if rec.len() < 4 || rec.len() > 5 {
                return Err(parse_err(&loc, format!("expected 4 or 5 fields, found {}", rec.len())));
            }
            let mut v = [0f64; 4];
            for (i, slot) in v.iter_mut().enumerate() {
                *slot = rec[i]
                    .parse::<f64>()
                    .map_err(|e| parse_err(&format!("{loc}, field {}", want[i]), e.to_string()))?;
            }
            let c = Cx::new(lit::<R>(v[0]), lit(v[1]));
            let l = Cx::new(lit::<R>(v[2]), lit(v[3]));
            terms.push((c, l));
            let pair = match rec.get(4) {
                Some(s) if has_pair && !s.is_empty() => s
                    .parse::<u8>()
                    .map_err(|e| parse_err(&format!("{loc}, field pair"), e.to_string()))?,
                _ => 0,
            };
            if pair == 1 {
                terms.push((c.conj(), l.conj()));
            }
        }
        Self::new(terms)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(f)
    }
}

fn parse_err(loc: &str, msg: String) -> Error {
    Error::Parse {
        location: loc.to_string(),
        message: msg,
    }
}

/// Real block representation of an exponential-term density.
///
/// Real rates give `1×1` blocks `[−λ]`; a conjugate pair `a ± bi` with
/// weight `u + iv` on `a + bi` gives `[[−a, b], [−b, −a]]` with
/// `α = (2u, −2v)` and `t = (1, 0)`.
pub fn from_exp_terms<R: Real>(list: &ExpTermList<R>) -> Result<MeDist<R>> {
    let scale = list
        .terms
        .iter()
        .fold(R::one(), |m, (c, l)| m.max(c.norm()).max(l.norm()));
    let tol = R::tol(1e-9) * scale;
    let mut blocks: Vec<(Vec<Vec<R>>, Vec<R>, Vec<R>)> = Vec::new();
    for (c, l) in &list.terms {
        if l.im.abs() <= tol {
            blocks.push((vec![vec![-l.re]], vec![c.re], vec![R::one()]));
        } else if l.im > R::zero() {
            let (a, b) = (l.re, l.im);
            blocks.push((
                vec![vec![-a, b], vec![-b, -a]],
                vec![lit::<R>(2.0) * c.re, lit::<R>(-2.0) * c.im],
                vec![R::one(), R::zero()],
            ));
        }
    }
    let p: usize = blocks.iter().map(|b| b.1.len()).sum();
    let mut gen = vec![vec![R::zero(); p]; p];
    let mut alpha = Vec::with_capacity(p);
    let mut exit = Vec::with_capacity(p);
    let mut off = 0;
    for (g, a, t) in blocks {
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                gen[off + i][off + j] = *v;
            }
        }
        off += a.len();
        alpha.extend(a);
        exit.extend(t);
    }
    MeDist::new(alpha, gen, exit)
}

/// `(−T)⁻¹` as a real matrix.
pub fn neg_generator_inverse<R: Real>(d: &MeDist<R>) -> Result<Matrix<R>> {
    inverse(&(-d.generator()))
}
