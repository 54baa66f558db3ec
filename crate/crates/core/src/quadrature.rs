//! Gauss–Legendre quadrature, fixed-order and adaptive.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{lit, Cx, Real};

/// Values that can be integrated: a real vector space with a norm.
pub trait QuadValue<R: Real>: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, w: R, other: &Self);
    fn magnitude(&self) -> R;
    fn distance(&self, other: &Self) -> R;
}

impl<R: Real> QuadValue<R> for R {
    fn zero_like(&self) -> Self {
        R::zero()
    }
    fn add_scaled(&mut self, w: R, other: &Self) {
        *self += w * *other;
    }
    fn magnitude(&self) -> R {
        self.abs()
    }
    fn distance(&self, other: &Self) -> R {
        (*self - *other).abs()
    }
}

impl<R: Real> QuadValue<R> for Cx<R> {
    fn zero_like(&self) -> Self {
        Cx::new(R::zero(), R::zero())
    }
    fn add_scaled(&mut self, w: R, other: &Self) {
        *self += *other * w;
    }
    fn magnitude(&self) -> R {
        self.norm()
    }
    fn distance(&self, other: &Self) -> R {
        (*self - *other).norm()
    }
}

impl<R: Real> QuadValue<R> for Matrix<R> {
    fn zero_like(&self) -> Self {
        Matrix::zeros(self.dim())
    }
    fn add_scaled(&mut self, w: R, other: &Self) {
        self.axpy(Cx::new(w, R::zero()), other);
    }
    fn magnitude(&self) -> R {
        self.max_abs()
    }
    fn distance(&self, other: &Self) -> R {
        self.max_abs_diff(other)
    }
}

impl<R: Real> QuadValue<R> for Vec<Cx<R>> {
    fn zero_like(&self) -> Self {
        vec![Cx::new(R::zero(), R::zero()); self.len()]
    }
    fn add_scaled(&mut self, w: R, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += *b * w;
        }
    }
    fn magnitude(&self) -> R {
        self.iter().fold(R::zero(), |m, z| m.max(z.norm()))
    }
    fn distance(&self, other: &Self) -> R {
        self.iter()
            .zip(other)
            .fold(R::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }
}

/// Nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<R: Real> {
    nodes: Vec<R>,
    weights: Vec<R>,
}

impl<R: Real> GaussLegendre<R> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![R::zero(); n];
        let mut weights = vec![R::zero(); n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0f64, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            if n == 1 {
                dp = 1.0;
                x = 0.0;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = lit(-x);
            nodes[n - 1 - i] = lit(x);
            weights[i] = lit(w);
            weights[n - 1 - i] = lit(w);
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[R] {
        &self.nodes
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn integrate<V: QuadValue<R>>(
        &self,
        mut f: impl FnMut(R) -> Result<V>,
        a: R,
        b: R,
    ) -> Result<V> {
        let half = (b - a) / lit(2.0);
        let mid = (a + b) / lit(2.0);
        let mut acc: Option<V> = None;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * *x)?;
            match acc.as_mut() {
                None => {
                    let mut z = v.zero_like();
                    z.add_scaled(*w * half, &v);
                    acc = Some(z);
                }
                Some(s) => s.add_scaled(*w * half, &v),
            }
        }
        Ok(acc.expect("at least one node"))
    }
}

/// Settings for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub order: usize,
    pub max_depth: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            order: 15,
            max_depth: 40,
        }
    }
}

/// Panel budget of one [`adaptive`] call.
pub const MAX_PANELS: usize = 200_000;

/// Adaptive composite Gauss–Legendre: a panel is accepted when its value
/// agrees with the sum over its two halves.
pub fn adaptive<R: Real, V: QuadValue<R>>(
    mut f: impl FnMut(R) -> Result<V>,
    a: R,
    b: R,
    opts: QuadOptions,
) -> Result<V> {
    let gl = GaussLegendre::<R>::new(opts.order);
    let total = (b - a).abs();
    if total == R::zero() {
        let v = f(a)?;
        return Ok(v.zero_like());
    }
    let whole = gl.integrate(&mut f, a, b)?;
    let mut acc = whole.zero_like();
    let mut stack = vec![(a, b, whole, 0usize)];
    let abs_tol = R::tol(opts.abs_tol);
    let rel_tol = R::tol(opts.rel_tol);
    let mut panels = 0usize;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::QuadratureFailure(format!(
                "more than {MAX_PANELS} panels on [{a}, {b}]"
            )));
        }
        let mid = (lo + hi) / lit(2.0);
        let left = gl.integrate(&mut f, lo, mid)?;
        let right = gl.integrate(&mut f, mid, hi)?;
        let mut refined = left.clone();
        refined.add_scaled(R::one(), &right);
        let err = refined.distance(&est);
        let share = (hi - lo).abs() / total;
        let allowed = (abs_tol * share).max(rel_tol * refined.magnitude());
        if err <= allowed || err <= R::epsilon() * lit(64.0) * refined.magnitude() {
            acc.add_scaled(R::one(), &refined);
        } else if depth >= opts.max_depth && err <= abs_tol * lit(1e-3) {
            acc.add_scaled(R::one(), &refined);
        } else if depth >= opts.max_depth {
            return Err(Error::QuadratureFailure(format!(
                "panel [{lo}, {hi}] error {:e} after {depth} bisections",
                err.as_f64()
            )));
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(acc)
}

/// [`adaptive`] with default options.
pub fn integrate<R: Real, V: QuadValue<R>>(
    f: impl FnMut(R) -> Result<V>,
    a: R,
    b: R,
) -> Result<V> {
    adaptive(f, a, b, QuadOptions::default())
}

/// Scalar convenience wrapper for infallible integrands.
pub fn integrate_real<R: Real>(mut f: impl FnMut(R) -> R, a: R, b: R, tol: f64) -> Result<R> {
    adaptive(
        |x| Ok(f(x)),
        a,
        b,
        QuadOptions {
            abs_tol: tol,
            rel_tol: tol,
            ..QuadOptions::default()
        },
    )
}
