use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{re, Cx, Real};

/// Dense complex square matrix, row-major.
///
/// Real matrices (ME generators, the outputs of matrix functions after
/// realification) are stored here with zero imaginary parts.
#[derive(Clone, PartialEq)]
pub struct Matrix<R: Real> {
    dim: usize,
    data: Vec<Cx<R>>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Cx::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Cx::one())
    }

    /// `s·I`.
    pub fn scalar(dim: usize, s: Cx<R>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = s;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Cx<R>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from real rows, checking squareness and finiteness.
    pub fn from_real_rows(rows: &[Vec<R>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
        }
        let m = Self::from_fn(dim, |i, j| re(rows[i][j]));
        m.check_finite()?;
        Ok(m)
    }

    pub fn diag(values: &[Cx<R>]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Cx<R>] {
        &self.data
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("matrix entry".into()))
        }
    }

    /// Real part of entry `(i, j)`.
    pub fn re(&self, i: usize, j: usize) -> R {
        self[(i, j)].re
    }

    /// Real parts as nested rows.
    pub fn real_rows(&self) -> Vec<Vec<R>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)].re).collect())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> R {
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .fold(R::zero(), |acc, z| acc + z.norm())
            })
            .fold(R::zero(), R::max)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Largest imaginary part in modulus.
    pub fn max_imag(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, z| acc.max(z.im.abs()))
    }

    pub fn trace(&self) -> Cx<R> {
        (0..self.dim).fold(Cx::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Cx<R>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| *z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: R) -> Self {
        self.scale(re(s))
    }

    /// `self + s·I`.
    pub fn shift(&self, s: Cx<R>) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] += s;
        }
        m
    }

    /// `self += s·other`.
    pub fn axpy(&mut self, s: Cx<R>, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * *b;
        }
    }

    pub fn map(&self, f: impl Fn(Cx<R>) -> Cx<R>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| f(*z)).collect(),
        }
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> R {
        self.data
            .iter()
            .zip(&other.data)
            .fold(R::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }

    /// Matrix-vector product `self·v`.
    pub fn mul_vec(&self, v: &[Cx<R>]) -> Vec<Cx<R>> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(Cx::zero(), |acc, j| acc + self[(i, j)] * v[j])
            })
            .collect()
    }

    /// Row-vector product `v·self`.
    pub fn vec_mul(&self, v: &[Cx<R>]) -> Vec<Cx<R>> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|j| {
                (0..self.dim).fold(Cx::zero(), |acc, i| acc + v[i] * self[(i, j)])
            })
            .collect()
    }

    /// Bilinear form `a·self·b` for real vectors.
    pub fn bilinear(&self, a: &[R], b: &[R]) -> Cx<R> {
        assert_eq!(a.len(), self.dim);
        assert_eq!(b.len(), self.dim);
        let mut acc = Cx::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self[(i, j)] * a[i] * b[j];
            }
        }
        acc
    }

    /// `Mᵏ` by repeated squaring.
    pub fn powi(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Commutator norm `‖AB − BA‖∞`.
    pub fn commutator_norm(&self, other: &Self) -> R {
        (&(self * other) - &(other * self)).norm_inf()
    }

    /// Zeroes the imaginary parts after checking they are negligible:
    /// `max |Im| ≤ tol·max(1, ‖M‖∞)`.
    pub fn realify(&self, tol: R) -> Result<Self> {
        let bound = tol * self.norm_inf().max(R::one());
        let imag = self.max_imag();
        if imag > bound || !imag.is_finite() {
            return Err(Error::NotReal(imag.as_f64()));
        }
        Ok(self.map(|z| re(z.re)))
    }
}

impl<R: Real> Index<(usize, usize)> for Matrix<R> {
    type Output = Cx<R>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cx<R> {
        &self.data[i * self.dim + j]
    }
}

impl<R: Real> IndexMut<(usize, usize)> for Matrix<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<R> {
        &mut self.data[i * self.dim + j]
    }
}

impl<R: Real> Add for &Matrix<R> {
    type Output = Matrix<R>;
    fn add(self, rhs: &Matrix<R>) -> Matrix<R> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<R: Real> Sub for &Matrix<R> {
    type Output = Matrix<R>;
    fn sub(self, rhs: &Matrix<R>) -> Matrix<R> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<R: Real> Neg for &Matrix<R> {
    type Output = Matrix<R>;
    fn neg(self) -> Matrix<R> {
        self.map(|z| -z)
    }
}

impl<R: Real> Mul for &Matrix<R> {
    type Output = Matrix<R>;
    fn mul(self, rhs: &Matrix<R>) -> Matrix<R> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<R: Real> fmt::Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                if z.im == R::zero() {
                    write!(f, "{:>12.6} ", z.re)?;
                } else {
                    write!(f, "{:>12.6}{:+.6}i ", z.re, z.im)?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Real row vector times matrix, as complex.
pub(crate) fn row_times<R: Real>(v: &[R], m: &Matrix<R>) -> Vec<Cx<R>> {
    let v: Vec<Cx<R>> = v.iter().map(|x| re(*x)).collect();
    m.vec_mul(&v)
}
