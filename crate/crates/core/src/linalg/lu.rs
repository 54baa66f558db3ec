//! LU factorisation with partial pivoting.

use num_traits::{One, Zero};

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Relative pivot threshold: a pivot below `PIVOT_TOL·‖A‖∞` is singular.
pub const PIVOT_TOL: f64 = 1e-13;

/// Packed `PA = LU` factors.
#[derive(Clone, Debug)]
pub struct Lu<R: Real> {
    lu: Matrix<R>,
    perm: Vec<usize>,
    sign: R,
}

impl<R: Real> Lu<R> {
    pub fn new(a: &Matrix<R>) -> Result<Self> {
        let n = a.dim();
        let threshold = R::tol(PIVOT_TOL) * a.norm_inf();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = R::one();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, R::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > threshold) || pivot == R::zero() {
                return Err(Error::SingularMatrix {
                    pivot: pivot.as_f64(),
                    threshold: threshold.as_f64(),
                });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let inv = Cx::<R>::one() / lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] * inv;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn det(&self) -> Cx<R> {
        let n = self.lu.dim();
        (0..n).fold(Cx::new(self.sign, R::zero()), |acc, i| acc * self.lu[(i, i)])
    }

    pub fn solve_vec(&self, b: &[Cx<R>]) -> Vec<Cx<R>> {
        let n = self.lu.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Cx<R>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &Matrix<R>) -> Matrix<R> {
        let n = self.lu.dim();
        assert_eq!(b.dim(), n);
        let mut out = Matrix::zeros(n);
        let mut col = vec![Cx::zero(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    /// Solves the row system `x·A = b`.
    pub fn solve_row(&self, b: &[Cx<R>]) -> Vec<Cx<R>> {
        // xA = b  <=>  Aᵀxᵀ = bᵀ; solve via the transposed factors
        let n = self.lu.dim();
        assert_eq!(b.len(), n);
        // Uᵀ y = b
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        // Lᵀ z = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![Cx::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }
}

/// Solves `A·X = B`.
pub fn lu_solve<R: Real>(a: &Matrix<R>, b: &Matrix<R>) -> Result<Matrix<R>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(Lu::new(a)?.solve(b))
}

pub fn inverse<R: Real>(a: &Matrix<R>) -> Result<Matrix<R>> {
    lu_solve(a, &Matrix::identity(a.dim()))
}
