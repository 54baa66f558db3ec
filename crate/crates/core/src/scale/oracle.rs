//! Convolution-series evaluation of `W₋T(x) = Σₖ (−T)ᵏ W₀^{*(k+1)}(x)`.
//!
//! Independent of the closed-form kernels at nonzero rates: it only uses
//! `W₀`. The second convolution power comes from adaptive quadrature; the
//! higher powers from product integration on a uniform grid, linear in the
//! previous power and exact against `W₀`. The discretization error is
//! `O(h²)`.

use num_traits::Zero;

use crate::error::Result;
use crate::linalg::Matrix;
use crate::quadrature::{adaptive, QuadOptions};
use crate::scalar::{lit, re, Cx, Real};

use super::ScaleEval;

/// Series truncation: a term is negligible below this `∞`-norm.
pub const ORACLE_TERM_TOL: f64 = 1e-12;
const MAX_POWERS: usize = 400;

/// `W₋T(x)` from the convolution series on a grid of step at most `h`.
pub fn w_matrix_series_oracle<R: Real>(ev: &ScaleEval<R>, x: R, h: R) -> Result<Matrix<R>> {
    let n_dim = ev.dim();
    let w0 = ev.kernel(Cx::zero())?;
    if x == R::zero() {
        return Ok(Matrix::identity(n_dim).scale_re(w0.w(R::zero())?.re));
    }
    let n = (x / h).ceil().to_usize().expect("finite grid").max(2);
    let step = x / lit(n as f64);
    let grid: Vec<R> = (0..=n).map(|j| step * lit(j as f64)).collect();

    let first: Vec<R> = grid.iter().map(|y| Ok(w0.w(*y)?.re)).collect::<Result<_>>()?;
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        ..QuadOptions::default()
    };
    let mut current: Vec<R> = grid
        .iter()
        .map(|&y| {
            if y == R::zero() {
                return Ok(R::zero());
            }
            let half = y / lit(2.0);
            let f = |s: R| -> Result<Cx<R>> { Ok(re(w0.w(s)?.re * w0.w(y - s)?.re)) };
            Ok((adaptive(f, R::zero(), half, opts)? + adaptive(f, half, y, opts)?).re)
        })
        .collect::<Result<_>>()?;

    // cell weights: ∫ W₀ and the linear-interpolation correction
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for m in 0..n {
        let (m0, m1) = w0.moments(grid[m], grid[m + 1])?;
        a.push(m0.re);
        b.push((m1.re - grid[m] * m0.re) / step);
    }

    let neg_t = ev.neg_generator();
    let mut sum = Matrix::identity(n_dim).scale_re(first[n]);
    let mut power = neg_t.clone();
    let mut quiet = 0;
    sum.axpy(re(current[n]), &power);
    for _ in 2..MAX_POWERS {
        let mut next = vec![R::zero(); n + 1];
        for j in 1..=n {
            let mut acc = R::zero();
            for m in 0..j {
                acc += (a[m] - b[m]) * current[j - m] + b[m] * current[j - m - 1];
            }
            next[j] = acc;
        }
        current = next;
        power = &power * neg_t;
        let term = power.scale_re(current[n]);
        sum = &sum + &term;
        if term.max_abs() < R::tol(ORACLE_TERM_TOL) {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    sum.realify(R::tol(1e-9))
}
