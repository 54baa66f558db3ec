//! Dense complex linear algebra for small matrices.

mod lu;
mod matfn;
mod matrix;
mod poly;

pub use lu::{inverse, lu_solve, Lu, PIVOT_TOL};
pub use matfn::{
    expm, matfn, matfn_contour, matfn_real, matfn_series, matfn_spectral, matfn_with, AnalyticFn,
    Domain, Method, CONTOUR_NODES, SERIES_MAX_TERMS,
};
pub use matrix::Matrix;
#[allow(unused_imports)]
pub(crate) use matrix::row_times;
pub use poly::{
    char_poly, char_poly_full, eigenvalues, poly_roots, real_poly, roots, separation,
    with_spectrum, CharPoly, Poly, Spectrum,
};
