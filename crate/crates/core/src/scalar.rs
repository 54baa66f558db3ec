//! Scalar abstraction shared by every numerical module.
//!
//! All of the matrix calculus is written once against [`Real`] and
//! instantiated for `f64` (the production precision) and `f32`.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// A tolerance of `v`, floored at a small multiple of the machine epsilon
    /// so that `f64`-calibrated tolerances stay meaningful in lower precision.
    #[inline]
    fn tol(v: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(16.0);
        Self::lit(v).max(floor)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over [`Real`].
pub type Cx<R> = Complex<R>;

#[inline]
pub(crate) fn cx<R: Real>(re: R, im: R) -> Cx<R> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<R: Real>(v: R) -> Cx<R> {
    Complex::new(v, R::zero())
}

#[inline]
pub(crate) fn lit<R: Real>(v: f64) -> R {
    R::lit(v)
}

/// `max(1, |v|)`: the scale used by every absolute-relative hybrid tolerance.
#[inline]
pub(crate) fn unit_scale<R: Real>(v: R) -> R {
    v.abs().max(R::one())
}

/// Principal complex power `z^p` for real `p`; `0^p = 0` for `p > 0`.
#[inline]
pub(crate) fn cpowf<R: Real>(z: Cx<R>, p: R) -> Cx<R> {
    if z.re == R::zero() && z.im == R::zero() {
        if p == R::zero() {
            return re(R::one());
        }
        return re(R::zero());
    }
    z.powf(p)
}
