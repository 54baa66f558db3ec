//! Fluctuation identities for spectrally negative Lévy processes killed at
//! an independent matrix-exponential time.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the production precision. Simulation ([`mc`]) and
//! the validation harness are `f64` only.
//!
//! ```
//! use levyme::{fixtures, fluct, LevyModel64, ScaleEval64};
//!
//! let ev = ScaleEval64::new(LevyModel64::stable(1.5)?, fixtures::worked_example())?;
//! let p = fluct::p_up_before_horizon(&ev, 0.5)?;
//! assert!(p > 0.0 && p < 1.0);
//! # Ok::<(), levyme::Error>(())
//! ```

pub mod error;
pub mod fixtures;
pub mod fluct;
pub mod levy;
pub mod linalg;
pub mod mc;
pub mod me;
pub mod quadrature;
pub mod scale;
pub mod scalar;
pub mod special;
pub mod validation;

pub use error::{Error, ExitClass, Result};
pub use levy::{LevyModel, PhiMatrix};
pub use linalg::Matrix;
pub use me::{ExpTermList, MeDist};
pub use scalar::{Cx, Real};
pub use scale::{ScalarScale, ScaleEval};

pub type Matrix64 = Matrix<f64>;
pub type MeDist64 = MeDist<f64>;
pub type LevyModel64 = LevyModel<f64>;
pub type ScaleEval64 = ScaleEval<f64>;
pub type PhiMatrix64 = PhiMatrix<f64>;

pub type Matrix32 = Matrix<f32>;
pub type MeDist32 = MeDist<f32>;
pub type LevyModel32 = LevyModel<f32>;
pub type ScaleEval32 = ScaleEval<f32>;
