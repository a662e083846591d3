//! Loudspeaker placement for least-squares sound field synthesis in 2D.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: integer-order Bessel and Hankel functions.
//! - [`wavefield`]: cylindrical-harmonic expansions, plane waves, point sources.
//! - [`room`]: rectangular-room transfer functions by the image source method.
//! - [`synthesis`]: weighting matrices, driving-signal solvers, field synthesis, SDR.
//! - [`placement`]: the mean-square-error placement cost and greedy selection.

pub mod error;
pub mod linalg;
pub mod placement;
pub mod quadrature;
pub mod room;
pub mod specfun;
pub mod synthesis;
pub mod wavefield;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub type CMatrix = nalgebra::DMatrix<Complex64>;
pub type CVector = nalgebra::DVector<Complex64>;
