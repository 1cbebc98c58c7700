//! A-priori error bounds for Newton matrix iterations.
//!
//! The polar-factor iteration `X <- (X + X^{-T})/2` and the square-root
//! iteration `X <- (X + X^{-1} A)/2` both admit per-step bounds
//! `||X_* - X_k|| <= sigma(omega^(k)(t0))` with `omega`, `sigma` from
//! [`rates`]. This crate computes the iterations, the bounds, and the checks
//! that compare them.

#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod gallery;
pub mod linalg;
pub mod polar;
pub mod rates;
pub mod sqrt;
pub mod trace;

pub use error::{Error, Result};
pub use gallery::GallerySpec;
pub use linalg::Matrix;
pub use rates::RateParams;
