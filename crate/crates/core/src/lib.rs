//! Numerical core for A-space sections of the Hardy Z-function.
//!
//! Everything here is `no_std` with `alloc`. Floating-point functions come
//! from `libm`, so results do not depend on the host's math library.
//!
//! The pieces fit together like this:
//!
//! * [`special_fn`] evaluates the rotation phases and Lambert `W_0`.
//! * [`z_model`] builds the rotated cosine sums for a [`z_model::CoefficientModel`].
//! * [`gram`] finds Gram points and classifies them.
//! * [`discriminant`] tracks the Gram extremum along curves in parameter space.
//! * [`curves`] builds the two-stage corrected curves.
//! * [`adjust_mc`] holds the neighbour-adjustment identities and the Monte-Carlo baseline.
//! * [`dh`] provides the Davenport-Heilbronn model.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod adjust_mc;
pub mod curves;
pub mod dh;
pub mod discriminant;
mod error;
pub mod gram;
mod quad;
pub mod riemann_siegel;
mod rs_coeffs;
pub mod special_fn;
mod sum;
pub mod z_model;

pub use error::{Error, Result};
pub use sum::NeumaierSum;
