//! Numerical kernels for Bergman kernels and metrics on compact hyperbolic
//! Riemann surfaces, with the comparison bounds built on them.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the double-precision types used by the command-line tools.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod fd;
pub mod grassmann;
pub mod group;
pub mod hyperbolic;
pub mod kernel;
pub mod scalar;
pub mod sum;

pub use error::{Error, Result};
pub use scalar::Real;

pub type HPoint64 = hyperbolic::HPoint<f64>;
pub type Mobius64 = hyperbolic::Mobius<f64>;
pub type GroupSpec64 = group::GroupSpec<f64>;
pub type ElementSet64 = group::ElementSet<f64>;
pub type ChartMatrix64 = grassmann::ChartMatrix<f64>;
pub type SymPoint64 = grassmann::SymPoint<f64>;

pub type HPoint32 = hyperbolic::HPoint<f32>;
pub type Mobius32 = hyperbolic::Mobius<f32>;
pub type ElementSet32 = group::ElementSet<f32>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
