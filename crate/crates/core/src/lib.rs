//! Numerical k-plane Radon transform, Riesz potentials continued to negative
//! orders, and the three inversion routes built on them.
//!
//! The special-function and quadrature kernels are generic over [`Real`];
//! the field-level machinery works in `f64` and complex `f64` orders.

pub mod alphaline;
pub mod error;
pub mod fields;
pub mod inversion;
pub mod quadrature;
pub mod radon;
pub mod riesz;
pub mod scalar;
pub mod spherical;
pub mod specfun;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;
pub use specfun::Dimension;

/// Complex order of a fractional operator.
pub type Complex64 = num_complex::Complex64;
/// Double precision Gauss-Legendre rule.
pub type GaussLegendre64 = quadrature::GaussLegendre<f64>;
/// Double precision Gauss-Jacobi rule.
pub type GaussJacobi64 = quadrature::GaussJacobi<f64>;
/// Single precision Gauss-Legendre rule.
pub type GaussLegendre32 = quadrature::GaussLegendre<f32>;
