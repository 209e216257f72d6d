//! Arbitrary-precision numerics: reals, constants, polylogarithms, quadrature
//! and the normal-function Taylor coefficients.

pub mod constants;
pub mod polylog;
pub mod quad;
pub mod real;
pub mod thnf;

pub use constants::{named_constant, named_constant_str, NamedConstant};
pub use polylog::polylog;
pub use quad::{tanh_sinh_integrate, IntegrationRegion, QuadResult, RegionKind};
pub use real::{BigComplex, BigReal, Provenance};
pub use thnf::{thnf_coefficient, ThnfMethod, ThnfValue};
