//! Arbitrary-precision scalars, log-magnitude numbers, polynomials and roots.

mod complex;
mod logc;
mod poly;
mod real;
mod roots;

pub use complex::APComplex;
pub use logc::LogComplex;
pub use poly::APPoly;
pub use real::{Real, MIN_PRECISION};
pub use roots::{default_eps, newton_root, polish, roots_all, roots_simple, Root};
