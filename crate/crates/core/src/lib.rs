//! Exact computations on finite and symbolic ultrametric spaces: validation,
//! distance sets, weak similarities, ultrametric preserving functions and
//! their extensions.

mod error;

pub mod distset;
pub mod extension;
pub mod generators;
pub mod numeric;
pub mod preserving;
pub mod space;
pub mod wsim;

pub use error::Error;
pub use numeric::{ExtendedBound, Interval, Rational};
