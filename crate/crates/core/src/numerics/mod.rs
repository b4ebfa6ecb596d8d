pub mod cheb;
pub mod fd;
pub mod quad;

pub use quad::{adaptive_simpson, Integral, QuadSettings};
