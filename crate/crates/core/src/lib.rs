//! Willmore energy of surfaces of revolution, δ-gluings of graphs over
//! annuli, catenoid–sphere constructions, energy-monotone homotopies and a
//! discrete Willmore gradient flow.

pub mod error;
pub mod flow;
pub mod gluing;
pub mod homotopy;
pub mod catsph;
pub mod corpus;
pub mod numerics;
pub mod profile;
pub mod segments;
pub mod svg;

pub use error::{Error, Result};
