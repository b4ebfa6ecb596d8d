//! Gluing function and δ-gluing of graphs over annuli.

pub mod annulus;
pub mod function;
pub mod verify;

pub use annulus::{delta_glue, willmore_energy_graph, AnnulusGraph, PolarGrid};
pub use function::GluingProfile;
pub use verify::{verify_gluing_bound, GluingConfig, GluingReport};
