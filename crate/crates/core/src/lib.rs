//! Combinatorics of canonical double covers of enhanced level graphs,
//! stability of multidegrees on nodal curves, and degree-level spectral data.

pub mod collision;
pub mod compare;
pub mod corpus;
pub mod cover;
pub mod dot;
pub mod error;
pub mod graph;
pub mod image;
pub mod polarization;
pub mod rational;
pub mod spectral;
pub mod symmetry;

pub use error::{Error, Result};
