//! Exact combinatorial machinery for geometric tropicalization: rational
//! cones and fans, integral cone complexes with a piecewise-linear lattice
//! map, compatible unimodular subdivision, and motivic volume generating
//! functions computed from combinatorial models of simple normal crossing
//! compactifications.
//!
//! All arithmetic is arbitrary-precision integer arithmetic; there is no
//! floating point anywhere in the geometric core.

pub mod complex;
pub mod cone;
pub mod error;
pub mod fan;
pub mod io;
pub mod lattice;
pub mod motivic;
pub mod snc;
pub mod volumes;

pub use cone::Cone;
pub use error::TropError;
pub use lattice::{LatticeMap, LatticeVector};
