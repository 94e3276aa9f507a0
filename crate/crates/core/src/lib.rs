//! Quantum CSS codes, duality-preserving concatenation and AEL distance
//! amplification on bipartite expanders, and a list-decoding pipeline with
//! exact-distribution pseudoexpectation backends, all validated against
//! brute-force oracles at desk scale.

pub mod error;
pub mod gf;
pub mod fqlinalg;
pub mod css;
pub mod duality;
pub mod graph;
pub mod ael;
pub mod pseudo;
pub mod instances;
pub mod decode;

pub use error::{Error, Result};
