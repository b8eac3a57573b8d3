//! Core library for the XY Floquet code: lattice, circuits, simulators,
//! detector graphs and decoding.

pub mod blossom;
pub mod circuit;
pub mod decoder;
pub mod error;
pub mod experiment;
pub mod frame;
pub mod gf2;
pub mod goldens;
pub mod lattice;
pub mod noise;
pub mod observables;
pub mod path_integral;
pub mod sampler;
pub mod segments;
pub mod selftest;
pub mod stabilizer;
pub mod statevector;
pub mod syndrome;

pub use error::{Error, Result};
