//! Numerical toolkit for twisted unitary conjugation of molecular
//! Hamiltonians and the analyticity of reduced densities away from collisions.

pub mod error;
pub mod geometry;
pub mod numerics;

pub use error::{Error, Result};
pub mod potentials;
pub mod twist;
pub mod operators;
pub mod unitary;
pub mod pseudodiff;
pub mod states;
pub mod densities;
