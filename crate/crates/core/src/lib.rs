//! Exactly solvable one-dimensional Dirac Hamiltonians from Darboux
//! transformations, with numerical certification of intertwining,
//! Hermiticity, regularity, bound states and reflectionless scattering.

pub mod error;
pub mod field;
pub mod numerics;
pub mod pauli;

pub mod dirac;
pub mod free;
pub mod darboux2;
pub mod reduce;
pub mod scatter;
pub mod nonreducible;

pub mod app;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
