//! Numerical machinery for spaces of heat-equation solutions on nested
//! space-time cylinders: exact caloric atom dictionaries, anisotropic
//! Sobolev inner products, parabolic potentials with a Green-formula
//! verifier, doubly orthogonal bases, density experiments and spectral
//! continuation.
//!
//! The crate is organised around seven modules:
//!
//! - [`domain`]: cylinder geometry and tensor quadrature;
//! - [`specialfn`]: real-order Bessel functions, their zeros, spherical
//!   harmonics;
//! - [`caloric`]: the atom dictionary and a pointwise caloricity oracle;
//! - [`sobolev`]: inner products and Gram assembly;
//! - [`potentials`]: initial/volume/layer potentials and the Green check;
//! - [`numerics`]: deterministic dense symmetric linear algebra;
//! - [`dobasis`]: doubly orthogonal bases, density and continuation
//!   experiments.

pub mod caloric;
pub mod dobasis;
pub mod domain;
pub mod error;
pub mod numerics;
pub mod potentials;
pub mod sobolev;
pub mod specialfn;

pub use error::{Error, Result};
