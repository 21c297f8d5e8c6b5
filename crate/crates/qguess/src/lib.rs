//! Optimal guessing strategies for ensembles of quantum states, with pre- and
//! post-measurement side information, measurement incompatibility witnesses,
//! and symmetry-reduced solvers.

pub mod discr;
pub mod error;
pub mod games;
pub mod linalg;
pub mod policy;
pub mod random;

pub use error::{Error, Result};
