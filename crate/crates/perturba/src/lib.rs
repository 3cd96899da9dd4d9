//! Homological perturbation calculus over exact rationals and tolerance-aware
//! floats: transfer of homotopy equivalence data along perturbations,
//! contractions and their degreewise variants, double-complex constructions,
//! and rigidity pipelines for Lie / associative / metric deformations.

pub mod complexes;
pub mod constructions;
pub mod error;
pub mod generate;
pub mod graded;
pub mod hochschild_deform;
pub mod io;
pub mod lie_deform;
pub mod matrix;
pub mod metric_hochschild;
pub mod perturbation;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Rat, Scalar, Tol};
