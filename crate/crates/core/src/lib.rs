//! Finite element Stokes solvers on the unit square: a coercive P1xP0
//! formulation with its iterated post-processing, and a Crouzeix-Raviart
//! Uzawa baseline, plus the tooling to run convergence studies on
//! manufactured solutions.

pub mod assembly;
pub mod cases;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};
