//! Generalized shift-splitting (GSTS) iterations and preconditioners for
//! singular saddle-point systems.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod problem;
pub mod solvers;
pub mod splitting;

pub use error::{Error, Result};
