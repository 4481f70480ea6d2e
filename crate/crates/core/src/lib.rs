//! Exact measures on the binary tree, Kraft-coded model classes, MDL and
//! mixture predictors, and explicit-constant error-bound checks.

pub mod analysis;
pub mod error;
pub mod measures;
pub mod modelclass;
pub mod predictors;
pub mod numkernel;
pub mod report;

pub use error::{Error, Result};
