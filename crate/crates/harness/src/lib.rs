//! Experiments, offline comparators and certificate checks for the
//! universal online learners in `maler-core`.

pub mod certify;
pub mod comparator;
pub mod error;
pub mod experiment;
pub mod fuzz;
pub mod libsvm;
pub mod plot;
pub mod tasks;

pub use error::{Error, Result};
