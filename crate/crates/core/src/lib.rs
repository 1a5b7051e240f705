//! Models built as sequences of small, interpretable steps.
//!
//! A path from a simple start model to a final model is scored by its cost
//! sequence (the cost of every intermediate model). Weighted sums of that
//! sequence ([`path::path_loss`]) measure how hard the final model is to
//! understand, and [`pareto`] trades that loss off against the final cost.
//!
//! Two model classes are supported: linear regression where each step changes
//! one coefficient ([`linreg`]) and shallow two-class trees where each step
//! splits one leaf ([`tree`]).

pub mod cli;
pub mod data;
pub mod error;
pub mod linalg;
pub mod linreg;
pub mod pareto;
pub mod path;
pub mod tree;

pub use error::{Error, Result};
