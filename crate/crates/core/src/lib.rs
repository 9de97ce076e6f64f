//! Thresholded Lasso and Gauss-Dantzig simulation toolkit.

pub mod ensembles;
pub mod analysis;
pub mod dantzig;
pub mod error;
pub mod harness;
pub mod lasso_path;
pub mod linalg;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod procedures;
pub mod refit;
pub mod rng;

pub use error::{Error, Result};
