pub mod baselines;
pub mod commands;
pub mod data;
pub mod detector;
pub mod error;
pub mod explain;
pub mod matrix;
pub mod metrics;
pub mod nn;
pub mod persist;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
