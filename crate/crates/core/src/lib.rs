//! Sufficient dimension reduction with shallow neural networks.
//!
//! A regression network whose first hidden layer is linear and bias-free is
//! trained at several first-layer widths `k`. A golden-ratio bracketing search
//! followed by a linear refinement picks the smallest width whose validation
//! error is not beaten by more than a penalty per extra dimension. The chosen
//! width estimates the structural dimension and the first-layer weights span
//! the estimated central space.

pub mod bench;
pub mod cli;
pub mod data;
pub mod dimsearch;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod network;
pub mod rng;
pub mod simgen;

pub use data::{DataSplit, Standardization};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use network::{Activation, FittedModel, NetworkParams, NnlResult, TrainConfig};
pub use dimsearch::{run_sdr, PenaltyConfig, SdrOutcome};
