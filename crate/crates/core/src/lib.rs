//! Evolutionary Kolmogorov-Arnold networks.
//!
//! The solution of a time-dependent PDE is represented by a network whose
//! parameters are advanced in time: at each step the PDE right-hand side is
//! projected onto the network's tangent space by a least-squares solve.
//! Pseudo-spectral reference solvers and error metrics are included so runs
//! can be checked against an independent discretization.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod kan;
pub mod linalg;
pub mod metrics;
pub mod problems;
pub mod spectral;
mod util;

pub use error::{Error, Result};
