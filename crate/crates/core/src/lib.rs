//! Link-level simulator for RIS-aided angular-based hybrid beamforming in
//! mmWave massive MIMO.
//!
//! The pipeline has three design stages layered on a clustered geometric
//! channel model:
//!
//! 1. [`rf`]: analog precoder/combiner built from quantized orthogonal
//!    steering vectors that cover the slow-time-varying angle supports.
//! 2. [`baseband`]: SVD precoder with water-filling, minimum-MSE combiner
//!    and the achievable rate of the resulting link.
//! 3. [`optimizer`]: RIS phase design by particle swarm optimization, plus
//!    random, constant and exhaustive-search baselines.
//!
//! [`harness`] strings the stages together into seeded Monte Carlo sweeps.

pub mod baseband;
pub mod channel;
mod error;
pub mod harness;
pub mod linalg;
pub mod optimizer;
pub mod rf;
pub mod seed;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
