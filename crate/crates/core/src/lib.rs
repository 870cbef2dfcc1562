//! Probability leakage audits for Bayesian predictive models.

pub mod calibration;
pub mod error;
pub mod evidence;
pub mod falsification;
pub mod predictive;
pub mod quadrature;
pub mod regression;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
pub use predictive::{Kind, PredictiveDistribution};
