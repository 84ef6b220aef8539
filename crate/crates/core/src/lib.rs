//! Mean-field and Gaussian-covariance simulation of two fiber-coupled,
//! periodically modulated optomechanical cavities, with the quantum
//! synchronization measures computed on top.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod measures;
pub mod model;
pub mod output;
pub mod sweep;

pub use error::{Error, Result};
