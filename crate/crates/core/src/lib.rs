//! Simulation laboratory for quantile and Bahadur-Kiefer processes of
//! long-range dependent linear sequences.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod lrd;
pub mod marginals;
pub mod numerics;
pub mod processes;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
