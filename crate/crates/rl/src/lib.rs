//! Reinforcement learning on top of `hqrl-core`: environments, agents and
//! the training loop.

pub mod agents;
pub mod envs;
mod error;
pub mod train;

pub use error::{Error, Result};
