//! Simulation, exact enumeration and Markov chain analysis of a
//! self-reinforcing parity die, plus the binomial and run-based fairness
//! tests used to reason about its toss streams.
//!
//! A standard die has its odd and even faces on opposite sides. After each
//! roll the hidden face is rewritten ([`MutationRule`]), which conditions
//! the next roll on the last one. Under [`MutationRule::ParityCopy`] the die
//! eventually freezes in one of four configurations, so the ensemble
//! probability of Even stays 1/2 while every individual path settles on a
//! share of 0, 1/3, 2/3 or 1.

pub mod chain;
pub mod cli;
pub mod die;
pub mod enumerate;
mod error;
pub mod linalg;
pub mod montecarlo;
pub mod rational;
mod serde_util;
pub mod stats;

pub use die::{
    flip_parities, initial_config, is_frozen, parity_probability, transitions, DieConfig,
    MutationRule, Parity, RollResult,
};
pub use error::{Error, Result};
pub use rational::Ratio;
pub use stats::TossSequence;
