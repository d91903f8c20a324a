//! Monte Carlo estimation of `E f(X(T))` for continuous-time Markov chains
//! written in random-time-change form.
//!
//! The crate provides exact path simulation (modified next reaction method
//! and Gillespie's direct method), Euler tau-leaping, the coupled path
//! constructions used to build multilevel estimators, and both the biased and
//! unbiased multilevel Monte Carlo estimators with pilot-driven allocation of
//! the variance budget.
//!
//! The crate is `no_std` (it needs `alloc`). Parallel execution is plugged in
//! through [`mlmc::Executor`]; the companion CLI crate provides a thread-pool
//! implementation.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod coupling;
mod error;
pub mod mlmc;
pub mod model;
pub mod paths;
pub mod stochastics;

pub use error::{Error, Result};
pub use model::{Observable, Reaction, ReactionNetwork, ScalingProfile, Species, State};
pub use stochastics::RandomStream;
