//! Simulation and verification toolkit for a strictly stationary sequence of
//! bounded random variables that is (L-1)-tuplewise independent, has
//! independent absolute values and uniform marginals, and whose normalized
//! partial sums nevertheless fail to approach a normal law.
//!
//! The crate is organized bottom-up:
//!
//! * [`vecops`]: deterministic vector transforms (sign normalization,
//!   splicing, conditional piece flips).
//! * [`signs`]: the parity-constrained sign space and its uniform law.
//! * [`measures`]: samplers for the recursive block measures and the
//!   block-i.i.d. processes built from them.
//! * [`stationary`]: the offset process and the lazy window sampler for the
//!   stationary limit sequence.
//! * [`stats`]: moment estimators, exact oracles and hypothesis tests.
//! * [`verify`]: the named verification suites run by the CLI and the
//!   acceptance tests.

pub mod cli;
pub mod config;
pub mod error;
pub mod measures;
pub mod parallel;
pub mod rng;
pub mod signs;
pub mod stationary;
pub mod stats;
pub mod vecops;
pub mod verify;

pub use config::Config;
pub use error::{Error, Result};
pub use rng::RandomSource;

/// Half-width of the support of the base uniform law, `sqrt(3)`.
pub const SQRT3: f64 = 1.732_050_807_568_877_2;
