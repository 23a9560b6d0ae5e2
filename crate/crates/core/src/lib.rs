//! Signature-feature contextual bandits.
//!
//! Context windows of a sampled path are lifted to truncated, time-augmented
//! path signatures with the time-ending coordinates pruned, and each arm runs
//! its own ridge-regression UCB on those features. The crate also carries the
//! window-mean baselines, Euler–Maruyama context processes, and a seeded
//! benchmark harness.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bandit;
pub mod cli;
pub mod envs;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod path;
pub mod signature;

pub use error::{Error, Result};
