//! Posted-price selling from samples.
//!
//! A seller posts one price to a buyer whose valuation is drawn from a known
//! family of distributions; the seller sees only i.i.d. samples. This crate
//! provides:
//!
//! - analytic valuation families with exact quantile structure ([`dist`]),
//! - revenue curves, monopoly prices, virtual values, and shape classes
//!   ([`curve`]),
//! - sample-based pricing strategies and their evaluation against analytic
//!   benchmarks ([`strategy`], [`eval`]),
//! - the information-theoretic side: hard distribution pairs, KL divergence,
//!   sample-complexity bounds, and a likelihood-ratio classifier ([`info`]),
//! - a deterministic CLI over all of it ([`cli`]).
//!
//! All randomness flows from explicit seeds through counter-based streams
//! ([`rng`]), so every result is reproducible bit-for-bit, including across
//! thread counts.

pub mod cli;
pub mod curve;
pub mod dist;
pub mod error;
pub mod eval;
pub mod info;
pub mod pool;
pub mod quad;
pub mod rng;
pub mod strategy;

pub use dist::{Dist, SampleBatch};
pub use error::{ModelError, Result};
pub use strategy::Strategy;
