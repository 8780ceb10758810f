//! Influence maximization on directed graphs via reverse influence sampling,
//! with seed selection run as a distributed-streaming max-k-cover over a
//! simulated message-passing cluster.
//!
//! The pipeline: sample random reverse reachable sets ([`sampling`]), invert
//! them into per-vertex covering sets, partition vertices across sender
//! workers that stream lazy-greedy seeds to a bucketed streaming aggregator
//! ([`cover`], [`runtime`]), and drive the whole thing from IMM or OPIM outer
//! loops ([`driver`]). Forward Monte-Carlo simulation ([`diffusion`]) measures
//! the quality of whatever seeds come out.

pub(crate) mod clock;
pub mod cover;
pub mod diffusion;
pub mod driver;
pub mod error;
pub mod graph;
pub mod rng;
pub mod runtime;
pub mod sampling;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{Graph, Model};
