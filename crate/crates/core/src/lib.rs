//! Agent-based simulation of the SNS-norms game with monetary reward and
//! article quality on connecting-nearest-neighbor networks.
//!
//! Per-agent posting strategies co-evolve either under a single-population
//! genetic algorithm or under the multiple-world GA, in which every node
//! selects parents among its own copies in parallel worlds.

pub mod engine;
pub mod evolution;
pub mod network;
pub mod rng;
pub mod stats;
pub mod experiment;
pub mod cli;
