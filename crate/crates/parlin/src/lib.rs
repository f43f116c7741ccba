//! Data-parallel linear regression on a single-master, multi-worker
//! cluster of local processes, with the synthetic flight-delay dataset and
//! the standalone-vs-cluster scaling benchmark built around it.
//!
//! The numerics live in [`parlin_core`]; this crate adds files, sockets,
//! processes and the `parlin` command line.

pub mod bench;
pub mod cli;
pub mod cluster;
pub mod config;
pub mod data;
pub mod protocol;

pub use parlin_core as core;
