//! Autoregressive generation of Markovian network time series.
//!
//! A graph attention encoder embeds the previous snapshot, and a binary-tree decoder samples
//! the sparse lower-triangular delta row by row. The crate also ships synthetic benchmark
//! generators, a delta-parameterized transformer baseline and an MMD evaluation harness.

pub mod autodiff;
pub mod dataset;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod generators;
pub mod graph;
pub mod model;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{apply_delta, compute_delta, DeltaMatrix, Graph, NetworkTimeSeries, Sign};
