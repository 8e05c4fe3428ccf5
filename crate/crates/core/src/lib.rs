//! Link prediction over versioned software dependency graphs.
//!
//! Given a chronological series of module dependency graphs, the crate
//! predicts which not-yet-existing dependencies show up in the next version,
//! using three approaches of increasing complexity:
//!
//! 1. per-module rankings by a topological similarity metric ([`ranking`]);
//! 2. a kernel SVM trained on metric feature vectors ([`dataset`], [`classifier`]);
//! 3. the same classifier fed with forecast next-version features ([`forecast`]).
//!
//! [`eval`] scores all three with precision@N and precision-recall curves,
//! and [`synth`] generates seeded evolving graphs with known dynamics.
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod classifier;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod forecast;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod ranking;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{DependencyGraph, ModuleId, VersionSeries, VersionSnapshot};
pub use metrics::{FeatureVector, MetricConfig, MetricId, NeighborhoodMode};
