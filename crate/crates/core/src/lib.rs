//! Detection of a planted dense bipartite subgraph in an Erdős–Rényi graph.
//!
//! The null hypothesis is `G(n, q)`. Under the alternative, disjoint sets `R`
//! (`|R| = kR`) and `L` (`|L| = kL`) are hidden and every `R`–`L` pair is an
//! edge with probability `p > q`. The crate provides
//!
//! - [`graph`] and [`model`]: bitset graphs, the edge-list format, samplers;
//! - [`measures`]: divergences, thresholds, the finite-`n` impossibility and
//!   sufficiency conditions, and the asymptotic phase classifier;
//! - [`detectors`]: scan (exact and local search), count, degree and exact
//!   likelihood-ratio tests;
//! - [`oracle`]: exact second moments and Bayes risk for small instances;
//! - [`low_degree`]: the degree-`D` likelihood-ratio norm;
//! - [`experiments`]: Monte Carlo risk, sweeps and phase grids.
//!
//! All randomness flows through [`Seed`] streams, so every result is a pure
//! function of its inputs and seed, independent of the thread count.

pub mod combinatorics;
pub mod detectors;
mod error;
pub mod experiments;
pub mod graph;
pub mod low_degree;
pub mod measures;
pub mod model;
pub mod oracle;
mod seed;

pub use detectors::{run_test, DetectOptions, DetectionOutcome, Method};
pub use error::{Error, Result};
pub use graph::Graph;
pub use measures::{classify_region, RegimeExponents, RegionLabel, TestKind};
pub use model::{ModelParams, PlantedSets};
pub use seed::{Seed, StreamRng, DEFAULT_ROOT};
