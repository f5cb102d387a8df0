//! Rare-events point processes for chaotic interval maps.
//!
//! This crate simulates orbits of expanding circle/torus maps with exact
//! digit-stream arithmetic, builds the empirical rare-events point processes
//! (exceedance times, time/magnitude pairs, time/position atoms), samples the
//! limiting processes that arise with and without clustering of exceedances,
//! computes the clustering outer measure `ν` on interval and box unions, and
//! provides the statistical machinery to compare the two sides (void
//! probabilities, expected counts, cluster-size laws, inter-cluster gaps,
//! record laws).
//!
//! The `examples/` directory contains one runnable example per capability;
//! the `repp-lab` binary exposes the same entry points as subcommands.

pub mod boxes;
pub mod cli;
pub mod config;
pub mod empirical;
pub mod extremal;
pub mod interval;
pub mod limits;
pub mod nu;
pub mod observables;
pub mod plot;
pub mod point_measure;
pub mod report;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod suite;
pub mod systems;

pub use interval::IntervalUnion;
pub use systems::SystemSpec;
