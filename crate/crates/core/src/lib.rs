//! Metric k-center for data-distributed inputs.
//!
//! The crate provides the sequential building blocks (Gonzalez, parametric
//! pruning and its permutation-stable variant, an exact oracle), ordered
//! composable coresets, a deterministic simulator of the massively parallel
//! computation model, and the two-phase distributed algorithm that recovers
//! a single consistent solution from per-machine covers.

pub mod cli;
pub mod coreset;
pub mod dkcenter;
pub mod experiment;
pub mod generate;
pub mod io;
pub mod metric;
pub mod mpcsim;
pub mod solvers;

pub use metric::{MetricInstance, PointId, PointOrder};
pub use solvers::{Algorithm, Solution};
