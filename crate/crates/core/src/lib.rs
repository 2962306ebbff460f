//! Finitary random fields on ℤ² and the percolation estimates built on them.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod clusters;
pub mod error;
pub mod experiments;
pub mod field;
pub mod ising;
pub mod lattice;
pub mod models;
pub mod representation;
pub mod threshold;

pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, Model, ModelKind};
pub use field::{FieldTag, Spin, SpinField};
pub use lattice::{Adjacency, Rect, Vertex};
pub use representation::{FinitaryModel, IndexId, LevelDistribution, Realization, RealizationStore};
