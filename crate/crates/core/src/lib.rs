// SPDX-License-Identifier: Apache-2.0

//! Approximate arithmetic unit selection for dataflow accelerators.
//!
//! Pipeline: characterize a unit library, prune it, sample and label
//! configurations of a benchmark accelerator with the oracle, train a
//! surrogate, and explore the design space with evolutionary search.

pub mod accel_graph;
pub mod dataset;
pub mod dse;
pub mod error;
pub mod pruning;
pub mod quality_oracle;
pub mod surrogate;
pub mod unit_library;

pub use error::{Error, Result};
