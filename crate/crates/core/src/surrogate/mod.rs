// SPDX-License-Identifier: Apache-2.0

//! Learned predictors of accelerator quality.
//!
//! The main model runs in two stages over the node graph. A node classifier
//! predicts which nodes lie on the critical path; its thresholded output is
//! appended to the node features of a graph regressor that predicts area,
//! power, latency and SSIM. A single-stage regressor and a random forest on
//! flattened unit features serve as baselines.

pub mod autodiff;
pub mod forest;
pub mod gnn;
pub mod metrics;
pub mod train;

pub use forest::{train_forest, ForestConfig, ForestModel};
pub use gnn::{GnnConfig, GnnParams};
pub use metrics::{mape, r2, PredictionReport};
pub use train::{train, train_stage1, train_stage2, ModelKind, SurrogateModel};
