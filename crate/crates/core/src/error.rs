// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operand out of range: {operand}={value} does not fit in {width} bits for unit {unit}")]
    InputDomain {
        unit: String,
        operand: &'static str,
        value: u64,
        width: u32,
    },
    #[error("duplicate candidate id `{0}`")]
    DuplicateId(String),
    #[error("invalid library spec: {0}")]
    InvalidSpec(String),
    #[error("unknown benchmark `{0}` (expected sobel, gaussian or kmeans)")]
    UnknownBenchmark(String),
    #[error("graph structure error: {0}")]
    Structure(String),
    #[error("invalid configuration: {0}")]
    Configuration(String),
    #[error("image error: {0}")]
    Image(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("negative distance threshold {0}")]
    NegativeTheta(f64),
    #[error("node `{0}` has no compatible candidate")]
    NoCandidates(String),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("missing normalization statistics")]
    MissingNorm,
    #[error("model error: {0}")]
    Model(String),
    #[error("metric error: {0}")]
    Metric(String),
    #[error("exploration error: {0}")]
    Dse(String),
    #[error("invalid hypervolume reference: {0}")]
    InvalidReference(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
