// SPDX-License-Identifier: Apache-2.0

//! Regression and classification scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TARGETS: [&str; 4] = ["area", "power", "latency", "ssim"];

/// Coefficient of determination. `None` when the actual values have zero
/// variance.
pub fn r2(pred: &[f64], actual: &[f64]) -> Result<Option<f64>> {
    check_lengths(pred, actual)?;
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let ss_tot: f64 = actual.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(None);
    }
    let ss_res: f64 = pred.iter().zip(actual).map(|(p, y)| (y - p).powi(2)).sum();
    Ok(Some(1.0 - ss_res / ss_tot))
}

/// Mean absolute percentage error, in percent.
pub fn mape(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(pred, actual)?;
    if actual.iter().any(|&y| y == 0.0) {
        return Err(Error::Metric("mape is undefined when an actual value is zero".into()));
    }
    let total: f64 = pred.iter().zip(actual).map(|(p, y)| ((p - y) / y).abs()).sum();
    Ok(100.0 * total / actual.len() as f64)
}

fn check_lengths(pred: &[f64], actual: &[f64]) -> Result<()> {
    if pred.is_empty() || pred.len() != actual.len() {
        return Err(Error::Metric(format!(
            "need equal nonzero lengths, got {} predictions and {} actual values",
            pred.len(),
            actual.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetScore {
    pub target: String,
    /// `None` means not applicable (constant actual values).
    pub r2: Option<f64>,
    /// `None` when some actual value is zero.
    pub mape: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub samples: usize,
    pub targets: Vec<TargetScore>,
    /// Fraction of nodes whose critical flag was predicted correctly; absent
    /// for models without a node classifier.
    pub critical_accuracy: Option<f64>,
}

impl PredictionReport {
    /// Scores `pred[i]` against `actual[i]`, each `[area, power, latency, ssim]`.
    pub fn from_targets(pred: &[[f64; 4]], actual: &[[f64; 4]], critical_accuracy: Option<f64>) -> Result<Self> {
        let mut targets = Vec::with_capacity(4);
        for (t, name) in TARGETS.iter().enumerate() {
            let p: Vec<f64> = pred.iter().map(|v| v[t]).collect();
            let a: Vec<f64> = actual.iter().map(|v| v[t]).collect();
            targets.push(TargetScore {
                target: name.to_string(),
                r2: r2(&p, &a)?,
                mape: mape(&p, &a).ok(),
            });
        }
        Ok(Self { samples: actual.len(), targets, critical_accuracy })
    }

    pub fn r2_of(&self, target: &str) -> Option<f64> {
        self.targets.iter().find(|t| t.target == target).and_then(|t| t.r2)
    }

    pub fn mape_of(&self, target: &str) -> Option<f64> {
        self.targets.iter().find(|t| t.target == target).and_then(|t| t.mape)
    }
}
