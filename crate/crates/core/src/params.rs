//! System hyperparameters shared by every node.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("parameter {name} out of range: {value}")]
    OutOfRange { name: &'static str, value: String },
}

/// Tunable thresholds controlling detection validation, matching, feature
/// updates, eviction, and prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Minimum valid keypoints for a detection to count.
    pub theta_key: usize,
    /// Confidence threshold for a keypoint to be valid.
    pub theta_conf: f64,
    /// Euclidean threshold for local matching (candidates with spatial overlap).
    pub theta_euc: f64,
    /// Euclidean threshold for server-side matching (no spatial information).
    pub beta_euc: f64,
    /// IoU threshold below which a matched entry's feature may be replaced.
    pub theta_iou: f64,
    /// Frames an entry survives unseen before eviction.
    pub life_max: u32,
    /// Number of future boxes a predictor emits.
    pub predict_horizon: usize,
    /// Number of past frames a predictor consumes.
    pub history_len: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            theta_key: 5,
            theta_conf: 0.5,
            theta_euc: 5.0,
            beta_euc: 2.0,
            theta_iou: 0.3,
            life_max: 60,
            predict_horizon: 5,
            history_len: 3,
        }
    }
}

/// Finite and strictly positive; rejects NaN.
pub(crate) fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl SystemParams {
    /// Checks every invariant; call after building params from a config file.
    pub fn validate(&self) -> Result<(), ParamsError> {
        fn range_err(name: &'static str, value: impl ToString) -> ParamsError {
            ParamsError::OutOfRange {
                name,
                value: value.to_string(),
            }
        }
        if self.theta_key < 1 {
            return Err(range_err("theta_key", self.theta_key));
        }
        if !(0.0..=1.0).contains(&self.theta_conf) {
            return Err(range_err("theta_conf", self.theta_conf));
        }
        if !(0.0..=1.0).contains(&self.theta_iou) {
            return Err(range_err("theta_iou", self.theta_iou));
        }
        if !positive(self.theta_euc) {
            return Err(range_err("theta_euc", self.theta_euc));
        }
        if !positive(self.beta_euc) {
            return Err(range_err("beta_euc", self.beta_euc));
        }
        if self.life_max < 1 {
            return Err(range_err("life_max", self.life_max));
        }
        if self.predict_horizon < 1 {
            return Err(range_err("predict_horizon", self.predict_horizon));
        }
        if self.history_len < 1 {
            return Err(range_err("history_len", self.history_len));
        }
        Ok(())
    }
}
