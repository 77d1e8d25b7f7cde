//! Future bounding-box prediction.
//!
//! A predictor consumes the last `history_len` frames of keypoints for one
//! tracked object and emits `predict_horizon` future boxes. The default
//! implementation fits a per-coordinate linear velocity by least squares over
//! the history envelopes and extrapolates; a recurrent implementation with
//! loadable weights shares the same interface behind the `recurrent` feature.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{bbox_from_keypoints, BoundingBox, Keypoint};
use crate::params::SystemParams;

#[cfg(feature = "recurrent")]
pub mod recurrent;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictError {
    /// History does not yet span `history_len` frames.
    #[error("history incomplete: have {have}, need {need}")]
    IncompleteHistory { have: usize, need: usize },
    /// A history frame had no keypoint above the confidence threshold.
    #[error("history frame has no valid keypoints")]
    NoValidKeypoints,
    /// No aligned prediction/ground-truth pairs to average over.
    #[error("nothing to evaluate")]
    EmptyEvaluation,
}

/// The last `history_len` keypoint sets observed for one object, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointHistory {
    frames: Vec<(u64, Vec<Keypoint>)>,
}

impl KeypointHistory {
    /// Builds a history; frame indices must be strictly increasing and every
    /// keypoint set non-empty.
    pub fn new(frames: Vec<(u64, Vec<Keypoint>)>) -> Result<Self, PredictError> {
        if frames.iter().any(|(_, kps)| kps.is_empty()) {
            return Err(PredictError::NoValidKeypoints);
        }
        if frames.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(PredictError::IncompleteHistory {
                have: frames.len(),
                need: frames.len(),
            });
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[(u64, Vec<Keypoint>)] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame index of the newest observation.
    pub fn last_frame(&self) -> Option<u64> {
        self.frames.last().map(|(f, _)| *f)
    }
}

/// The predicted boxes for frames `t+1 ..= t+predict_horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub boxes: Vec<BoundingBox>,
}

/// Anything that can turn a keypoint history into future boxes.
pub trait Predictor {
    fn predict(
        &self,
        history: &KeypointHistory,
        params: &SystemParams,
    ) -> Result<PredictionSet, PredictError>;
}

/// Default predictor: least-squares linear motion of the bbox envelope.
///
/// Center and extent are fitted separately; extents are clamped non-negative
/// so every output box is valid by construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantVelocityPredictor;

impl Predictor for ConstantVelocityPredictor {
    fn predict(
        &self,
        history: &KeypointHistory,
        params: &SystemParams,
    ) -> Result<PredictionSet, PredictError> {
        if history.len() != params.history_len {
            return Err(PredictError::IncompleteHistory {
                have: history.len(),
                need: params.history_len,
            });
        }
        let mut ts = Vec::with_capacity(history.len());
        let mut cx = Vec::with_capacity(history.len());
        let mut cy = Vec::with_capacity(history.len());
        let mut w = Vec::with_capacity(history.len());
        let mut h = Vec::with_capacity(history.len());
        for (frame, kps) in history.frames() {
            let bbox = bbox_from_keypoints(kps, params.theta_conf)
                .map_err(|_| PredictError::NoValidKeypoints)?;
            ts.push(*frame as f64);
            cx.push((bbox.x_min + bbox.x_max) / 2.0);
            cy.push((bbox.y_min + bbox.y_max) / 2.0);
            w.push(bbox.width());
            h.push(bbox.height());
        }
        let cx_fit = linear_fit(&ts, &cx);
        let cy_fit = linear_fit(&ts, &cy);
        let w_fit = linear_fit(&ts, &w);
        let h_fit = linear_fit(&ts, &h);

        let t_last = *ts.last().expect("history non-empty");
        let mut boxes = Vec::with_capacity(params.predict_horizon);
        for step in 1..=params.predict_horizon {
            let t = t_last + step as f64;
            let cx = cx_fit.0 + cx_fit.1 * t;
            let cy = cy_fit.0 + cy_fit.1 * t;
            let w = (w_fit.0 + w_fit.1 * t).max(0.0);
            let h = (h_fit.0 + h_fit.1 * t).max(0.0);
            boxes.push(BoundingBox {
                x_min: cx - w / 2.0,
                y_min: cy - h / 2.0,
                x_max: cx + w / 2.0,
                y_max: cy + h / 2.0,
            });
        }
        Ok(PredictionSet { boxes })
    }
}

/// Least-squares fit of `y = a + b t`; falls back to a constant when all
/// sample times coincide.
fn linear_fit(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in ts.iter().zip(ys) {
        num += (t - t_mean) * (y - y_mean);
        den += (t - t_mean) * (t - t_mean);
    }
    if den == 0.0 {
        return (y_mean, 0.0);
    }
    let b = num / den;
    (y_mean - b * t_mean, b)
}

/// Mean IoU between predicted boxes and the ground-truth box at each
/// predicted frame.
///
/// `predictions` pairs each prediction set with the frame it was generated
/// at; the set's boxes cover the following `horizon` frames. Frames missing
/// from `truth` are skipped.
pub fn evaluate_avg_iou(
    predictions: &[(u64, PredictionSet)],
    truth: &std::collections::BTreeMap<u64, BoundingBox>,
) -> Result<f64, PredictError> {
    let mut total = 0.0;
    let mut count = 0u64;
    for (made_at, set) in predictions {
        for (offset, bbox) in set.boxes.iter().enumerate() {
            let frame = made_at + offset as u64 + 1;
            if let Some(gt) = truth.get(&frame) {
                total += crate::geometry::iou(bbox, gt);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(PredictError::EmptyEvaluation);
    }
    Ok(total / count as f64)
}
