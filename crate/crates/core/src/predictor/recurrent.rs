//! Recurrent bounding-box predictor with weights loaded from a flat binary
//! file. Shares the [`Predictor`](super::Predictor) interface with the
//! default constant-velocity implementation; excluded from the acceptance
//! suite because its output depends entirely on the supplied weights.
//!
//! Weight file layout (little-endian):
//!
//! ```text
//! magic   4 bytes  "RBPW"
//! u32     input_dim
//! u32     hidden_dim
//! f32[..] w_input   (4*hidden_dim x input_dim, row-major; gate order i,f,g,o)
//! f32[..] w_hidden  (4*hidden_dim x hidden_dim, row-major)
//! f32[..] bias      (4*hidden_dim)
//! f32[..] w_out     (4*predict_horizon x hidden_dim, row-major)
//! f32[..] b_out     (4*predict_horizon)
//! ```
//!
//! Inputs per history frame are keypoints flattened as `(x, y, confidence)`
//! triples in `part_index` order, zero-filled up to `input_dim`.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

use super::{KeypointHistory, PredictError, PredictionSet, Predictor};
use crate::geometry::BoundingBox;
use crate::params::SystemParams;

pub const WEIGHT_MAGIC: [u8; 4] = *b"RBPW";

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic")]
    BadMagic,
    #[error("weight file length {got} does not match header (expected {expected})")]
    SizeMismatch { expected: usize, got: usize },
    #[error("zero dimension in header")]
    ZeroDim,
}

/// Single-layer gated recurrence over the history, followed by an affine map
/// to `predict_horizon` boxes.
#[derive(Debug, Clone)]
pub struct RecurrentPredictor {
    input_dim: usize,
    hidden_dim: usize,
    horizon: usize,
    w_input: Vec<f32>,
    w_hidden: Vec<f32>,
    bias: Vec<f32>,
    w_out: Vec<f32>,
    b_out: Vec<f32>,
}

impl RecurrentPredictor {
    /// Loads weights, validating the total length against the header and the
    /// horizon in `params`.
    pub fn load(path: &Path, params: &SystemParams) -> Result<Self, WeightError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes, params.predict_horizon)
    }

    pub fn from_bytes(bytes: &[u8], horizon: usize) -> Result<Self, WeightError> {
        if bytes.len() < 12 || bytes[..4] != WEIGHT_MAGIC {
            return Err(WeightError::BadMagic);
        }
        let input_dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let hidden_dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if input_dim == 0 || hidden_dim == 0 || horizon == 0 {
            return Err(WeightError::ZeroDim);
        }
        let gates = 4 * hidden_dim;
        let out_dim = 4 * horizon;
        let floats =
            gates * input_dim + gates * hidden_dim + gates + out_dim * hidden_dim + out_dim;
        let expected = 12 + 4 * floats;
        if bytes.len() != expected {
            return Err(WeightError::SizeMismatch {
                expected,
                got: bytes.len(),
            });
        }
        let mut values = bytes[12..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()));
        let mut take = |n: usize| -> Vec<f32> { values.by_ref().take(n).collect() };
        Ok(Self {
            input_dim,
            hidden_dim,
            horizon,
            w_input: take(gates * input_dim),
            w_hidden: take(gates * hidden_dim),
            bias: take(gates),
            w_out: take(out_dim * hidden_dim),
            b_out: take(out_dim),
        })
    }

    fn frame_input(&self, kps: &[crate::geometry::Keypoint]) -> Vec<f32> {
        let mut sorted: Vec<_> = kps.iter().collect();
        sorted.sort_by_key(|k| k.part_index);
        let mut input = vec![0.0f32; self.input_dim];
        for (i, kp) in sorted.iter().enumerate() {
            let base = i * 3;
            if base >= self.input_dim {
                break;
            }
            input[base] = kp.x as f32;
            if base + 1 < self.input_dim {
                input[base + 1] = kp.y as f32;
            }
            if base + 2 < self.input_dim {
                input[base + 2] = kp.confidence as f32;
            }
        }
        input
    }

    fn step(&self, input: &[f32], hidden: &mut [f32], cell: &mut [f32]) {
        let h = self.hidden_dim;
        let mut pre = self.bias.clone();
        for (row, pre_v) in pre.iter_mut().enumerate() {
            let wi = &self.w_input[row * self.input_dim..(row + 1) * self.input_dim];
            let wh = &self.w_hidden[row * h..(row + 1) * h];
            let mut acc = *pre_v;
            for (w, x) in wi.iter().zip(input) {
                acc += w * x;
            }
            for (w, x) in wh.iter().zip(hidden.iter()) {
                acc += w * x;
            }
            *pre_v = acc;
        }
        for j in 0..h {
            let i_gate = sigmoid(pre[j]);
            let f_gate = sigmoid(pre[h + j]);
            let g_gate = pre[2 * h + j].tanh();
            let o_gate = sigmoid(pre[3 * h + j]);
            cell[j] = f_gate * cell[j] + i_gate * g_gate;
            hidden[j] = o_gate * cell[j].tanh();
        }
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

impl Predictor for RecurrentPredictor {
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
        let mut hidden = vec![0.0f32; self.hidden_dim];
        let mut cell = vec![0.0f32; self.hidden_dim];
        for (_, kps) in history.frames() {
            let input = self.frame_input(kps);
            self.step(&input, &mut hidden, &mut cell);
        }
        let horizon = self.horizon.min(params.predict_horizon);
        let mut boxes = Vec::with_capacity(params.predict_horizon);
        for step in 0..params.predict_horizon {
            let row = step.min(horizon - 1);
            let mut coords = [0.0f64; 4];
            for (c, coord) in coords.iter_mut().enumerate() {
                let idx = row * 4 + c;
                let w = &self.w_out[idx * self.hidden_dim..(idx + 1) * self.hidden_dim];
                let mut acc = self.b_out[idx];
                for (wv, hv) in w.iter().zip(&hidden) {
                    acc += wv * hv;
                }
                *coord = acc as f64;
            }
            let (x_min, x_max) = ordered(coords[0], coords[2]);
            let (y_min, y_max) = ordered(coords[1], coords[3]);
            boxes.push(BoundingBox {
                x_min,
                y_min,
                x_max,
                y_max,
            });
        }
        Ok(PredictionSet { boxes })
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
