//! Bounding boxes, keypoints, and the spatial primitives built on them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from geometric constructors and operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// A bounding box with inverted or non-finite coordinates was requested.
    #[error("invalid bounding box: ({0}, {1}) .. ({2}, {3})")]
    InvalidBox(f64, f64, f64, f64),
    /// No keypoint passed the confidence filter, so no envelope exists.
    #[error("no keypoint passed the confidence filter")]
    NoValidKeypoints,
    /// Keypoint confidence outside [0, 1] or non-finite coordinates.
    #[error("invalid keypoint: x={0}, y={1}, confidence={2}")]
    InvalidKeypoint(f64, f64, f64),
}

/// Axis-aligned bounding box in frame coordinates.
///
/// Coordinates are real-valued so synthetic scenarios can use exact
/// arithmetic. Zero-area (degenerate) boxes are legal; they arise from
/// single-keypoint envelopes and never overlap anything.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    /// Builds a box, checking `x_min <= x_max`, `y_min <= y_max`, all finite.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        let finite =
            x_min.is_finite() && y_min.is_finite() && x_max.is_finite() && y_max.is_finite();
        if !finite || x_min > x_max || y_min > y_max {
            return Err(GeometryError::InvalidBox(x_min, y_min, x_max, y_max));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Translates the box by `(dx, dy)`.
    pub fn shifted(&self, dx: f64, dy: f64) -> Self {
        Self {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }
}

/// One detected body part: position, detector confidence, part index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    /// Detector confidence in [0, 1].
    pub confidence: f64,
    /// Index of the body part this keypoint marks.
    pub part_index: u32,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, confidence: f64, part_index: u32) -> Result<Self, GeometryError> {
        if !x.is_finite() || !y.is_finite() || !(0.0..=1.0).contains(&confidence) {
            return Err(GeometryError::InvalidKeypoint(x, y, confidence));
        }
        Ok(Self {
            x,
            y,
            confidence,
            part_index,
        })
    }
}

/// Intersection-over-union of two boxes.
///
/// Defined as 0 whenever the intersection or the union has zero area, so
/// degenerate boxes never match spatially and 0/0 cannot occur.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    inter / union
}

/// Axis-aligned envelope of the keypoints whose confidence passes `theta_conf`.
pub fn bbox_from_keypoints(
    keypoints: &[Keypoint],
    theta_conf: f64,
) -> Result<BoundingBox, GeometryError> {
    let mut bounds: Option<(f64, f64, f64, f64)> = None;
    for kp in keypoints.iter().filter(|k| k.confidence >= theta_conf) {
        bounds = Some(match bounds {
            None => (kp.x, kp.y, kp.x, kp.y),
            Some((x0, y0, x1, y1)) => (x0.min(kp.x), y0.min(kp.y), x1.max(kp.x), y1.max(kp.y)),
        });
    }
    let (x_min, y_min, x_max, y_max) = bounds.ok_or(GeometryError::NoValidKeypoints)?;
    BoundingBox::new(x_min, y_min, x_max, y_max)
}
