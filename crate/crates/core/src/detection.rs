//! One observed person in one frame.

use serde::{Deserialize, Serialize};

use crate::feature::FeatureVector;
use crate::geometry::{bbox_from_keypoints, BoundingBox, GeometryError, Keypoint};

/// A single person observation: keypoints, their envelope box, and the
/// appearance feature extracted for it.
///
/// The bounding box is always the envelope of the keypoints that pass the
/// confidence threshold used at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub keypoints: Vec<Keypoint>,
    pub bbox: BoundingBox,
    pub feature: FeatureVector,
    pub frame_index: u64,
    pub camera_id: u64,
}

impl Detection {
    /// Builds a detection, deriving the bbox from keypoints with confidence
    /// at or above `theta_conf`.
    pub fn from_keypoints(
        keypoints: Vec<Keypoint>,
        feature: FeatureVector,
        frame_index: u64,
        camera_id: u64,
        theta_conf: f64,
    ) -> Result<Self, GeometryError> {
        if keypoints.is_empty() {
            return Err(GeometryError::NoValidKeypoints);
        }
        let bbox = bbox_from_keypoints(&keypoints, theta_conf)?;
        Ok(Self {
            keypoints,
            bbox,
            feature,
            frame_index,
            camera_id,
        })
    }

    /// Number of keypoints meeting the confidence threshold.
    pub fn valid_keypoint_count(&self, theta_conf: f64) -> usize {
        self.keypoints
            .iter()
            .filter(|k| k.confidence >= theta_conf)
            .count()
    }
}
