//! Truth-to-result identity measures.
//!
//! A truth box and a hypothesis box may associate in a frame when their IoU
//! reaches the threshold. For each (truth identity, hypothesis identity)
//! pair the number of associable frames is counted, a one-to-one identity
//! assignment maximizing the total is solved globally, and IDP/IDR/IDF1
//! follow from the matched-frame total.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{iou, BoundingBox};
use crate::metrics::assignment::max_weight_assignment;
use crate::metrics::MetricsError;

/// Per-identity tracks: one box at most per (camera, frame).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackSet {
    tracks: BTreeMap<u64, BTreeMap<(u64, u64), BoundingBox>>,
}

impl TrackSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one box; rejects duplicates for the same (identity, camera, frame).
    pub fn add_box(
        &mut self,
        identity: u64,
        camera: u64,
        frame: u64,
        bbox: BoundingBox,
    ) -> Result<(), MetricsError> {
        let prev = self
            .tracks
            .entry(identity)
            .or_default()
            .insert((camera, frame), bbox);
        if prev.is_some() {
            return Err(MetricsError::DuplicateBox {
                identity,
                camera,
                frame,
            });
        }
        Ok(())
    }

    pub fn identities(&self) -> Vec<u64> {
        self.tracks.keys().copied().collect()
    }

    pub fn total_boxes(&self) -> u64 {
        self.tracks.values().map(|t| t.len() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn cameras(&self) -> Vec<u64> {
        let mut cams: Vec<u64> = self
            .tracks
            .values()
            .flat_map(|t| t.keys().map(|&(c, _)| c))
            .collect();
        cams.sort_unstable();
        cams.dedup();
        cams
    }

    /// The subset of every track seen by one camera.
    pub fn filter_camera(&self, camera: u64) -> TrackSet {
        let mut out = TrackSet::new();
        for (&id, track) in &self.tracks {
            for (&(cam, frame), &bbox) in track {
                if cam == camera {
                    out.tracks.entry(id).or_default().insert((cam, frame), bbox);
                }
            }
        }
        out
    }

    fn track(&self, identity: u64) -> Option<&BTreeMap<(u64, u64), BoundingBox>> {
        self.tracks.get(&identity)
    }
}

/// IDP/IDR/IDF1 percentages plus the raw counts behind them.
///
/// `degenerate` flags the 0/0 cases (an empty side), where the percentages
/// are reported as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdMeasures {
    pub idp: f64,
    pub idr: f64,
    pub idf1: f64,
    pub idtp: u64,
    pub idfp: u64,
    pub idfn: u64,
    pub degenerate: bool,
}

/// Number of frames in which the two tracks' boxes associate.
fn associable_frames(
    truth: &BTreeMap<(u64, u64), BoundingBox>,
    hyp: &BTreeMap<(u64, u64), BoundingBox>,
    iou_threshold: f64,
) -> u64 {
    truth
        .iter()
        .filter(|(key, t_box)| {
            hyp.get(key)
                .is_some_and(|h_box| iou(t_box, h_box) >= iou_threshold)
        })
        .count() as u64
}

/// Identity measures under the frame-count-maximizing identity bijection.
pub fn id_measures(truth: &TrackSet, hypothesis: &TrackSet, iou_threshold: f64) -> IdMeasures {
    let truth_ids = truth.identities();
    let hyp_ids = hypothesis.identities();

    let weights: Vec<Vec<f64>> = truth_ids
        .iter()
        .map(|t| {
            let t_track = truth.track(*t).expect("listed identity");
            hyp_ids
                .iter()
                .map(|h| {
                    let h_track = hypothesis.track(*h).expect("listed identity");
                    associable_frames(t_track, h_track, iou_threshold) as f64
                })
                .collect()
        })
        .collect();

    let idtp = if truth_ids.is_empty() || hyp_ids.is_empty() {
        0
    } else {
        let assignment = max_weight_assignment(&weights);
        assignment
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| weights[i][j] as u64))
            .sum()
    };

    let total_truth = truth.total_boxes();
    let total_hyp = hypothesis.total_boxes();
    let idfp = total_hyp - idtp;
    let idfn = total_truth - idtp;

    let degenerate = total_truth == 0 || total_hyp == 0;
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            100.0 * num as f64 / den as f64
        }
    };
    IdMeasures {
        idp: ratio(idtp, idtp + idfp),
        idr: ratio(idtp, idtp + idfn),
        idf1: ratio(2 * idtp, 2 * idtp + idfp + idfn),
        idtp,
        idfp,
        idfn,
        degenerate,
    }
}

/// Identity measures computed independently per camera.
pub fn id_measures_per_camera(
    truth: &TrackSet,
    hypothesis: &TrackSet,
    iou_threshold: f64,
) -> BTreeMap<u64, IdMeasures> {
    let mut cameras = truth.cameras();
    cameras.extend(hypothesis.cameras());
    cameras.sort_unstable();
    cameras.dedup();
    cameras
        .into_iter()
        .map(|cam| {
            let m = id_measures(
                &truth.filter_camera(cam),
                &hypothesis.filter_camera(cam),
                iou_threshold,
            );
            (cam, m)
        })
        .collect()
}

/// Reads a track file: lines `trk <camera> <frame> <identity> <xmin> <ymin>
/// <xmax> <ymax>`, `#` comments.
pub fn load_trackset(path: &Path) -> Result<TrackSet, MetricsError> {
    let text = std::fs::read_to_string(path).map_err(|e| MetricsError::Io(e.to_string()))?;
    parse_trackset(&text)
}

pub fn parse_trackset(text: &str) -> Result<TrackSet, MetricsError> {
    let mut set = TrackSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 || fields[0] != "trk" {
            return Err(MetricsError::Parse {
                line: line_no,
                message: "expected: trk <camera> <frame> <identity> <xmin> <ymin> <xmax> <ymax>"
                    .into(),
            });
        }
        let parse_u64 = |s: &str, what: &str| {
            s.parse::<u64>().map_err(|_| MetricsError::Parse {
                line: line_no,
                message: format!("could not parse '{s}' as {what}"),
            })
        };
        let parse_f64 = |s: &str| {
            s.parse::<f64>().map_err(|_| MetricsError::Parse {
                line: line_no,
                message: format!("could not parse '{s}' as coordinate"),
            })
        };
        let camera = parse_u64(fields[1], "camera")?;
        let frame = parse_u64(fields[2], "frame")?;
        let identity = parse_u64(fields[3], "identity")?;
        let bbox = BoundingBox::new(
            parse_f64(fields[4])?,
            parse_f64(fields[5])?,
            parse_f64(fields[6])?,
            parse_f64(fields[7])?,
        )
        .map_err(|e| MetricsError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        set.add_box(identity, camera, frame, bbox)?;
    }
    Ok(set)
}

/// Writes a track set in the `trk` line format, sorted for reproducibility.
pub fn write_trackset(set: &TrackSet, path: &Path) -> Result<(), MetricsError> {
    let mut out = String::new();
    for (&identity, track) in &set.tracks {
        for (&(camera, frame), bbox) in track {
            out.push_str(&format!(
                "trk {camera} {frame} {identity} {} {} {} {}\n",
                bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| MetricsError::Io(e.to_string()))
}
