//! Scripted multi-camera scenarios: the ground truth that drives a
//! simulation and the embedding/network configuration that comes with it.
//!
//! The file format is line-oriented UTF-8 text, one directive per line,
//! `#` starting a comment. Directives:
//!
//! ```text
//! camera <id>
//! length <frames>
//! alpha <f>            # intra-class sample radius (default 0)
//! separation <f>       # min inter-class center distance (default 1)
//! dim <n>              # feature dimension (default 8)
//! seed <n>             # embedding seed (default 0)
//! scale <f>            # center sampling box side (default 1)
//! latency <ticks>      # channel delay (default 0)
//! jitter <ticks>       # max extra delay per message (default 0)
//! down <camera> <from> <to>   # both link directions down for ticks [from, to)
//! obs <camera> <frame> <identity> <vis:0|1> <k> x1 y1 c1 ... xk yk ck
//! ```
//!
//! Validation: cameras must be declared before use, per-camera observed
//! frame indices must form a contiguous run, lengths and thresholds must be
//! coherent. `vis 0` records ground truth without producing a detection
//! (a scripted detector miss).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingConfig;
use crate::geometry::Keypoint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("io: {0}")]
    Io(String),
}

/// One scripted ground-truth observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub identity: u64,
    pub keypoints: Vec<Keypoint>,
    /// When false the person is present in ground truth but the detector
    /// misses them.
    pub visible: bool,
}

/// Channel latency model configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub latency: u64,
    pub jitter: u64,
    /// Outage windows per camera: link down for ticks `[from, to)`.
    pub outages: Vec<(u64, u64, u64)>,
}

/// A full scripted run: per-camera, per-frame ground truth plus the
/// embedding and network configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cameras: Vec<u64>,
    /// Frames the simulation runs for; every camera ticks 0..length.
    pub length: u64,
    pub observations: BTreeMap<u64, BTreeMap<u64, Vec<Observation>>>,
    pub embedding: EmbeddingConfig,
    pub network: NetworkConfig,
}

impl Scenario {
    /// All identities appearing anywhere in the script, ascending.
    pub fn identities(&self) -> Vec<u64> {
        let mut ids = BTreeSet::new();
        for frames in self.observations.values() {
            for obs in frames.values().flatten() {
                ids.insert(obs.identity);
            }
        }
        ids.into_iter().collect()
    }

    pub fn observations_at(&self, camera: u64, frame: u64) -> &[Observation] {
        self.observations
            .get(&camera)
            .and_then(|frames| frames.get(&frame))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Checks every structural invariant. Called by the loader; useful
    /// directly for programmatically built scenarios.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.cameras.is_empty() {
            return Err(ScenarioError::Validation("no cameras declared".into()));
        }
        let declared: BTreeSet<u64> = self.cameras.iter().copied().collect();
        if declared.len() != self.cameras.len() {
            return Err(ScenarioError::Validation("duplicate camera id".into()));
        }
        if self.length == 0 {
            return Err(ScenarioError::Validation("zero-length scenario".into()));
        }
        let separation_ok = self.embedding.separation.is_finite()
            && self.embedding.alpha.is_finite()
            && self.embedding.separation > 2.0 * self.embedding.alpha;
        if !separation_ok {
            return Err(ScenarioError::Validation(format!(
                "separation {} must exceed 2*alpha = {}",
                self.embedding.separation,
                2.0 * self.embedding.alpha
            )));
        }
        for (&camera, frames) in &self.observations {
            if !declared.contains(&camera) {
                return Err(ScenarioError::Validation(format!(
                    "observation references undeclared camera {camera}"
                )));
            }
            if let (Some(&first), Some(&last)) = (frames.keys().next(), frames.keys().next_back()) {
                if last >= self.length {
                    return Err(ScenarioError::Validation(format!(
                        "camera {camera}: frame {last} beyond scenario length {}",
                        self.length
                    )));
                }
                let span = last - first + 1;
                if span != frames.len() as u64 {
                    return Err(ScenarioError::Validation(format!(
                        "camera {camera}: observed frames not dense ({} frames over span {span})",
                        frames.len()
                    )));
                }
            }
            for (frame, obs_list) in frames {
                let mut seen = BTreeSet::new();
                for obs in obs_list {
                    if obs.keypoints.is_empty() {
                        return Err(ScenarioError::Validation(format!(
                            "camera {camera} frame {frame}: observation with no keypoints"
                        )));
                    }
                    if !seen.insert(obs.identity) {
                        return Err(ScenarioError::Validation(format!(
                            "camera {camera} frame {frame}: identity {} listed twice",
                            obs.identity
                        )));
                    }
                }
            }
        }
        for &(camera, from, to) in &self.network.outages {
            if !declared.contains(&camera) {
                return Err(ScenarioError::Validation(format!(
                    "outage references undeclared camera {camera}"
                )));
            }
            if from >= to {
                return Err(ScenarioError::Validation(format!(
                    "outage window [{from}, {to}) is empty"
                )));
            }
        }
        Ok(())
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(e.to_string()))?;
    parse_scenario(&text)
}

/// Parses scenario text; see the module docs for the grammar.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut cameras = Vec::new();
    let mut length: Option<u64> = None;
    let mut embedding = EmbeddingConfig::default();
    let mut network = NetworkConfig::default();
    let mut observations: BTreeMap<u64, BTreeMap<u64, Vec<Observation>>> = BTreeMap::new();
    let mut max_frame = 0u64;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let directive = fields.next().expect("non-empty line");
        let rest: Vec<&str> = fields.collect();
        let err = |message: String| ScenarioError::Parse {
            line: line_no,
            message,
        };
        match directive {
            "camera" => {
                cameras.push(parse_one::<u64>(&rest, "camera", line_no)?);
            }
            "length" => length = Some(parse_one(&rest, "length", line_no)?),
            "alpha" => embedding.alpha = parse_one(&rest, "alpha", line_no)?,
            "separation" => embedding.separation = parse_one(&rest, "separation", line_no)?,
            "dim" => embedding.dim = parse_one(&rest, "dim", line_no)?,
            "seed" => embedding.seed = parse_one(&rest, "seed", line_no)?,
            "scale" => embedding.scale = parse_one(&rest, "scale", line_no)?,
            "latency" => network.latency = parse_one(&rest, "latency", line_no)?,
            "jitter" => network.jitter = parse_one(&rest, "jitter", line_no)?,
            "down" => {
                if rest.len() != 3 {
                    return Err(err("expected: down <camera> <from> <to>".into()));
                }
                network.outages.push((
                    parse_field(rest[0], "camera", line_no)?,
                    parse_field(rest[1], "from", line_no)?,
                    parse_field(rest[2], "to", line_no)?,
                ));
            }
            "obs" => {
                if rest.len() < 5 {
                    return Err(err(
                        "expected: obs <camera> <frame> <identity> <vis> <k> coords...".into(),
                    ));
                }
                let camera: u64 = parse_field(rest[0], "camera", line_no)?;
                let frame: u64 = parse_field(rest[1], "frame", line_no)?;
                let identity: u64 = parse_field(rest[2], "identity", line_no)?;
                let vis: u8 = parse_field(rest[3], "vis", line_no)?;
                if vis > 1 {
                    return Err(err(format!("vis must be 0 or 1, got {vis}")));
                }
                let k: usize = parse_field(rest[4], "k", line_no)?;
                if k == 0 {
                    return Err(err("observation needs at least one keypoint".into()));
                }
                if rest.len() != 5 + 3 * k {
                    return Err(err(format!(
                        "expected {} coordinate fields for k={k}, got {}",
                        3 * k,
                        rest.len() - 5
                    )));
                }
                let mut keypoints = Vec::with_capacity(k);
                for part in 0..k {
                    let x: f64 = parse_field(rest[5 + 3 * part], "x", line_no)?;
                    let y: f64 = parse_field(rest[6 + 3 * part], "y", line_no)?;
                    let c: f64 = parse_field(rest[7 + 3 * part], "confidence", line_no)?;
                    let kp =
                        Keypoint::new(x, y, c, part as u32).map_err(|e| ScenarioError::Parse {
                            line: line_no,
                            message: e.to_string(),
                        })?;
                    keypoints.push(kp);
                }
                max_frame = max_frame.max(frame);
                observations
                    .entry(camera)
                    .or_default()
                    .entry(frame)
                    .or_default()
                    .push(Observation {
                        identity,
                        keypoints,
                        visible: vis == 1,
                    });
            }
            other => return Err(err(format!("unknown directive '{other}'"))),
        }
    }

    let scenario = Scenario {
        cameras,
        length: length.unwrap_or(max_frame + 1),
        observations,
        embedding,
        network,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn parse_one<T: std::str::FromStr>(
    rest: &[&str],
    name: &str,
    line: usize,
) -> Result<T, ScenarioError> {
    if rest.len() != 1 {
        return Err(ScenarioError::Parse {
            line,
            message: format!("expected exactly one value for '{name}'"),
        });
    }
    parse_field(rest[0], name, line)
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    name: &str,
    line: usize,
) -> Result<T, ScenarioError> {
    field.parse().map_err(|_| ScenarioError::Parse {
        line,
        message: format!("could not parse '{field}' as {name}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# one camera, one identity, three frames
camera 1
seed 7
obs 1 0 100 1 2  0 0 1.0  2 2 1.0
obs 1 1 100 1 2  1 0 1.0  3 2 1.0
obs 1 2 100 1 2  2 0 1.0  4 2 1.0
";

    #[test]
    fn minimal_file_parses() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.cameras, vec![1]);
        assert_eq!(s.length, 3);
        assert_eq!(s.identities(), vec![100]);
        assert_eq!(s.observations_at(1, 1).len(), 1);
        assert_eq!(s.embedding.seed, 7);
    }

    #[test]
    fn non_dense_frames_rejected() {
        let text = "\
camera 1
obs 1 0 100 1 1  0 0 1.0
obs 1 2 100 1 1  2 0 1.0
";
        let err = parse_scenario(text).unwrap_err();
        assert!(
            matches!(err, ScenarioError::Validation(ref m) if m.contains("dense")),
            "{err}"
        );
    }

    #[test]
    fn unknown_camera_rejected() {
        let text = "\
camera 1
obs 2 0 100 1 1  0 0 1.0
";
        let err = parse_scenario(text).unwrap_err();
        assert!(matches!(err, ScenarioError::Validation(ref m) if m.contains("undeclared")));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "camera 1\nobs 1 0 x 1 1 0 0 1.0\n";
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(
            err,
            ScenarioError::Parse {
                line: 2,
                message: "could not parse 'x' as identity".into()
            }
        );
    }

    #[test]
    fn keypoint_count_must_match() {
        let text = "camera 1\nobs 1 0 100 1 2  0 0 1.0\n";
        assert!(matches!(
            parse_scenario(text),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn separation_alpha_coherence_enforced() {
        let text = "\
camera 1
alpha 0.6
separation 1.0
obs 1 0 100 1 1  0 0 1.0
";
        let err = parse_scenario(text).unwrap_err();
        assert!(matches!(err, ScenarioError::Validation(ref m) if m.contains("separation")));
    }

    #[test]
    fn gap_frames_legal_when_track_contiguous() {
        // Observed frames 3..=5: contiguous even though they start past zero.
        let text = "\
camera 1
length 10
obs 1 3 9 1 1  0 0 1.0
obs 1 4 9 1 1  1 0 1.0
obs 1 5 9 1 1  2 0 1.0
";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.length, 10);
    }
}
