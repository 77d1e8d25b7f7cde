//! Deterministic multi-node simulation under a logical clock.
//!
//! Every tick, each node (one per scripted camera, ascending ID order)
//! processes its frame, its outbound messages enter the node-to-server
//! channel, due messages land in the server's per-node buffers, the server
//! takes one round-robin step per node, and replies travel back. All
//! traffic passes through the wire codec, so a run exercises the byte-level
//! protocol end to end and can capture it for the privacy audit.
//!
//! Identical scenario, options, and seed produce identical output on any
//! platform: iteration orders are fixed, randomness is seeded, and no
//! wall-clock time is consulted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::Detection;
use crate::embedding::{build_model, sample_embedding, EmbedError};
use crate::geometry::bbox_from_keypoints;
use crate::metrics::ident::{id_measures, id_measures_per_camera, IdMeasures, TrackSet};
use crate::metrics::AeBlock;
use crate::params::SystemParams;
use crate::pipeline::Pipeline;
use crate::predictor::ConstantVelocityPredictor;
use crate::protocol::{decode, encode, Channel, Message};
use crate::scenario::{Scenario, ScenarioError};
use crate::server::{EdgeServer, NodeBuffers, ServerCounters};

/// IoU threshold for truth-to-result association in the final scoring.
pub const ASSOCIATION_IOU: f64 = 0.3;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Embedding(#[from] EmbedError),
}

/// Engine options; file handling and output formats live with the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub params: SystemParams,
    /// Global database capacity.
    pub capacity: usize,
    /// Master seed for channel jitter streams (embedding noise is seeded by
    /// the scenario itself).
    pub seed: u64,
    pub latency_override: Option<u64>,
    pub jitter_override: Option<u64>,
    /// Capture every encoded frame that crosses any channel.
    pub audit_privacy: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            capacity: 1024,
            seed: 0,
            latency_override: None,
            jitter_override: None,
            audit_privacy: false,
        }
    }
}

/// Message counters split by type, as seen at the sending side, plus reply
/// delivery accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCounts {
    pub query: u64,
    pub update_feature: u64,
    pub release: u64,
    pub match_reply: u64,
    pub replies_delivered: u64,
    /// Replies that arrived after their entry was already evicted.
    pub stale_replies: u64,
}

/// Transport-level counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportCounters {
    /// Messages dropped to channel capacity bounds.
    pub channel_dropped: u64,
    /// encode/decode round trips that did not reproduce the message.
    pub codec_mismatches: u64,
    /// Hypothesis boxes discarded because two merged tracks claimed the
    /// same camera and frame.
    pub hypothesis_conflicts: u64,
}

/// Per-camera scoring entry (kept as a list so JSON output is stable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraMeasures {
    pub camera: u64,
    pub measures: IdMeasures,
}

/// Everything a run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub cameras: Vec<u64>,
    pub frames: u64,
    pub truth_identities: u64,
    pub multi: IdMeasures,
    pub per_camera: Vec<CameraMeasures>,
    pub id_switches: u64,
    /// Ticks on which some global identity was held by more than one node.
    pub ownership_violations: u64,
    pub global_identities_created: u64,
    pub messages: MessageCounts,
    pub transport: TransportCounters,
    pub server: ServerCounters,
    pub warnings: Vec<String>,
    /// Present when measurement inputs were supplied alongside the run.
    pub ae: Option<AeBlock>,
}

impl RunReport {
    /// Any nonzero invariant-violation counter makes a run unacceptable.
    pub fn invariant_violations(&self) -> u64 {
        self.ownership_violations
            + self.transport.codec_mismatches
            + self.transport.hypothesis_conflicts
    }
}

/// Per-frame, per-camera local ID assignments: `(frame, camera,
/// [(detection index, local id)])`. Equality across runs is the
/// latency-independence check.
pub type AssignmentTrace = Vec<(u64, u64, Vec<(usize, u64)>)>;

/// A finished run.
#[derive(Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub trace: AssignmentTrace,
    /// Every encoded frame that crossed a channel, when auditing.
    pub audit_frames: Option<Vec<Vec<u8>>>,
}

struct Node {
    pipeline: Pipeline,
    to_server: Channel,
    from_server: Channel,
}

/// Hypothesis identity: global when the server confirmed a match, otherwise
/// the node-local provisional identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum HypId {
    Global(u64),
    Provisional { camera: u64, local_id: u64 },
}

fn record_send(
    msg: &Message,
    counts: &mut MessageCounts,
    transport: &mut TransportCounters,
    audit: &mut Option<Vec<Vec<u8>>>,
) {
    match msg {
        Message::Query { .. } => counts.query += 1,
        Message::UpdateFeature { .. } => counts.update_feature += 1,
        Message::Release { .. } => counts.release += 1,
        Message::MatchReply { .. } => counts.match_reply += 1,
    }
    let bytes = encode(msg);
    match decode(&bytes) {
        Ok(decoded) if &decoded == msg => {}
        _ => transport.codec_mismatches += 1,
    }
    if let Some(log) = audit {
        log.push(bytes);
    }
}

/// Runs the scenario to completion.
pub fn run_sim(scenario: &Scenario, options: &SimOptions) -> Result<RunOutput, SimError> {
    scenario.validate()?;
    let params = &options.params;

    let identities = scenario.identities();
    let model = build_model(&scenario.embedding, &identities)?;

    let mut warnings = Vec::new();
    if 2.0 * scenario.embedding.alpha >= params.theta_euc {
        warnings.push(format!(
            "same-identity samples can be {} apart, reaching theta_euc = {}; local matching may reject true pairs",
            2.0 * scenario.embedding.alpha,
            params.theta_euc
        ));
    }

    let mut cameras = scenario.cameras.clone();
    cameras.sort_unstable();

    let latency = options.latency_override.unwrap_or(scenario.network.latency);
    let jitter = options.jitter_override.unwrap_or(scenario.network.jitter);

    let mut nodes: BTreeMap<u64, Node> = BTreeMap::new();
    for (pos, &cam) in cameras.iter().enumerate() {
        let jitter_seed =
            |dir: u64| options.seed ^ (pos as u64).wrapping_mul(0x9E37_79B9) ^ dir.rotate_left(32);
        nodes.insert(
            cam,
            Node {
                pipeline: Pipeline::new(cam, params.clone(), Box::new(ConstantVelocityPredictor)),
                to_server: Channel::new(latency, jitter, jitter_seed(1)),
                from_server: Channel::new(latency, jitter, jitter_seed(2)),
            },
        );
    }

    let mut server = EdgeServer::new(options.capacity, params.beta_euc);
    let mut buffers = NodeBuffers::default();
    for &cam in &cameras {
        server.register_node(cam);
        buffers.register(cam);
    }

    // Ground truth: one box per observation, visible or not, spanning all
    // scripted keypoints.
    let mut truth = TrackSet::new();
    for &cam in &cameras {
        if let Some(frames) = scenario.observations.get(&cam) {
            for (&frame, obs_list) in frames {
                for obs in obs_list {
                    if let Ok(bbox) = bbox_from_keypoints(&obs.keypoints, 0.0) {
                        truth
                            .add_box(obs.identity, cam, frame, bbox)
                            .expect("scenario validation rejects duplicate observations");
                    }
                }
            }
        }
    }

    let mut counts = MessageCounts::default();
    let mut transport = TransportCounters::default();
    let mut trace: AssignmentTrace = Vec::new();
    let mut audit_frames: Option<Vec<Vec<u8>>> = options.audit_privacy.then(Vec::new);

    // Hypothesis raw tracks keyed by (camera, local id).
    let mut hyp_boxes: BTreeMap<(u64, u64), Vec<(u64, crate::geometry::BoundingBox)>> =
        BTreeMap::new();
    // Per (camera, truth identity): last assigned local id, for switches.
    let mut last_assigned: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut id_switches = 0u64;
    let mut ownership_violations = 0u64;

    for now in 0..scenario.length {
        // Outage windows apply to both directions of a node's link.
        for (&cam, node) in &mut nodes {
            let down = scenario
                .network
                .outages
                .iter()
                .any(|&(c, from, to)| c == cam && from <= now && now < to);
            node.to_server.set_up(!down);
            node.from_server.set_up(!down);
        }

        for (pos, &cam) in cameras.iter().enumerate() {
            let node = nodes.get_mut(&cam).expect("node per camera");
            let observations = scenario.observations_at(cam, now);
            let mut detections: Vec<Detection> = Vec::new();
            let mut det_identity: Vec<u64> = Vec::new();
            for obs in observations.iter().filter(|o| o.visible) {
                let draw = now * cameras.len() as u64 + pos as u64;
                let feature = sample_embedding(&model, obs.identity, draw)?;
                if let Ok(d) = Detection::from_keypoints(
                    obs.keypoints.clone(),
                    feature,
                    now,
                    cam,
                    params.theta_conf,
                ) {
                    detections.push(d);
                    det_identity.push(obs.identity);
                }
            }

            let result = node.pipeline.process_frame(&detections);

            let frame_assignments: Vec<(usize, u64)> =
                result.assignments.iter().map(|(&i, &id)| (i, id)).collect();
            trace.push((now, cam, frame_assignments));

            for (&det_idx, &local_id) in &result.assignments {
                hyp_boxes
                    .entry((cam, local_id))
                    .or_default()
                    .push((now, detections[det_idx].bbox));
                let identity = det_identity[det_idx];
                if let Some(&prev) = last_assigned.get(&(cam, identity)) {
                    if prev != local_id {
                        id_switches += 1;
                    }
                }
                last_assigned.insert((cam, identity), local_id);
            }

            for msg in result.outbound {
                record_send(&msg, &mut counts, &mut transport, &mut audit_frames);
                node.to_server.send(msg, now);
            }
        }

        for (&cam, node) in &mut nodes {
            for msg in node.to_server.deliver_due(now) {
                buffers.enqueue(cam, msg);
            }
        }

        for _ in 0..cameras.len() {
            for (target, reply) in server.round_robin_step(&mut buffers) {
                let node = nodes.get_mut(&target).expect("registered node");
                record_send(&reply, &mut counts, &mut transport, &mut audit_frames);
                node.from_server.send(reply, now);
            }
        }

        for node in nodes.values_mut() {
            for msg in node.from_server.deliver_due(now) {
                counts.replies_delivered += 1;
                match msg {
                    Message::MatchReply { temp_id, global_id } => {
                        if !node.pipeline.handle_reply(temp_id, global_id) {
                            counts.stale_replies += 1;
                        }
                    }
                    _ => transport.codec_mismatches += 1,
                }
            }
        }

        // Cross-node ownership uniqueness: no global id may be live in two
        // local databases at once.
        let mut holders: BTreeMap<u64, u64> = BTreeMap::new();
        for node in nodes.values() {
            for entry in node.pipeline.db.entries() {
                if let Some(g) = entry.global_id {
                    *holders.entry(g).or_default() += 1;
                }
            }
        }
        ownership_violations += holders
            .values()
            .filter(|&&n| n > 1)
            .map(|&n| n - 1)
            .sum::<u64>();
    }

    // Resolve hypothesis identities and assemble the scored track set. The
    // server's alias history is the system's final word on which global
    // identity each node-local track belonged to; tracks whose query never
    // reached the server stay provisional.
    let mut hypothesis = TrackSet::new();
    let mut dense: BTreeMap<HypId, u64> = BTreeMap::new();
    for (&(cam, local_id), boxes) in &hyp_boxes {
        let hyp_id = match server.alias_history().get(&(cam, local_id)) {
            Some(&g) => HypId::Global(g),
            None => HypId::Provisional {
                camera: cam,
                local_id,
            },
        };
        let next = dense.len() as u64 + 1;
        let id = *dense.entry(hyp_id).or_insert(next);
        for &(frame, bbox) in boxes {
            if hypothesis.add_box(id, cam, frame, bbox).is_err() {
                transport.hypothesis_conflicts += 1;
            }
        }
    }

    let multi = id_measures(&truth, &hypothesis, ASSOCIATION_IOU);
    let per_camera = id_measures_per_camera(&truth, &hypothesis, ASSOCIATION_IOU)
        .into_iter()
        .map(|(camera, measures)| CameraMeasures { camera, measures })
        .collect();

    for (&cam, node) in &nodes {
        let dropped = node.to_server.dropped_count() + node.from_server.dropped_count();
        transport.channel_dropped += dropped;
        if dropped > 0 {
            warnings.push(format!(
                "camera {cam}: {dropped} messages dropped at channel capacity"
            ));
        }
    }

    let report = RunReport {
        cameras: cameras.clone(),
        frames: scenario.length,
        truth_identities: identities.len() as u64,
        multi,
        per_camera,
        id_switches,
        ownership_violations,
        global_identities_created: server.db.identities_created(),
        messages: counts,
        transport,
        server: server.counters.clone(),
        warnings,
        ae: None,
    };

    Ok(RunOutput {
        report,
        trace,
        audit_frames,
    })
}

/// Outcome of running the same scenario at zero and extreme channel latency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyCheck {
    pub independent: bool,
    pub mismatched_frames: u64,
}

/// Verifies that local assignments are independent of channel latency:
/// replies may arrive arbitrarily late, but per-frame tracking must not
/// change.
pub fn latency_independence(
    scenario: &Scenario,
    options: &SimOptions,
) -> Result<LatencyCheck, SimError> {
    let mut fast = options.clone();
    fast.latency_override = Some(0);
    fast.jitter_override = Some(0);
    let mut slow = options.clone();
    slow.latency_override = Some(1_000_000);
    slow.jitter_override = Some(0);
    let fast_run = run_sim(scenario, &fast)?;
    let slow_run = run_sim(scenario, &slow)?;
    let mismatched_frames = fast_run
        .trace
        .iter()
        .zip(&slow_run.trace)
        .filter(|(a, b)| a != b)
        .count() as u64
        + fast_run.trace.len().abs_diff(slow_run.trace.len()) as u64;
    Ok(LatencyCheck {
        independent: mismatched_frames == 0,
        mismatched_frames,
    })
}

/// Confirms every captured byte frame decodes to one of the schema
/// variants; returns the number of frames checked.
pub fn audit_decodes_cleanly(frames: &[Vec<u8>]) -> Result<u64, crate::protocol::DecodeError> {
    for frame in frames {
        decode(frame)?;
    }
    Ok(frames.len() as u64)
}
