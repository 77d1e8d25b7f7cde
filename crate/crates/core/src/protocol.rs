//! Metadata-only wire protocol between nodes and the server, plus the
//! buffered latency channel used in simulation.
//!
//! The schema carries feature vectors, impersonal IDs, and nothing else:
//! there is no field that could hold keypoints, box coordinates, pixels, or
//! free-form bytes. Privacy is a property of the schema, not a policy check.
//!
//! Frame layout (all little-endian):
//!
//! ```text
//! u32 payload_len | u8 tag | payload
//! ```
//!
//! `payload_len` counts the tag byte plus everything after it. Tags:
//! 1 = Query, 2 = UpdateFeature, 3 = Release, 4 = MatchReply. IDs are `u64`
//! in declared field order; a feature vector is `u32 dim` followed by `dim`
//! 32-bit floats.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature::FeatureVector;

/// Largest feature dimension the decoder accepts, guarding against hostile
/// length fields.
pub const DEFAULT_MAX_DIM: u32 = 4096;

const TAG_QUERY: u8 = 1;
const TAG_UPDATE: u8 = 2;
const TAG_RELEASE: u8 = 3;
const TAG_REPLY: u8 = 4;

/// Everything that may cross the simulated network.
///
/// In `UpdateFeature` and `Release`, `object_id` is the sender's identifier
/// for the tracked object: nodes fill in their local ID and the server
/// resolves it to a global ID through the alias recorded when the object was
/// first queried. `MatchReply` carries the resolved global ID back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Message {
    /// Ask the server for a cross-camera match for a newly tracked object.
    Query {
        node_id: u64,
        temp_id: u64,
        feature: FeatureVector,
    },
    /// Replace the stored feature for an object the sending node owns.
    UpdateFeature {
        node_id: u64,
        object_id: u64,
        feature: FeatureVector,
    },
    /// The object left the sender's scene; ownership should be cleared.
    Release { node_id: u64, object_id: u64 },
    /// Server-to-node: the queried object matched an existing identity.
    MatchReply { temp_id: u64, global_id: u64 },
}

impl Message {
    pub fn type_name(&self) -> &'static str {
        match self {
            Message::Query { .. } => "query",
            Message::UpdateFeature { .. } => "update_feature",
            Message::Release { .. } => "release",
            Message::MatchReply { .. } => "match_reply",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    /// Fewer bytes present than the frame header or declared length requires.
    #[error("truncated frame")]
    Truncated,
    /// The tag byte names no known message type.
    #[error("unknown message tag {0}")]
    UnknownTag(u8),
    /// Declared payload length is inconsistent with the tagged layout.
    #[error("frame length does not match message layout")]
    LengthMismatch,
    /// Declared feature dimension exceeds the configured maximum.
    #[error("feature dimension {dim} exceeds maximum {max}")]
    DimensionOverflow { dim: u32, max: u32 },
}

/// Encodes a message as one length-prefixed frame.
pub fn encode(msg: &Message) -> Vec<u8> {
    let mut payload = Vec::new();
    match msg {
        Message::Query {
            node_id,
            temp_id,
            feature,
        } => {
            payload.push(TAG_QUERY);
            payload.extend_from_slice(&node_id.to_le_bytes());
            payload.extend_from_slice(&temp_id.to_le_bytes());
            encode_feature(&mut payload, feature);
        }
        Message::UpdateFeature {
            node_id,
            object_id,
            feature,
        } => {
            payload.push(TAG_UPDATE);
            payload.extend_from_slice(&node_id.to_le_bytes());
            payload.extend_from_slice(&object_id.to_le_bytes());
            encode_feature(&mut payload, feature);
        }
        Message::Release { node_id, object_id } => {
            payload.push(TAG_RELEASE);
            payload.extend_from_slice(&node_id.to_le_bytes());
            payload.extend_from_slice(&object_id.to_le_bytes());
        }
        Message::MatchReply { temp_id, global_id } => {
            payload.push(TAG_REPLY);
            payload.extend_from_slice(&temp_id.to_le_bytes());
            payload.extend_from_slice(&global_id.to_le_bytes());
        }
    }
    let mut frame = Vec::with_capacity(4 + payload.len());
    frame.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    frame.extend_from_slice(&payload);
    frame
}

fn encode_feature(out: &mut Vec<u8>, feature: &FeatureVector) {
    out.extend_from_slice(&(feature.dim() as u32).to_le_bytes());
    for v in feature.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Decodes exactly one frame occupying the whole input.
pub fn decode(bytes: &[u8]) -> Result<Message, DecodeError> {
    decode_with_max_dim(bytes, DEFAULT_MAX_DIM)
}

/// As [`decode`], with an explicit feature-dimension cap.
pub fn decode_with_max_dim(bytes: &[u8], max_dim: u32) -> Result<Message, DecodeError> {
    let (msg, consumed) = decode_frame(bytes, max_dim)?;
    if consumed != bytes.len() {
        return Err(DecodeError::LengthMismatch);
    }
    Ok(msg)
}

/// Decodes one frame from the front of `bytes`, returning the message and the
/// number of bytes consumed. Never reads past the declared frame.
pub fn decode_frame(bytes: &[u8], max_dim: u32) -> Result<(Message, usize), DecodeError> {
    if bytes.len() < 4 {
        return Err(DecodeError::Truncated);
    }
    let declared = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
    if bytes.len() - 4 < declared {
        return Err(DecodeError::Truncated);
    }
    if declared < 1 {
        return Err(DecodeError::Truncated);
    }
    let payload = &bytes[4..4 + declared];
    let tag = payload[0];
    let body = &payload[1..];
    let msg = match tag {
        TAG_QUERY => {
            let (a, b, feature) = decode_ids_and_feature(body, max_dim)?;
            Message::Query {
                node_id: a,
                temp_id: b,
                feature,
            }
        }
        TAG_UPDATE => {
            let (a, b, feature) = decode_ids_and_feature(body, max_dim)?;
            Message::UpdateFeature {
                node_id: a,
                object_id: b,
                feature,
            }
        }
        TAG_RELEASE => {
            let (a, b) = decode_two_ids(body)?;
            Message::Release {
                node_id: a,
                object_id: b,
            }
        }
        TAG_REPLY => {
            let (a, b) = decode_two_ids(body)?;
            Message::MatchReply {
                temp_id: a,
                global_id: b,
            }
        }
        other => return Err(DecodeError::UnknownTag(other)),
    };
    Ok((msg, 4 + declared))
}

fn decode_two_ids(body: &[u8]) -> Result<(u64, u64), DecodeError> {
    if body.len() != 16 {
        return Err(DecodeError::LengthMismatch);
    }
    let a = u64::from_le_bytes(body[..8].try_into().unwrap());
    let b = u64::from_le_bytes(body[8..16].try_into().unwrap());
    Ok((a, b))
}

fn decode_ids_and_feature(
    body: &[u8],
    max_dim: u32,
) -> Result<(u64, u64, FeatureVector), DecodeError> {
    if body.len() < 20 {
        return Err(DecodeError::LengthMismatch);
    }
    let a = u64::from_le_bytes(body[..8].try_into().unwrap());
    let b = u64::from_le_bytes(body[8..16].try_into().unwrap());
    let dim = u32::from_le_bytes(body[16..20].try_into().unwrap());
    if dim > max_dim {
        return Err(DecodeError::DimensionOverflow { dim, max: max_dim });
    }
    let expected = 20 + 4 * dim as usize;
    if body.len() != expected {
        return Err(DecodeError::LengthMismatch);
    }
    let mut values = Vec::with_capacity(dim as usize);
    for chunk in body[20..].chunks_exact(4) {
        values.push(f32::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok((a, b, FeatureVector(values)))
}

// ---------------------------------------------------------------------------
// Channel: bounded FIFO with a fixed-delay-plus-jitter latency model
// ---------------------------------------------------------------------------

/// Default bound on in-flight messages per channel.
pub const DEFAULT_CHANNEL_CAPACITY: usize = 4096;

/// One direction of a node/server link under logical time.
///
/// Single producer, single consumer. Messages become deliverable
/// `latency + jitter` ticks after they were sent; while the channel is down
/// they are held and delivered after restoration, preserving send order when
/// jitter is zero. The buffer is bounded: overflow drops the oldest message
/// and counts it.
#[derive(Debug, Clone)]
pub struct Channel {
    queue: std::collections::VecDeque<(u64, Message)>,
    latency: u64,
    jitter_max: u64,
    jitter_rng: rand_chacha::ChaCha8Rng,
    capacity: usize,
    up: bool,
    dropped: u64,
}

impl Channel {
    pub fn new(latency: u64, jitter_max: u64, jitter_seed: u64) -> Self {
        use rand::SeedableRng;
        Self {
            queue: std::collections::VecDeque::new(),
            latency,
            jitter_max,
            jitter_rng: rand_chacha::ChaCha8Rng::seed_from_u64(jitter_seed),
            capacity: DEFAULT_CHANNEL_CAPACITY,
            up: true,
            dropped: 0,
        }
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity.max(1);
        self
    }

    /// Marks the link up or down. Messages sent while down stay buffered.
    pub fn set_up(&mut self, up: bool) {
        self.up = up;
    }

    pub fn is_up(&self) -> bool {
        self.up
    }

    /// Messages dropped to the capacity bound so far.
    pub fn dropped_count(&self) -> u64 {
        self.dropped
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Enqueues a message at logical time `now`.
    pub fn send(&mut self, msg: Message, now: u64) {
        use rand::Rng;
        let jitter = if self.jitter_max == 0 {
            0
        } else {
            self.jitter_rng.gen_range(0..=self.jitter_max)
        };
        let deliver_at = now.saturating_add(self.latency).saturating_add(jitter);
        if self.queue.len() == self.capacity {
            self.queue.pop_front();
            self.dropped += 1;
        }
        self.queue.push_back((deliver_at, msg));
    }

    /// Removes and returns, in send order, every message due at `now`.
    /// A downed channel delivers nothing.
    pub fn deliver_due(&mut self, now: u64) -> Vec<Message> {
        if !self.up {
            return Vec::new();
        }
        let mut due = Vec::new();
        let mut remaining = std::collections::VecDeque::with_capacity(self.queue.len());
        for (deliver_at, msg) in self.queue.drain(..) {
            if deliver_at <= now {
                due.push(msg);
            } else {
                remaining.push_back((deliver_at, msg));
            }
        }
        self.queue = remaining;
        due
    }
}
