//! Multi-camera pedestrian re-identification and tracking simulator.
//!
//! Each simulated edge node runs a per-frame tracking pipeline: detections are
//! validated by keypoint count and confidence, gated spatially against a local
//! database of tracked identities, matched greedily by appearance distance,
//! and aged out when unseen. Nodes talk to a central server through a
//! metadata-only wire protocol (feature vectors and impersonal IDs, nothing
//! else), and the server arbitrates cross-camera identity through a global
//! database with node-ownership semantics.
//!
//! Neural components are replaced by pluggable oracles: a synthetic embedding
//! model with triplet-margin geometry stands in for the appearance network,
//! and a constant-velocity extrapolator stands in for the learned bounding-box
//! predictor. This keeps system-level behavior fully deterministic and
//! verifiable at desk scale.
//!
//! The crate is organized as:
//!
//! * [`geometry`], [`feature`], [`params`], [`detection`] — shared domain
//!   types and the primitive operations (IoU, keypoint envelopes, L2).
//! * [`pipeline`] — the per-node tracking pipeline and local database.
//! * [`predictor`] — future bounding-box prediction behind a trait.
//! * [`embedding`], [`scenario`] — the synthetic appearance oracle and the
//!   scripted ground-truth scenarios that drive simulations.
//! * [`server`] — the global database, ownership, and round-robin serving.
//! * [`protocol`] — wire format, framed codec, and the latency channel model.
//! * [`metrics`] — CMC, mAP, identity measures (IDP/IDR/IDF1), and the
//!   accuracy-times-efficiency scoring.
//! * [`sim`], [`report`] — the deterministic logical-time simulator and its
//!   report emission (JSON/CSV/SVG).

pub mod detection;
pub mod embedding;
pub mod feature;
pub mod geometry;
pub mod metrics;
pub mod params;
pub mod pipeline;
pub mod predictor;
pub mod protocol;
pub mod report;
pub mod scenario;
pub mod server;
pub mod sim;

pub use detection::Detection;
pub use feature::FeatureVector;
pub use geometry::{BoundingBox, Keypoint};
pub use params::SystemParams;
