//! Evaluation suite: ranked re-identification metrics (CMC, mAP),
//! truth-to-result identity measures (IDP/IDR/IDF1) under the optimal
//! identity bijection, and the combined accuracy/efficiency scoring.

use thiserror::Error;

pub mod ae;
pub mod assignment;
pub mod ident;
pub mod reid;

pub use ae::{ae_coverage, ae_mark, efficiency, AeBlock, AeInput, CoverageComponent, Direction};
pub use ident::{id_measures, id_measures_per_camera, IdMeasures, TrackSet};
pub use reid::{cmc, mean_average_precision, ReidSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    /// No query has any gallery match, so ranked metrics are undefined.
    #[error("empty probe set")]
    EmptyProbeSet,
    #[error("power must be positive, got {0}")]
    NonpositivePower(f64),
    /// A radar polygon needs at least three axes.
    #[error("coverage needs at least 3 components, got {0}")]
    FewerThanThreeComponents(usize),
    #[error("duplicate box for identity {identity} at camera {camera}, frame {frame}")]
    DuplicateBox {
        identity: u64,
        camera: u64,
        frame: u64,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
