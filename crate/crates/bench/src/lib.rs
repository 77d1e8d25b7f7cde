//! Shared input builders for the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reidsim_core::pipeline::{CandidateRow, CandidateTable};
use reidsim_core::FeatureVector;

/// A dense random candidate table with plenty of distance ties.
pub fn random_table(detections: usize, entries: usize, seed: u64) -> CandidateTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = CandidateTable::default();
    for d in 0..detections {
        for e in 1..=entries as u64 {
            if rng.gen_bool(0.6) {
                table.push(CandidateRow {
                    detection_index: d,
                    entry_id: e,
                    distance: rng.gen_range(0..16) as f64 * 0.25,
                });
            }
        }
    }
    table
}

pub fn random_feature(dim: usize, seed: u64) -> FeatureVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FeatureVector((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
}
