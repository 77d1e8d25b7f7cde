//! Synthetic appearance-embedding oracle.
//!
//! Stands in for a trained feature extractor: every identity gets a center in
//! feature space, pairwise separated by at least `separation`, and samples
//! are drawn uniformly inside the ball of radius `alpha` around the center.
//! With `separation > 2*alpha` every sample is strictly closer to its own
//! center than to any other, so matching driven by this oracle can never be
//! confused by appearance alone. Everything is deterministic given the seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature::{l2_distance, FeatureVector};

/// Rejection-sampling attempts per identity before giving up.
const PLACEMENT_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("invalid embedding config: {0}")]
    InvalidConfig(String),
    #[error("could not place {placed} of {requested} identity centers at separation {separation} (dim {dim}, scale {scale})")]
    InfeasibleGeometry {
        requested: usize,
        placed: usize,
        separation: f64,
        dim: usize,
        scale: f64,
    },
    #[error("identity {0} unknown to the embedding model")]
    UnknownIdentity(u64),
}

/// Parameters for building an [`EmbeddingModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    /// Feature dimension.
    pub dim: usize,
    /// Intra-class radius: samples stay within this distance of the center.
    pub alpha: f64,
    /// Minimum distance between any two identity centers.
    pub separation: f64,
    /// Side length of the box centers are sampled in.
    pub scale: f64,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            dim: 8,
            alpha: 0.0,
            separation: 1.0,
            scale: 1.0,
            seed: 0,
        }
    }
}

/// Identity centers plus the sampling geometry.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    config: EmbeddingConfig,
    centers: BTreeMap<u64, FeatureVector>,
}

/// Outcome of sampling the model and measuring its class geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub max_intra: f64,
    pub min_inter: f64,
    pub satisfied: bool,
}

impl EmbeddingModel {
    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn identities(&self) -> impl Iterator<Item = u64> + '_ {
        self.centers.keys().copied()
    }

    pub fn center(&self, identity: u64) -> Option<&FeatureVector> {
        self.centers.get(&identity)
    }
}

/// Places one center per identity by rejection sampling until the pairwise
/// separation constraint holds. Deterministic given the seed.
pub fn build_model(
    config: &EmbeddingConfig,
    identities: &[u64],
) -> Result<EmbeddingModel, EmbedError> {
    if config.dim < 2 {
        return Err(EmbedError::InvalidConfig(format!(
            "dim must be >= 2, got {}",
            config.dim
        )));
    }
    let separation_ok = config.separation.is_finite()
        && config.alpha.is_finite()
        && config.separation > 2.0 * config.alpha;
    if !separation_ok {
        return Err(EmbedError::InvalidConfig(format!(
            "separation {} must exceed 2*alpha = {}",
            config.separation,
            2.0 * config.alpha
        )));
    }
    if !crate::params::positive(config.scale) || config.alpha < 0.0 {
        return Err(EmbedError::InvalidConfig(
            "scale must be positive, alpha non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centers: BTreeMap<u64, FeatureVector> = BTreeMap::new();
    let mut placed: Vec<Vec<f64>> = Vec::new();
    let mut sorted_ids: Vec<u64> = identities.to_vec();
    sorted_ids.sort_unstable();
    sorted_ids.dedup();
    for (index, &id) in sorted_ids.iter().enumerate() {
        let mut accepted = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let candidate: Vec<f64> = (0..config.dim)
                .map(|_| rng.gen::<f64>() * config.scale)
                .collect();
            let ok = placed
                .iter()
                .all(|c| euclid(c, &candidate) >= config.separation);
            if ok {
                accepted = Some(candidate);
                break;
            }
        }
        let Some(center) = accepted else {
            return Err(EmbedError::InfeasibleGeometry {
                requested: sorted_ids.len(),
                placed: index,
                separation: config.separation,
                dim: config.dim,
                scale: config.scale,
            });
        };
        centers.insert(
            id,
            FeatureVector(center.iter().map(|v| *v as f32).collect()),
        );
        placed.push(center);
    }
    Ok(EmbeddingModel {
        config: config.clone(),
        centers,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Draws one sample for `(identity, draw_index)`: the center plus uniform
/// noise inside the alpha-ball. Deterministic for `(seed, identity, draw)`.
pub fn sample_embedding(
    model: &EmbeddingModel,
    identity: u64,
    draw_index: u64,
) -> Result<FeatureVector, EmbedError> {
    let center = model
        .centers
        .get(&identity)
        .ok_or(EmbedError::UnknownIdentity(identity))?;
    let alpha = model.config.alpha;
    if alpha == 0.0 {
        return Ok(center.clone());
    }
    let mut rng = draw_rng(model.config.seed, identity, draw_index);
    let dim = model.config.dim;
    // Direction from independent gaussians, radius from the inverse-CDF of
    // the ball's radial distribution.
    let mut direction: Vec<f64> = Vec::with_capacity(dim);
    while direction.len() < dim {
        let (a, b) = box_muller(&mut rng);
        direction.push(a);
        if direction.len() < dim {
            direction.push(b);
        }
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    let radius = if norm == 0.0 {
        0.0
    } else {
        alpha * rng.gen::<f64>().powf(1.0 / dim as f64)
    };
    let values = center
        .as_slice()
        .iter()
        .zip(&direction)
        .map(|(c, d)| {
            let offset = if norm == 0.0 { 0.0 } else { d / norm * radius };
            (*c as f64 + offset) as f32
        })
        .collect();
    Ok(FeatureVector(values))
}

fn draw_rng(seed: u64, identity: u64, draw_index: u64) -> ChaCha8Rng {
    // Distinct, platform-independent stream per (seed, identity, draw).
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&identity.to_le_bytes());
    key[16..24].copy_from_slice(&draw_index.to_le_bytes());
    key[24..32].copy_from_slice(
        &splitmix(seed ^ identity.rotate_left(17) ^ draw_index.rotate_left(41)).to_le_bytes(),
    );
    ChaCha8Rng::from_seed(key)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = loop {
        let v = rng.gen::<f64>();
        if v > 0.0 {
            break v;
        }
    };
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Samples `n_samples` per identity and reports the worst intra-class and
/// best inter-class sample distances.
pub fn verify_triplet_geometry(model: &EmbeddingModel, n_samples: u64) -> GeometryReport {
    let ids: Vec<u64> = model.identities().collect();
    let mut samples: Vec<(u64, FeatureVector)> = Vec::new();
    for &id in &ids {
        for draw in 0..n_samples {
            samples.push((
                id,
                sample_embedding(model, id, draw).expect("identity known"),
            ));
        }
    }
    let mut max_intra = 0.0f64;
    let mut min_inter = f64::INFINITY;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let d = l2_distance(&samples[i].1, &samples[j].1).expect("same dim");
            if samples[i].0 == samples[j].0 {
                max_intra = max_intra.max(d);
            } else {
                min_inter = min_inter.min(d);
            }
        }
    }
    if samples.is_empty() || min_inter == f64::INFINITY {
        min_inter = f64::INFINITY;
    }
    GeometryReport {
        max_intra,
        min_inter,
        satisfied: max_intra < min_inter,
    }
}
