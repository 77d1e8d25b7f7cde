//! Ranked re-identification metrics over gallery/query sets.

use crate::feature::{l2_distance, FeatureVector};
use crate::metrics::MetricsError;

/// One gallery or query item.
#[derive(Debug, Clone, PartialEq)]
pub struct ReidSample {
    pub identity: u64,
    pub camera: u64,
    pub feature: FeatureVector,
}

/// Gallery indices ranked by ascending distance to the query; ties keep
/// gallery order.
fn ranked_gallery(gallery: &[ReidSample], query: &ReidSample) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = gallery
        .iter()
        .enumerate()
        .map(|(i, g)| {
            (
                i,
                l2_distance(&query.feature, &g.feature).unwrap_or(f64::INFINITY),
            )
        })
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Cumulative match characteristic at rank `r`, as a percentage.
///
/// A query belongs to the probe set when the (possibly camera-filtered)
/// gallery holds at least one same-identity item. With
/// `same_camera_excluded`, same-identity items seen by the query's own
/// camera are removed from its gallery view first.
pub fn cmc(
    gallery: &[ReidSample],
    queries: &[ReidSample],
    r: usize,
    same_camera_excluded: bool,
) -> Result<f64, MetricsError> {
    if r < 1 {
        return Err(MetricsError::InvalidInput("rank must be >= 1".into()));
    }
    let mut probes = 0u64;
    let mut hits = 0u64;
    for query in queries {
        let view: Vec<ReidSample> = gallery
            .iter()
            .filter(|g| {
                !(same_camera_excluded && g.identity == query.identity && g.camera == query.camera)
            })
            .cloned()
            .collect();
        if !view.iter().any(|g| g.identity == query.identity) {
            continue;
        }
        probes += 1;
        let ranked = ranked_gallery(&view, query);
        let first_correct = ranked
            .iter()
            .position(|&(i, _)| view[i].identity == query.identity)
            .expect("probe has a match");
        if first_correct < r {
            hits += 1;
        }
    }
    if probes == 0 {
        return Err(MetricsError::EmptyProbeSet);
    }
    Ok(100.0 * hits as f64 / probes as f64)
}

/// Mean average precision over the probe set, as a percentage.
pub fn mean_average_precision(
    gallery: &[ReidSample],
    queries: &[ReidSample],
) -> Result<f64, MetricsError> {
    let mut probes = 0u64;
    let mut ap_sum = 0.0f64;
    for query in queries {
        let total_positives = gallery
            .iter()
            .filter(|g| g.identity == query.identity)
            .count();
        if total_positives == 0 {
            continue;
        }
        probes += 1;
        let ranked = ranked_gallery(gallery, query);
        let mut found = 0usize;
        let mut ap = 0.0f64;
        for (rank0, &(i, _)) in ranked.iter().enumerate() {
            if gallery[i].identity == query.identity {
                found += 1;
                ap += found as f64 / (rank0 + 1) as f64;
            }
        }
        ap_sum += ap / total_positives as f64;
    }
    if probes == 0 {
        return Err(MetricsError::EmptyProbeSet);
    }
    Ok(100.0 * ap_sum / probes as f64)
}
