//! Per-node tracking pipeline.
//!
//! Each frame: validate detections by keypoint count and confidence, gather
//! spatially-overlapping candidates from the local database, resolve matches
//! greedily by lowest appearance distance, update matched entries, regenerate
//! motion predictions, then age and evict unseen entries. The pipeline emits
//! server-bound messages (queries for new IDs, feature updates, releases) and
//! never blocks on the network.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::detection::Detection;
use crate::feature::{l2_distance, FeatureVector};
use crate::geometry::{iou, BoundingBox, Keypoint};
use crate::params::SystemParams;
use crate::predictor::{KeypointHistory, Predictor};
use crate::protocol::Message;

/// One tracked identity in a node's local database.
#[derive(Debug, Clone, PartialEq)]
pub struct DatabaseEntry {
    pub local_id: u64,
    /// Known only after the server answers the entry's query with a match.
    pub global_id: Option<u64>,
    /// Last observed bounding box.
    pub bbox: BoundingBox,
    pub feature: FeatureVector,
    /// Valid-keypoint count when `feature` was captured.
    pub keypoint_count: usize,
    /// Predicted boxes for upcoming frames, newest prediction first in time.
    pub predictions: Vec<BoundingBox>,
    /// Frames left before eviction; reset on every match.
    pub life: u32,
    history: VecDeque<(u64, Vec<Keypoint>)>,
}

impl DatabaseEntry {
    pub fn new(local_id: u64, d: &Detection, params: &SystemParams) -> Self {
        let mut entry = Self {
            local_id,
            global_id: None,
            bbox: d.bbox,
            feature: d.feature.clone(),
            keypoint_count: d.valid_keypoint_count(params.theta_conf),
            predictions: Vec::new(),
            life: params.life_max,
            history: VecDeque::new(),
        };
        entry.push_history(d.frame_index, d.keypoints.clone(), params.history_len);
        entry
    }

    fn push_history(&mut self, frame: u64, keypoints: Vec<Keypoint>, history_len: usize) {
        self.history.push_back((frame, keypoints));
        while self.history.len() > history_len {
            self.history.pop_front();
        }
    }

    /// Observation history as a predictor input, when complete.
    pub fn keypoint_history(&self, history_len: usize) -> Option<KeypointHistory> {
        if self.history.len() < history_len {
            return None;
        }
        KeypointHistory::new(self.history.iter().cloned().collect()).ok()
    }
}

/// A node's set of currently tracked identities plus the fresh-ID counter.
#[derive(Debug, Clone, Default)]
pub struct LocalDatabase {
    entries: BTreeMap<u64, DatabaseEntry>,
    next_id: u64,
}

impl LocalDatabase {
    pub fn new() -> Self {
        Self {
            entries: BTreeMap::new(),
            next_id: 1,
        }
    }

    /// Issues a new local ID; IDs are never reused within a run.
    pub fn fresh_local_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn insert(&mut self, entry: DatabaseEntry) {
        debug_assert!(
            entry.local_id < self.next_id,
            "entry id must come from fresh_local_id"
        );
        self.entries.insert(entry.local_id, entry);
    }

    pub fn get(&self, local_id: u64) -> Option<&DatabaseEntry> {
        self.entries.get(&local_id)
    }

    pub fn get_mut(&mut self, local_id: u64) -> Option<&mut DatabaseEntry> {
        self.entries.get_mut(&local_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &DatabaseEntry> {
        self.entries.values()
    }
}

/// One (detection, entry, distance) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateRow {
    pub detection_index: usize,
    pub entry_id: u64,
    pub distance: f64,
}

/// All candidate pairs for one frame, in detection-then-entry order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateTable {
    pub rows: Vec<CandidateRow>,
}

impl CandidateTable {
    pub fn push(&mut self, row: CandidateRow) {
        debug_assert!(
            !self
                .rows
                .iter()
                .any(|r| r.detection_index == row.detection_index && r.entry_id == row.entry_id),
            "duplicate candidate pair"
        );
        debug_assert!(row.distance >= 0.0);
        self.rows.push(row);
    }
}

/// What one frame of processing produced.
///
/// `assignments` maps input detection indices (positions in the slice given
/// to [`Pipeline::process_frame`]) to local IDs for every detection that
/// passed validation; `new_ids` is the subset of IDs created this frame.
/// `outbound` lists messages in emission order: feature updates, then
/// queries, then releases.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameResult {
    pub assignments: BTreeMap<usize, u64>,
    pub new_ids: BTreeSet<u64>,
    pub outbound: Vec<Message>,
}

/// Keeps detections with at least `theta_key` keypoints of confidence at
/// least `theta_conf`, preserving order.
pub fn validate_detections(detections: &[Detection], params: &SystemParams) -> Vec<Detection> {
    detections
        .iter()
        .filter(|d| d.valid_keypoint_count(params.theta_conf) >= params.theta_key)
        .cloned()
        .collect()
}

/// Builds the candidate table: a (detection, entry) pair qualifies when the
/// detection box overlaps the entry's last box or any of its predictions,
/// and the appearance distance is below `theta_euc`.
pub fn gather_candidates(
    valid: &[Detection],
    db: &LocalDatabase,
    params: &SystemParams,
) -> CandidateTable {
    let mut table = CandidateTable::default();
    for (detection_index, d) in valid.iter().enumerate() {
        for entry in db.entries() {
            let overlaps = iou(&d.bbox, &entry.bbox) > 0.0
                || entry.predictions.iter().any(|p| iou(&d.bbox, p) > 0.0);
            if !overlaps {
                continue;
            }
            let Ok(distance) = l2_distance(&d.feature, &entry.feature) else {
                continue;
            };
            if distance < params.theta_euc {
                table.push(CandidateRow {
                    detection_index,
                    entry_id: entry.local_id,
                    distance,
                });
            }
        }
    }
    table
}

/// Greedy assignment: repeatedly take the lowest-distance row (ties broken
/// by lower entry ID, then lower detection index), bind that detection to
/// that entry, and drop every row sharing either side. Detections left over
/// receive fresh local IDs in index order.
pub fn resolve_matches(
    table: &CandidateTable,
    db: &mut LocalDatabase,
    num_detections: usize,
) -> (BTreeMap<usize, u64>, BTreeMap<usize, u64>) {
    let mut remaining = table.rows.clone();
    let mut reid = BTreeMap::new();
    while !remaining.is_empty() {
        let best = remaining
            .iter()
            .copied()
            .min_by(|a, b| {
                a.distance
                    .total_cmp(&b.distance)
                    .then(a.entry_id.cmp(&b.entry_id))
                    .then(a.detection_index.cmp(&b.detection_index))
            })
            .expect("non-empty");
        reid.insert(best.detection_index, best.entry_id);
        remaining
            .retain(|r| r.detection_index != best.detection_index && r.entry_id != best.entry_id);
    }
    let mut created = BTreeMap::new();
    for detection_index in 0..num_detections {
        if !reid.contains_key(&detection_index) {
            created.insert(detection_index, db.fresh_local_id());
        }
    }
    (reid, created)
}

/// Applies a matched detection to its entry. The box is always replaced and
/// life reset; the feature is replaced only when the detection barely
/// overlaps the entry's previous box (IoU below `theta_iou`) and was
/// captured with more valid keypoints than the stored one. Returns whether
/// the feature changed.
pub fn update_entry(entry: &mut DatabaseEntry, d: &Detection, params: &SystemParams) -> bool {
    let overlap = iou(&entry.bbox, &d.bbox);
    let valid_count = d.valid_keypoint_count(params.theta_conf);
    let replace = overlap < params.theta_iou && valid_count > entry.keypoint_count;
    entry.bbox = d.bbox;
    entry.life = params.life_max;
    entry.push_history(d.frame_index, d.keypoints.clone(), params.history_len);
    if replace {
        entry.feature = d.feature.clone();
        entry.keypoint_count = valid_count;
    }
    replace
}

/// Decrements life on every entry not seen this frame and removes the ones
/// that reach zero, returning their IDs in ascending order.
pub fn age_and_evict(db: &mut LocalDatabase, seen: &BTreeSet<u64>) -> Vec<u64> {
    let mut removals = Vec::new();
    for (&id, entry) in &mut db.entries {
        if !seen.contains(&id) {
            entry.life -= 1;
            if entry.life == 0 {
                removals.push(id);
            }
        }
    }
    for id in &removals {
        db.entries.remove(id);
    }
    removals
}

/// One node's tracking state: the local database plus configuration.
pub struct Pipeline {
    pub node_id: u64,
    pub params: SystemParams,
    pub db: LocalDatabase,
    predictor: Box<dyn Predictor>,
}

impl Pipeline {
    pub fn new(node_id: u64, params: SystemParams, predictor: Box<dyn Predictor>) -> Self {
        Self {
            node_id,
            params,
            db: LocalDatabase::new(),
            predictor,
        }
    }

    /// Runs the full per-frame flow over `detections` and returns the
    /// assignments plus the messages to send.
    pub fn process_frame(&mut self, detections: &[Detection]) -> FrameResult {
        let valid_indices: Vec<usize> = detections
            .iter()
            .enumerate()
            .filter(|(_, d)| {
                d.valid_keypoint_count(self.params.theta_conf) >= self.params.theta_key
            })
            .map(|(i, _)| i)
            .collect();
        let valid: Vec<Detection> = valid_indices
            .iter()
            .map(|&i| detections[i].clone())
            .collect();

        let table = gather_candidates(&valid, &self.db, &self.params);
        let (reid, created) = resolve_matches(&table, &mut self.db, valid.len());

        let mut result = FrameResult::default();
        let mut updates = Vec::new();
        let mut queries = Vec::new();
        let mut seen = BTreeSet::new();

        for (&valid_idx, &local_id) in &reid {
            let d = &valid[valid_idx];
            let entry = self
                .db
                .get_mut(local_id)
                .expect("candidate rows reference live entries");
            if update_entry(entry, d, &self.params) {
                updates.push(Message::UpdateFeature {
                    node_id: self.node_id,
                    object_id: local_id,
                    feature: d.feature.clone(),
                });
            }
            result
                .assignments
                .insert(valid_indices[valid_idx], local_id);
            seen.insert(local_id);
        }
        for (&valid_idx, &local_id) in &created {
            let d = &valid[valid_idx];
            self.db
                .insert(DatabaseEntry::new(local_id, d, &self.params));
            queries.push(Message::Query {
                node_id: self.node_id,
                temp_id: local_id,
                feature: d.feature.clone(),
            });
            result
                .assignments
                .insert(valid_indices[valid_idx], local_id);
            result.new_ids.insert(local_id);
            seen.insert(local_id);
        }

        // Regenerate the full prediction horizon for every entry observed
        // this frame; entries without a complete history keep what they had.
        let seen_ids: Vec<u64> = seen.iter().copied().collect();
        for local_id in seen_ids {
            let entry = self.db.get_mut(local_id).expect("seen entries exist");
            if let Some(history) = entry.keypoint_history(self.params.history_len) {
                if let Ok(set) = self.predictor.predict(&history, &self.params) {
                    entry.predictions = set.boxes;
                }
            }
        }

        let removals = age_and_evict(&mut self.db, &seen);
        result.outbound.extend(updates);
        result.outbound.extend(queries);
        for id in removals {
            result.outbound.push(Message::Release {
                node_id: self.node_id,
                object_id: id,
            });
        }
        result
    }

    /// Applies a server match reply; returns false when the entry is already
    /// gone (a stale reply).
    pub fn handle_reply(&mut self, temp_id: u64, global_id: u64) -> bool {
        match self.db.get_mut(temp_id) {
            Some(entry) => {
                entry.global_id = Some(global_id);
                true
            }
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Keypoint;
    use crate::predictor::ConstantVelocityPredictor;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    fn kp(x: f64, y: f64, c: f64) -> Keypoint {
        Keypoint::new(x, y, c, 0).unwrap()
    }

    fn fv(values: &[f32]) -> FeatureVector {
        FeatureVector(values.to_vec())
    }

    /// A detection with five confident keypoints spanning (x0, y0)..(x0+2, y0+2).
    fn det(x0: f64, y0: f64, feature: &[f32], frame: u64) -> Detection {
        let kps = vec![
            kp(x0, y0, 1.0),
            kp(x0 + 2.0, y0 + 2.0, 1.0),
            kp(x0 + 1.0, y0 + 1.0, 1.0),
            kp(x0 + 0.5, y0 + 1.5, 1.0),
            kp(x0 + 1.5, y0 + 0.5, 1.0),
        ];
        Detection::from_keypoints(kps, fv(feature), frame, 1, 0.5).unwrap()
    }

    fn det_with_conf(confs: &[f64]) -> Detection {
        let kps: Vec<Keypoint> = confs
            .iter()
            .enumerate()
            .map(|(i, &c)| kp(i as f64, i as f64, c))
            .collect();
        Detection::from_keypoints(kps, fv(&[0.0; 4]), 0, 1, 0.0).unwrap()
    }

    #[test]
    fn validation_boundary_cases() {
        let pass = det_with_conf(&[0.6, 0.6, 0.6, 0.6, 0.6]);
        let fail = det_with_conf(&[0.6, 0.6, 0.6, 0.6, 0.4]);
        let out = validate_detections(&[pass.clone(), fail], &params());
        assert_eq!(out, vec![pass]);
        assert!(validate_detections(&[], &params()).is_empty());
    }

    fn db_with_entry(x0: f64, feature: &[f32]) -> (LocalDatabase, u64) {
        let mut db = LocalDatabase::new();
        let id = db.fresh_local_id();
        db.insert(DatabaseEntry::new(id, &det(x0, 0.0, feature, 0), &params()));
        (db, id)
    }

    #[test]
    fn candidates_require_overlap_and_distance() {
        // Overlapping, distance 1.2 < theta_euc.
        let (db, id) = db_with_entry(0.0, &[0.0; 4]);
        let d = det(0.5, 0.0, &[1.2, 0.0, 0.0, 0.0], 1);
        let table = gather_candidates(&[d], &db, &params());
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].entry_id, id);
        assert!((table.rows[0].distance - 1.2).abs() < 1e-6);

        // Overlapping but distance 6.0 >= theta_euc: excluded.
        let d = det(0.5, 0.0, &[6.0, 0.0, 0.0, 0.0], 1);
        assert!(gather_candidates(&[d], &db, &params()).rows.is_empty());

        // Identical feature but spatially disjoint: excluded.
        let d = det(50.0, 50.0, &[0.0; 4], 1);
        assert!(gather_candidates(&[d], &db, &params()).rows.is_empty());
    }

    #[test]
    fn predictions_extend_the_spatial_gate() {
        let (mut db, id) = db_with_entry(0.0, &[0.0; 4]);
        db.get_mut(id).unwrap().predictions =
            vec![BoundingBox::new(49.0, 49.0, 53.0, 53.0).unwrap()];
        let d = det(50.0, 50.0, &[0.0; 4], 1);
        let table = gather_candidates(&[d], &db, &params());
        assert_eq!(table.rows.len(), 1);
    }

    fn table(rows: &[(usize, u64, f64)]) -> CandidateTable {
        let mut t = CandidateTable::default();
        for &(detection_index, entry_id, distance) in rows {
            t.push(CandidateRow {
                detection_index,
                entry_id,
                distance,
            });
        }
        t
    }

    #[test]
    fn greedy_resolution_prefers_lowest_distance() {
        let mut db = LocalDatabase::new();
        let (e1, e2) = (db.fresh_local_id(), db.fresh_local_id());
        let t = table(&[(0, e1, 0.5), (0, e2, 0.7), (1, e2, 0.6)]);
        let (reid, new) = resolve_matches(&t, &mut db, 2);
        assert_eq!(reid[&0], e1);
        assert_eq!(reid[&1], e2);
        assert!(new.is_empty());
    }

    #[test]
    fn consumed_entry_forces_fresh_id() {
        let mut db = LocalDatabase::new();
        let e1 = db.fresh_local_id();
        let t = table(&[(0, e1, 0.5), (1, e1, 0.6)]);
        let (reid, new) = resolve_matches(&t, &mut db, 2);
        assert_eq!(reid[&0], e1);
        assert_eq!(new[&1], 2);
    }

    #[test]
    fn empty_table_creates_sequential_ids() {
        let mut db = LocalDatabase::new();
        let (reid, new) = resolve_matches(&CandidateTable::default(), &mut db, 3);
        assert!(reid.is_empty());
        assert_eq!(new.values().copied().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(db.next_id(), 4);
    }

    #[test]
    fn ties_break_by_entry_then_detection() {
        let mut db = LocalDatabase::new();
        let (e1, e2) = (db.fresh_local_id(), db.fresh_local_id());
        // All distances tie; the lowest entry id (e1) wins first, and among
        // its two rows the lower detection index does. That consumes both
        // detection 0 and entry e1, leaving detection 1 without a row.
        let t = table(&[(0, e2, 0.5), (0, e1, 0.5), (1, e1, 0.5)]);
        let (reid, new) = resolve_matches(&t, &mut db, 2);
        assert_eq!(reid[&0], e1);
        assert!(!reid.contains_key(&1));
        assert_eq!(new[&1], 3);

        // Same distances but detection 1 also has a row on e2: after
        // (0, e1) is taken, (1, e2) survives.
        let mut db = LocalDatabase::new();
        let (e1, e2) = (db.fresh_local_id(), db.fresh_local_id());
        let t = table(&[(0, e2, 0.5), (0, e1, 0.5), (1, e1, 0.5), (1, e2, 0.5)]);
        let (reid, new) = resolve_matches(&t, &mut db, 2);
        assert_eq!(reid[&0], e1);
        assert_eq!(reid[&1], e2);
        assert!(new.is_empty());
    }

    fn entry_with(bbox_x0: f64, keypoint_count: usize, feature: &[f32]) -> DatabaseEntry {
        let mut entry = DatabaseEntry::new(1, &det(bbox_x0, 0.0, feature, 0), &params());
        entry.keypoint_count = keypoint_count;
        entry
    }

    /// `count` confident keypoints spanning exactly (x0, 0)..(x0+2, 2).
    fn det_with_kp_count(x0: f64, count: usize, feature: &[f32], frame: u64) -> Detection {
        let step = 2.0 / (count - 1) as f64;
        let kps: Vec<Keypoint> = (0..count)
            .map(|i| kp(x0 + step * i as f64, if i == 0 { 0.0 } else { 2.0 }, 1.0))
            .collect();
        Detection::from_keypoints(kps, fv(feature), frame, 1, 0.5).unwrap()
    }

    #[test]
    fn feature_updates_require_low_overlap_and_more_keypoints() {
        // Far-moved detection (IoU ~0.1) with more keypoints: replaced.
        let mut entry = entry_with(0.0, 6, &[0.0; 4]);
        let d = det_with_kp_count(1.6, 8, &[1.0, 0.0, 0.0, 0.0], 1);
        assert!(iou(&entry.bbox, &d.bbox) < 0.3);
        assert!(update_entry(&mut entry, &d, &params()));
        assert_eq!(entry.feature, fv(&[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(entry.keypoint_count, 8);
        assert_eq!(entry.bbox, d.bbox);

        // High overlap: feature kept, bbox still replaced.
        let mut entry = entry_with(0.0, 6, &[0.0; 4]);
        let d = det_with_kp_count(0.1, 8, &[1.0, 0.0, 0.0, 0.0], 1);
        assert!(iou(&entry.bbox, &d.bbox) >= 0.3);
        assert!(!update_entry(&mut entry, &d, &params()));
        assert_eq!(entry.feature, fv(&[0.0; 4]));
        assert_eq!(entry.bbox, d.bbox);

        // Low overlap but fewer keypoints: feature kept.
        let mut entry = entry_with(0.0, 6, &[0.0; 4]);
        let d = det_with_kp_count(1.6, 5, &[1.0, 0.0, 0.0, 0.0], 1);
        assert!(!update_entry(&mut entry, &d, &params()));
        assert_eq!(entry.feature, fv(&[0.0; 4]));
    }

    #[test]
    fn life_reset_on_update() {
        let mut entry = entry_with(0.0, 6, &[0.0; 4]);
        entry.life = 3;
        update_entry(&mut entry, &det(0.5, 0.0, &[0.0; 4], 1), &params());
        assert_eq!(entry.life, params().life_max);
    }

    #[test]
    fn aging_and_eviction() {
        let mut db = LocalDatabase::new();
        let id1 = db.fresh_local_id();
        let mut e1 = DatabaseEntry::new(id1, &det(0.0, 0.0, &[0.0; 4], 0), &params());
        e1.life = 1;
        db.insert(e1);
        let id2 = db.fresh_local_id();
        let mut e2 = DatabaseEntry::new(id2, &det(10.0, 0.0, &[0.0; 4], 0), &params());
        e2.life = 5;
        db.insert(e2);
        let id3 = db.fresh_local_id();
        db.insert(DatabaseEntry::new(
            id3,
            &det(20.0, 0.0, &[0.0; 4], 0),
            &params(),
        ));

        let seen: BTreeSet<u64> = [id3].into_iter().collect();
        let removals = age_and_evict(&mut db, &seen);
        assert_eq!(removals, vec![id1]);
        assert!(db.get(id1).is_none());
        assert_eq!(db.get(id2).unwrap().life, 4);
        assert_eq!(db.get(id3).unwrap().life, params().life_max);
    }

    fn pipeline() -> Pipeline {
        Pipeline::new(1, params(), Box::new(ConstantVelocityPredictor))
    }

    #[test]
    fn empty_frame_empty_db_is_a_no_op() {
        let mut p = pipeline();
        let result = p.process_frame(&[]);
        assert_eq!(result, FrameResult::default());
    }

    #[test]
    fn first_sighting_creates_id_and_query() {
        let mut p = pipeline();
        let result = p.process_frame(&[det(0.0, 0.0, &[1.0, 2.0, 3.0, 4.0], 0)]);
        assert_eq!(result.assignments[&0], 1);
        assert!(result.new_ids.contains(&1));
        assert_eq!(result.outbound.len(), 1);
        assert!(matches!(
            &result.outbound[0],
            Message::Query {
                node_id: 1,
                temp_id: 1,
                ..
            }
        ));
    }

    #[test]
    fn second_frame_reidentifies() {
        let mut p = pipeline();
        let feature = [1.0f32, 2.0, 3.0, 4.0];
        p.process_frame(&[det(0.0, 0.0, &feature, 0)]);
        let result = p.process_frame(&[det(0.5, 0.0, &feature, 1)]);
        assert_eq!(result.assignments[&0], 1);
        assert!(result.new_ids.is_empty());
        assert!(result.outbound.is_empty());
        assert_eq!(p.db.len(), 1);
    }

    #[test]
    fn invalid_detections_are_dropped_silently() {
        let mut p = pipeline();
        let weak = det_with_conf(&[0.6, 0.6, 0.6, 0.4, 0.4]);
        let strong = det(0.0, 0.0, &[0.0; 4], 0);
        let result = p.process_frame(&[weak, strong]);
        assert_eq!(result.assignments.len(), 1);
        assert_eq!(result.assignments[&1], 1);
    }

    #[test]
    fn eviction_emits_release() {
        let mut p = pipeline();
        p.params.life_max = 2;
        p.process_frame(&[det(0.0, 0.0, &[0.0; 4], 0)]);
        assert!(p.process_frame(&[]).outbound.is_empty());
        let result = p.process_frame(&[]);
        assert_eq!(
            result.outbound,
            vec![Message::Release {
                node_id: 1,
                object_id: 1
            }]
        );
        assert!(p.db.is_empty());
    }

    #[test]
    fn lives_stay_in_range_and_ids_monotone() {
        let mut p = pipeline();
        p.params.life_max = 4;
        let mut last_next = p.db.next_id();
        for frame in 0..20u64 {
            let mut dets = Vec::new();
            if frame % 3 == 0 {
                dets.push(det((frame % 5) as f64 * 0.3, 0.0, &[0.0; 4], frame));
            }
            if frame % 7 == 0 {
                dets.push(det(30.0, 0.0, &[9.0, 0.0, 0.0, 0.0], frame));
            }
            let result = p.process_frame(&dets);
            // injectivity of assignments
            let ids: BTreeSet<u64> = result.assignments.values().copied().collect();
            assert_eq!(ids.len(), result.assignments.len());
            assert!(p.db.next_id() >= last_next);
            last_next = p.db.next_id();
            for entry in p.db.entries() {
                assert!(entry.life >= 1 && entry.life <= p.params.life_max);
            }
        }
    }

    #[test]
    fn noiseless_continuous_track_never_switches_id() {
        let mut p = pipeline();
        let feature = [5.0f32, 1.0, 0.0, 2.0];
        let mut assigned = BTreeSet::new();
        for frame in 0..50u64 {
            let result = p.process_frame(&[det(frame as f64 * 0.4, 0.0, &feature, frame)]);
            assigned.insert(result.assignments[&0]);
        }
        assert_eq!(
            assigned.len(),
            1,
            "local id changed during a continuous track"
        );
    }

    #[test]
    fn stale_reply_reports_false() {
        let mut p = pipeline();
        p.process_frame(&[det(0.0, 0.0, &[0.0; 4], 0)]);
        assert!(p.handle_reply(1, 77));
        assert_eq!(p.db.get(1).unwrap().global_id, Some(77));
        assert!(!p.handle_reply(99, 5));
    }

    #[test]
    fn outbound_references_only_ids_touched_this_frame() {
        let mut p = pipeline();
        p.params.life_max = 2;
        for frame in 0..12u64 {
            let mut dets = Vec::new();
            // One walker present every frame, a visitor on a short duty
            // cycle so entries churn.
            dets.push(det(frame as f64 * 0.3, 0.0, &[0.0; 4], frame));
            if frame % 5 < 2 {
                dets.push(det(40.0, 0.0, &[9.0, 0.0, 0.0, 0.0], frame));
            }
            let before: BTreeSet<u64> =
                p.db.entries().map(|e| e.local_id).collect();
            let result = p.process_frame(&dets);
            let after: BTreeSet<u64> = p.db.entries().map(|e| e.local_id).collect();
            let evicted: BTreeSet<u64> = before.difference(&after).copied().collect();
            let assigned: BTreeSet<u64> = result.assignments.values().copied().collect();
            for msg in &result.outbound {
                match msg {
                    Message::Query { temp_id, .. } => {
                        assert!(result.new_ids.contains(temp_id))
                    }
                    Message::UpdateFeature { object_id, .. } => {
                        assert!(assigned.contains(object_id))
                    }
                    Message::Release { object_id, .. } => {
                        assert!(evicted.contains(object_id))
                    }
                    Message::MatchReply { .. } => panic!("nodes never send replies"),
                }
            }
        }
    }
}
