//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Expected values come from independent oracles implemented here (literal
//! greedy simulation, pairwise-rank counting, exhaustive bijection search)
//! or from hand-derived arithmetic frozen into the asserts.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reidsim_core::embedding::EmbeddingConfig;
use reidsim_core::geometry::{iou, BoundingBox, Keypoint};
use reidsim_core::metrics::{
    ae_mark, cmc, efficiency, id_measures, mean_average_precision, ReidSample, TrackSet,
};
use reidsim_core::pipeline::{resolve_matches, CandidateRow, CandidateTable, LocalDatabase};
use reidsim_core::predictor::{
    evaluate_avg_iou, ConstantVelocityPredictor, KeypointHistory, PredictionSet, Predictor,
};
use reidsim_core::protocol::{decode, encode, DecodeError, Message};
use reidsim_core::report::to_json;
use reidsim_core::scenario::{load_scenario, Observation, Scenario};
use reidsim_core::sim::{latency_independence, run_sim, RunReport, SimOptions};
use reidsim_core::{Detection, FeatureVector, SystemParams};

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

// -------------------------------------------------------------------------
// 1. Greedy match resolution equals a literal sort-and-remove simulation
// -------------------------------------------------------------------------

/// Literal reference: sort the whole table once by (distance, entry,
/// detection), walk it, take a row when neither side was removed yet, then
/// hand fresh IDs to leftover detections in index order.
fn greedy_oracle(
    table: &CandidateTable,
    db: &mut LocalDatabase,
    num_detections: usize,
) -> (BTreeMap<usize, u64>, BTreeMap<usize, u64>) {
    let mut sorted: Vec<CandidateRow> = table.rows.clone();
    sorted.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.entry_id.cmp(&b.entry_id))
            .then(a.detection_index.cmp(&b.detection_index))
    });
    let mut removed_detections = BTreeSet::new();
    let mut removed_entries = BTreeSet::new();
    let mut reid = BTreeMap::new();
    for row in sorted {
        if removed_detections.contains(&row.detection_index)
            || removed_entries.contains(&row.entry_id)
        {
            continue;
        }
        reid.insert(row.detection_index, row.entry_id);
        removed_detections.insert(row.detection_index);
        removed_entries.insert(row.entry_id);
    }
    let mut created = BTreeMap::new();
    for d in 0..num_detections {
        if !reid.contains_key(&d) {
            created.insert(d, db.fresh_local_id());
        }
    }
    (reid, created)
}

#[test]
fn acceptance_01_greedy_matching_oracle() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    for case in 0..1000 {
        let num_detections = rng.gen_range(0..=6);
        let num_entries = rng.gen_range(0..=6usize);
        let mut db_impl = LocalDatabase::new();
        let entry_ids: Vec<u64> = (0..num_entries).map(|_| db_impl.fresh_local_id()).collect();
        let mut db_oracle = db_impl.clone();

        let mut table = CandidateTable::default();
        for d in 0..num_detections {
            for &e in &entry_ids {
                if rng.gen_bool(0.55) {
                    // A small discrete value set forces plenty of ties.
                    let distance = if rng.gen_bool(0.7) {
                        rng.gen_range(0..6) as f64 * 0.5
                    } else {
                        rng.gen_range(0.0..4.0)
                    };
                    table.push(CandidateRow {
                        detection_index: d,
                        entry_id: e,
                        distance,
                    });
                }
            }
        }

        let got = resolve_matches(&table, &mut db_impl, num_detections);
        let want = greedy_oracle(&table, &mut db_oracle, num_detections);
        assert_eq!(got, want, "case {case}: table {:?}", table.rows);
        assert_eq!(db_impl.next_id(), db_oracle.next_id(), "case {case}");
    }
    assert!(
        started.elapsed().as_secs() < 5,
        "took {:?}",
        started.elapsed()
    );
    println!("acceptance 1 PASS: greedy matching equals literal oracle on 1000 random tables");
}

// -------------------------------------------------------------------------
// 2. Efficiency and mark reference values
// -------------------------------------------------------------------------

#[test]
fn acceptance_02_efficiency_and_mark_reference_values() {
    let edge = efficiency(5.7, 34.4).unwrap();
    assert!((edge - 0.1657).abs() <= 0.0005, "edge efficiency {edge}");
    let datacenter = efficiency(2.5, 200.0).unwrap();
    assert!(
        (datacenter - 0.0125).abs() <= 0.0005,
        "datacenter efficiency {datacenter}"
    );

    let mark_edge = ae_mark(74.77, 0.1657);
    assert!((mark_edge - 12.39).abs() <= 0.05, "edge mark {mark_edge}");
    let mark_dc = ae_mark(79.12, 0.01288);
    assert!((mark_dc - 1.02).abs() <= 0.05, "datacenter mark {mark_dc}");
    println!("acceptance 2 PASS: efficiency/mark reproduce reference values");
}

// -------------------------------------------------------------------------
// 3. Ranked metrics and identity measures against brute-force oracles
// -------------------------------------------------------------------------

/// Rank by pairwise comparison instead of sorting: rank(i) = 1 + number of
/// items strictly closer, or equally close with a lower index.
fn cmc_oracle(
    gallery: &[ReidSample],
    queries: &[ReidSample],
    r: usize,
    same_camera_excluded: bool,
) -> Option<f64> {
    let mut probes = 0u64;
    let mut hits = 0u64;
    for q in queries {
        let view: Vec<&ReidSample> = gallery
            .iter()
            .filter(|g| !(same_camera_excluded && g.identity == q.identity && g.camera == q.camera))
            .collect();
        let dist = |g: &ReidSample| g.feature.l2_distance(&q.feature).unwrap();
        if !view.iter().any(|g| g.identity == q.identity) {
            continue;
        }
        probes += 1;
        let mut best_rank = usize::MAX;
        for (i, g) in view.iter().enumerate() {
            if g.identity != q.identity {
                continue;
            }
            let di = dist(g);
            let mut rank = 1;
            for (j, other) in view.iter().enumerate() {
                if j == i {
                    continue;
                }
                let dj = dist(other);
                if dj < di || (dj == di && j < i) {
                    rank += 1;
                }
            }
            best_rank = best_rank.min(rank);
        }
        if best_rank <= r {
            hits += 1;
        }
    }
    (probes > 0).then(|| 100.0 * hits as f64 / probes as f64)
}

/// Direct evaluation over the explicit ranking: for every rank holding a
/// true positive, re-scan the prefix to count detected positives.
fn map_oracle(gallery: &[ReidSample], queries: &[ReidSample]) -> Option<f64> {
    let mut probes = 0u64;
    let mut total = 0.0;
    for q in queries {
        let positives = gallery.iter().filter(|g| g.identity == q.identity).count();
        if positives == 0 {
            continue;
        }
        probes += 1;
        let mut order: Vec<usize> = (0..gallery.len()).collect();
        order.sort_by(|&a, &b| {
            let da = gallery[a].feature.l2_distance(&q.feature).unwrap();
            let db = gallery[b].feature.l2_distance(&q.feature).unwrap();
            da.total_cmp(&db).then(a.cmp(&b))
        });
        let mut ap = 0.0;
        for j in 1..=order.len() {
            if gallery[order[j - 1]].identity == q.identity {
                let detected = order[..j]
                    .iter()
                    .filter(|&&i| gallery[i].identity == q.identity)
                    .count();
                ap += detected as f64 / j as f64;
            }
        }
        total += ap / positives as f64;
    }
    (probes > 0).then(|| 100.0 * total / probes as f64)
}

fn random_reid_set(rng: &mut ChaCha8Rng, len: usize, identities: u64) -> Vec<ReidSample> {
    (0..len)
        .map(|_| ReidSample {
            identity: rng.gen_range(0..identities),
            camera: rng.gen_range(0..3),
            feature: FeatureVector(vec![
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            ]),
        })
        .collect()
}

/// Exhaustive maximum matched-frame total over all injective partial
/// mappings from truth identities to hypothesis identities.
fn idtp_oracle(weights: &[Vec<u64>]) -> u64 {
    fn go(weights: &[Vec<u64>], row: usize, used: &mut Vec<bool>) -> u64 {
        if row == weights.len() {
            return 0;
        }
        let mut best = go(weights, row + 1, used); // leave row unmatched
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                best = best.max(weights[row][col] + go(weights, row + 1, used));
                used[col] = false;
            }
        }
        best
    }
    let cols = weights.first().map_or(0, Vec::len);
    go(weights, 0, &mut vec![false; cols])
}

#[test]
fn acceptance_03_metric_oracles() {
    let started = std::time::Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    for case in 0..200 {
        let gallery_len = rng.gen_range(1..=50);
        let gallery = random_reid_set(&mut rng, gallery_len, 10);
        let query_len = rng.gen_range(1..=10);
        let queries = random_reid_set(&mut rng, query_len, 10);
        for excluded in [false, true] {
            for r in [1, 5, gallery.len()] {
                let got = cmc(&gallery, &queries, r, excluded).ok();
                let want = cmc_oracle(&gallery, &queries, r, excluded);
                match (got, want) {
                    (Some(g), Some(w)) => {
                        assert!((g - w).abs() < 1e-9, "case {case} r {r}: {g} vs {w}")
                    }
                    (None, None) => {}
                    other => panic!("case {case} r {r}: probe-set disagreement {other:?}"),
                }
            }
        }
        let got = mean_average_precision(&gallery, &queries).ok();
        let want = map_oracle(&gallery, &queries);
        match (got, want) {
            (Some(g), Some(w)) => assert!((g - w).abs() < 1e-9, "case {case}: {g} vs {w}"),
            (None, None) => {}
            other => panic!("case {case}: probe-set disagreement {other:?}"),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x1D);
    for case in 0..100 {
        let truth_ids = rng.gen_range(1..=6u64);
        let hyp_ids = rng.gen_range(1..=6u64);
        let frames = rng.gen_range(1..=20u64);
        // Boxes sit on a coarse grid, so overlaps (and therefore ties in
        // the assignment) are common.
        let mut truth_raw: Vec<(u64, u64, BoundingBox)> = Vec::new();
        let mut truth = TrackSet::new();
        for id in 0..truth_ids {
            for f in 0..frames {
                if rng.gen_bool(0.7) {
                    let x = rng.gen_range(0..4) as f64 * 3.0;
                    let b = BoundingBox::new(x, 0.0, x + 4.0, 4.0).unwrap();
                    truth_raw.push((id, f, b));
                    truth.add_box(id, 1, f, b).unwrap();
                }
            }
        }
        let mut hyp_raw: Vec<(u64, u64, BoundingBox)> = Vec::new();
        let mut hyp = TrackSet::new();
        for id in 0..hyp_ids {
            for f in 0..frames {
                if rng.gen_bool(0.7) {
                    let x = rng.gen_range(0..4) as f64 * 3.0 + rng.gen_range(-1.0..1.0);
                    let b = BoundingBox::new(x, 0.0, x + 4.0, 4.0).unwrap();
                    hyp_raw.push((id, f, b));
                    hyp.add_box(id, 1, f, b).unwrap();
                }
            }
        }
        let mut weights = vec![vec![0u64; hyp_ids as usize]; truth_ids as usize];
        for &(t_id, t_f, t_box) in &truth_raw {
            for &(h_id, h_f, h_box) in &hyp_raw {
                if t_f == h_f && iou(&t_box, &h_box) >= 0.3 {
                    weights[t_id as usize][h_id as usize] += 1;
                }
            }
        }
        let want_idtp = idtp_oracle(&weights);
        let got = id_measures(&truth, &hyp, 0.3);
        assert_eq!(got.idtp, want_idtp, "case {case}");
        let expected_idf1 = if truth_raw.is_empty() && hyp_raw.is_empty() {
            0.0
        } else {
            200.0 * got.idtp as f64 / (2.0 * got.idtp as f64 + got.idfp as f64 + got.idfn as f64)
        };
        assert!((got.idf1 - expected_idf1).abs() < 1e-9, "case {case}");
    }

    assert!(
        started.elapsed().as_secs() < 30,
        "took {:?}",
        started.elapsed()
    );
    println!("acceptance 3 PASS: CMC/mAP/identity measures equal brute-force oracles");
}

// -------------------------------------------------------------------------
// 4. Hand-derived identity F1 case
// -------------------------------------------------------------------------

#[test]
fn acceptance_04_label_swap_idf1_is_exactly_sixty() {
    let bb = |x0: f64| BoundingBox::new(x0, 0.0, x0 + 2.0, 2.0).unwrap();
    let mut truth = TrackSet::new();
    let mut hyp = TrackSet::new();
    for f in 0..10u64 {
        truth.add_box(1, 1, f, bb(f as f64 * 0.1)).unwrap();
        truth.add_box(2, 1, f, bb(100.0 + f as f64 * 0.1)).unwrap();
        let (a, b) = if f < 6 { (11, 12) } else { (12, 11) };
        hyp.add_box(a, 1, f, bb(f as f64 * 0.1)).unwrap();
        hyp.add_box(b, 1, f, bb(100.0 + f as f64 * 0.1)).unwrap();
    }
    let m = id_measures(&truth, &hyp, 0.3);
    assert_eq!((m.idtp, m.idfp, m.idfn), (12, 8, 8));
    assert_eq!(m.idf1, 60.0);
    println!("acceptance 4 PASS: two-identity label swap scores IDF1 = 60.0 exactly");
}

// -------------------------------------------------------------------------
// 5. End-to-end tracking quality with the synthetic embedding oracle
// -------------------------------------------------------------------------

fn walker_observation(identity: u64, x: f64, y: f64) -> Observation {
    let kp = |dx: f64, dy: f64| Keypoint::new(x + dx, y + dy, 1.0, 0).unwrap();
    Observation {
        identity,
        keypoints: vec![
            kp(0.0, 0.0),
            kp(2.0, 2.0),
            kp(1.0, 1.0),
            kp(0.5, 1.5),
            kp(1.5, 0.5),
        ],
        visible: true,
    }
}

/// Ten identities walking continuously across one camera.
fn crowd_scenario(frames: u64, embedding: EmbeddingConfig) -> Scenario {
    let mut observations: BTreeMap<u64, BTreeMap<u64, Vec<Observation>>> = BTreeMap::new();
    let per_frame = observations.entry(1).or_default();
    for f in 0..frames {
        let mut list = Vec::new();
        for i in 0..10u64 {
            let x = 50.0 * i as f64 + 0.4 * f as f64;
            list.push(walker_observation(100 + i, x, 5.0));
        }
        per_frame.insert(f, list);
    }
    Scenario {
        cameras: vec![1],
        length: frames,
        observations,
        embedding,
        network: Default::default(),
    }
}

#[test]
fn acceptance_05_end_to_end_tracking_quality() {
    let started = std::time::Instant::now();

    let noiseless = crowd_scenario(
        200,
        EmbeddingConfig {
            dim: 8,
            alpha: 0.0,
            separation: 1.0,
            scale: 4.0,
            seed: 5,
        },
    );
    let out = run_sim(&noiseless, &SimOptions::default()).unwrap();
    assert_eq!(out.report.multi.idf1, 100.0, "noiseless IDF1");
    assert_eq!(out.report.id_switches, 0);
    assert_eq!(out.report.ownership_violations, 0);

    // Noise inside the alpha-ball, with centers separated beyond
    // 2*alpha + theta_euc so cross-identity pairs cannot even pass the
    // appearance gate.
    let params = SystemParams::default();
    let alpha = 0.3;
    let separation = 2.0 * alpha + params.theta_euc + 2.0;
    let noisy = crowd_scenario(
        200,
        EmbeddingConfig {
            dim: 8,
            alpha,
            separation,
            scale: 40.0,
            seed: 6,
        },
    );
    let out = run_sim(&noisy, &SimOptions::default()).unwrap();
    assert!(
        out.report.multi.idf1 >= 95.0,
        "noisy IDF1 {}",
        out.report.multi.idf1
    );
    assert_eq!(out.report.ownership_violations, 0);

    assert!(
        started.elapsed().as_secs() < 10,
        "took {:?}",
        started.elapsed()
    );
    println!("acceptance 5 PASS: zero-noise IDF1 = 100, alpha-ball noise IDF1 >= 95");
}

// -------------------------------------------------------------------------
// 6. Ownership semantics across a camera handoff
// -------------------------------------------------------------------------

#[test]
fn acceptance_06_ownership_gates_cross_camera_matches() {
    let scenario = load_scenario(&fixture("handoff.scn")).unwrap();

    // Short life: camera 1 releases before camera 2 queries.
    let mut released = SimOptions::default();
    released.params.life_max = 5;
    let out = run_sim(&scenario, &released).unwrap();
    assert_eq!(
        out.report.messages.match_reply, 1,
        "released handoff must answer the query"
    );
    assert_eq!(out.report.messages.release, 1);
    assert_eq!(out.report.global_identities_created, 1);
    assert_eq!(out.report.ownership_violations, 0);
    assert_eq!(out.report.multi.idf1, 100.0);

    // Long life: camera 1 still owns the identity; no reply may be sent.
    let mut owned = SimOptions::default();
    owned.params.life_max = 60;
    let out = run_sim(&scenario, &owned).unwrap();
    assert_eq!(
        out.report.messages.match_reply, 0,
        "owned identity must not be re-identified"
    );
    assert_eq!(out.report.messages.release, 0);
    assert_eq!(out.report.global_identities_created, 2);
    assert_eq!(out.report.ownership_violations, 0);

    println!("acceptance 6 PASS: match replies occur exactly when the prior owner released");
}

// -------------------------------------------------------------------------
// 7. Protocol: round trip, fuzzing, privacy audit
// -------------------------------------------------------------------------

fn random_message(rng: &mut ChaCha8Rng) -> Message {
    let feature = |rng: &mut ChaCha8Rng| {
        let dim = rng.gen_range(0..32);
        FeatureVector(
            (0..dim)
                .map(|_| loop {
                    let v = f32::from_bits(rng.gen::<u32>());
                    if v.is_finite() {
                        break v;
                    }
                })
                .collect(),
        )
    };
    match rng.gen_range(0..4) {
        0 => Message::Query {
            node_id: rng.gen(),
            temp_id: rng.gen(),
            feature: feature(rng),
        },
        1 => Message::UpdateFeature {
            node_id: rng.gen(),
            object_id: rng.gen(),
            feature: feature(rng),
        },
        2 => Message::Release {
            node_id: rng.gen(),
            object_id: rng.gen(),
        },
        _ => Message::MatchReply {
            temp_id: rng.gen(),
            global_id: rng.gen(),
        },
    }
}

#[test]
fn acceptance_07_protocol_roundtrip_fuzz_and_privacy_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x70);
    for _ in 0..100_000 {
        let msg = random_message(&mut rng);
        let decoded = decode(&encode(&msg)).expect("valid frame decodes");
        assert_eq!(decoded, msg);
    }

    for _ in 0..100_000 {
        let len = rng.gen_range(0..64);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        match decode(&bytes) {
            Ok(_)
            | Err(DecodeError::Truncated)
            | Err(DecodeError::UnknownTag(_))
            | Err(DecodeError::LengthMismatch)
            | Err(DecodeError::DimensionOverflow { .. }) => {}
        }
    }

    // Full-system audit: every byte that crossed a channel decodes to a
    // schema variant.
    let scenario = load_scenario(&fixture("handoff.scn")).unwrap();
    let mut options = SimOptions::default();
    options.params.life_max = 5;
    options.audit_privacy = true;
    let out = run_sim(&scenario, &options).unwrap();
    let frames = out.audit_frames.expect("audit requested");
    let sent = out.report.messages.query
        + out.report.messages.update_feature
        + out.report.messages.release
        + out.report.messages.match_reply;
    assert_eq!(frames.len() as u64, sent);
    assert_eq!(
        reidsim_core::sim::audit_decodes_cleanly(&frames).unwrap(),
        sent
    );

    println!("acceptance 7 PASS: 1e5 round trips, 1e5 fuzz inputs, clean privacy audit");
}

// -------------------------------------------------------------------------
// 8. Local assignments are independent of channel latency
// -------------------------------------------------------------------------

#[test]
fn acceptance_08_latency_independence() {
    let scenario = load_scenario(&fixture("handoff.scn")).unwrap();
    let mut options = SimOptions::default();
    options.params.life_max = 5;
    let check = latency_independence(&scenario, &options).unwrap();
    assert!(check.independent, "{check:?}");

    let crowd = crowd_scenario(
        60,
        EmbeddingConfig {
            dim: 8,
            alpha: 0.0,
            separation: 1.0,
            scale: 4.0,
            seed: 5,
        },
    );
    let check = latency_independence(&crowd, &SimOptions::default()).unwrap();
    assert!(check.independent, "{check:?}");
    println!("acceptance 8 PASS: latency 0 vs 1e6 yields identical per-frame assignments");
}

// -------------------------------------------------------------------------
// 9. Predictor quality on exactly-linear motion
// -------------------------------------------------------------------------

#[test]
fn acceptance_09_predictor_on_linear_tracks() {
    let params = SystemParams::default();
    let predictor = ConstantVelocityPredictor;

    let body = |x: f64, y: f64| -> Vec<Keypoint> {
        vec![
            Keypoint::new(x, y, 1.0, 0).unwrap(),
            Keypoint::new(x + 20.0, y + 40.0, 1.0, 1).unwrap(),
            Keypoint::new(x + 10.0, y + 20.0, 1.0, 2).unwrap(),
        ]
    };
    let pos = |t: f64| (3.0 + 1.5 * t, 7.0 + 0.7 * t);

    let mut truth: BTreeMap<u64, BoundingBox> = BTreeMap::new();
    for t in 0..40u64 {
        let (x, y) = pos(t as f64);
        truth.insert(t, BoundingBox::new(x, y, x + 20.0, y + 40.0).unwrap());
    }

    let mut full_horizon: Vec<(u64, PredictionSet)> = Vec::new();
    let mut first_step: Vec<(u64, PredictionSet)> = Vec::new();
    for t in 2..30u64 {
        let history = KeypointHistory::new(
            (t - 2..=t)
                .map(|f| {
                    let (x, y) = pos(f as f64);
                    (f, body(x, y))
                })
                .collect(),
        )
        .unwrap();
        let set = predictor.predict(&history, &params).unwrap();
        first_step.push((
            t,
            PredictionSet {
                boxes: vec![set.boxes[0]],
            },
        ));
        full_horizon.push((t, set));
    }

    let at_one = evaluate_avg_iou(&first_step, &truth).unwrap();
    assert!(at_one >= 0.99, "horizon-1 average IoU {at_one}");
    let across = evaluate_avg_iou(&full_horizon, &truth).unwrap();
    assert!(across >= 0.9, "full-horizon average IoU {across}");

    // Translation equivariance to 1e-9.
    for (dx, dy) in [(12.5, -3.25), (-400.0, 250.0), (0.015625, 1e6)] {
        let make = |ox: f64, oy: f64| {
            KeypointHistory::new(
                (0..3u64)
                    .map(|f| {
                        let (x, y) = pos(f as f64);
                        (f, body(x + ox, y + oy))
                    })
                    .collect(),
            )
            .unwrap()
        };
        let base = predictor.predict(&make(0.0, 0.0), &params).unwrap();
        let moved = predictor.predict(&make(dx, dy), &params).unwrap();
        for (b, m) in base.boxes.iter().zip(&moved.boxes) {
            assert!((m.x_min - (b.x_min + dx)).abs() < 1e-9);
            assert!((m.x_max - (b.x_max + dx)).abs() < 1e-9);
            assert!((m.y_min - (b.y_min + dy)).abs() < 1e-9);
            assert!((m.y_max - (b.y_max + dy)).abs() < 1e-9);
        }
    }
    println!("acceptance 9 PASS: linear-motion IoU >= 0.99 (h=1) and >= 0.9 (h=5), equivariant");
}

// -------------------------------------------------------------------------
// 10. Byte-identical reports for identical seeds
// -------------------------------------------------------------------------

#[test]
fn acceptance_10_deterministic_reports() {
    let mut goldens: Vec<(String, Scenario, SimOptions)> = Vec::new();

    let smoke = load_scenario(&fixture("smoke.scn")).unwrap();
    goldens.push(("smoke".into(), smoke, SimOptions::default()));

    let handoff = load_scenario(&fixture("handoff.scn")).unwrap();
    let mut released = SimOptions::default();
    released.params.life_max = 5;
    goldens.push(("handoff-released".into(), handoff.clone(), released));
    let mut owned = SimOptions::default();
    owned.params.life_max = 60;
    goldens.push(("handoff-owned".into(), handoff, owned));

    let noisy = crowd_scenario(
        100,
        EmbeddingConfig {
            dim: 8,
            alpha: 0.3,
            separation: 8.0,
            scale: 40.0,
            seed: 6,
        },
    );
    goldens.push(("noisy-crowd".into(), noisy, SimOptions::default()));

    for (name, scenario, options) in goldens {
        let first: RunReport = run_sim(&scenario, &options).unwrap().report;
        let second: RunReport = run_sim(&scenario, &options).unwrap().report;
        assert_eq!(to_json(&first), to_json(&second), "scenario {name}");
        assert_eq!(first.ownership_violations, 0, "scenario {name}");
    }
    println!("acceptance 10 PASS: identical seeds produce byte-identical JSON reports");
}

// -------------------------------------------------------------------------
// Supporting check: pipeline then protocol then server agree end to end on
// message/ID bookkeeping for a minimal trace.
// -------------------------------------------------------------------------

#[test]
fn pipeline_trace_smoke() {
    let scenario = load_scenario(&fixture("smoke.scn")).unwrap();
    let out = run_sim(&scenario, &SimOptions::default()).unwrap();
    assert_eq!(out.report.messages.query, 3);
    assert_eq!(out.report.truth_identities, 3);
    assert_eq!(out.report.global_identities_created, 3);
    // Three identities tracked continuously: one query each, nothing else.
    assert_eq!(out.report.messages.update_feature, 0);
    let _ = Detection::from_keypoints(
        vec![Keypoint::new(0.0, 0.0, 1.0, 0).unwrap()],
        FeatureVector(vec![0.0; 8]),
        0,
        1,
        0.5,
    )
    .unwrap();
}
