//! End-to-end tracking: optional pre-aggregation into tracklets, graph
//! construction, solver invocation, track extraction, post-filtering and
//! CLEAR-MOT evaluation.

use std::collections::BTreeMap;
use std::path::Path;

use crate::energy::{EnergyTrace, LabelMatrix};
use crate::error::{Error, Result};
use crate::graphs::{
    build_appearance_graph, build_exclusion_graph, build_spatiotemporal_windowed, combine,
    GraphParams,
};
use crate::incremental::{OnlineParams, OnlineState};
use crate::joint::{random_init, solve_joint, JointConfig};
use crate::model::{
    box_iou, euclidean, parse_detection_file, parse_track_file, strip_overlapping_features,
    Detection, DetectionFormat, Node, TrackBox, TrackRecord, TrackSet, Tracklet,
};
use crate::nodewise::{solve_nodewise, Batcher, NodewiseConfig, ParallelConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Joint,
    Nodewise,
}

impl SolverKind {
    pub fn parse_name(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(SolverKind::Joint),
            "nodewise" => Ok(SolverKind::Nodewise),
            other => Err(Error::Config(format!("unknown solver `{other}`"))),
        }
    }
}

/// Ground-truth/track matching rule: boxes match when the IoU exceeds the
/// threshold, or when the center distance stays below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchRule {
    Iou(f64),
    Dist(f64),
}

impl MatchRule {
    pub fn parse_name(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("match rule `{s}` is not kind:value")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("bad match threshold `{value}`")))?;
        match kind {
            "iou" => Ok(MatchRule::Iou(value)),
            "dist" => Ok(MatchRule::Dist(value)),
            other => Err(Error::Config(format!("unknown match rule `{other}`"))),
        }
    }
}

/// Low-level reliable tracker settings for tracklet pre-aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackletConfig {
    /// Mutual-unambiguity association distance between successive frames.
    pub max_dist: f64,
    /// Spatio-temporal window used when the nodes are tracklets.
    pub window: i64,
}

impl Default for TrackletConfig {
    fn default() -> Self {
        TrackletConfig {
            max_dist: 15.0,
            window: 100,
        }
    }
}

/// Everything a tracking run needs.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub format: DetectionFormat,
    pub graph: GraphParams,
    pub online: OnlineParams,
    pub solver: SolverKind,
    pub seed: u64,
    pub joint: JointConfig,
    pub nodewise: NodewiseConfig,
    /// Sweeps per online step.
    pub online_sweeps: usize,
    pub workers: usize,
    /// Pre-aggregate detections into tracklets before building the graphs.
    pub tracklets: Option<TrackletConfig>,
    /// Strip appearance features of same-frame boxes overlapping more than
    /// this IoU; None skips the pass.
    pub strip_overlap: Option<f64>,
    /// Drop tracks covering fewer frames than this.
    pub min_track_frames: usize,
    /// Drop tracks whose best member confidence is below this.
    pub min_track_conf: f64,
    pub match_rule: MatchRule,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            format: DetectionFormat::MotCsv,
            graph: GraphParams::default(),
            online: OnlineParams::default(),
            solver: SolverKind::Nodewise,
            seed: 7,
            joint: JointConfig::default(),
            nodewise: NodewiseConfig::default(),
            online_sweeps: 20,
            workers: 1,
            tracklets: None,
            strip_overlap: None,
            min_track_frames: 10,
            min_track_conf: 0.8,
            match_rule: MatchRule::Dist(30.0),
        }
    }
}

/// CLEAR-MOT summary. `motp` is the mean match distance under a distance
/// rule and the mean IoU under an IoU rule.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mota: f64,
    pub motp: f64,
    pub switches: usize,
    pub misses: usize,
    pub false_positives: usize,
    pub matches: usize,
    pub total_gt: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tracks: TrackSet,
    pub eval: Option<EvalReport>,
    pub trace: EnergyTrace,
    pub converged: bool,
}

/// Greedy frame-to-frame chaining: two detections in successive frames join
/// a tracklet when they are closer than `max_dist` and no other detection is
/// closer than `max_dist` to either of them.
pub fn build_tracklets(detections: &[Detection], max_dist: f64) -> Result<Vec<Tracklet>> {
    let mut by_frame: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, det) in detections.iter().enumerate() {
        by_frame.entry(det.frame).or_default().push(i);
    }
    let mut next_link: BTreeMap<usize, usize> = BTreeMap::new();
    let mut has_incoming = vec![false; detections.len()];
    for (&frame, current) in &by_frame {
        let Some(next) = by_frame.get(&(frame + 1)) else {
            continue;
        };
        for &a in current {
            'pair: for &b in next {
                if euclidean(&detections[a].center, &detections[b].center) >= max_dist {
                    continue;
                }
                for &x in current.iter().chain(next) {
                    if x == a || x == b {
                        continue;
                    }
                    if euclidean(&detections[x].center, &detections[a].center) < max_dist
                        || euclidean(&detections[x].center, &detections[b].center) < max_dist
                    {
                        continue 'pair;
                    }
                }
                next_link.insert(a, b);
                has_incoming[b] = true;
            }
        }
    }
    let mut tracklets = Vec::new();
    for start in 0..detections.len() {
        if has_incoming[start] {
            continue;
        }
        let mut chain = vec![detections[start].clone()];
        let mut cur = start;
        while let Some(&next) = next_link.get(&cur) {
            chain.push(detections[next].clone());
            cur = next;
        }
        tracklets.push(Tracklet::new(chain)?);
    }
    Ok(tracklets)
}

/// Argmax track extraction: node i joins the track named by the largest
/// entry of row i (ties to the lowest column). When two nodes of one track
/// cover the same frame, the higher-confidence box wins.
pub fn extract_tracks(y: &LabelMatrix, nodes: &[Node]) -> TrackSet {
    let mut records: BTreeMap<usize, TrackRecord> = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    for node in nodes {
        let label = y.argmax_row(node.id);
        provenance.insert(node.id, label);
        let record = records.entry(label).or_insert_with(|| TrackRecord {
            track_id: label,
            boxes: BTreeMap::new(),
        });
        for det in node.detections() {
            let candidate = TrackBox {
                center: det.center.clone(),
                extent: det.extent,
                confidence: det.confidence,
            };
            match record.boxes.get(&det.frame) {
                Some(existing) if existing.confidence >= det.confidence => {}
                _ => {
                    record.boxes.insert(det.frame, candidate);
                }
            }
        }
    }
    TrackSet {
        records: records.into_values().collect(),
        provenance,
    }
}

/// Drops tracks that cover fewer than `min_frames` frames or whose maximum
/// member confidence stays below `min_conf`.
pub fn postfilter(tracks: TrackSet, min_frames: usize, min_conf: f64) -> TrackSet {
    let kept: Vec<TrackRecord> = tracks
        .records
        .into_iter()
        .filter(|r| {
            let max_conf = r
                .boxes
                .values()
                .map(|b| b.confidence)
                .fold(f64::MIN, f64::max);
            r.boxes.len() >= min_frames && max_conf >= min_conf
        })
        .collect();
    let kept_ids: std::collections::BTreeSet<usize> = kept.iter().map(|r| r.track_id).collect();
    let provenance = tracks
        .provenance
        .into_iter()
        .filter(|(_, tid)| kept_ids.contains(tid))
        .collect();
    TrackSet {
        records: kept,
        provenance,
    }
}

fn match_score(rule: MatchRule, a: &TrackBox, b: &TrackBox) -> Option<f64> {
    match rule {
        MatchRule::Dist(thr) => {
            let d = euclidean(&a.center, &b.center);
            (d <= thr).then_some(d)
        }
        MatchRule::Iou(thr) => {
            let (ea, eb) = (a.extent?, b.extent?);
            let half = |c: &[f64], e: [f64; 2]| {
                (
                    [c[0] - e[0] / 2.0, c[1] - e[1] / 2.0],
                    [c[0] + e[0] / 2.0, c[1] + e[1] / 2.0],
                )
            };
            let (a0, a1) = half(&a.center, ea);
            let (b0, b1) = half(&b.center, eb);
            let iou = box_iou(a0, a1, b0, b1);
            (iou >= thr).then_some(iou)
        }
    }
}

/// CLEAR-MOT with greedy persistent matching: correspondences carry over
/// between frames while they stay valid under the rule; remaining pairs are
/// matched best-score-first. A switch is counted whenever a ground-truth
/// id's matched track id changes over the sequence.
pub fn evaluate_clear_mot(tracks: &TrackSet, gt: &TrackSet, rule: MatchRule) -> EvalReport {
    let mut frames = gt.frames();
    frames.extend(tracks.frames());
    frames.sort_unstable();
    frames.dedup();

    let mut prev_match: BTreeMap<usize, usize> = BTreeMap::new();
    let mut last_track: BTreeMap<usize, usize> = BTreeMap::new();
    let mut switches = 0usize;
    let mut misses = 0usize;
    let mut false_positives = 0usize;
    let mut matches = 0usize;
    let mut total_gt = 0usize;
    let mut score_sum = 0.0;

    for frame in frames {
        let gt_boxes = gt.frame_boxes(frame);
        let hyp_boxes = tracks.frame_boxes(frame);
        total_gt += gt_boxes.len();
        let mut matched_gt: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
        let mut used_hyp: std::collections::BTreeSet<usize> = Default::default();

        // keep still-valid correspondences from previous frames
        for (&gid, &tid) in &prev_match {
            let Some((_, gbox)) = gt_boxes.iter().find(|(g, _)| *g == gid) else {
                continue;
            };
            let Some((_, hbox)) = hyp_boxes.iter().find(|(t, _)| *t == tid) else {
                continue;
            };
            if used_hyp.contains(&tid) {
                continue;
            }
            if let Some(score) = match_score(rule, gbox, hbox) {
                matched_gt.insert(gid, (tid, score));
                used_hyp.insert(tid);
            }
        }

        // greedy best-score matching for the rest
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for (gid, gbox) in &gt_boxes {
            if matched_gt.contains_key(gid) {
                continue;
            }
            for (tid, hbox) in &hyp_boxes {
                if used_hyp.contains(tid) {
                    continue;
                }
                if let Some(score) = match_score(rule, gbox, hbox) {
                    candidates.push((score, *gid, *tid));
                }
            }
        }
        candidates.sort_by(|a, b| {
            let ord = match rule {
                MatchRule::Dist(_) => a.0.partial_cmp(&b.0).unwrap(),
                MatchRule::Iou(_) => b.0.partial_cmp(&a.0).unwrap(),
            };
            ord.then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        });
        for (score, gid, tid) in candidates {
            if matched_gt.contains_key(&gid) || used_hyp.contains(&tid) {
                continue;
            }
            matched_gt.insert(gid, (tid, score));
            used_hyp.insert(tid);
        }

        for (gid, (tid, score)) in &matched_gt {
            matches += 1;
            score_sum += score;
            if let Some(&prev_tid) = last_track.get(gid) {
                if prev_tid != *tid {
                    switches += 1;
                }
            }
            last_track.insert(*gid, *tid);
            prev_match.insert(*gid, *tid);
        }
        misses += gt_boxes.len() - matched_gt.len();
        false_positives += hyp_boxes.len() - used_hyp.len();
    }

    let mota = if total_gt == 0 {
        1.0
    } else {
        1.0 - (misses + false_positives + switches) as f64 / total_gt as f64
    };
    let motp = if matches == 0 {
        0.0
    } else {
        score_sum / matches as f64
    };
    EvalReport {
        mota,
        motp,
        switches,
        misses,
        false_positives,
        matches,
        total_gt,
    }
}

fn appearance_alphas(cfg: &GraphParams, feature_ids: &[u32]) -> Result<Vec<f64>> {
    let mut alphas = vec![*cfg.alphas.first().ok_or_else(|| {
        Error::Config("alphas must contain at least the spatio-temporal weight".into())
    })?];
    for &fid in feature_ids {
        let alpha = cfg.alphas.get(1 + fid as usize).copied().ok_or_else(|| {
            Error::Config(format!("no alpha configured for appearance feature {fid}"))
        })?;
        alphas.push(alpha);
    }
    Ok(alphas)
}

fn feature_ids_of(nodes: &[Node]) -> Vec<u32> {
    let mut ids: Vec<u32> = nodes.iter().flat_map(|n| n.feature_ids()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Offline tracking over a full detection set.
pub fn run_offline(cfg: &PipelineConfig, detections: Vec<Detection>) -> Result<RunOutput> {
    let detections = match cfg.strip_overlap {
        Some(thr) => strip_overlapping_features(&detections, thr),
        None => detections,
    };
    let (nodes, st_window) = match cfg.tracklets {
        Some(tc) => (
            Node::from_tracklets(build_tracklets(&detections, tc.max_dist)?),
            tc.window,
        ),
        None => (Node::from_detections(detections), cfg.graph.t_window),
    };
    if nodes.is_empty() {
        return Ok(RunOutput {
            tracks: TrackSet::default(),
            eval: None,
            trace: EnergyTrace::default(),
            converged: true,
        });
    }

    let feature_ids = feature_ids_of(&nodes);
    let alphas = appearance_alphas(&cfg.graph, &feature_ids)?;
    let inner = cfg.nodewise.inner;
    let st = build_spatiotemporal_windowed(&nodes, &cfg.graph, st_window, &inner)?;
    let mut positives = vec![st];
    for &fid in &feature_ids {
        positives.push(build_appearance_graph(&nodes, fid, &cfg.graph, &inner)?);
    }
    let excl = build_exclusion_graph(&nodes, &cfg.graph);
    let eff = combine(&positives, &excl, &alphas)?;

    let n = nodes.len();
    let init = random_init(n, n, cfg.seed);
    let outcome = match cfg.solver {
        SolverKind::Joint => {
            let jcfg = JointConfig {
                seed: cfg.seed,
                ..cfg.joint.clone()
            };
            solve_joint(&eff, &jcfg, Some(init))?
        }
        SolverKind::Nodewise => {
            let mut ncfg = cfg.nodewise.clone();
            ncfg.seed = cfg.seed;
            if cfg.workers > 1 {
                ncfg.parallel = Some(ParallelConfig {
                    workers: cfg.workers,
                    batcher: Batcher::GreedyMis,
                });
            }
            solve_nodewise(&eff, &ncfg, Some(init))?
        }
    };

    let tracks = postfilter(
        extract_tracks(&outcome.labels, &nodes),
        cfg.min_track_frames,
        cfg.min_track_conf,
    );
    Ok(RunOutput {
        tracks,
        eval: None,
        trace: outcome.trace,
        converged: outcome.converged,
    })
}

/// Online tracking: detections are replayed frame by frame through the
/// incremental state; extraction and filtering match the offline path.
pub fn run_online(
    cfg: &PipelineConfig,
    detections: Vec<Detection>,
    window_override: Option<i64>,
) -> Result<RunOutput> {
    let mut params = cfg.online.clone();
    if let Some(w) = window_override {
        params.observation_window = w;
    }
    let ncfg = NodewiseConfig {
        t_con: cfg.online_sweeps,
        seed: cfg.seed,
        ..cfg.nodewise.clone()
    };
    let mut state = OnlineState::new(cfg.graph.alphas.clone());
    run_online_steps(&mut state, &detections, &params, &ncfg)?;
    let tracks = match state.labels() {
        Some(y) => postfilter(
            extract_tracks(y, state.nodes()),
            cfg.min_track_frames,
            cfg.min_track_conf,
        ),
        None => TrackSet::default(),
    };
    Ok(RunOutput {
        tracks,
        eval: None,
        trace: state.trace().clone(),
        converged: true,
    })
}

/// Replays frame-grouped detections through `state`, starting after the
/// state's current frame.
pub fn run_online_steps(
    state: &mut OnlineState,
    detections: &[Detection],
    params: &OnlineParams,
    ncfg: &NodewiseConfig,
) -> Result<()> {
    let mut by_frame: BTreeMap<i64, Vec<Detection>> = BTreeMap::new();
    let mut max_frame = state.t();
    for det in detections {
        max_frame = max_frame.max(det.frame);
        by_frame.entry(det.frame).or_default().push(det.clone());
    }
    for frame in (state.t() + 1)..=max_frame {
        let dets = by_frame.remove(&frame).unwrap_or_default();
        state.online_step(&dets, params, ncfg)?;
    }
    Ok(())
}

/// File-level entry point mirroring the CLI: parse, run, evaluate.
pub fn run_offline_file(
    cfg: &PipelineConfig,
    det_path: &Path,
    gt_path: Option<&Path>,
) -> Result<RunOutput> {
    let detections = parse_detection_file(det_path, cfg.format)?;
    let mut out = run_offline(cfg, detections)?;
    if let Some(gt_path) = gt_path {
        let gt = parse_track_file(gt_path)?;
        out.eval = Some(evaluate_clear_mot(&out.tracks, &gt, cfg.match_rule));
    }
    Ok(out)
}

pub fn run_online_file(
    cfg: &PipelineConfig,
    det_path: &Path,
    gt_path: Option<&Path>,
    window_override: Option<i64>,
) -> Result<RunOutput> {
    let detections = parse_detection_file(det_path, cfg.format)?;
    let mut out = run_online(cfg, detections, window_override)?;
    if let Some(gt_path) = gt_path {
        let gt = parse_track_file(gt_path)?;
        out.eval = Some(evaluate_clear_mot(&out.tracks, &gt, cfg.match_rule));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(frame: i64, x: f64, y: f64) -> Detection {
        Detection::new(frame, vec![x, y])
    }

    #[test]
    fn tracklets_two_separated_targets_chain_fully() {
        let mut dets = Vec::new();
        for f in 0..6i64 {
            dets.push(det(f, 10.0 + 2.0 * f as f64, 10.0));
            dets.push(det(f, 100.0 - 2.0 * f as f64, 100.0));
        }
        let tracklets = build_tracklets(&dets, 15.0).unwrap();
        assert_eq!(tracklets.len(), 2);
        assert!(tracklets.iter().all(|t| t.detections.len() == 6));
    }

    #[test]
    fn tracklets_ambiguous_pair_stays_single() {
        // two detections in frame 1 both within range of the frame-0 one
        let dets = vec![det(0, 0.0, 0.0), det(1, 5.0, 0.0), det(1, -5.0, 0.0)];
        let tracklets = build_tracklets(&dets, 15.0).unwrap();
        assert_eq!(tracklets.len(), 3);
    }

    #[test]
    fn tracklets_single_frame_all_singletons() {
        let dets = vec![det(0, 0.0, 0.0), det(0, 50.0, 0.0)];
        let tracklets = build_tracklets(&dets, 15.0).unwrap();
        assert_eq!(tracklets.len(), 2);
    }

    #[test]
    fn extract_identity_labels_gives_singletons() {
        let dets = vec![det(0, 0.0, 0.0), det(1, 50.0, 0.0), det(2, 100.0, 0.0)];
        let nodes = Node::from_detections(dets);
        let y = LabelMatrix::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let tracks = extract_tracks(&y, &nodes);
        assert_eq!(tracks.records.len(), 3);
    }

    #[test]
    fn extract_merges_same_argmax() {
        let dets = vec![det(0, 0.0, 0.0), det(1, 1.0, 0.0)];
        let nodes = Node::from_detections(dets);
        let mut rows = vec![vec![0.0; 6]; 2];
        rows[0][5] = 0.9;
        rows[0][0] = 0.1;
        rows[1][5] = 0.8;
        rows[1][1] = 0.2;
        let y = LabelMatrix::new(rows).unwrap();
        let tracks = extract_tracks(&y, &nodes);
        assert_eq!(tracks.records.len(), 1);
        assert_eq!(tracks.records[0].track_id, 5);
        assert_eq!(tracks.records[0].boxes.len(), 2);
        assert_eq!(tracks.provenance[&0], 5);
        assert_eq!(tracks.provenance[&1], 5);
    }

    #[test]
    fn extract_tie_breaks_to_lowest_column() {
        let dets = vec![det(0, 0.0, 0.0)];
        let nodes = Node::from_detections(dets);
        let y = LabelMatrix::new(vec![vec![0.5, 0.5]]).unwrap();
        let tracks = extract_tracks(&y, &nodes);
        assert_eq!(tracks.records[0].track_id, 0);
    }

    #[test]
    fn extract_same_frame_collision_keeps_higher_confidence() {
        let mut a = det(0, 0.0, 0.0);
        a.confidence = 0.4;
        let mut b = det(0, 9.0, 0.0);
        b.confidence = 0.9;
        let nodes = Node::from_detections(vec![a, b]);
        let y = LabelMatrix::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let tracks = extract_tracks(&y, &nodes);
        assert_eq!(tracks.records.len(), 1);
        let b0 = &tracks.records[0].boxes[&0];
        assert_eq!(b0.center[0], 9.0);
    }

    #[test]
    fn extract_partition_invariant_to_column_permutation() {
        let dets: Vec<Detection> = (0..4).map(|i| det(i, i as f64 * 30.0, 0.0)).collect();
        let nodes = Node::from_detections(dets);
        let rows = vec![
            vec![0.6, 0.3, 0.1, 0.0],
            vec![0.6, 0.1, 0.3, 0.0],
            vec![0.1, 0.2, 0.7, 0.0],
            vec![0.0, 0.1, 0.8, 0.1],
        ];
        let y = LabelMatrix::new(rows.clone()).unwrap();
        let perm: Vec<usize> = vec![2, 0, 3, 1];
        let y_perm = LabelMatrix::new(
            rows.iter()
                .map(|r| perm.iter().map(|&c| r[c]).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let a = extract_tracks(&y, &nodes);
        let b = extract_tracks(&y_perm, &nodes);
        // same partition of nodes, relabeled
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(
                    a.provenance[&i] == a.provenance[&j],
                    b.provenance[&i] == b.provenance[&j]
                );
            }
        }
    }

    fn simple_track(id: usize, frames: std::ops::Range<i64>, x0: f64, conf: f64) -> TrackRecord {
        TrackRecord {
            track_id: id,
            boxes: frames
                .map(|f| {
                    (
                        f,
                        TrackBox {
                            center: vec![x0 + f as f64, 0.0],
                            extent: Some([6.0, 6.0]),
                            confidence: conf,
                        },
                    )
                })
                .collect(),
        }
    }

    #[test]
    fn postfilter_rules() {
        let nine = simple_track(0, 0..9, 0.0, 1.0);
        let low_conf = simple_track(1, 0..50, 100.0, 0.79);
        let good = simple_track(2, 0..50, 200.0, 0.95);
        let tracks = TrackSet {
            records: vec![nine, low_conf, good],
            provenance: BTreeMap::new(),
        };
        let filtered = postfilter(tracks, 10, 0.8);
        assert_eq!(filtered.records.len(), 1);
        assert_eq!(filtered.records[0].track_id, 2);
        // idempotent
        let twice = postfilter(filtered.clone(), 10, 0.8);
        assert_eq!(twice, filtered);
    }

    #[test]
    fn eval_perfect_tracks() {
        let tracks = TrackSet {
            records: vec![
                simple_track(0, 0..10, 0.0, 1.0),
                simple_track(1, 0..10, 100.0, 1.0),
            ],
            provenance: BTreeMap::new(),
        };
        let report = evaluate_clear_mot(&tracks, &tracks, MatchRule::Dist(30.0));
        assert_eq!(report.mota, 1.0);
        assert_eq!(report.switches, 0);
        assert_eq!(report.motp, 0.0);
        let report = evaluate_clear_mot(&tracks, &tracks, MatchRule::Iou(0.5));
        assert_eq!(report.mota, 1.0);
        assert!((report.motp - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eval_empty_tracks_all_misses() {
        let gt = TrackSet {
            records: vec![simple_track(0, 0..10, 0.0, 1.0)],
            provenance: BTreeMap::new(),
        };
        let report = evaluate_clear_mot(&TrackSet::default(), &gt, MatchRule::Dist(30.0));
        assert_eq!(report.mota, 0.0);
        assert_eq!(report.misses, 10);
        assert_eq!(report.total_gt, 10);
    }

    #[test]
    fn eval_mid_sequence_swap_counts_two_switches() {
        // ground truth: two targets on constant lanes, 10 frames
        let gt = TrackSet {
            records: vec![
                simple_track(0, 0..10, 0.0, 1.0),
                simple_track(1, 0..10, 100.0, 1.0),
            ],
            provenance: BTreeMap::new(),
        };
        // hypothesis: ids swap lanes at frame 5
        let mut ta = TrackRecord {
            track_id: 10,
            boxes: BTreeMap::new(),
        };
        let mut tb = TrackRecord {
            track_id: 11,
            boxes: BTreeMap::new(),
        };
        for f in 0..10i64 {
            let lane_a = TrackBox {
                center: vec![0.0 + f as f64, 0.0],
                extent: Some([6.0, 6.0]),
                confidence: 1.0,
            };
            let lane_b = TrackBox {
                center: vec![100.0 + f as f64, 0.0],
                extent: Some([6.0, 6.0]),
                confidence: 1.0,
            };
            if f < 5 {
                ta.boxes.insert(f, lane_a);
                tb.boxes.insert(f, lane_b);
            } else {
                ta.boxes.insert(f, lane_b);
                tb.boxes.insert(f, lane_a);
            }
        }
        let tracks = TrackSet {
            records: vec![ta, tb],
            provenance: BTreeMap::new(),
        };
        let report = evaluate_clear_mot(&tracks, &gt, MatchRule::Dist(30.0));
        assert_eq!(report.switches, 2);
        assert_eq!(report.misses, 0);
        assert_eq!(report.false_positives, 0);
        assert!((report.mota - (1.0 - 2.0 / 20.0)).abs() < 1e-12);
    }

    #[test]
    fn eval_self_consistency_on_random_track_sets() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let mut records = Vec::new();
            for id in 0..4usize {
                let start = rng.random_range(0..5i64);
                let len = rng.random_range(3..12i64);
                let x0 = id as f64 * 200.0;
                records.push(simple_track(id, start..start + len, x0, 1.0));
            }
            let tracks = TrackSet {
                records,
                provenance: BTreeMap::new(),
            };
            let report = evaluate_clear_mot(&tracks, &tracks, MatchRule::Dist(30.0));
            assert_eq!(report.mota, 1.0);
            assert_eq!(report.switches, 0);
        }
    }


    #[test]
    fn joint_and_nodewise_agree_through_the_pipeline() {
        let scenario = crate::synth::generate(crate::synth::Scenario::Parallel, 3);
        let run = |solver: SolverKind| {
            let cfg = PipelineConfig {
                graph: GraphParams {
                    alphas: vec![1.0, 0.5],
                    ..GraphParams::default()
                },
                seed: 3,
                solver,
                tracklets: Some(TrackletConfig::default()),
                ..PipelineConfig::default()
            };
            let out = run_offline(&cfg, scenario.detections.clone()).unwrap();
            evaluate_clear_mot(&out.tracks, &scenario.ground_truth, cfg.match_rule).mota
        };
        let nodewise = run(SolverKind::Nodewise);
        let joint = run(SolverKind::Joint);
        assert!(
            (nodewise - joint).abs() <= 0.01,
            "solver MOTA differs: nodewise {nodewise} vs joint {joint}"
        );
    }


    #[test]
    fn two_feature_cues_build_two_appearance_graphs() {
        // two targets, far apart, carrying two sporadic cues (ids 0 and 1)
        let mut dets = Vec::new();
        for f in 0..20i64 {
            for (k, y) in [(0usize, 40.0), (1usize, 160.0)] {
                let mut d = det(f, 15.0 + 4.0 * f as f64, y);
                if f % 4 == 0 {
                    d.features.insert(0, vec![k as f64, 1.0 - k as f64]);
                }
                if f % 5 == 0 {
                    d.features.insert(1, vec![2.0 * k as f64 + 1.0]);
                }
                dets.push(d);
            }
        }
        let cfg = PipelineConfig {
            graph: GraphParams {
                alphas: vec![1.0, 0.1, 0.5],
                ..GraphParams::default()
            },
            min_track_frames: 5,
            min_track_conf: 0.0,
            ..PipelineConfig::default()
        };
        let out = run_offline(&cfg, dets).unwrap();
        assert_eq!(out.tracks.records.len(), 2);
        for r in &out.tracks.records {
            assert_eq!(r.boxes.len(), 20);
        }

        // a cue without a configured alpha is a config error
        let short = PipelineConfig {
            graph: GraphParams {
                alphas: vec![1.0, 0.1],
                ..GraphParams::default()
            },
            ..cfg
        };
        let mut d = det(0, 0.0, 0.0);
        d.features.insert(1, vec![1.0]);
        assert!(run_offline(&short, vec![d, det(1, 4.0, 0.0)]).is_err());
    }


    #[test]
    fn file_level_runs_parse_solve_and_evaluate() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = crate::synth::generate(crate::synth::Scenario::Crossing, 5);
        let dets = dir.path().join("dets.csv");
        let gt = dir.path().join("gt.csv");
        crate::synth::write_detection_file(&scenario.detections, &dets).unwrap();
        crate::model::write_track_file(&scenario.ground_truth, &gt).unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.online.bounds = Some(scenario.bounds);
        let off = run_offline_file(&cfg, &dets, Some(&gt)).unwrap();
        assert_eq!(off.eval.as_ref().unwrap().mota, 1.0);
        let on = run_online_file(&cfg, &dets, Some(&gt), None).unwrap();
        assert_eq!(on.eval.as_ref().unwrap().mota, 1.0);
    }

    #[test]
    fn offline_empty_detections() {
        let out = run_offline(&PipelineConfig::default(), Vec::new()).unwrap();
        assert!(out.tracks.records.is_empty());
    }

    #[test]
    fn offline_two_lane_run_is_deterministic() {
        let mut dets = Vec::new();
        for f in 0..15i64 {
            dets.push(det(f, 10.0 + 3.0 * f as f64, 20.0));
            dets.push(det(f, 10.0 + 3.0 * f as f64, 120.0));
        }
        let cfg = PipelineConfig {
            min_track_frames: 5,
            min_track_conf: 0.0,
            ..PipelineConfig::default()
        };
        let a = run_offline(&cfg, dets.clone()).unwrap();
        let b = run_offline(&cfg, dets).unwrap();
        assert_eq!(
            crate::model::tracks_to_csv(&a.tracks),
            crate::model::tracks_to_csv(&b.tracks)
        );
        assert_eq!(a.tracks.records.len(), 2);
        for r in &a.tracks.records {
            assert_eq!(r.boxes.len(), 15);
        }
    }
}
