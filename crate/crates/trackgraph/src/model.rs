//! Core domain types and file I/O: detections, tracklets, graph nodes,
//! track records and the CSV formats they travel in.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One timestamped, located observation. Appearance features are sporadic:
/// a missing map entry means the cue was not measured for this detection.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame: i64,
    pub center: Vec<f64>,
    pub extent: Option<[f64; 2]>,
    pub confidence: f64,
    pub features: BTreeMap<u32, Vec<f64>>,
}

impl Detection {
    pub fn new(frame: i64, center: Vec<f64>) -> Self {
        Detection {
            frame,
            center,
            extent: None,
            confidence: 1.0,
            features: BTreeMap::new(),
        }
    }

    pub fn feature(&self, id: u32) -> Option<&[f64]> {
        self.features.get(&id).map(Vec::as_slice)
    }

    /// Axis-aligned box corners, if an extent is known.
    fn corners(&self) -> Option<([f64; 2], [f64; 2])> {
        let e = self.extent?;
        let (cx, cy) = (self.center[0], self.center[1]);
        Some((
            [cx - e[0] / 2.0, cy - e[1] / 2.0],
            [cx + e[0] / 2.0, cy + e[1] / 2.0],
        ))
    }
}

/// Intersection-over-union of two detections' boxes; 0 when either extent is
/// missing or degenerate.
pub fn iou(a: &Detection, b: &Detection) -> f64 {
    let (Some((a0, a1)), Some((b0, b1))) = (a.corners(), b.corners()) else {
        return 0.0;
    };
    box_iou(a0, a1, b0, b1)
}

pub(crate) fn box_iou(a0: [f64; 2], a1: [f64; 2], b0: [f64; 2], b1: [f64; 2]) -> f64 {
    let iw = (a1[0].min(b1[0]) - a0[0].max(b0[0])).max(0.0);
    let ih = (a1[1].min(b1[1]) - a0[1].max(b0[1])).max(0.0);
    let inter = iw * ih;
    let area_a = (a1[0] - a0[0]) * (a1[1] - a0[1]);
    let area_b = (b1[0] - b0[0]) * (b1[1] - b0[1]);
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// A short chain of detections on consecutive frames, treated as one node.
#[derive(Debug, Clone)]
pub struct Tracklet {
    pub detections: Vec<Detection>,
    pub aggregate_features: BTreeMap<u32, Vec<f64>>,
}

impl Tracklet {
    /// Builds a tracklet and its aggregate features (arithmetic mean of the
    /// member features that are present, per cue).
    pub fn new(detections: Vec<Detection>) -> Result<Self> {
        if detections.is_empty() {
            return Err(Error::InvalidInput("tracklet must be nonempty".into()));
        }
        for pair in detections.windows(2) {
            if pair[1].frame != pair[0].frame + 1 {
                return Err(Error::InvalidInput(format!(
                    "tracklet frames must be consecutive, got {} then {}",
                    pair[0].frame, pair[1].frame
                )));
            }
        }
        let mut sums: BTreeMap<u32, (Vec<f64>, usize)> = BTreeMap::new();
        for det in &detections {
            for (&id, vec) in &det.features {
                let entry = sums.entry(id).or_insert_with(|| (vec![0.0; vec.len()], 0));
                if entry.0.len() != vec.len() {
                    return Err(Error::FeatureDimension {
                        feature_id: id,
                        expected: entry.0.len(),
                        got: vec.len(),
                    });
                }
                for (s, v) in entry.0.iter_mut().zip(vec) {
                    *s += v;
                }
                entry.1 += 1;
            }
        }
        let aggregate_features = sums
            .into_iter()
            .map(|(id, (sum, count))| {
                (id, sum.into_iter().map(|s| s / count as f64).collect())
            })
            .collect();
        Ok(Tracklet {
            detections,
            aggregate_features,
        })
    }

    pub fn first(&self) -> &Detection {
        &self.detections[0]
    }

    pub fn last(&self) -> &Detection {
        self.detections.last().unwrap()
    }
}

#[derive(Debug, Clone)]
pub enum NodePayload {
    Detection(Detection),
    Tracklet(Tracklet),
}

/// A graph vertex: a detection or a tracklet, with a dense integer id.
#[derive(Debug, Clone)]
pub struct Node {
    pub id: usize,
    pub payload: NodePayload,
    pub span: (i64, i64),
}

impl Node {
    /// Ids assigned in (frame, input order); input must be frame-sorted.
    pub fn from_detections(detections: Vec<Detection>) -> Vec<Node> {
        detections
            .into_iter()
            .enumerate()
            .map(|(id, det)| Node {
                id,
                span: (det.frame, det.frame),
                payload: NodePayload::Detection(det),
            })
            .collect()
    }

    pub fn from_tracklets(tracklets: Vec<Tracklet>) -> Vec<Node> {
        let mut nodes: Vec<Node> = tracklets
            .into_iter()
            .map(|t| Node {
                id: 0,
                span: (t.first().frame, t.last().frame),
                payload: NodePayload::Tracklet(t),
            })
            .collect();
        nodes.sort_by_key(|n| n.span);
        for (id, node) in nodes.iter_mut().enumerate() {
            node.id = id;
        }
        nodes
    }

    /// Representative time: span midpoint.
    pub fn time(&self) -> f64 {
        (self.span.0 + self.span.1) as f64 / 2.0
    }

    /// Representative position: the detection center, or the mean center of
    /// the tracklet members.
    pub fn center(&self) -> Vec<f64> {
        match &self.payload {
            NodePayload::Detection(d) => d.center.clone(),
            NodePayload::Tracklet(t) => {
                let dim = t.first().center.len();
                let mut mean = vec![0.0; dim];
                for d in &t.detections {
                    for (m, c) in mean.iter_mut().zip(&d.center) {
                        *m += c;
                    }
                }
                let n = t.detections.len() as f64;
                mean.iter_mut().for_each(|m| *m /= n);
                mean
            }
        }
    }

    pub fn feature(&self, id: u32) -> Option<&[f64]> {
        match &self.payload {
            NodePayload::Detection(d) => d.feature(id),
            NodePayload::Tracklet(t) => t.aggregate_features.get(&id).map(Vec::as_slice),
        }
    }

    pub fn feature_ids(&self) -> Vec<u32> {
        match &self.payload {
            NodePayload::Detection(d) => d.features.keys().copied().collect(),
            NodePayload::Tracklet(t) => t.aggregate_features.keys().copied().collect(),
        }
    }

    /// True when the two nodes coexist at some frame.
    pub fn overlaps(&self, other: &Node) -> bool {
        self.span.0 <= other.span.1 && other.span.0 <= self.span.1
    }

    /// Temporal gap between the spans; 0 iff the spans touch or overlap.
    pub fn time_gap(&self, other: &Node) -> i64 {
        if self.overlaps(other) {
            0
        } else if self.span.1 < other.span.0 {
            other.span.0 - self.span.1
        } else {
            self.span.0 - other.span.1
        }
    }

    /// Spatial distance between the facing endpoints of the two nodes. For
    /// single detections this is the plain center distance.
    pub fn facing_distance(&self, other: &Node) -> f64 {
        let (a, b) = match (&self.payload, &other.payload) {
            (NodePayload::Detection(a), NodePayload::Detection(b)) => (&a.center, &b.center),
            _ => {
                if self.span.1 < other.span.0 {
                    (&self.last_detection().center, &other.first_detection().center)
                } else {
                    (&self.first_detection().center, &other.last_detection().center)
                }
            }
        };
        euclidean(a, b)
    }

    pub fn first_detection(&self) -> &Detection {
        match &self.payload {
            NodePayload::Detection(d) => d,
            NodePayload::Tracklet(t) => t.first(),
        }
    }

    pub fn last_detection(&self) -> &Detection {
        match &self.payload {
            NodePayload::Detection(d) => d,
            NodePayload::Tracklet(t) => t.last(),
        }
    }

    pub fn detections(&self) -> &[Detection] {
        match &self.payload {
            NodePayload::Detection(d) => std::slice::from_ref(d),
            NodePayload::Tracklet(t) => &t.detections,
        }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionFormat {
    /// `frame,id,bb_left,bb_top,bb_width,bb_height,conf[,f1,...,fk]`;
    /// the center is the box midpoint.
    MotCsv,
    /// Same column layout, but the third and fourth columns are already the
    /// center coordinates (ground-plane units); zero width/height means no
    /// extent.
    ApidisCsv,
}

impl DetectionFormat {
    pub fn parse_name(s: &str) -> Result<Self> {
        match s {
            "mot_csv" => Ok(DetectionFormat::MotCsv),
            "apidis_csv" => Ok(DetectionFormat::ApidisCsv),
            other => Err(Error::Config(format!("unknown detection format `{other}`"))),
        }
    }
}

pub fn parse_detection_file(path: &Path, format: DetectionFormat) -> Result<Vec<Detection>> {
    let text = std::fs::read_to_string(path)?;
    parse_detections(&text, format, &path.display().to_string())
}

/// Parses detection CSV text. Output is frame-sorted; detections within one
/// frame keep their input order.
pub fn parse_detections(
    text: &str,
    format: DetectionFormat,
    path: &str,
) -> Result<Vec<Detection>> {
    let mut detections = Vec::new();
    let mut feature_dim: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 7 {
            return Err(Error::Parse {
                path: path.into(),
                line: line_no,
                msg: format!("expected at least 7 fields, got {}", fields.len()),
            });
        }
        let num = |i: usize, name: &str| -> Result<f64> {
            fields[i].trim().parse::<f64>().map_err(|_| Error::Parse {
                path: path.into(),
                line: line_no,
                msg: format!("bad {name} `{}`", fields[i]),
            })
        };
        let frame = num(0, "frame")? as i64;
        if frame < 0 {
            return Err(Error::Parse {
                path: path.into(),
                line: line_no,
                msg: "negative frame".into(),
            });
        }
        // field 1 is the (ignored) input id
        let a = num(2, "x")?;
        let b = num(3, "y")?;
        let w = num(4, "width")?;
        let h = num(5, "height")?;
        let confidence = num(6, "confidence")?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Parse {
                path: path.into(),
                line: line_no,
                msg: format!("confidence {confidence} outside [0,1]"),
            });
        }
        let (center, extent) = match format {
            DetectionFormat::MotCsv => (vec![a + w / 2.0, b + h / 2.0], Some([w, h])),
            DetectionFormat::ApidisCsv => {
                let extent = if w > 0.0 || h > 0.0 { Some([w, h]) } else { None };
                (vec![a, b], extent)
            }
        };
        let mut features = BTreeMap::new();
        let tail = &fields[7..];
        if !tail.is_empty() {
            let all_empty = tail.iter().all(|f| f.trim().is_empty());
            if !all_empty {
                let mut vec = Vec::with_capacity(tail.len());
                for f in tail {
                    if f.trim().is_empty() {
                        return Err(Error::Parse {
                            path: path.into(),
                            line: line_no,
                            msg: "partially empty feature vector".into(),
                        });
                    }
                    vec.push(f.trim().parse::<f64>().map_err(|_| Error::Parse {
                        path: path.into(),
                        line: line_no,
                        msg: format!("bad feature value `{f}`"),
                    })?);
                }
                match feature_dim {
                    None => feature_dim = Some(vec.len()),
                    Some(d) if d != vec.len() => {
                        return Err(Error::FeatureDimension {
                            feature_id: 0,
                            expected: d,
                            got: vec.len(),
                        })
                    }
                    _ => {}
                }
                features.insert(0, vec);
            }
        }
        detections.push(Detection {
            frame,
            center,
            extent,
            confidence,
            features,
        });
    }
    detections.sort_by_key(|d| d.frame);
    Ok(detections)
}

/// One output trajectory: at most one box per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecord {
    pub track_id: usize,
    pub boxes: BTreeMap<i64, TrackBox>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackBox {
    pub center: Vec<f64>,
    pub extent: Option<[f64; 2]>,
    pub confidence: f64,
}

/// Final identity-labeled trajectories plus the node-to-track provenance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackSet {
    pub records: Vec<TrackRecord>,
    pub provenance: BTreeMap<usize, usize>,
}

impl TrackSet {
    pub fn record(&self, track_id: usize) -> Option<&TrackRecord> {
        self.records.iter().find(|r| r.track_id == track_id)
    }

    /// Per-frame view: (track_id, box) pairs for one frame.
    pub fn frame_boxes(&self, frame: i64) -> Vec<(usize, &TrackBox)> {
        let mut out: Vec<(usize, &TrackBox)> = self
            .records
            .iter()
            .filter_map(|r| r.boxes.get(&frame).map(|b| (r.track_id, b)))
            .collect();
        out.sort_by_key(|(id, _)| *id);
        out
    }

    pub fn frames(&self) -> Vec<i64> {
        let mut frames: Vec<i64> = self
            .records
            .iter()
            .flat_map(|r| r.boxes.keys().copied())
            .collect();
        frames.sort_unstable();
        frames.dedup();
        frames
    }

    pub fn total_boxes(&self) -> usize {
        self.records.iter().map(|r| r.boxes.len()).sum()
    }
}

/// Serializes a track set as `frame,track_id,x,y,w,h` lines sorted by frame
/// then track id. `x,y` is the box center; a missing extent is written as 0,0.
pub fn tracks_to_csv(tracks: &TrackSet) -> String {
    let mut lines: Vec<(i64, usize, String)> = Vec::new();
    for record in &tracks.records {
        for (&frame, b) in &record.boxes {
            let e = b.extent.unwrap_or([0.0, 0.0]);
            let mut line = String::new();
            write!(
                line,
                "{},{},{},{},{},{}",
                frame, record.track_id, b.center[0], b.center[1], e[0], e[1]
            )
            .unwrap();
            lines.push((frame, record.track_id, line));
        }
    }
    lines.sort_by_key(|(frame, id, _)| (*frame, *id));
    let mut out = String::new();
    for (_, _, line) in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_track_file(tracks: &TrackSet, path: &Path) -> Result<()> {
    std::fs::write(path, tracks_to_csv(tracks))?;
    Ok(())
}

pub fn parse_track_file(path: &Path) -> Result<TrackSet> {
    let text = std::fs::read_to_string(path)?;
    parse_tracks(&text, &path.display().to_string())
}

/// Parses the track CSV format. Confidence is not stored in the file and
/// comes back as 1.0.
pub fn parse_tracks(text: &str, path: &str) -> Result<TrackSet> {
    let mut records: BTreeMap<usize, TrackRecord> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                path: path.into(),
                line: line_no,
                msg: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].trim().parse::<f64>().map_err(|_| Error::Parse {
                path: path.into(),
                line: line_no,
                msg: format!("bad value `{}`", fields[i]),
            })
        };
        let frame = num(0)? as i64;
        let track_id = num(1)? as usize;
        let (x, y, w, h) = (num(2)?, num(3)?, num(4)?, num(5)?);
        let extent = if w > 0.0 || h > 0.0 { Some([w, h]) } else { None };
        let record = records.entry(track_id).or_insert_with(|| TrackRecord {
            track_id,
            boxes: BTreeMap::new(),
        });
        if record.boxes.contains_key(&frame) {
            return Err(Error::Parse {
                path: path.into(),
                line: line_no,
                msg: format!("duplicate box for track {track_id} at frame {frame}"),
            });
        }
        record.boxes.insert(
            frame,
            TrackBox {
                center: vec![x, y],
                extent,
                confidence: 1.0,
            },
        );
    }
    Ok(TrackSet {
        records: records.into_values().collect(),
        provenance: BTreeMap::new(),
    })
}

/// Removes the appearance features of every detection whose box overlaps
/// another box in the same frame with IoU above `max_overlap`. Positions are
/// untouched.
pub fn strip_overlapping_features(detections: &[Detection], max_overlap: f64) -> Vec<Detection> {
    let mut out: Vec<Detection> = detections.to_vec();
    let mut by_frame: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, det) in detections.iter().enumerate() {
        by_frame.entry(det.frame).or_default().push(i);
    }
    for indices in by_frame.values() {
        for (k, &i) in indices.iter().enumerate() {
            for &j in &indices[k + 1..] {
                if iou(&detections[i], &detections[j]) > max_overlap {
                    out[i].features.clear();
                    out[j].features.clear();
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_mot_line_maps_center_to_box_midpoint() {
        let dets = parse_detections("1,-1,10,20,30,60,0.9\n", DetectionFormat::MotCsv, "t").unwrap();
        assert_eq!(dets.len(), 1);
        let d = &dets[0];
        assert_eq!(d.frame, 1);
        assert_eq!(d.center, vec![25.0, 50.0]);
        assert_eq!(d.extent, Some([30.0, 60.0]));
        assert!((d.confidence - 0.9).abs() < 1e-12);
        assert!(d.features.is_empty());
    }

    #[test]
    fn parse_empty_file_yields_empty_list() {
        let dets = parse_detections("", DetectionFormat::MotCsv, "t").unwrap();
        assert!(dets.is_empty());
    }

    #[test]
    fn inconsistent_feature_dimensions_error() {
        let text = "0,-1,0,0,2,2,1.0,1,2,3\n1,-1,0,0,2,2,1.0,1,2\n";
        let err = parse_detections(text, DetectionFormat::MotCsv, "t").unwrap_err();
        assert!(matches!(err, Error::FeatureDimension { .. }));
    }

    #[test]
    fn empty_feature_fields_mean_absent() {
        let text = "0,-1,0,0,2,2,1.0,,,\n1,-1,0,0,2,2,1.0,1,2,3\n";
        let dets = parse_detections(text, DetectionFormat::MotCsv, "t").unwrap();
        assert!(dets[0].features.is_empty());
        assert_eq!(dets[1].feature(0), Some(&[1.0, 2.0, 3.0][..]));
    }

    #[test]
    fn malformed_line_error_carries_line_number() {
        let err = parse_detections("0,-1,0,0,2,2,1.0\nnot,a,line\n", DetectionFormat::MotCsv, "t")
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn detections_within_frame_keep_input_order() {
        let text = "2,-1,8,0,2,2,1.0\n1,-1,4,0,2,2,1.0\n1,-1,6,0,2,2,1.0\n";
        let dets = parse_detections(text, DetectionFormat::MotCsv, "t").unwrap();
        assert_eq!(dets[0].center[0], 5.0);
        assert_eq!(dets[1].center[0], 7.0);
        assert_eq!(dets[2].center[0], 9.0);
    }

    #[test]
    fn apidis_center_is_literal() {
        let dets = parse_detections("0,-1,120,340,0,0,1.0\n", DetectionFormat::ApidisCsv, "t").unwrap();
        assert_eq!(dets[0].center, vec![120.0, 340.0]);
        assert_eq!(dets[0].extent, None);
    }

    fn track_set(entries: &[(usize, i64, f64, f64)]) -> TrackSet {
        let mut records: BTreeMap<usize, TrackRecord> = BTreeMap::new();
        for &(id, frame, x, y) in entries {
            records
                .entry(id)
                .or_insert_with(|| TrackRecord {
                    track_id: id,
                    boxes: BTreeMap::new(),
                })
                .boxes
                .insert(
                    frame,
                    TrackBox {
                        center: vec![x, y],
                        extent: Some([4.0, 4.0]),
                        confidence: 1.0,
                    },
                );
        }
        TrackSet {
            records: records.into_values().collect(),
            provenance: BTreeMap::new(),
        }
    }

    #[test]
    fn empty_track_set_writes_empty_file() {
        assert_eq!(tracks_to_csv(&TrackSet::default()), "");
    }

    #[test]
    fn track_lines_sorted_by_frame_then_id() {
        let tracks = track_set(&[(1, 2, 0.0, 0.0), (1, 1, 0.0, 0.0), (0, 2, 1.0, 1.0)]);
        let csv = tracks_to_csv(&tracks);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("1,1,"));
        assert!(lines[1].starts_with("2,0,"));
        assert!(lines[2].starts_with("2,1,"));
    }

    #[test]
    fn track_write_parse_round_trip() {
        let tracks = track_set(&[(0, 0, 1.5, 2.25), (0, 1, 3.0, 4.0), (7, 5, -2.0, 0.125)]);
        let csv = tracks_to_csv(&tracks);
        let parsed = parse_tracks(&csv, "t").unwrap();
        assert_eq!(tracks_to_csv(&parsed), csv);
        assert_eq!(parsed.records.len(), 2);
    }

    fn boxed(frame: i64, x: f64, w: f64, features: bool) -> Detection {
        let mut d = Detection::new(frame, vec![x, 0.0]);
        d.extent = Some([w, w]);
        if features {
            d.features.insert(0, vec![1.0, 2.0]);
        }
        d
    }

    #[test]
    fn disjoint_boxes_keep_features() {
        let dets = vec![boxed(0, 0.0, 2.0, true), boxed(0, 10.0, 2.0, true)];
        let out = strip_overlapping_features(&dets, 0.05);
        assert!(out.iter().all(|d| !d.features.is_empty()));
    }

    #[test]
    fn identical_boxes_lose_features() {
        let dets = vec![boxed(0, 0.0, 2.0, true), boxed(0, 0.0, 2.0, true)];
        let out = strip_overlapping_features(&dets, 0.05);
        assert!(out.iter().all(|d| d.features.is_empty()));
        // positions untouched
        assert_eq!(out[0].center, dets[0].center);
    }

    #[test]
    fn single_detection_per_frame_unchanged() {
        let dets = vec![boxed(0, 0.0, 2.0, true), boxed(1, 0.0, 2.0, true)];
        let out = strip_overlapping_features(&dets, 0.05);
        assert!(out.iter().all(|d| !d.features.is_empty()));
    }

    #[test]
    fn strip_is_idempotent() {
        let dets = vec![
            boxed(0, 0.0, 2.0, true),
            boxed(0, 0.5, 2.0, true),
            boxed(0, 10.0, 2.0, true),
        ];
        let once = strip_overlapping_features(&dets, 0.05);
        let twice = strip_overlapping_features(&once, 0.05);
        assert_eq!(once, twice);
    }

    #[test]
    fn tracklet_aggregates_mean_of_present_features() {
        let mut a = Detection::new(0, vec![0.0, 0.0]);
        a.features.insert(0, vec![1.0, 3.0]);
        let b = Detection::new(1, vec![1.0, 0.0]);
        let mut c = Detection::new(2, vec![2.0, 0.0]);
        c.features.insert(0, vec![3.0, 5.0]);
        let t = Tracklet::new(vec![a, b, c]).unwrap();
        assert_eq!(t.aggregate_features[&0], vec![2.0, 4.0]);
    }

    #[test]
    fn tracklet_rejects_frame_gaps() {
        let a = Detection::new(0, vec![0.0, 0.0]);
        let b = Detection::new(2, vec![1.0, 0.0]);
        assert!(Tracklet::new(vec![a, b]).is_err());
    }

    #[test]
    fn node_gap_and_overlap() {
        let dets = vec![
            Detection::new(0, vec![0.0, 0.0]),
            Detection::new(3, vec![6.0, 8.0]),
        ];
        let nodes = Node::from_detections(dets);
        assert!(!nodes[0].overlaps(&nodes[1]));
        assert_eq!(nodes[0].time_gap(&nodes[1]), 3);
        assert_eq!(nodes[0].facing_distance(&nodes[1]), 10.0);
    }
}
