//! Online tracking: the graphs grow frame by frame, the label space is
//! augmented for new detections, and labels are re-propagated node-wise
//! inside a trailing observation window. A virtual source node lets new
//! identities appear: each node carries a source weight pulling its
//! distribution toward its own reserved label column.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::energy::{objective_l2, EnergyTrace, LabelMatrix};
use crate::error::{Error, Result};
use crate::graphs::{EffectiveWeights, SparseGraph, WEIGHT_EPS};
use crate::model::{euclidean, Detection, Node, NodePayload};
use crate::nodewise::{node_objective, node_update, NodewiseConfig, SweepOrder};

/// Parameters of the incremental graph construction and windowed
/// propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineParams {
    /// Connection window for spatio-temporal edges (frames).
    pub st_window: i64,
    /// Heat parameter for spatio-temporal weights.
    pub st_sigma: f64,
    /// Connection window for appearance edges (frames); wide so that
    /// sporadic features bridge long gaps.
    pub app_window: i64,
    /// Heat parameter for appearance weights.
    pub app_sigma: f64,
    /// Observation window: nodes older than this are frozen.
    pub observation_window: i64,
    pub v_max: f64,
    /// Time scaling in the augmented spatio-temporal feature.
    pub gamma: f64,
    /// Heat parameter for the source weight (border distance).
    pub border_sigma: f64,
    /// Scene rectangle `[min_x, min_y, max_x, max_y]` for border distances.
    pub bounds: Option<[f64; 4]>,
}

impl Default for OnlineParams {
    fn default() -> Self {
        OnlineParams {
            st_window: 10,
            st_sigma: 20.0,
            app_window: 200,
            app_sigma: 0.05,
            observation_window: 50,
            v_max: 10.0,
            gamma: 3.0,
            border_sigma: 20.0,
            bounds: None,
        }
    }
}

impl OnlineParams {
    pub fn validate(&self) -> Result<()> {
        if self.st_window < 1 || self.app_window < 1 {
            return Err(Error::Config("connection windows must be >= 1".into()));
        }
        if [self.st_sigma, self.app_sigma, self.border_sigma]
            .iter()
            .any(|s| s.is_nan() || *s <= 0.0)
        {
            return Err(Error::Config("heat parameters must be > 0".into()));
        }
        if self.observation_window < 1 {
            return Err(Error::Config("observation_window must be >= 1".into()));
        }
        if self.v_max <= 0.0 || self.v_max.is_nan() {
            return Err(Error::Config("v_max must be > 0".into()));
        }
        Ok(())
    }
}

/// Heat-kernel weight between two feature vectors, zero outside the
/// connection window.
pub fn heat_weight(
    x_i: &[f64],
    x_j: &[f64],
    t_i: i64,
    t_j: i64,
    sigma: f64,
    window: i64,
    distance: impl Fn(&[f64], &[f64]) -> f64,
) -> f64 {
    if (t_i - t_j).abs() > window {
        return 0.0;
    }
    let d = distance(x_i, x_j);
    (-(d * d) / (sigma * sigma)).exp()
}

/// Source weight of a detection: the heat weight of its smallest distance to
/// the scene border. Detections at frame 0 get weight 1 regardless, so that
/// targets present at the start of tracking can open identities anywhere.
pub fn source_weight(det: &Detection, params: &OnlineParams) -> Result<f64> {
    if det.frame == 0 {
        return Ok(1.0);
    }
    let b = params
        .bounds
        .ok_or_else(|| Error::Config("online runs need bounds for source weights".into()))?;
    let (x, y) = (det.center[0], det.center[1]);
    let d_min = (x - b[0]).min(b[2] - x).min(y - b[1]).min(b[3] - y).max(0.0);
    Ok((-(d_min * d_min) / (params.border_sigma * params.border_sigma)).exp())
}

/// Pads the label matrix with `k_new` zero columns and appends `k_new`
/// uniform rows over the enlarged label space.
pub fn augment_labels(y_prev: &LabelMatrix, k_new: usize) -> LabelMatrix {
    let mut y = y_prev.clone();
    y.pad_columns(k_new);
    let m = y.m();
    for _ in 0..k_new {
        y.push_row(vec![1.0 / m as f64; m]);
    }
    y
}

/// Tracking state carried across frames.
#[derive(Debug, Clone)]
pub struct OnlineState {
    nodes: Vec<Node>,
    st: SparseGraph,
    app: BTreeMap<u32, SparseGraph>,
    excl: SparseGraph,
    eff: EffectiveWeights,
    y: Option<LabelMatrix>,
    source_weights: Vec<f64>,
    /// Nodes whose outgoing weight mass was floored during normalization.
    flagged: Vec<usize>,
    frozen: Vec<bool>,
    t: i64,
    alphas: Vec<f64>,
    /// Running value of g(Y) plus all source terms.
    objective: f64,
    /// Objective after each propagation sweep, across the whole run.
    trace: EnergyTrace,
}

impl OnlineState {
    pub fn new(alphas: Vec<f64>) -> Self {
        OnlineState {
            nodes: Vec::new(),
            st: SparseGraph::new(0),
            app: BTreeMap::new(),
            excl: SparseGraph::new(0),
            eff: EffectiveWeights::empty(),
            y: None,
            source_weights: Vec::new(),
            flagged: Vec::new(),
            frozen: Vec::new(),
            t: -1,
            alphas,
            objective: 0.0,
            trace: EnergyTrace::default(),
        }
    }

    pub fn t(&self) -> i64 {
        self.t
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn labels(&self) -> Option<&LabelMatrix> {
        self.y.as_ref()
    }

    pub fn effective(&self) -> &EffectiveWeights {
        &self.eff
    }

    pub fn source_weights(&self) -> &[f64] {
        &self.source_weights
    }

    pub fn flagged(&self) -> &[usize] {
        &self.flagged
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    pub fn trace(&self) -> &EnergyTrace {
        &self.trace
    }

    /// g(Y) plus all source terms, maintained incrementally.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    fn alpha_for_feature(&self, feature_id: u32) -> Result<f64> {
        self.alphas
            .get(1 + feature_id as usize)
            .copied()
            .ok_or_else(|| {
                Error::Config(format!(
                    "no alpha configured for appearance feature {feature_id}"
                ))
            })
    }

    /// Adds the detections of frame `t + 1` as nodes and wires their
    /// spatio-temporal, appearance and exclusion edges. Positive outgoing
    /// weights are normalized per graph; the source edge joins the
    /// spatio-temporal normalization.
    pub fn increment_graphs(
        &mut self,
        new_dets: &[Detection],
        params: &OnlineParams,
    ) -> Result<()> {
        params.validate()?;
        let frame = self.t + 1;
        for det in new_dets {
            if det.frame != frame {
                return Err(Error::FrameRegression {
                    current: self.t,
                    got: det.frame,
                });
            }
        }

        for det in new_dets {
            let id = self.nodes.len();
            let st_feat = augmented_feature(det, params.gamma);

            // Spatio-temporal edges to gated-in recent nodes.
            let mut st_row: Vec<(usize, f64)> = Vec::new();
            for old in &self.nodes {
                let dt = frame - old.span.1;
                if dt < 1 || dt > params.st_window {
                    continue;
                }
                let old_det = old.last_detection();
                if euclidean(&det.center, &old_det.center) > params.v_max * dt as f64 {
                    continue;
                }
                let w = heat_weight(
                    &st_feat,
                    &augmented_feature(old_det, params.gamma),
                    frame,
                    old.span.1,
                    params.st_sigma,
                    params.st_window,
                    euclidean,
                );
                if w > WEIGHT_EPS {
                    st_row.push((old.id, w));
                }
            }
            let w_source = source_weight(det, params)?;
            let mut flagged = false;
            let denom = {
                let sum: f64 = st_row.iter().map(|(_, w)| w).sum::<f64>() + w_source;
                if sum < 1e-6 {
                    flagged = true;
                    1e-6
                } else {
                    sum
                }
            };
            for (_, w) in &mut st_row {
                *w /= denom;
            }
            let w_source = w_source / denom;

            // Appearance edges per cue carried by this detection.
            let mut app_rows: BTreeMap<u32, Vec<(usize, f64)>> = BTreeMap::new();
            for (&fid, feat) in &det.features {
                let mut row: Vec<(usize, f64)> = Vec::new();
                for old in &self.nodes {
                    let dt = frame - old.span.1;
                    if dt < 1 || dt > params.app_window {
                        continue;
                    }
                    let Some(old_feat) = old.feature(fid) else {
                        continue;
                    };
                    let w = heat_weight(
                        feat,
                        old_feat,
                        frame,
                        old.span.1,
                        params.app_sigma,
                        params.app_window,
                        euclidean,
                    );
                    if w > WEIGHT_EPS {
                        row.push((old.id, w));
                    }
                }
                if !row.is_empty() {
                    let sum: f64 = row.iter().map(|(_, w)| w).sum();
                    let denom = if sum < 1e-6 {
                        flagged = true;
                        1e-6
                    } else {
                        sum
                    };
                    for (_, w) in &mut row {
                        *w /= denom;
                    }
                    app_rows.insert(fid, row);
                }
            }

            // Exclusion: co-frame nodes and gating violators, unit weight,
            // stored symmetrically.
            let mut excl_row: Vec<(usize, f64)> = Vec::new();
            for old in &self.nodes {
                let excluded = if old.span.1 == frame {
                    true
                } else {
                    let dt = (frame - old.span.1) as f64;
                    euclidean(&det.center, &old.last_detection().center) > params.v_max * dt
                };
                if excluded {
                    excl_row.push((old.id, 1.0));
                }
            }

            // Commit the node to every structure.
            self.st.push_node();
            self.excl.push_node();
            for g in self.app.values_mut() {
                g.push_node();
            }
            self.eff.push_node();
            let alpha_st = self.alphas[0];
            for &(j, w) in &st_row {
                self.eff.add_signed_edge(id, j, alpha_st * w);
            }
            self.st.set_row(id, st_row);
            for (fid, row) in app_rows {
                let alpha = self.alpha_for_feature(fid)?;
                for &(j, w) in &row {
                    self.eff.add_signed_edge(id, j, alpha * w);
                }
                let n_now = self.nodes.len() + 1;
                let graph = self
                    .app
                    .entry(fid)
                    .or_insert_with(|| SparseGraph::new(0));
                while graph.n() < n_now {
                    graph.push_node();
                }
                graph.set_row(id, row);
            }
            for &(j, _) in &excl_row {
                self.eff.add_signed_edge(id, j, -1.0);
                self.eff.add_signed_edge(j, id, -1.0);
                self.excl.add_edge(j, id, 1.0);
            }
            self.excl.set_row(id, excl_row);

            self.source_weights.push(w_source);
            if flagged {
                self.flagged.push(id);
            }
            self.frozen.push(false);
            self.nodes.push(Node {
                id,
                span: (det.frame, det.frame),
                payload: NodePayload::Detection(det.clone()),
            });
        }
        Ok(())
    }

    /// Grows the label matrix for `k_new` new nodes and charges the
    /// objective with their edge and source terms.
    fn augment_and_charge(&mut self, k_new: usize) {
        if k_new == 0 {
            return;
        }
        let n = self.nodes.len();
        let first_new = n - k_new;
        let y = match self.y.take() {
            Some(prev) => augment_labels(&prev, k_new),
            None => LabelMatrix::uniform(k_new, k_new),
        };
        for k in first_new..n {
            for &(j, w) in self.eff.sym_row(k) {
                if j < k {
                    let d: f64 = y
                        .row(k)
                        .iter()
                        .zip(y.row(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    self.objective += w * 0.5 * d;
                }
            }
            let ws = self.source_weights[k];
            if ws > 0.0 {
                let mut d = 0.0;
                for (c, &v) in y.row(k).iter().enumerate() {
                    let target = if c == k { 1.0 } else { 0.0 };
                    d += (v - target) * (v - target);
                }
                self.objective += ws * 0.5 * d;
            }
        }
        self.y = Some(y);
    }

    /// Node-wise propagation restricted to the observation window. Frozen
    /// rows are read but never written; the windowed objective (edge terms
    /// plus source terms) never increases across an update.
    pub fn propagate_window(&mut self, params: &OnlineParams, cfg: &NodewiseConfig) -> Result<()> {
        cfg.validate()?;
        let Some(y) = self.y.as_mut() else {
            return Ok(());
        };
        let horizon = self.t - params.observation_window;
        for node in &self.nodes {
            self.frozen[node.id] = node.span.1 < horizon;
        }
        let window: Vec<usize> = self
            .nodes
            .iter()
            .filter(|nd| !self.frozen[nd.id])
            .map(|nd| nd.id)
            .collect();
        if window.is_empty() {
            return Ok(());
        }

        for sweep_idx in 0..cfg.t_con {
            let before = self.objective;
            let order: Vec<usize> = match cfg.sweep_order {
                SweepOrder::Sequential => window.clone(),
                SweepOrder::SeededRandom(seed) => {
                    use rand::seq::SliceRandom;
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                        seed ^ (sweep_idx as u64).wrapping_mul(0x9e37),
                    );
                    let mut ids = window.clone();
                    ids.shuffle(&mut rng);
                    ids
                }
            };
            for p in order {
                let row = self.eff.sym_row(p);
                let source = Some((self.source_weights[p], p));
                let psi_before = node_objective(row, y, source, y.row(p));
                let new_row = node_update(p, row, y, source, &cfg.inner)?;
                let psi_after = node_objective(row, y, source, &new_row);
                y.set_row(p, new_row);
                self.objective += psi_after - psi_before;
            }
            self.trace.push(self.objective);
            let decrease = before - self.objective;
            if decrease.abs() <= cfg.sweep_tol * self.objective.abs().max(1.0) {
                break;
            }
        }
        Ok(())
    }

    /// One frame of online tracking: grow the graphs with the frame's
    /// detections, augment the label space, and re-propagate inside the
    /// window. An empty frame only advances time.
    pub fn online_step(
        &mut self,
        new_dets: &[Detection],
        params: &OnlineParams,
        cfg: &NodewiseConfig,
    ) -> Result<()> {
        if new_dets.is_empty() {
            self.t += 1;
            return Ok(());
        }
        self.increment_graphs(new_dets, params)?;
        self.t += 1;
        self.augment_and_charge(new_dets.len());
        self.propagate_window(params, cfg)
    }

    /// Recomputes g(Y) + source terms from scratch (test support; the live
    /// value is maintained incrementally).
    pub fn recompute_objective(&self) -> f64 {
        let Some(y) = &self.y else {
            return 0.0;
        };
        let mut v = objective_l2(&self.eff, y);
        for (i, &ws) in self.source_weights.iter().enumerate() {
            if ws > 0.0 {
                let mut d = 0.0;
                for (c, &val) in y.row(i).iter().enumerate() {
                    let target = if c == i { 1.0 } else { 0.0 };
                    d += (val - target) * (val - target);
                }
                v += ws * 0.5 * d;
            }
        }
        v
    }

    /// Serializes the full state; [`OnlineState::restore`] round-trips it.
    pub fn checkpoint(&self) -> String {
        let mut out = String::from("trackgraph-checkpoint v1\n");
        writeln!(out, "t {}", self.t).unwrap();
        write!(out, "alphas").unwrap();
        for a in &self.alphas {
            write!(out, " {a}").unwrap();
        }
        out.push('\n');
        writeln!(out, "nodes {}", self.nodes.len()).unwrap();
        for node in &self.nodes {
            let det = node.first_detection();
            write!(out, "node {} {}", det.frame, det.confidence).unwrap();
            write!(out, " c {}", det.center.len()).unwrap();
            for v in &det.center {
                write!(out, " {v}").unwrap();
            }
            match det.extent {
                Some(e) => write!(out, " e {} {}", e[0], e[1]).unwrap(),
                None => write!(out, " e -").unwrap(),
            }
            for (fid, vec) in &det.features {
                write!(out, " f {fid} {}", vec.len()).unwrap();
                for v in vec {
                    write!(out, " {v}").unwrap();
                }
            }
            out.push('\n');
        }
        let dump_graph = |out: &mut String, name: &str, g: &SparseGraph| {
            writeln!(out, "graph {name} {}", g.n()).unwrap();
            for (i, row) in g.rows().iter().enumerate() {
                if row.is_empty() {
                    continue;
                }
                write!(out, "row {i}").unwrap();
                for (j, w) in row {
                    write!(out, " {j}:{w}").unwrap();
                }
                out.push('\n');
            }
        };
        dump_graph(&mut out, "st", &self.st);
        dump_graph(&mut out, "excl", &self.excl);
        for (fid, g) in &self.app {
            dump_graph(&mut out, &format!("app{fid}"), g);
        }
        writeln!(out, "source {}", self.source_weights.len()).unwrap();
        for w in &self.source_weights {
            writeln!(out, "{w}").unwrap();
        }
        write!(out, "flagged").unwrap();
        for id in &self.flagged {
            write!(out, " {id}").unwrap();
        }
        out.push('\n');
        if let Some(y) = &self.y {
            writeln!(out, "labels {} {}", y.n(), y.m()).unwrap();
            for i in 0..y.n() {
                write!(out, "lrow {i}").unwrap();
                for &c in y.support(i) {
                    write!(out, " {c}:{}", y.row(i)[c as usize]).unwrap();
                }
                out.push('\n');
            }
        } else {
            writeln!(out, "labels 0 0").unwrap();
        }
        out
    }

    /// Rebuilds a state from [`OnlineState::checkpoint`] output.
    pub fn restore(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let err = |line: usize, msg: &str| Error::Parse {
            path: "<checkpoint>".into(),
            line: line + 1,
            msg: msg.into(),
        };
        let (ln, header) = lines.next().ok_or_else(|| err(0, "empty checkpoint"))?;
        if header != "trackgraph-checkpoint v1" {
            return Err(err(ln, "unrecognized checkpoint header"));
        }
        let mut t = -1i64;
        let mut alphas = Vec::new();
        let mut dets: Vec<Detection> = Vec::new();
        let mut graphs: Vec<(String, SparseGraph)> = Vec::new();
        let mut source_weights = Vec::new();
        let mut flagged = Vec::new();
        let mut label_rows: Vec<Vec<f64>> = Vec::new();
        let mut pending_source = 0usize;

        for (ln, line) in lines {
            let mut parts = line.split_whitespace();
            let Some(kind) = parts.next() else { continue };
            if pending_source > 0 {
                source_weights.push(kind.parse::<f64>().map_err(|_| err(ln, "bad source"))?);
                pending_source -= 1;
                continue;
            }
            match kind {
                "t" => {
                    t = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln, "bad t"))?
                }
                "alphas" => {
                    alphas = parts
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(ln, "bad alphas"))?
                }
                "nodes" => {}
                "node" => {
                    let frame: i64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln, "bad frame"))?;
                    let confidence: f64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln, "bad confidence"))?;
                    let mut det = Detection::new(frame, Vec::new());
                    det.confidence = confidence;
                    let mut tokens: Vec<&str> = parts.collect();
                    tokens.reverse();
                    while let Some(tag) = tokens.pop() {
                        match tag {
                            "c" => {
                                let d: usize = tokens
                                    .pop()
                                    .and_then(|s| s.parse().ok())
                                    .ok_or_else(|| err(ln, "bad center"))?;
                                for _ in 0..d {
                                    det.center.push(
                                        tokens
                                            .pop()
                                            .and_then(|s| s.parse().ok())
                                            .ok_or_else(|| err(ln, "bad center"))?,
                                    );
                                }
                            }
                            "e" => {
                                let first = tokens.pop().ok_or_else(|| err(ln, "bad extent"))?;
                                if first != "-" {
                                    let w: f64 =
                                        first.parse().map_err(|_| err(ln, "bad extent"))?;
                                    let h: f64 = tokens
                                        .pop()
                                        .and_then(|s| s.parse().ok())
                                        .ok_or_else(|| err(ln, "bad extent"))?;
                                    det.extent = Some([w, h]);
                                }
                            }
                            "f" => {
                                let fid: u32 = tokens
                                    .pop()
                                    .and_then(|s| s.parse().ok())
                                    .ok_or_else(|| err(ln, "bad feature id"))?;
                                let d: usize = tokens
                                    .pop()
                                    .and_then(|s| s.parse().ok())
                                    .ok_or_else(|| err(ln, "bad feature dim"))?;
                                let mut vec = Vec::with_capacity(d);
                                for _ in 0..d {
                                    vec.push(
                                        tokens
                                            .pop()
                                            .and_then(|s| s.parse().ok())
                                            .ok_or_else(|| err(ln, "bad feature"))?,
                                    );
                                }
                                det.features.insert(fid, vec);
                            }
                            _ => return Err(err(ln, "unknown node field")),
                        }
                    }
                    dets.push(det);
                }
                "graph" => {
                    let name = parts.next().ok_or_else(|| err(ln, "bad graph"))?;
                    let n: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln, "bad graph size"))?;
                    graphs.push((name.to_string(), SparseGraph::new(n)));
                }
                "row" => {
                    let (_, graph) =
                        graphs.last_mut().ok_or_else(|| err(ln, "row before graph"))?;
                    let i: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln, "bad row"))?;
                    let mut row = Vec::new();
                    for tok in parts {
                        let (j, w) = tok.split_once(':').ok_or_else(|| err(ln, "bad entry"))?;
                        row.push((
                            j.parse().map_err(|_| err(ln, "bad entry"))?,
                            w.parse().map_err(|_| err(ln, "bad entry"))?,
                        ));
                    }
                    graph.set_row(i, row);
                }
                "source" => {
                    pending_source = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln, "bad source count"))?;
                }
                "flagged" => {
                    flagged = parts
                        .map(|s| s.parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(ln, "bad flagged"))?
                }
                "labels" => {
                    let n: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln, "bad labels"))?;
                    let m: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln, "bad labels"))?;
                    label_rows = vec![vec![0.0; m]; n];
                }
                "lrow" => {
                    let i: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln, "bad lrow"))?;
                    for tok in parts {
                        let (c, v) = tok.split_once(':').ok_or_else(|| err(ln, "bad entry"))?;
                        let c: usize = c.parse().map_err(|_| err(ln, "bad entry"))?;
                        label_rows[i][c] = v.parse().map_err(|_| err(ln, "bad entry"))?;
                    }
                }
                _ => return Err(err(ln, "unknown checkpoint line")),
            }
        }

        let mut state = OnlineState::new(alphas);
        state.t = t;
        state.nodes = dets
            .into_iter()
            .enumerate()
            .map(|(id, det)| Node {
                id,
                span: (det.frame, det.frame),
                payload: NodePayload::Detection(det),
            })
            .collect();
        let n = state.nodes.len();
        state.st = SparseGraph::new(n);
        state.excl = SparseGraph::new(n);
        for (name, graph) in graphs {
            match name.as_str() {
                "st" => state.st = graph,
                "excl" => state.excl = graph,
                other => {
                    let fid: u32 = other
                        .strip_prefix("app")
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(0, "unknown graph name"))?;
                    state.app.insert(fid, graph);
                }
            }
        }
        state.source_weights = source_weights;
        state.flagged = flagged;
        state.frozen = vec![false; n];
        state.rebuild_effective()?;
        if !label_rows.is_empty() {
            state.y = Some(LabelMatrix::from_rows_unchecked(label_rows));
        }
        state.objective = state.recompute_objective();
        Ok(state)
    }

    fn rebuild_effective(&mut self) -> Result<()> {
        let n = self.nodes.len();
        let mut positives = vec![self.st.clone()];
        let mut alphas = vec![*self.alphas.first().unwrap_or(&1.0)];
        for (fid, g) in &self.app {
            let mut g = g.clone();
            while g.n() < n {
                g.push_node();
            }
            positives.push(g);
            alphas.push(self.alpha_for_feature(*fid)?);
        }
        self.eff = crate::graphs::combine(&positives, &self.excl, &alphas)?;
        Ok(())
    }
}

fn augmented_feature(det: &Detection, gamma: f64) -> Vec<f64> {
    let mut f = Vec::with_capacity(1 + det.center.len());
    f.push(gamma * det.frame as f64);
    f.extend(det.center.iter().copied());
    f
}
