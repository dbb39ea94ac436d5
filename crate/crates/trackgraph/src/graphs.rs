//! Offline construction of the complementary graphs: spatio-temporal,
//! appearance (one per cue) and exclusion, plus their combination into
//! signed effective weights.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{euclidean, Node};
use crate::simplex::{solve_simplex_qp, PgdConfig, QpSolution};

/// Weights below this are treated as numerically zero and dropped from the
/// edge set.
pub const WEIGHT_EPS: f64 = 1e-9;

/// Directed weighted graph over nodes, adjacency-list backed.
#[derive(Debug, Clone, Default)]
pub struct SparseGraph {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseGraph {
    pub fn new(n: usize) -> Self {
        SparseGraph {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Appends a node with no edges and returns its id.
    pub fn push_node(&mut self) -> usize {
        self.rows.push(Vec::new());
        self.n += 1;
        self.n - 1
    }

    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.rows[i].push((j, w));
    }

    pub fn set_row(&mut self, i: usize, mut row: Vec<(usize, f64)>) {
        row.sort_by_key(|(j, _)| *j);
        self.rows[i] = row;
    }

    pub fn out_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    fn sort_rows(&mut self) {
        for row in &mut self.rows {
            row.sort_by_key(|(j, _)| *j);
        }
    }
}

/// Parameters of the offline graph construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphParams {
    /// Temporal window (frames) for the spatio-temporal neighborhood.
    pub t_window: i64,
    /// Time scaling for the augmented spatio-temporal feature (units/frame).
    pub gamma: f64,
    /// Maximum plausible speed for the gating constraint (units/frame).
    pub v_max: f64,
    /// Ridge added to every reconstruction-weight program.
    pub delta: f64,
    /// Cap on the appearance neighborhood size (nearest features); None
    /// disables the cap.
    pub k_app: Option<usize>,
    /// Optional temporal window for the offline appearance neighborhood;
    /// None connects across any time distance.
    pub appearance_window: Option<i64>,
    /// Per-graph energy weights: the first entry for the spatio-temporal
    /// graph, the rest for the appearance graphs in feature-id order.
    pub alphas: Vec<f64>,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            t_window: 10,
            gamma: 3.0,
            v_max: 10.0,
            delta: 1e-2,
            k_app: Some(30),
            appearance_window: None,
            alphas: vec![1.0, 0.5],
        }
    }
}

impl GraphParams {
    pub fn validate(&self) -> Result<()> {
        if self.t_window < 1 {
            return Err(Error::Config("t_window must be >= 1".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::Config("gamma must be >= 0".into()));
        }
        if self.v_max <= 0.0 || self.v_max.is_nan() {
            return Err(Error::Config("v_max must be > 0".into()));
        }
        if self.delta < 0.0 {
            return Err(Error::Config("delta must be >= 0".into()));
        }
        if self.alphas.iter().any(|a| *a < 0.0) {
            return Err(Error::Config("alphas must be >= 0".into()));
        }
        Ok(())
    }
}

/// Signed effective weights `W_eff = sum_l alpha_l W^(l) - W^(-)` with the
/// positive/negative split retained and the symmetrized form cached.
#[derive(Debug, Clone)]
pub struct EffectiveWeights {
    n: usize,
    rows_pos: Vec<Vec<(usize, f64)>>,
    rows_neg: Vec<Vec<(usize, f64)>>,
    rows_eff: Vec<Vec<(usize, f64)>>,
    rows_eff_sym: Vec<Vec<(usize, f64)>>,
    rows_neg_sym: Vec<Vec<(usize, f64)>>,
}

impl EffectiveWeights {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Signed rows of `W_eff`.
    pub fn eff_rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows_eff
    }

    /// Rows of the positive combination `sum_l alpha_l W^(l)`.
    pub fn pos_rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows_pos
    }

    /// Rows of the exclusion weights `W^(-)`.
    pub fn neg_rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows_neg
    }

    /// Rows of the symmetrized `W_eff + W_eff'`.
    pub fn sym_rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows_eff_sym
    }

    pub fn sym_row(&self, p: usize) -> &[(usize, f64)] {
        &self.rows_eff_sym[p]
    }

    /// Rows of the symmetrized exclusion weights `W^(-) + W^(-)'`.
    pub fn neg_sym_rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows_neg_sym
    }

    /// Rebuilds the cached symmetrized forms from the signed rows.
    pub(crate) fn from_parts(
        n: usize,
        rows_pos: Vec<Vec<(usize, f64)>>,
        rows_neg: Vec<Vec<(usize, f64)>>,
    ) -> Self {
        let rows_eff = merge_signed(n, &rows_pos, &rows_neg);
        let rows_eff_sym = symmetrize(n, &rows_eff);
        let rows_neg_sym = symmetrize(n, &rows_neg);
        EffectiveWeights {
            n,
            rows_pos,
            rows_neg,
            rows_eff,
            rows_eff_sym,
            rows_neg_sym,
        }
    }

    pub(crate) fn empty() -> Self {
        EffectiveWeights::from_parts(0, Vec::new(), Vec::new())
    }

    /// Appends a node with no edges and returns its id.
    pub(crate) fn push_node(&mut self) -> usize {
        self.rows_pos.push(Vec::new());
        self.rows_neg.push(Vec::new());
        self.rows_eff.push(Vec::new());
        self.rows_eff_sym.push(Vec::new());
        self.rows_neg_sym.push(Vec::new());
        self.n += 1;
        self.n - 1
    }

    /// Adds a signed directed edge and keeps every cached form consistent.
    pub(crate) fn add_signed_edge(&mut self, i: usize, j: usize, w: f64) {
        debug_assert!(i < self.n && j < self.n && i != j);
        if w == 0.0 {
            return;
        }
        if w > 0.0 {
            upsert(&mut self.rows_pos[i], j, w);
        } else {
            upsert(&mut self.rows_neg[i], j, -w);
            upsert(&mut self.rows_neg_sym[i], j, -w);
            upsert(&mut self.rows_neg_sym[j], i, -w);
        }
        upsert(&mut self.rows_eff[i], j, w);
        upsert(&mut self.rows_eff_sym[i], j, w);
        upsert(&mut self.rows_eff_sym[j], i, w);
    }
}

fn upsert(row: &mut Vec<(usize, f64)>, j: usize, w: f64) {
    match row.binary_search_by_key(&j, |(k, _)| *k) {
        Ok(pos) => row[pos].1 += w,
        Err(pos) => row.insert(pos, (j, w)),
    }
}

fn merge_signed(
    n: usize,
    pos: &[Vec<(usize, f64)>],
    neg: &[Vec<(usize, f64)>],
) -> Vec<Vec<(usize, f64)>> {
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(j, w) in &pos[i] {
            *acc.entry(j).or_insert(0.0) += w;
        }
        for &(j, w) in &neg[i] {
            *acc.entry(j).or_insert(0.0) -= w;
        }
        rows.push(
            acc.into_iter()
                .filter(|(_, w)| w.abs() > 0.0)
                .collect::<Vec<_>>(),
        );
    }
    rows
}

pub(crate) fn symmetrize(n: usize, rows: &[Vec<(usize, f64)>]) -> Vec<Vec<(usize, f64)>> {
    let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &(j, w) in row {
            *acc[i].entry(j).or_insert(0.0) += w;
            *acc[j].entry(i).or_insert(0.0) += w;
        }
    }
    acc.into_iter()
        .map(|m| m.into_iter().filter(|(_, w)| w.abs() > 0.0).collect())
        .collect()
}

/// Reconstruction weights of `target` from `neighbors`: the minimizer of
/// `||x - X w||^2 + (delta/2) ||w||^2` over the simplex.
pub fn lle_weights(
    target: &[f64],
    neighbors: &[Vec<f64>],
    delta: f64,
    cfg: &PgdConfig,
) -> Result<QpSolution> {
    let k = neighbors.len();
    if k == 0 {
        return Err(Error::EmptyNeighborhood(0));
    }
    let dim = target.len();
    for nb in neighbors {
        if nb.len() != dim {
            return Err(Error::SizeMismatch(
                "neighbor feature dimension differs from target".into(),
            ));
        }
    }
    // P = 2 X'X, q = -2 X'x
    let mut p = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let dot: f64 = neighbors[a].iter().zip(&neighbors[b]).map(|(x, y)| x * y).sum();
            p[a][b] = 2.0 * dot;
            p[b][a] = 2.0 * dot;
        }
    }
    let q: Vec<f64> = neighbors
        .iter()
        .map(|nb| -2.0 * nb.iter().zip(target).map(|(x, y)| x * y).sum::<f64>())
        .collect();
    solve_simplex_qp(&p, delta, &q, cfg)
}

fn lle_row(
    node: usize,
    target: &[f64],
    candidates: &[(usize, Vec<f64>)],
    delta: f64,
    cfg: &PgdConfig,
) -> Result<Vec<(usize, f64)>> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let features: Vec<Vec<f64>> = candidates.iter().map(|(_, f)| f.clone()).collect();
    let sol = lle_weights(target, &features, delta, cfg).map_err(|e| match e {
        Error::EmptyNeighborhood(_) => Error::EmptyNeighborhood(node),
        other => other,
    })?;
    Ok(candidates
        .iter()
        .zip(sol.weights.iter())
        .filter(|(_, &w)| w > WEIGHT_EPS)
        .map(|((j, _), &w)| (*j, w))
        .collect())
}

/// Spatio-temporal graph: each node reconstructs from neighbors inside the
/// temporal window that satisfy the gating constraint, in the time-augmented
/// feature space `(gamma t, c)`.
pub fn build_spatiotemporal_graph(
    nodes: &[Node],
    params: &GraphParams,
    cfg: &PgdConfig,
) -> Result<SparseGraph> {
    params.validate()?;
    build_spatiotemporal_windowed(nodes, params, params.t_window, cfg)
}

/// Spatio-temporal graph with an explicit window, used by tracklet-mode runs
/// where the window differs from the detection default.
pub fn build_spatiotemporal_windowed(
    nodes: &[Node],
    params: &GraphParams,
    window: i64,
    cfg: &PgdConfig,
) -> Result<SparseGraph> {
    let feats: Vec<Vec<f64>> = nodes.iter().map(|n| st_feature(n, params.gamma)).collect();
    let rows: Vec<Result<Vec<(usize, f64)>>> = nodes
        .par_iter()
        .map(|node| {
            let mut candidates = Vec::new();
            for other in nodes {
                if other.id == node.id || node.overlaps(other) {
                    continue;
                }
                let gap = node.time_gap(other);
                if gap > window {
                    continue;
                }
                if node.facing_distance(other) > params.v_max * gap as f64 {
                    continue; // gated out; the exclusion graph owns this pair
                }
                candidates.push((other.id, feats[other.id].clone()));
            }
            lle_row(node.id, &feats[node.id], &candidates, params.delta, cfg)
        })
        .collect();
    let mut graph = SparseGraph::new(nodes.len());
    for (i, row) in rows.into_iter().enumerate() {
        graph.rows[i] = row?;
    }
    graph.sort_rows();
    Ok(graph)
}

pub(crate) fn st_feature(node: &Node, gamma: f64) -> Vec<f64> {
    let mut f = Vec::with_capacity(1 + node.center().len());
    f.push(gamma * node.time());
    f.extend(node.center());
    f
}

/// Appearance graph for one cue: only nodes carrying the feature get
/// outgoing edges; the neighborhood is every other featured node that does
/// not co-occur in time, optionally capped to the nearest features.
pub fn build_appearance_graph(
    nodes: &[Node],
    feature_id: u32,
    params: &GraphParams,
    cfg: &PgdConfig,
) -> Result<SparseGraph> {
    params.validate()?;
    let featured: Vec<usize> = nodes
        .iter()
        .filter(|n| n.feature(feature_id).is_some())
        .map(|n| n.id)
        .collect();
    let rows: Vec<(usize, Result<Vec<(usize, f64)>>)> = featured
        .par_iter()
        .map(|&i| {
            let node = &nodes[i];
            let target = node.feature(feature_id).unwrap();
            let mut candidates: Vec<(usize, f64)> = Vec::new();
            for &j in &featured {
                if j == i || node.overlaps(&nodes[j]) {
                    continue;
                }
                if let Some(window) = params.appearance_window {
                    if node.time_gap(&nodes[j]) > window {
                        continue;
                    }
                }
                let d = euclidean(target, nodes[j].feature(feature_id).unwrap());
                candidates.push((j, d));
            }
            if let Some(cap) = params.k_app {
                if candidates.len() > cap {
                    candidates.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
                    candidates.truncate(cap);
                }
            }
            let with_feats: Vec<(usize, Vec<f64>)> = candidates
                .into_iter()
                .map(|(j, _)| (j, nodes[j].feature(feature_id).unwrap().to_vec()))
                .collect();
            (i, lle_row(i, target, &with_feats, params.delta, cfg))
        })
        .collect();
    let mut graph = SparseGraph::new(nodes.len());
    for (i, row) in rows {
        graph.rows[i] = row?;
    }
    graph.sort_rows();
    Ok(graph)
}

/// Exclusion graph: unit weight between co-occurring nodes and between pairs
/// that violate the gating constraint. Symmetric by construction.
pub fn build_exclusion_graph(nodes: &[Node], params: &GraphParams) -> SparseGraph {
    let mut graph = SparseGraph::new(nodes.len());
    for (k, a) in nodes.iter().enumerate() {
        for b in &nodes[k + 1..] {
            let excluded = if a.overlaps(b) {
                true
            } else {
                a.facing_distance(b) > params.v_max * a.time_gap(b) as f64
            };
            if excluded {
                graph.add_edge(a.id, b.id, 1.0);
                graph.add_edge(b.id, a.id, 1.0);
            }
        }
    }
    graph.sort_rows();
    graph
}

/// Combines positive graphs and the exclusion graph into effective weights:
/// `W_eff = sum_l alphas[l] W^(l) - W^(-)`.
pub fn combine(
    graphs_pos: &[SparseGraph],
    graph_neg: &SparseGraph,
    alphas: &[f64],
) -> Result<EffectiveWeights> {
    if graphs_pos.len() != alphas.len() {
        return Err(Error::SizeMismatch(format!(
            "{} positive graphs but {} alphas",
            graphs_pos.len(),
            alphas.len()
        )));
    }
    let n = graph_neg.n();
    for g in graphs_pos {
        if g.n() != n {
            return Err(Error::SizeMismatch(
                "graphs must share the same node count".into(),
            ));
        }
    }
    let mut rows_pos: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (g, &alpha) in graphs_pos.iter().zip(alphas) {
            if alpha == 0.0 {
                continue;
            }
            for &(j, w) in g.out_edges(i) {
                *acc.entry(j).or_insert(0.0) += alpha * w;
            }
        }
        rows_pos.push(acc.into_iter().collect());
    }
    let rows_neg: Vec<Vec<(usize, f64)>> = graph_neg.rows().to_vec();
    Ok(EffectiveWeights::from_parts(n, rows_pos, rows_neg))
}

/// Debug/test dump: `graph_id,i,j,weight` lines, ordered by (i, j).
pub fn dump_graphs_csv(graphs: &[(&str, &SparseGraph)]) -> String {
    let mut out = String::from("graph_id,i,j,weight\n");
    for (id, graph) in graphs {
        for (i, row) in graph.rows().iter().enumerate() {
            let mut row = row.clone();
            row.sort_by_key(|(j, _)| *j);
            for (j, w) in row {
                writeln!(out, "{id},{i},{j},{w}").unwrap();
            }
        }
    }
    out
}
