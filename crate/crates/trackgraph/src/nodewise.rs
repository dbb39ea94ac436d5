//! Node-wise coordinate descent on the labeling objective, plus the
//! interference-free batch scheduler that makes the updates parallel.
//!
//! Each node update minimizes `sum_j w~[p][j] phi(y, y_j) (+ w_s phi(y, e))`
//! over the simplex. With the squared loss the whole subproblem is an
//! isotropic quadratic, so the minimizer is available in closed form
//! (see [`node_update`]) and a node visit can never increase the global
//! objective.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::energy::{objective_l2, EnergyTrace, LabelMatrix};
use crate::error::{Error, Result};
use crate::graphs::EffectiveWeights;
use crate::joint::{random_init, SolveOutcome};
use crate::simplex::{project_to_simplex, PgdConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Sequential,
    /// Fresh random permutation per sweep, deterministic per seed.
    SeededRandom(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batcher {
    GreedyMis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParallelConfig {
    pub workers: usize,
    pub batcher: Batcher,
}

#[derive(Debug, Clone)]
pub struct NodewiseConfig {
    /// Number of sweeps over all nodes.
    pub t_con: usize,
    pub inner: PgdConfig,
    pub sweep_order: SweepOrder,
    pub parallel: Option<ParallelConfig>,
    /// Relative per-sweep improvement below which the solve stops early.
    pub sweep_tol: f64,
    pub seed: u64,
}

impl Default for NodewiseConfig {
    fn default() -> Self {
        NodewiseConfig {
            t_con: 100,
            inner: PgdConfig::default(),
            sweep_order: SweepOrder::Sequential,
            parallel: None,
            sweep_tol: 1e-8,
            seed: 7,
        }
    }
}

impl NodewiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_con == 0 {
            return Err(Error::Config("t_con must be >= 1".into()));
        }
        if let Some(par) = &self.parallel {
            if par.workers == 0 {
                return Err(Error::Config("workers must be >= 1".into()));
            }
        }
        self.inner.validate()
    }
}

/// A set of nodes safe to update simultaneously: no symmetrized effective
/// edge joins any two of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub nodes: Vec<usize>,
}

/// One node's subproblem objective:
/// `sum_j w~[p][j] phi(y, y_j) + w_s phi(y, e_anchor)` with the squared loss.
pub(crate) fn node_objective(
    row: &[(usize, f64)],
    y: &LabelMatrix,
    source: Option<(f64, usize)>,
    cand: &[f64],
) -> f64 {
    let mut acc = 0.0;
    for &(j, w) in row {
        let yj = y.row(j);
        let d: f64 = cand
            .iter()
            .zip(yj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        acc += w * 0.5 * d;
    }
    if let Some((ws, anchor)) = source {
        if ws != 0.0 {
            let mut d = 0.0;
            for (c, &v) in cand.iter().enumerate() {
                let target = if c == anchor { 1.0 } else { 0.0 };
                d += (v - target) * (v - target);
            }
            acc += ws * 0.5 * d;
        }
    }
    acc
}

/// Minimizes node p's subproblem over the simplex exactly and returns the
/// new row.
///
/// With the squared loss the subproblem collapses to the isotropic quadratic
/// `0.5 (A - B) ||y||^2 - <d, y>` with `A`/`B` the positive/negative weight
/// mass and `d` the signed weighted mean of the neighbor rows (plus the
/// source anchor). Its global minimizer over the simplex is the projection
/// of `d / (A - B)` when `A > B` and the best-supported vertex otherwise, so
/// no inner iteration is needed. The returned point never scores worse than
/// the current row `y_p`; an empty row with no source term returns `y_p`
/// unchanged.
pub fn node_update(
    p: usize,
    row: &[(usize, f64)],
    y: &LabelMatrix,
    source: Option<(f64, usize)>,
    _cfg: &PgdConfig,
) -> Result<Vec<f64>> {
    let m = y.m();
    let current = y.row(p);
    let has_source = matches!(source, Some((ws, _)) if ws > 0.0);
    if row.is_empty() && !has_source {
        return Ok(current.to_vec());
    }

    // Accumulate d = sum_j w~[p][j] y_j (+ w_s e_anchor) over the union of
    // neighbor supports.
    let mut pos_sum = 0.0;
    let mut neg_sum = 0.0;
    let mut d = vec![0.0; m];
    let mut touched_mask = vec![false; m];
    let mut touched: Vec<usize> = Vec::new();
    for &(j, w) in row {
        if w > 0.0 {
            pos_sum += w;
        } else {
            neg_sum -= w;
        }
        for &c in y.support(j) {
            let c = c as usize;
            if !touched_mask[c] {
                touched_mask[c] = true;
                touched.push(c);
            }
            d[c] += w * y.row(j)[c];
        }
    }
    if let Some((ws, anchor)) = source {
        if ws > 0.0 {
            pos_sum += ws;
            if !touched_mask[anchor] {
                touched_mask[anchor] = true;
                touched.push(anchor);
            }
            d[anchor] += ws;
        }
    }

    let kappa = pos_sum - neg_sum;
    let cand = if kappa > 0.0 {
        // Strictly convex: project d / kappa. The candidate sums to one, so
        // untouched zeros survive the projection and sparsity is preserved.
        let scaled: Vec<f64> = d.iter().map(|v| v / kappa).collect();
        project_to_simplex(&scaled)?.into_inner()
    } else {
        // Concave (or linear): the minimum sits at a vertex; vertex c scores
        // -d[c] up to a constant. Untouched columns score 0.
        let mut best_c = None;
        let mut best_val = f64::NEG_INFINITY;
        for &c in &touched {
            if d[c] > best_val {
                best_val = d[c];
                best_c = Some(c);
            }
        }
        let lowest_untouched = touched_mask.iter().position(|t| !t);
        let target = match (best_c, lowest_untouched) {
            (Some(c), Some(u)) if best_val < 0.0 || (best_val == 0.0 && u < c) => u,
            (Some(c), _) => c,
            (None, Some(u)) => u,
            (None, None) => return Ok(current.to_vec()),
        };
        let mut v = vec![0.0; m];
        v[target] = 1.0;
        v
    };

    let f_current = node_objective(row, y, source, current);
    let f_cand = node_objective(row, y, source, &cand);
    if f_cand <= f_current {
        Ok(cand)
    } else {
        Ok(current.to_vec())
    }
}

fn sweep_order(n: usize, order: SweepOrder, sweep_idx: usize) -> Vec<usize> {
    match order {
        SweepOrder::Sequential => (0..n).collect(),
        SweepOrder::SeededRandom(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (sweep_idx as u64).wrapping_mul(0x9e37));
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(&mut rng);
            ids
        }
    }
}

/// Visits every node once, updating labels in place. Returns g(Y) after the
/// sweep.
pub fn sweep(
    eff: &EffectiveWeights,
    y: &mut LabelMatrix,
    cfg: &NodewiseConfig,
    sweep_idx: usize,
) -> Result<f64> {
    for p in sweep_order(eff.n(), cfg.sweep_order, sweep_idx) {
        let new_row = node_update(p, eff.sym_row(p), y, None, &cfg.inner)?;
        y.set_row(p, new_row);
    }
    Ok(objective_l2(eff, y))
}

/// Sequential node-wise descent: `t_con` sweeps with an early stop when a
/// full sweep no longer improves the objective.
pub fn solve_nodewise(
    eff: &EffectiveWeights,
    cfg: &NodewiseConfig,
    init: Option<LabelMatrix>,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    if cfg.parallel.is_some() {
        return solve_parallel(eff, cfg, init);
    }
    let mut y = resolve_init(eff, cfg.seed, init)?;
    let mut trace = EnergyTrace::default();
    let mut g = objective_l2(eff, &y);
    trace.push(g);
    let mut converged = false;
    let mut iterations = 0;
    for s in 0..cfg.t_con {
        iterations = s + 1;
        let g_next = sweep(eff, &mut y, cfg, s)?;
        trace.push(g_next);
        let decrease = g - g_next;
        g = g_next;
        if decrease.abs() <= cfg.sweep_tol * g.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(SolveOutcome {
        labels: y,
        trace,
        converged,
        iterations,
    })
}

fn resolve_init(
    eff: &EffectiveWeights,
    seed: u64,
    init: Option<LabelMatrix>,
) -> Result<LabelMatrix> {
    match init {
        Some(y) => {
            if y.n() != eff.n() {
                return Err(Error::SizeMismatch(format!(
                    "init has {} rows, graph has {} nodes",
                    y.n(),
                    eff.n()
                )));
            }
            Ok(y)
        }
        None => Ok(random_init(eff.n(), eff.n(), seed)),
    }
}

/// Partitions all nodes into interference-free batches by repeated greedy
/// maximal independent sets on the symmetrized effective adjacency, highest
/// degree first.
pub fn schedule_batches(eff: &EffectiveWeights) -> Vec<Batch> {
    let n = eff.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (usize::MAX - eff.sym_row(i).len(), i));
    let mut assigned = vec![false; n];
    let mut batches = Vec::new();
    let mut remaining = n;
    while remaining > 0 {
        let mut blocked = vec![false; n];
        let mut nodes = Vec::new();
        for &i in &order {
            if assigned[i] || blocked[i] {
                continue;
            }
            nodes.push(i);
            assigned[i] = true;
            remaining -= 1;
            for &(j, _) in eff.sym_row(i) {
                blocked[j] = true;
            }
        }
        nodes.sort_unstable();
        batches.push(Batch { nodes });
    }
    batches
}

/// Batch-assignment dump: `batch_id,node_id` lines.
pub fn batches_to_csv(batches: &[Batch]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("batch_id,node_id\n");
    for (b, batch) in batches.iter().enumerate() {
        for &node in &batch.nodes {
            writeln!(out, "{b},{node}").unwrap();
        }
    }
    out
}

/// Batch-parallel node-wise descent. Within a batch every worker reads the
/// label matrix as frozen at the batch barrier and writes only its own row;
/// batch independence guarantees no update reads a row written in the same
/// batch, so the result equals the sequential batch-major run. The trace
/// holds g(Y) after every batch.
pub fn solve_parallel(
    eff: &EffectiveWeights,
    cfg: &NodewiseConfig,
    init: Option<LabelMatrix>,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let par = cfg
        .parallel
        .ok_or_else(|| Error::Config("solve_parallel requires cfg.parallel".into()))?;
    let mut y = resolve_init(eff, cfg.seed, init)?;
    let batches = schedule_batches(eff);
    let mut trace = EnergyTrace::default();
    let mut g = objective_l2(eff, &y);
    trace.push(g);
    let mut converged = false;
    let mut iterations = 0;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(par.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    for s in 0..cfg.t_con {
        iterations = s + 1;
        let g_before_sweep = g;
        for batch in &batches {
            if par.workers == 1 {
                // In-place sequential batch-major pass; identical to the
                // snapshot path because in-batch rows never read each other.
                for &p in &batch.nodes {
                    let row = node_update(p, eff.sym_row(p), &y, None, &cfg.inner)?;
                    y.set_row(p, row);
                }
            } else {
                let y_ref = &y;
                let updates: Vec<(usize, Result<Vec<f64>>)> = pool.install(|| {
                    batch
                        .nodes
                        .par_iter()
                        .map(|&p| (p, node_update(p, eff.sym_row(p), y_ref, None, &cfg.inner)))
                        .collect()
                });
                for (p, row) in updates {
                    y.set_row(p, row?);
                }
            }
            g = objective_l2(eff, &y);
            trace.push(g);
        }
        let decrease = g_before_sweep - g;
        if decrease.abs() <= cfg.sweep_tol * g.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    Ok(SolveOutcome {
        labels: y,
        trace,
        converged,
        iterations,
    })
}
