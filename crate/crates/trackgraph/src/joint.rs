//! Joint label assignment: majorization-minimization over the whole label
//! matrix. At each outer step the concave (exclusion) part is linearized at
//! the current iterate and the convex surrogate is minimized over the
//! row-stochastic set by projected gradient.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::energy::{graph_gradient_l2, objective_l2, objective_rows_l2, EnergyTrace, LabelMatrix};
use crate::error::{Error, Result};
use crate::graphs::EffectiveWeights;
use crate::simplex::{projected_gradient, PgdConfig};

#[derive(Debug, Clone)]
pub struct JointConfig {
    /// Maximum outer (majorization) iterations.
    pub t_joint: usize,
    pub inner: PgdConfig,
    /// Relative decrease of g between outer steps below which we stop.
    pub outer_tol: f64,
    pub seed: u64,
}

impl Default for JointConfig {
    fn default() -> Self {
        JointConfig {
            t_joint: 200,
            inner: PgdConfig::default(),
            outer_tol: 1e-7,
            seed: 7,
        }
    }
}

impl JointConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_joint == 0 {
            return Err(Error::Config("t_joint must be >= 1".into()));
        }
        self.inner.validate()
    }
}

/// Shared solver outcome: final labels plus the per-iteration energy trace.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub labels: LabelMatrix,
    pub trace: EnergyTrace,
    pub converged: bool,
    pub iterations: usize,
}

/// Rows drawn from the flat distribution on the simplex (exponential
/// normalization), deterministic per seed.
pub fn random_init(n: usize, m: usize, seed: u64) -> LabelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..m)
                .map(|_| {
                    let u: f64 = rng.random::<f64>();
                    -(1.0 - u).max(f64::MIN_POSITIVE).ln()
                })
                .collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / sum).collect()
        })
        .collect();
    LabelMatrix::from_rows_unchecked(rows)
}

/// Minimizes g(Y) = f(Y) - h(Y) over row-stochastic matrices.
///
/// The returned trace holds g at the initial point and after every outer
/// step; it is non-increasing by the majorization argument.
pub fn solve_joint(
    eff: &EffectiveWeights,
    cfg: &JointConfig,
    init: Option<LabelMatrix>,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let n = eff.n();
    let mut y = match init {
        Some(y) => {
            if y.n() != n {
                return Err(Error::SizeMismatch(format!(
                    "init has {} rows, graph has {n} nodes",
                    y.n()
                )));
            }
            y
        }
        None => random_init(n, n, cfg.seed),
    };

    let mut trace = EnergyTrace::default();
    let mut g = objective_l2(eff, &y);
    trace.push(g);
    let mut converged = false;
    let mut iterations = 0;

    for outer in 0..cfg.t_joint {
        iterations = outer + 1;
        // Linearize h at the current iterate.
        let h_grad = graph_gradient_l2(eff.neg_sym_rows(), &y);

        let pos_rows = eff.pos_rows();
        let surrogate = |rows: &[Vec<f64>]| -> f64 {
            let ym = LabelMatrix::from_rows_unchecked(rows.to_vec());
            let f = objective_rows_l2(pos_rows, &ym);
            let lin: f64 = h_grad
                .iter()
                .zip(rows)
                .map(|(gr, yr)| gr.iter().zip(yr).map(|(a, b)| a * b).sum::<f64>())
                .sum();
            f - lin
        };
        let pos_sym = crate::graphs::symmetrize(n, pos_rows);
        let surrogate_grad = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
            let ym = LabelMatrix::from_rows_unchecked(rows.to_vec());
            let mut grad = graph_gradient_l2(&pos_sym, &ym);
            for (gr, hg) in grad.iter_mut().zip(&h_grad) {
                for (a, b) in gr.iter_mut().zip(hg) {
                    *a -= b;
                }
            }
            grad
        };

        let warm = y.rows().to_vec();
        let outcome = projected_gradient(surrogate, surrogate_grad, warm, &cfg.inner)?;
        let y_next = LabelMatrix::from_rows_unchecked(outcome.point);
        let g_next = objective_l2(eff, &y_next);

        if g_next <= g {
            y = y_next;
        }
        let decrease = g - g_next;
        let g_prev = g;
        g = objective_l2(eff, &y);
        trace.push(g);
        if decrease.abs() <= cfg.outer_tol * g_prev.abs().max(1.0) {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{combine, SparseGraph};

    fn eff_from_edges(
        n: usize,
        pos: &[(usize, usize, f64)],
        neg_pairs: &[(usize, usize)],
    ) -> EffectiveWeights {
        let mut gp = SparseGraph::new(n);
        for &(i, j, w) in pos {
            gp.add_edge(i, j, w);
        }
        let mut gn = SparseGraph::new(n);
        for &(i, j) in neg_pairs {
            gn.add_edge(i, j, 1.0);
            gn.add_edge(j, i, 1.0);
        }
        combine(&[gp], &gn, &[1.0]).unwrap()
    }

    /// Enumerates all one-hot labelings and returns the minimum objective.
    pub(crate) fn enumerate_one_hot_min(eff: &EffectiveWeights, m: usize) -> f64 {
        let n = eff.n();
        let mut assignment = vec![0usize; n];
        let mut best = f64::MAX;
        loop {
            let rows: Vec<Vec<f64>> = assignment
                .iter()
                .map(|&label| {
                    let mut row = vec![0.0; m];
                    row[label] = 1.0;
                    row
                })
                .collect();
            let y = LabelMatrix::from_rows_unchecked(rows);
            best = best.min(objective_l2(eff, &y));
            // next assignment in base-m
            let mut pos = 0;
            loop {
                if pos == n {
                    return best;
                }
                assignment[pos] += 1;
                if assignment[pos] < m {
                    break;
                }
                assignment[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn random_init_is_deterministic_and_row_stochastic() {
        let a = random_init(100, 50, 42);
        let b = random_init(100, 50, 42);
        assert_eq!(a.rows(), b.rows());
        for i in 0..a.n() {
            let sum: f64 = a.row(i).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(a.row(i).iter().all(|v| *v >= 0.0));
        }
        let c = random_init(100, 50, 43);
        assert_ne!(a.rows(), c.rows());
    }

    #[test]
    fn random_init_m1_gives_unit_rows() {
        let y = random_init(4, 1, 0);
        for i in 0..4 {
            assert_eq!(y.row(i), &[1.0]);
        }
    }

    #[test]
    fn edgeless_graph_returns_init_unchanged() {
        let eff = eff_from_edges(3, &[], &[]);
        let init = random_init(3, 3, 1);
        let out = solve_joint(&eff, &JointConfig::default(), Some(init.clone())).unwrap();
        assert_eq!(out.labels.rows(), init.rows());
        assert_eq!(out.trace.values[0], 0.0);
    }

    #[test]
    fn exclusion_pair_converges_to_opposite_one_hot() {
        let eff = eff_from_edges(2, &[], &[(0, 1)]);
        let cfg = JointConfig::default();
        let out = solve_joint(&eff, &cfg, Some(random_init(2, 2, 3))).unwrap();
        let g = out.trace.last().unwrap();
        assert!((g - (-2.0)).abs() < 1e-4, "final g = {g}");
        let a = out.labels.argmax_row(0);
        let b = out.labels.argmax_row(1);
        assert_ne!(a, b);
        // enumeration oracle confirms -2 is the one-hot optimum
        assert!((enumerate_one_hot_min(&eff, 2) - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn positive_chain_settles_at_zero_energy() {
        let eff = eff_from_edges(3, &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)], &[]);
        let out = solve_joint(&eff, &JointConfig::default(), Some(random_init(3, 3, 5))).unwrap();
        let g = out.trace.last().unwrap();
        assert!(g < 1e-6, "final g = {g}");
        assert!((enumerate_one_hot_min(&eff, 3) - 0.0).abs() < 1e-12);
        // all rows approximately equal
        for i in 1..3 {
            for (a, b) in out.labels.row(0).iter().zip(out.labels.row(i)) {
                assert!((a - b).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn outer_trace_is_monotone_on_random_instances() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..5 {
            let n = 12;
            let mut pos = Vec::new();
            for i in 0..n - 1 {
                pos.push((i, i + 1, rng.random::<f64>()));
            }
            let mut neg = Vec::new();
            for _ in 0..4 {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                if i != j {
                    neg.push((i, j));
                }
            }
            let eff = eff_from_edges(n, &pos, &neg);
            let out = solve_joint(
                &eff,
                &JointConfig {
                    t_joint: 40,
                    seed: trial,
                    ..JointConfig::default()
                },
                None,
            )
            .unwrap();
            assert!(
                out.trace.is_non_increasing(1e-9),
                "trial {trial}: trace {:?}",
                out.trace.values
            );
        }
    }
}
