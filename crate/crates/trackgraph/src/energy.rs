//! The labeling objective over the complementary graphs: pairwise energies,
//! the signed effective objective g(Y), its gradient, and the per-node
//! decomposition used by the coordinate solvers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graphs::EffectiveWeights;

/// Row-stochastic label matrix: row i is node i's label distribution.
///
/// Nonzero column indices are tracked per row so that energy terms and node
/// updates can skip the (typically many) exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    rows: Vec<Vec<f64>>,
    supports: Vec<Vec<u32>>,
    m: usize,
}

impl LabelMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("label matrix needs >= 1 row".into()));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::InvalidInput("label matrix needs >= 1 column".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::SizeMismatch(format!(
                    "row {i} has {} columns, expected {m}",
                    row.len()
                )));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "row {i} is not a distribution on the simplex"
                )));
            }
        }
        let supports = rows.iter().map(|r| support_of(r)).collect();
        Ok(LabelMatrix { rows, supports, m })
    }

    pub fn uniform(n: usize, m: usize) -> Self {
        let rows = vec![vec![1.0 / m as f64; m]; n];
        let supports = vec![(0..m as u32).collect(); n];
        LabelMatrix { rows, supports, m }
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        let m = rows[0].len();
        let supports = rows.iter().map(|r| support_of(r)).collect();
        LabelMatrix { rows, supports, m }
    }

    /// Builds a matrix without the simplex validation. Finite-difference
    /// probes evaluate the energy at slightly infeasible points.
    pub fn new_relaxed(rows: Vec<Vec<f64>>) -> Self {
        Self::from_rows_unchecked(rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub(crate) fn support(&self, i: usize) -> &[u32] {
        &self.supports[i]
    }

    pub fn set_row(&mut self, i: usize, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.m);
        self.supports[i] = support_of(&row);
        self.rows[i] = row;
    }

    /// Argmax label of row i; ties break to the lowest column index.
    pub fn argmax_row(&self, i: usize) -> usize {
        let row = &self.rows[i];
        let mut best = 0;
        for (j, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = j;
            }
        }
        best
    }

    /// Appends `k` zero columns to every row (existing distributions are
    /// unchanged) and returns nothing; used when the label space grows.
    pub fn pad_columns(&mut self, k: usize) {
        if k == 0 {
            return;
        }
        for row in &mut self.rows {
            row.extend(std::iter::repeat_n(0.0, k));
        }
        self.m += k;
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.m);
        self.supports.push(support_of(&row));
        self.rows.push(row);
    }
}

fn support_of(row: &[f64]) -> Vec<u32> {
    row.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, _)| j as u32)
        .collect()
}

/// Pairwise loss plugged into the labeling energy. Implementations must be
/// convex in the first argument, coincident (phi(y,y) = 0) and symmetric;
/// [`validate_loss_fn`] probes these conditions.
pub trait LossFn: Sync {
    fn evaluate(&self, a: &[f64], b: &[f64]) -> f64;
    fn gradient_first_arg(&self, a: &[f64], b: &[f64]) -> Vec<f64>;
}

/// The shipped loss: phi(a, b) = 0.5 ||a - b||^2.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredL2;

impl LossFn for SquaredL2 {
    fn evaluate(&self, a: &[f64], b: &[f64]) -> f64 {
        0.5 * a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
    }

    fn gradient_first_arg(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }
}

/// Checks the loss conditions required for monotone node-wise descent on
/// random probes: convexity in the first argument, coincidence, symmetry.
pub fn validate_loss_fn(phi: &dyn LossFn, dim: usize, seed: u64) -> Result<()> {
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let random_point = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 1e-6).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    };
    for _ in 0..32 {
        let a = random_point(&mut rng);
        let b = random_point(&mut rng);
        let c = random_point(&mut rng);
        if phi.evaluate(&a, &a).abs() > 1e-9 {
            return Err(Error::InvalidInput(
                "loss is not coincident: phi(y, y) != 0".into(),
            ));
        }
        if (phi.evaluate(&a, &b) - phi.evaluate(&b, &a)).abs() > 1e-9 {
            return Err(Error::InvalidInput("loss is not symmetric".into()));
        }
        // midpoint convexity in the first argument
        let mid: Vec<f64> = a.iter().zip(&c).map(|(x, y)| 0.5 * (x + y)).collect();
        let lhs = phi.evaluate(&mid, &b);
        let rhs = 0.5 * phi.evaluate(&a, &b) + 0.5 * phi.evaluate(&c, &b);
        if lhs > rhs + 1e-9 {
            return Err(Error::InvalidInput(
                "loss is not convex in its first argument".into(),
            ));
        }
    }
    Ok(())
}

fn sparse_squared_l2(y: &LabelMatrix, i: usize, j: usize) -> f64 {
    let (a, b) = (y.row(i), y.row(j));
    let (sa, sb) = (y.support(i), y.support(j));
    let mut acc = 0.0;
    let (mut p, mut q) = (0, 0);
    while p < sa.len() || q < sb.len() {
        let col = match (sa.get(p), sb.get(q)) {
            (Some(&x), Some(&z)) => x.min(z),
            (Some(&x), None) => x,
            (None, Some(&z)) => z,
            (None, None) => break,
        };
        if sa.get(p) == Some(&col) {
            p += 1;
        }
        if sb.get(q) == Some(&col) {
            q += 1;
        }
        let d = a[col as usize] - b[col as usize];
        acc += d * d;
    }
    0.5 * acc
}

/// Sum over edges of `W_ij * phi(y_i, y_j)` for sparse signed or unsigned
/// weight rows.
pub fn pairwise_energy(rows: &[Vec<(usize, f64)>], y: &LabelMatrix, phi: &dyn LossFn) -> f64 {
    let mut total = 0.0;
    for (i, row) in rows.iter().enumerate() {
        for &(j, w) in row {
            total += w * phi.evaluate(y.row(i), y.row(j));
        }
    }
    total
}

/// The labeling objective g(Y) over the effective weights with an arbitrary
/// loss. The shipped squared loss has the dedicated support-aware fast path
/// [`objective_l2`], which the solvers use.
pub fn objective(eff: &EffectiveWeights, y: &LabelMatrix, phi: &dyn LossFn) -> f64 {
    pairwise_energy(eff.eff_rows(), y, phi)
}

pub(crate) fn objective_rows_l2(rows: &[Vec<(usize, f64)>], y: &LabelMatrix) -> f64 {
    let mut total = 0.0;
    for (i, row) in rows.iter().enumerate() {
        for &(j, w) in row {
            total += w * sparse_squared_l2(y, i, j);
        }
    }
    total
}

/// Objective value of g(Y) with the default squared loss.
pub fn objective_l2(eff: &EffectiveWeights, y: &LabelMatrix) -> f64 {
    objective_rows_l2(eff.eff_rows(), y)
}

/// Gradient of g(Y) for the squared loss: row p is
/// `sum_j w~_eff[p][j] (y_p - y_j)`.
pub fn objective_gradient(eff: &EffectiveWeights, y: &LabelMatrix) -> Vec<Vec<f64>> {
    graph_gradient_l2(eff.sym_rows(), y)
}

/// Same closed form over arbitrary symmetrized rows (used for the exclusion
/// part when linearizing the concave term).
pub fn graph_gradient_l2(sym_rows: &[Vec<(usize, f64)>], y: &LabelMatrix) -> Vec<Vec<f64>> {
    let m = y.m();
    let mut grad = vec![vec![0.0; m]; y.n()];
    for (p, row) in sym_rows.iter().enumerate() {
        let gp = &mut grad[p];
        let mut wsum = 0.0;
        for &(j, w) in row {
            wsum += w;
            for &c in y.support(j) {
                gp[c as usize] -= w * y.row(j)[c as usize];
            }
        }
        for &c in y.support(p) {
            gp[c as usize] += wsum * y.row(p)[c as usize];
        }
    }
    grad
}

/// Nonzero entries of the symmetrized effective row of node p.
pub fn decompose_node(eff: &EffectiveWeights, p: usize) -> Result<&[(usize, f64)]> {
    if p >= eff.n() {
        return Err(Error::NodeOutOfRange {
            index: p,
            n: eff.n(),
        });
    }
    Ok(eff.sym_row(p))
}

/// Objective values recorded along a solver run; serializes as
/// `iter,objective` CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyTrace {
    pub values: Vec<f64>,
}

impl EnergyTrace {
    pub fn push(&mut self, v: f64) {
        self.values.push(v);
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,objective\n");
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{v}").unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// True when the sequence never increases by more than `tol`.
    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}
