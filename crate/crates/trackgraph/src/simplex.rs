//! Euclidean simplex projection and projected-gradient solvers.
//!
//! These primitives back both the graph construction (reconstruction-weight
//! programs) and the label solvers: everything that must stay on a
//! probability simplex funnels through here.

use crate::error::{Error, Result};

/// A point on the probability simplex: nonnegative entries summing to one
/// (within 1e-9).
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty simplex vector".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "simplex vector entries must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "simplex vector sums to {sum}, expected 1"
            )));
        }
        Ok(SimplexVector(values))
    }

    #[cfg(test)]
    pub(crate) fn new_unchecked(values: Vec<f64>) -> Self {
        SimplexVector(values)
    }

    pub fn uniform(d: usize) -> Self {
        SimplexVector(vec![1.0 / d as f64; d])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for SimplexVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Exact Euclidean projection onto the simplex (sort-based, O(d log d)).
pub fn project_to_simplex(v: &[f64]) -> Result<SimplexVector> {
    if v.is_empty() {
        return Err(Error::InvalidInput("cannot project empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("simplex projection input"));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (i as f64 + 1.0);
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    let projected: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    Ok(SimplexVector(projected))
}

/// Projects each row of a matrix onto the simplex, in place.
pub fn project_rows(rows: &mut [Vec<f64>]) -> Result<()> {
    for row in rows.iter_mut() {
        *row = project_to_simplex(row)?.into_inner();
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// Halve the step until the Armijo sufficient-decrease test passes.
    Backtracking { beta: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgdConfig {
    pub max_iters: usize,
    /// Relative objective-decrease threshold for convergence.
    pub tol: f64,
    pub step_rule: StepRule,
}

impl Default for PgdConfig {
    fn default() -> Self {
        PgdConfig {
            max_iters: 500,
            tol: 1e-8,
            step_rule: StepRule::Backtracking { beta: 0.5, c: 1e-4 },
        }
    }
}

impl PgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("pgd max_iters must be >= 1".into()));
        }
        if self.tol <= 0.0 || self.tol.is_nan() {
            return Err(Error::Config("pgd tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PgdOutcome {
    pub point: Vec<Vec<f64>>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn frobenius_dot(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>())
        .sum()
}

/// Projected gradient descent over a product of simplices (one per row).
///
/// Every iterate is feasible; the best iterate seen (including the initial
/// point) is returned, so the objective never increases across a call.
pub fn projected_gradient<F, G>(
    objective: F,
    gradient: G,
    init: Vec<Vec<f64>>,
    cfg: &PgdConfig,
) -> Result<PgdOutcome>
where
    F: Fn(&[Vec<f64>]) -> f64,
    G: Fn(&[Vec<f64>]) -> Vec<Vec<f64>>,
{
    cfg.validate()?;
    let mut x = init;
    project_rows(&mut x)?;
    let mut fx = objective(&x);
    if !fx.is_finite() {
        return Err(Error::NonFinite("objective at initial point"));
    }
    let mut best = x.clone();
    let mut best_f = fx;
    let mut converged = false;
    let mut iterations = 0;
    let mut step = match cfg.step_rule {
        StepRule::Fixed(eta) => eta,
        StepRule::Backtracking { .. } => 1.0,
    };

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        let grad = gradient(&x);
        if grad
            .iter()
            .any(|row| row.iter().any(|g| !g.is_finite()))
        {
            return Err(Error::NonFinite("gradient"));
        }

        let next;
        let f_next;
        match cfg.step_rule {
            StepRule::Fixed(_) => {
                let mut cand = step_point(&x, &grad, step)?;
                project_rows(&mut cand)?;
                f_next = objective(&cand);
                next = cand;
            }
            StepRule::Backtracking { beta, c } => {
                // Grow the step back between iterations so a single steep
                // region does not pin it at a tiny value forever.
                step = (step / beta).min(1e6);
                let mut accepted = None;
                while step > 1e-18 {
                    let mut cand = step_point(&x, &grad, step)?;
                    project_rows(&mut cand)?;
                    let fc = objective(&cand);
                    let diff: Vec<Vec<f64>> = cand
                        .iter()
                        .zip(&x)
                        .map(|(rc, rx)| rc.iter().zip(rx).map(|(a, b)| a - b).collect())
                        .collect();
                    let decrease = frobenius_dot(&grad, &diff);
                    if fc.is_finite() && fc <= fx + c * decrease && fc <= fx {
                        accepted = Some((cand, fc));
                        break;
                    }
                    step *= beta;
                }
                match accepted {
                    Some((cand, fc)) => {
                        next = cand;
                        f_next = fc;
                    }
                    None => {
                        // No acceptable step: stationary to machine precision.
                        converged = true;
                        break;
                    }
                }
            }
        }

        let reference = fx.abs().max(1.0);
        let decrease = fx - f_next;
        x = next;
        fx = f_next;
        if fx < best_f {
            best_f = fx;
            best = x.clone();
        }
        if decrease.abs() <= cfg.tol * reference {
            converged = true;
            break;
        }
    }

    Ok(PgdOutcome {
        point: best,
        objective: best_f,
        converged,
        iterations,
    })
}

fn step_point(x: &[Vec<f64>], grad: &[Vec<f64>], step: f64) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(x.len());
    for (rx, rg) in x.iter().zip(grad) {
        let row: Vec<f64> = rx.iter().zip(rg).map(|(a, g)| a - step * g).collect();
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gradient step"));
        }
        out.push(row);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub weights: SimplexVector,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes `0.5 w' (P + ridge I) w + q' w` over the simplex.
///
/// `P` must be symmetric positive semi-definite. With `ridge > 0` the
/// problem is strongly convex and the minimizer unique. Non-convergence
/// within the iteration budget returns the best iterate, flagged.
pub fn solve_simplex_qp(
    p: &[Vec<f64>],
    ridge: f64,
    q: &[f64],
    cfg: &PgdConfig,
) -> Result<QpSolution> {
    let d = q.len();
    let init = SimplexVector::uniform(d);
    solve_simplex_qp_from(p, ridge, q, init, cfg)
}

/// Same as [`solve_simplex_qp`] but starting from a caller-provided feasible
/// point.
pub fn solve_simplex_qp_from(
    p: &[Vec<f64>],
    ridge: f64,
    q: &[f64],
    init: SimplexVector,
    cfg: &PgdConfig,
) -> Result<QpSolution> {
    let d = q.len();
    if d == 0 {
        return Err(Error::InvalidInput("empty qp".into()));
    }
    if p.len() != d || p.iter().any(|row| row.len() != d) {
        return Err(Error::SizeMismatch(format!(
            "P must be {d}x{d} to match q"
        )));
    }
    if ridge < 0.0 {
        return Err(Error::InvalidInput("ridge must be >= 0".into()));
    }
    if init.len() != d {
        return Err(Error::SizeMismatch("init length != q length".into()));
    }
    if d == 1 {
        // The simplex is the single point (1).
        let obj = 0.5 * (p[0][0] + ridge) + q[0];
        return Ok(QpSolution {
            weights: SimplexVector(vec![1.0]),
            objective: obj,
            converged: true,
            iterations: 0,
        });
    }

    let objective = |rows: &[Vec<f64>]| -> f64 {
        let w = &rows[0];
        let mut quad = 0.0;
        for (i, row) in p.iter().enumerate() {
            let mut acc = 0.0;
            for (j, pij) in row.iter().enumerate() {
                acc += pij * w[j];
            }
            quad += w[i] * acc;
        }
        let ridge_term: f64 = w.iter().map(|x| x * x).sum();
        let lin: f64 = q.iter().zip(w).map(|(a, b)| a * b).sum();
        0.5 * (quad + ridge * ridge_term) + lin
    };
    let gradient = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let w = &rows[0];
        let mut g = vec![0.0; d];
        for (i, row) in p.iter().enumerate() {
            let mut acc = 0.0;
            for (j, pij) in row.iter().enumerate() {
                acc += pij * w[j];
            }
            g[i] = acc + ridge * w[i] + q[i];
        }
        vec![g]
    };

    let outcome = projected_gradient(objective, gradient, vec![init.into_inner()], cfg)?;
    Ok(QpSolution {
        weights: SimplexVector(outcome.point.into_iter().next().unwrap()),
        objective: outcome.objective,
        converged: outcome.converged,
        iterations: outcome.iterations,
    })
}
