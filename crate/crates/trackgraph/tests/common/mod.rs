//! Shared oracles for the acceptance suite. Everything here is independent
//! of the implementation paths it checks: grid search only evaluates the
//! objective, the dense oracle builds Laplacians from scratch, and the
//! random instances go through the public graph constructors.

use rand::prelude::*;
use trackgraph::graphs::{combine, EffectiveWeights, SparseGraph};

/// Brute-force minimizer over the probability simplex by recursive grid
/// refinement; final resolution is below 1e-3 per coordinate.
pub fn grid_minimize(d: usize, objective: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut center = vec![1.0 / d as f64; d];
    let mut radius = 1.0f64;
    let mut h = 1.0f64 / 20.0;
    for _ in 0..6 {
        let mut best = center.clone();
        let mut best_f = objective(&center);
        let steps = (2.0 * radius / h).ceil() as i64;
        let mut point = Vec::with_capacity(d);
        enumerate_grid(d, &center, radius, h, steps, 0, 1.0, &mut point, &mut |w| {
            let f = objective(w);
            if f < best_f {
                best_f = f;
                best = w.to_vec();
            }
        });
        center = best;
        radius = 2.5 * h;
        h /= 4.0;
    }
    center
}

#[allow(clippy::too_many_arguments)]
fn enumerate_grid(
    d: usize,
    center: &[f64],
    radius: f64,
    h: f64,
    steps: i64,
    coord: usize,
    remaining: f64,
    point: &mut Vec<f64>,
    visit: &mut dyn FnMut(&[f64]),
) {
    if coord == d - 1 {
        if remaining >= -1e-12 && (center[coord] - remaining).abs() <= radius + 1e-12 {
            point.push(remaining.max(0.0));
            visit(point);
            point.pop();
        }
        return;
    }
    for k in -steps..=steps {
        let v = center[coord] + k as f64 * h;
        if v < -1e-12 || v > remaining + 1e-12 {
            continue;
        }
        point.push(v.max(0.0));
        enumerate_grid(d, center, radius, h, steps, coord + 1, remaining - v, point, visit);
        point.pop();
    }
}

/// Random signed instance: sparse positive rows plus symmetric unit
/// exclusion pairs, built through the public combine path.
pub fn random_instance(n: usize, rng: &mut impl Rng) -> EffectiveWeights {
    let mut gp = SparseGraph::new(n);
    for i in 0..n {
        let k = rng.random_range(1..4usize).min(n - 1);
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.shuffle(rng);
        others.truncate(k);
        let raw: Vec<f64> = (0..others.len()).map(|_| rng.random::<f64>() + 0.1).collect();
        let s: f64 = raw.iter().sum();
        for (j, r) in others.iter().zip(&raw) {
            gp.add_edge(i, *j, r / s);
        }
    }
    let mut gn = SparseGraph::new(n);
    for _ in 0..n / 2 {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j {
            gn.add_edge(i, j, 1.0);
            gn.add_edge(j, i, 1.0);
        }
    }
    combine(&[gp], &gn, &[1.0]).unwrap()
}

/// Track-shaped instance: `chains` strongly-coupled chains with exclusion
/// edges between co-indexed nodes.
pub fn track_instance(n: usize, chains: usize, rng: &mut impl Rng) -> EffectiveWeights {
    let len = n / chains;
    let mut gp = SparseGraph::new(chains * len);
    let mut gn = SparseGraph::new(chains * len);
    for c in 0..chains {
        let base = c * len;
        for k in 0..len - 1 {
            let w = 2.0 + rng.random::<f64>();
            gp.add_edge(base + k, base + k + 1, w);
            gp.add_edge(base + k + 1, base + k, w);
        }
    }
    for k in 0..len {
        for a in 0..chains {
            for b in a + 1..chains {
                gn.add_edge(a * len + k, b * len + k, 1.0);
                gn.add_edge(b * len + k, a * len + k, 1.0);
            }
        }
    }
    combine(&[gp], &gn, &[1.0]).unwrap()
}

/// Row-stochastic random matrix (not through the solver init path).
pub fn random_rows(n: usize, m: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / s).collect()
        })
        .collect()
}
