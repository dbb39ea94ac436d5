use std::time::Instant;
use rand::prelude::*;
use trackgraph::graphs::{combine, SparseGraph};
use trackgraph::joint::{random_init, solve_joint, JointConfig};
use trackgraph::nodewise::{solve_nodewise, NodewiseConfig};

fn track_instance(n: usize, chains: usize, rng: &mut impl Rng) -> trackgraph::graphs::EffectiveWeights {
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

fn main() {
    for round in 0..3 {
        let mut line = format!("round {round}:");
        for n in [100usize, 200, 400] {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(801);
            let eff = track_instance(n, 4, &mut rng);
            let init = random_init(eff.n(), eff.n(), 1);
            let mut ratios = vec![];
            for _ in 0..5 {
                let t0 = Instant::now();
                let _ = solve_joint(&eff, &JointConfig { t_joint: 60, outer_tol: 1e-7, ..Default::default() }, Some(init.clone())).unwrap();
                let tj = t0.elapsed().as_secs_f64();
                let t1 = Instant::now();
                let _ = solve_nodewise(&eff, &NodewiseConfig::default(), Some(init.clone())).unwrap();
                let tn = t1.elapsed().as_secs_f64();
                ratios.push(tj / tn);
            }
            ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
            line += &format!("  n={n}: {:.0}", ratios[2]);
        }
        println!("{line}");
    }
}
