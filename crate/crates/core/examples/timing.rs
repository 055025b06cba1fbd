//! Times `stretch_factor` on a few model sizes: `cargo run --release --example timing`.

use std::time::Instant;

use stretchlab::stretch::stretch_factor;
use stretchlab::{EmbeddedGraph, ModelParams};

fn main() {
    let cases: &[(usize, f64)] = &[
        (400, 0.1), (400, 0.05), (1000, 0.02),
        (400, 0.9),
        (500, 0.5),
        (600, 0.2),
        (800, 1.0 - 2.0 / 800.0),
        (1000, 1.0 - 2.0 / 1000.0),
        (1000, 0.5),
        (500, 1.0 - 1.0 / (500.0 * (500f64).ln())),
    ];
    for &(n, p) in cases {
        let reps = 10;
        let start = Instant::now();
        let mut gen_time = 0.0;
        let mut total = 0.0;
        for seed in 0..reps {
            let t = Instant::now();
            let g = EmbeddedGraph::generate(ModelParams::new(n, p, seed).unwrap()).unwrap();
            gen_time += t.elapsed().as_secs_f64();
            total += stretch_factor(&g).unwrap().value().unwrap_or(f64::NAN);
        }
        let per = start.elapsed().as_secs_f64() / reps as f64;
        println!(
            "n={n:5} p={p:.4}  {:8.2} ms/graph (generation {:6.2} ms)  mean F {:.3}",
            per * 1e3,
            gen_time / reps as f64 * 1e3,
            total / reps as f64
        );
    }
}
