//! Times ansatz energy evaluations and one optimizer run per qubit count.
//!
//! `cargo run --release -p qaoa-core --example eval_throughput`

use std::time::Instant;

use qaoa_core::graphgen::{gen_gnm, gen_regular3};
use qaoa_core::simulator::Evaluator;
use qaoa_core::{build_cost, optimize, OptimizerConfig};

fn main() {
    for n in [10, 12, 16, 20] {
        let g = if n % 2 == 0 { gen_regular3(n, 1).unwrap() } else { gen_gnm(n, n, 1).unwrap() };
        let c = build_cost(&g).unwrap();
        let mut ev = Evaluator::new(&c).unwrap();
        let x = [0.3, 0.5, 0.7, 1.1, 0.9, 0.4];
        let reps = (1usize << 22 >> n).max(3);
        let t = Instant::now();
        let mut acc = 0.0;
        for _ in 0..reps {
            acc += ev.energy(&x);
        }
        let per = t.elapsed().as_secs_f64() / reps as f64;
        println!("n={n:2} p=3 eval {:9.1} us  ({acc:.3})", per * 1e6);
    }
    for p in [3, 6, 9] {
        let c = build_cost(&gen_gnm(10, 15, 2).unwrap()).unwrap();
        let cfg = OptimizerConfig::for_depth(p, 5).with_starts(4);
        let t = Instant::now();
        let r = optimize(&c, p, &cfg).unwrap();
        println!(
            "n=10 m=15 p={p}: best {:.4} evals/start {} exhausted {} in {:.2}s",
            r.best_value,
            r.evals_used / cfg.starts,
            r.exhausted_starts,
            t.elapsed().as_secs_f64()
        );
    }
}
