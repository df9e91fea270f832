//! Per-kernel cost in ns per amplitude: cost phase, mixer, expectation.
//!
//! `cargo run --release -p qaoa-core --example kernel_parts`

use std::time::Instant;

use qaoa_core::graphgen::gen_regular3;
use qaoa_core::simulator::StateVector;
use qaoa_core::{build_cost, expectation};

fn main() {
    for n in [12usize, 16, 20] {
        let c = build_cost(&gen_regular3(n, 1).unwrap()).unwrap();
        let mut s = StateVector::init_plus(n).unwrap();
        let reps = (1usize << 24 >> n).max(3);
        let t = Instant::now();
        for _ in 0..reps { s.apply_cost_phase(0.3, &c).unwrap(); }
        let phase = t.elapsed().as_secs_f64() / reps as f64;
        let t = Instant::now();
        for _ in 0..reps { s.apply_mixer(0.3); }
        let mix = t.elapsed().as_secs_f64() / reps as f64;
        let t = Instant::now();
        let mut e = 0.0;
        for _ in 0..reps { e += expectation(&s, &c).unwrap(); }
        let ex = t.elapsed().as_secs_f64() / reps as f64;
        let per = |x: f64| x * 1e9 / (1u64 << n) as f64;
        println!("n={n}: phase {:.2} ns/amp, mixer {:.2} ns/amp, expect {:.2} ns/amp ({e:.2})", per(phase), per(mix), per(ex));
    }
}
