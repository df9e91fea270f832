use std::collections::HashMap;

use proptest::prelude::*;
use qaoa_core::graphgen::{gen_complete, gen_gnm, gen_grid, gen_regular3, generate, grid_layout};
use qaoa_core::{Density, Family, Graph};

const SIGMAS: f64 = 3.0;

fn edge_set(g: &Graph) -> Vec<(usize, usize)> {
    g.edges().iter().map(|e| (e.i, e.j)).collect()
}

#[test]
fn gnm_edge_sets_are_uniform() {
    const SEEDS: u64 = 10_000;
    let mut counts: HashMap<Vec<(usize, usize)>, u64> = HashMap::new();
    for seed in 0..SEEDS {
        *counts.entry(edge_set(&gen_gnm(5, 2, seed).unwrap())).or_default() += 1;
    }
    assert_eq!(counts.len(), 45);
    let p = 1.0 / 45.0;
    let expected = SEEDS as f64 * p;
    let sigma = (SEEDS as f64 * p * (1.0 - p)).sqrt();
    for (set, &k) in &counts {
        assert!(
            (k as f64 - expected).abs() <= SIGMAS * sigma,
            "{set:?} drawn {k} times, expected {expected:.1} ± {:.1}",
            SIGMAS * sigma
        );
    }
}

#[test]
fn weights_are_balanced() {
    let (mut plus, mut total) = (0u64, 0u64);
    for seed in 0..400 {
        for e in gen_gnm(12, 30, seed).unwrap().edges() {
            total += 1;
            plus += u64::from(e.w == 1);
        }
    }
    assert!(total >= 10_000);
    let sigma = (total as f64 * 0.25).sqrt();
    assert!((plus as f64 - total as f64 / 2.0).abs() <= SIGMAS * sigma, "{plus} of {total}");
}

#[test]
fn forced_structures() {
    let k4 = edge_set(&gen_gnm(4, 6, 3).unwrap());
    assert_eq!(k4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    assert_eq!(edge_set(&gen_regular3(4, 11).unwrap()), k4);
    let g = gen_grid(4, 5).unwrap();
    assert_eq!(edge_set(&g), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
    assert_eq!(g.density(), Density::new(1, 1));
    assert_eq!(gen_complete(20, 1).unwrap().m(), 190);
    assert_eq!(gen_complete(2, 1).unwrap().density(), Density::new(1, 2));
}

#[test]
fn spec_densities() {
    assert_eq!(gen_gnm(10, 15, 8).unwrap().density().to_string(), "1.5");
    assert_eq!(gen_regular3(16, 8).unwrap().density().to_string(), "1.5");
    assert_eq!(gen_complete(10, 8).unwrap().density().to_string(), "4.5");
    assert_eq!(gen_complete(11, 8).unwrap().density().to_string(), "5");
    assert_eq!(Graph::new(5, [], Family::Uniform, 0).unwrap().density().to_string(), "0");
    assert!(gen_grid(12, 3).unwrap().density() < Density::new(2, 1));
    assert!(gen_grid(9, 1).unwrap().m() <= 12);
}

#[test]
fn bad_arguments() {
    assert!(gen_gnm(1, 0, 0).is_err());
    assert!(gen_gnm(5, 11, 0).is_err());
    assert!(gen_regular3(7, 0).is_err());
    assert!(gen_regular3(2, 0).is_err());
    assert!(gen_grid(1, 0).is_err());
    assert!(gen_complete(1, 0).is_err());
}

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

proptest! {
    #[test]
    fn generators_are_deterministic(f in family(), half in 2usize..10, seed: u64) {
        let n = 2 * half;
        let m = (f == Family::Uniform).then_some(n + 1);
        let a = generate(f, n, m, seed).unwrap();
        let b = generate(f, n, m, seed).unwrap();
        prop_assert_eq!(a.to_edge_list(), b.to_edge_list());
    }

    #[test]
    fn edge_list_round_trip(f in family(), half in 2usize..10, seed: u64) {
        let n = 2 * half;
        let m = (f == Family::Uniform).then_some(n);
        let g = generate(f, n, m, seed).unwrap();
        prop_assert_eq!(Graph::from_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn gnm_is_simple_with_exact_m(n in 2usize..16, frac in 0.0f64..=1.0, seed: u64) {
        let m = (frac * (n * (n - 1) / 2) as f64) as usize;
        let g = gen_gnm(n, m, seed).unwrap();
        prop_assert_eq!(g.m(), m);
        let set = edge_set(&g);
        prop_assert!(set.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(g.edges().iter().all(|e| e.i < e.j && e.j < n && (e.w == 1 || e.w == -1)));
    }

    #[test]
    fn regular3_degrees(half in 2usize..13, seed: u64) {
        let n = 2 * half;
        let g = gen_regular3(n, seed).unwrap();
        prop_assert!(g.degrees().iter().all(|&d| d == 3));
        prop_assert_eq!(2 * g.m(), 3 * n);
        let set = edge_set(&g);
        prop_assert!(set.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_is_induced_lattice_subgraph(n in 2usize..40, seed: u64) {
        let g = gen_grid(n, seed).unwrap();
        let layout = grid_layout(n, seed).unwrap();
        let side = (1..).find(|s: &usize| s * s >= n).unwrap();
        prop_assert_eq!(layout.side, side);
        prop_assert_eq!(layout.positions.len(), n);
        // Row-major relabelling keeps original positions sorted.
        prop_assert!(layout.positions.windows(2).all(|w| w[0] < w[1]));
        let mut want = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if layout.are_lattice_neighbours(a, b) {
                    want.push((a, b));
                }
            }
        }
        prop_assert_eq!(edge_set(&g), want);
        let ceil_root = (0..).find(|k: &usize| k * k >= 4 * n).unwrap();
        prop_assert!(g.m() <= 2 * n - ceil_root);
    }
}
