//! Seeded generators for the four benchmark graph families and the
//! edges-per-node density measure.
//!
//! All generators draw structure first and weights second from one
//! [`crate::rng::Rng`] stream seeded with the caller's seed, then weight each
//! edge of the canonical (sorted, `i < j`) edge list in order.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{QaoaError, Result};
use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Uniform G(n, m).
    Uniform,
    /// Random simple cubic graph.
    Regular3,
    /// Square lattice with random boundary deletions.
    Grid,
    /// Fully connected (SK-style couplings).
    Complete,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Uniform,
        Family::Regular3,
        Family::Grid,
        Family::Complete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Regular3 => "regular3",
            Family::Grid => "grid",
            Family::Complete => "complete",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            Family::Uniform => 1,
            Family::Regular3 => 2,
            Family::Grid => 3,
            Family::Complete => 4,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = QaoaError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| QaoaError::invalid(format!("unknown graph family '{s}'")))
    }
}

/// One weighted edge, always stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: i8,
}

/// An undirected ±1-weighted problem graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    family: Family,
    seed: u64,
}

impl Graph {
    /// Builds a graph from arbitrary edges, canonicalizing each to `i < j` and
    /// sorting. Rejects self-loops, duplicates, out-of-range nodes and weights
    /// other than ±1.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, i8)>,
        family: Family,
        seed: u64,
    ) -> Result<Self> {
        let mut canon = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(QaoaError::invalid(format!("self-loop on node {a}")));
            }
            if a >= n || b >= n {
                return Err(QaoaError::invalid(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if w != 1 && w != -1 {
                return Err(QaoaError::invalid(format!("edge weight {w} is not ±1")));
            }
            canon.push(Edge {
                i: a.min(b),
                j: a.max(b),
                w,
            });
        }
        canon.sort_unstable();
        if let Some(pair) = canon.windows(2).find(|p| (p[0].i, p[0].j) == (p[1].i, p[1].j)) {
            return Err(QaoaError::invalid(format!(
                "duplicate edge ({}, {})",
                pair[0].i, pair[0].j
            )));
        }
        Ok(Graph {
            n,
            edges: canon,
            family,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg
    }

    pub fn density(&self) -> Density {
        density(self)
    }

    /// Plain-text edge list: a header `n m family seed`, then `i j w` per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.n, self.m(), self.family, self.seed);
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.i, e.j, e.w));
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(QaoaError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(QaoaError::Parse {
                line: hline,
                msg: format!("header needs 4 fields, found {}", fields.len()),
            });
        }
        let n: usize = parse_field(fields[0], hline)?;
        let m: usize = parse_field(fields[1], hline)?;
        let family: Family = fields[2].parse().map_err(|_| QaoaError::Parse {
            line: hline,
            msg: format!("unknown family '{}'", fields[2]),
        })?;
        let seed: u64 = parse_field(fields[3], hline)?;

        let mut edges = Vec::with_capacity(m);
        for (k, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(QaoaError::Parse {
                    line: k,
                    msg: format!("edge line needs 3 fields, found {}", f.len()),
                });
            }
            edges.push((parse_field(f[0], k)?, parse_field(f[1], k)?, parse_field(f[2], k)?));
        }
        if edges.len() != m {
            return Err(QaoaError::Parse {
                line: hline,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, edges, family, seed)
    }
}

fn parse_field<T: FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| QaoaError::Parse {
        line,
        msg: format!("bad field '{s}'"),
    })
}

/// Edges per node, held as the exact ratio `m / n`.
#[derive(Debug, Clone, Copy)]
pub struct Density {
    edges: u64,
    nodes: u64,
}

impl Density {
    pub fn new(edges: usize, nodes: usize) -> Self {
        assert!(nodes > 0, "density of an empty node set");
        Density {
            edges: edges as u64,
            nodes: nodes as u64,
        }
    }

    pub fn numer(&self) -> u64 {
        self.edges
    }

    pub fn denom(&self) -> u64 {
        self.nodes
    }

    /// The ratio in lowest terms.
    pub fn reduced(&self) -> (u64, u64) {
        let g = gcd(self.edges, self.nodes);
        (self.edges / g, self.nodes / g)
    }

    pub fn as_f64(&self) -> f64 {
        self.edges as f64 / self.nodes as f64
    }

    /// Exact decimal expansion when `m / n` terminates (denominator of the form
    /// 2^a·5^b), otherwise `None`.
    pub fn exact_decimal(&self) -> Option<String> {
        let (num, mut den) = self.reduced();
        let (mut twos, mut fives) = (0u32, 0u32);
        while den % 2 == 0 {
            den /= 2;
            twos += 1;
        }
        while den % 5 == 0 {
            den /= 5;
            fives += 1;
        }
        if den != 1 {
            return None;
        }
        let digits = twos.max(fives);
        let (_, full_den) = self.reduced();
        // num / full_den = num * 10^digits / full_den / 10^digits, exactly.
        let scaled = num as u128 * 10u128.pow(digits) / full_den as u128;
        let int = scaled / 10u128.pow(digits);
        let frac = scaled % 10u128.pow(digits);
        Some(if digits == 0 {
            format!("{int}")
        } else {
            format!("{int}.{frac:0width$}", width = digits as usize)
        })
    }
}

impl PartialEq for Density {
    fn eq(&self, other: &Self) -> bool {
        self.edges as u128 * other.nodes as u128 == other.edges as u128 * self.nodes as u128
    }
}

impl Eq for Density {}

impl PartialOrd for Density {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Density {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.edges as u128 * other.nodes as u128).cmp(&(other.edges as u128 * self.nodes as u128))
    }
}

impl std::hash::Hash for Density {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.reduced().hash(state);
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact_decimal() {
            Some(s) => f.write_str(&s),
            None => write!(f, "{}", self.as_f64()),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

pub fn density(g: &Graph) -> Density {
    Density::new(g.m(), g.n())
}

fn max_edges(n: usize) -> usize {
    n * (n - 1) / 2
}

fn draw_weights(rng: &mut Rng, pairs: Vec<(usize, usize)>) -> Vec<(usize, usize, i8)> {
    pairs
        .into_iter()
        .map(|(i, j)| (i, j, if rng.gen::<bool>() { 1 } else { -1 }))
        .collect()
}

fn finish(n: usize, mut pairs: Vec<(usize, usize)>, family: Family, seed: u64, rng: &mut Rng) -> Graph {
    for p in pairs.iter_mut() {
        if p.0 > p.1 {
            *p = (p.1, p.0);
        }
    }
    pairs.sort_unstable();
    let edges = draw_weights(rng, pairs);
    Graph::new(n, edges, family, seed).expect("generator produced an invalid graph")
}

/// Maps a rank in `0..n(n-1)/2` to the pair it indexes in lexicographic order
/// of `(i, j)` with `i < j`.
fn unrank_pair(n: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// Uniform G(n, m): every m-subset of the `n(n-1)/2` possible edges is equally
/// likely.
pub fn gen_gnm(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(QaoaError::invalid(format!("G(n,m) needs n >= 2, got {n}")));
    }
    let total = max_edges(n);
    if m > total {
        return Err(QaoaError::invalid(format!(
            "m = {m} exceeds the {total} possible edges on {n} nodes"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let pairs = rand::seq::index::sample(&mut rng, total, m)
        .into_iter()
        .map(|k| unrank_pair(n, k))
        .collect();
    Ok(finish(n, pairs, Family::Uniform, seed, &mut rng))
}

/// Random simple cubic graph via the pairing model: shuffle `3n` stubs, pair
/// neighbours, and restart whenever a self-loop or repeated edge appears.
pub fn gen_regular3(n: usize, seed: u64) -> Result<Graph> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(QaoaError::invalid(format!(
            "3-regular graphs need an even n >= 4, got {n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v, v, v]).collect();
    let pairs = 'attempt: loop {
        stubs.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(3 * n / 2);
        let mut pairs = Vec::with_capacity(3 * n / 2);
        for s in stubs.chunks_exact(2) {
            let (a, b) = (s[0].min(s[1]), s[0].max(s[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            pairs.push((a, b));
        }
        break pairs;
    };
    Ok(finish(n, pairs, Family::Regular3, seed, &mut rng))
}

/// Where the surviving nodes of a grid instance sit on the original lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridLayout {
    /// Side length `N` of the starting `N×N` lattice.
    pub side: usize,
    /// `positions[v]` is the row-major lattice site of node `v`.
    pub positions: Vec<usize>,
}

impl GridLayout {
    pub fn are_lattice_neighbours(&self, a: usize, b: usize) -> bool {
        let (pa, pb) = (self.positions[a], self.positions[b]);
        let (ra, ca) = (pa / self.side, pa % self.side);
        let (rb, cb) = (pb / self.side, pb % self.side);
        ra.abs_diff(rb) + ca.abs_diff(cb) == 1
    }
}

fn grid_sites(n: usize, rng: &mut Rng) -> GridLayout {
    let side = (1..).find(|s: &usize| s * s >= n).unwrap();
    let sites = side * side;
    let neighbours = |v: usize| {
        let (r, c) = (v / side, v % side);
        [
            (r > 0).then(|| v - side),
            (r + 1 < side).then(|| v + side),
            (c > 0).then(|| v - 1),
            (c + 1 < side).then(|| v + 1),
        ]
        .into_iter()
        .flatten()
    };

    let mut alive = vec![true; sites];
    let mut degree: Vec<usize> = (0..sites).map(|v| neighbours(v).count()).collect();
    for _ in 0..sites - n {
        // Row-major candidate order keeps the draw reproducible.
        let boundary: Vec<usize> = (0..sites).filter(|&v| alive[v] && degree[v] < 4).collect();
        let victim = boundary[rng.gen_range(0..boundary.len() as u64) as usize];
        alive[victim] = false;
        for u in neighbours(victim) {
            if alive[u] {
                degree[u] -= 1;
            }
        }
    }
    GridLayout {
        side,
        positions: (0..sites).filter(|&v| alive[v]).collect(),
    }
}

/// Node layout that [`gen_grid`] produces for the same arguments.
pub fn grid_layout(n: usize, seed: u64) -> Result<GridLayout> {
    if n < 2 {
        return Err(QaoaError::invalid(format!("grid graphs need n >= 2, got {n}")));
    }
    Ok(grid_sites(n, &mut rng_from_seed(seed)))
}

/// Square-lattice instance: start from the smallest `N×N` grid holding `n`
/// nodes and delete uniformly chosen boundary nodes (current degree < 4) until
/// `n` remain. Survivors are relabelled in row-major order. Connectivity is not
/// enforced.
pub fn gen_grid(n: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(QaoaError::invalid(format!("grid graphs need n >= 2, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let layout = grid_sites(n, &mut rng);
    let side = layout.side;
    let mut label = vec![usize::MAX; side * side];
    for (k, &site) in layout.positions.iter().enumerate() {
        label[site] = k;
    }
    let mut pairs = Vec::new();
    for &v in &layout.positions {
        let (r, c) = (v / side, v % side);
        if c + 1 < side && label[v + 1] != usize::MAX {
            pairs.push((label[v], label[v + 1]));
        }
        if r + 1 < side && label[v + side] != usize::MAX {
            pairs.push((label[v], label[v + side]));
        }
    }
    Ok(finish(n, pairs, Family::Grid, seed, &mut rng))
}

/// Complete graph with random ±1 couplings.
pub fn gen_complete(n: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(QaoaError::invalid(format!("complete graphs need n >= 2, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Ok(finish(n, pairs, Family::Complete, seed, &mut rng))
}

/// Dispatches to the family's generator. `m` is only consulted for
/// [`Family::Uniform`].
pub fn generate(family: Family, n: usize, m: Option<usize>, seed: u64) -> Result<Graph> {
    match family {
        Family::Uniform => {
            let m = m.ok_or_else(|| QaoaError::invalid("uniform graphs need an edge count"))?;
            gen_gnm(n, m, seed)
        }
        Family::Regular3 => gen_regular3(n, seed),
        Family::Grid => gen_grid(n, seed),
        Family::Complete => gen_complete(n, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnm_complete_when_all_edges_requested() {
        let g = gen_gnm(4, 6, 99).unwrap();
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn gnm_density_and_determinism() {
        let g = gen_gnm(10, 15, 5).unwrap();
        assert_eq!(g.density(), Density::new(3, 2));
        assert_eq!(g.density().to_string(), "1.5");

        let a = gen_gnm(10, 5, 42).unwrap().to_edge_list();
        let b = gen_gnm(10, 5, 42).unwrap().to_edge_list();
        assert_eq!(a.as_bytes(), b.as_bytes());
        assert_ne!(a, gen_gnm(10, 5, 43).unwrap().to_edge_list());
    }

    #[test]
    fn gnm_rejects_bad_arguments() {
        assert!(matches!(gen_gnm(4, 7, 0), Err(QaoaError::InvalidArgument(_))));
        assert!(matches!(gen_gnm(1, 0, 0), Err(QaoaError::InvalidArgument(_))));
        assert_eq!(gen_gnm(5, 0, 0).unwrap().m(), 0);
    }

    #[test]
    fn unrank_covers_all_pairs_in_order() {
        let n = 7;
        let expected: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let got: Vec<_> = (0..max_edges(n)).map(|k| unrank_pair(n, k)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn regular3_small_cases() {
        let k4 = gen_regular3(4, 1).unwrap();
        assert_eq!(k4.m(), 6);
        let g = gen_regular3(8, 7).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert_eq!(g.m(), 12);
        assert_eq!(gen_regular3(10, 3).unwrap().density().to_string(), "1.5");
        assert!(gen_regular3(7, 0).is_err());
        assert!(gen_regular3(2, 0).is_err());
    }

    #[test]
    fn grid_small_cases() {
        let g = gen_grid(4, 11).unwrap();
        assert_eq!((g.n(), g.m()), (4, 4));
        assert_eq!(g.density().to_string(), "1");
        assert_eq!(grid_layout(4, 11).unwrap().positions, vec![0, 1, 2, 3]);

        let g = gen_grid(9, 2).unwrap();
        assert_eq!(g.m(), 12);
        let g = gen_grid(12, 3).unwrap();
        assert_eq!(g.n(), 12);
        assert!(g.density() < Density::new(2, 1));
        assert!(gen_grid(1, 0).is_err());
    }

    #[test]
    fn complete_counts() {
        assert_eq!(gen_complete(10, 0).unwrap().density().to_string(), "4.5");
        assert_eq!(gen_complete(11, 0).unwrap().density().to_string(), "5");
        let g = gen_complete(2, 0).unwrap();
        assert_eq!((g.m(), g.density().to_string().as_str()), (1, "0.5"));
        assert_eq!(gen_complete(20, 0).unwrap().m(), 190);
    }

    #[test]
    fn density_of_empty_graph() {
        let g = Graph::new(5, [], Family::Uniform, 0).unwrap();
        assert_eq!(density(&g).as_f64(), 0.0);
        assert_eq!(density(&g).to_string(), "0");
    }

    #[test]
    fn exact_decimal_rendering() {
        assert_eq!(Density::new(7, 10).to_string(), "0.7");
        assert_eq!(Density::new(1, 8).to_string(), "0.125");
        assert_eq!(Density::new(21, 20).to_string(), "1.05");
        assert_eq!(Density::new(7, 12).exact_decimal(), None);
        assert_eq!(Density::new(7, 12).to_string(), (7.0f64 / 12.0).to_string());
    }

    #[test]
    fn graph_new_validates() {
        assert!(Graph::new(3, [(0, 0, 1)], Family::Uniform, 0).is_err());
        assert!(Graph::new(3, [(0, 3, 1)], Family::Uniform, 0).is_err());
        assert!(Graph::new(3, [(0, 1, 2)], Family::Uniform, 0).is_err());
        assert!(Graph::new(3, [(0, 1, 1), (1, 0, -1)], Family::Uniform, 0).is_err());
        let g = Graph::new(3, [(2, 0, -1), (1, 0, 1)], Family::Uniform, 0).unwrap();
        assert_eq!(g.edges()[0], Edge { i: 0, j: 1, w: 1 });
        assert_eq!(g.edges()[1], Edge { i: 0, j: 2, w: -1 });
    }

    #[test]
    fn edge_list_parse_errors() {
        assert!(Graph::from_edge_list("").is_err());
        assert!(Graph::from_edge_list("3 1 uniform").is_err());
        assert!(Graph::from_edge_list("3 2 uniform 0\n0 1 1\n").is_err());
        assert!(Graph::from_edge_list("3 1 nope 0\n0 1 1\n").is_err());
        assert!(Graph::from_edge_list("3 1 uniform 0\n0 1 x\n").is_err());
        let g = Graph::from_edge_list("3 1 grid 18446744073709551615\n0 2 -1\n").unwrap();
        assert_eq!(g.seed(), u64::MAX);
        assert_eq!(g.family(), Family::Grid);
    }

    #[test]
    fn family_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.as_str().parse::<Family>().unwrap(), f);
        }
        assert!("sk".parse::<Family>().is_err());
    }
}
