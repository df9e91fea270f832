//! Dense state-vector evolution of the QAOA ansatz
//! `|ψ(γ, β)⟩ = Π_k exp(−iβ_k Σ_i X_i) exp(−iγ_k C) |+⟩^⊗n`, layer 1 applied
//! first.
//!
//! Amplitudes are stored as separate real and imaginary arrays so the mixer
//! kernels vectorize. The mixer factorizes into one `exp(−iβX)` rotation per
//! qubit, applied as a butterfly over index pairs `(z, z ^ 2^q)`. Qubits below
//! [`BLOCK_BITS`] are rotated inside cache-sized blocks in a single sweep
//! (fused with the cost phase when evolving a full layer); the remaining
//! qubits are handled in a second sweep over cache-sized column tiles.
//! Neighbouring qubits are rotated two at a time.
//!
//! Sums over the state (norm, expectation, overlap) are reduced in fixed
//! [`REDUCE_CHUNK`]-sized pieces whose partials are added in index order, so
//! results are bitwise identical for any thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cost::{check_capacity, DiagonalCost, GroundSet};
use crate::error::{QaoaError, Result};

/// log2 of the amplitude block kept hot in cache (64 KiB of amplitudes).
pub const BLOCK_BITS: usize = 12;
const REDUCE_CHUNK: usize = 1 << 12;
/// Below this many qubits everything runs on the calling thread.
const PAR_MIN_QUBITS: usize = 15;
/// Target size of a high-qubit tile, in amplitudes.
const TILE_ELEMS: usize = 1 << 14;
/// Column run gathered per row. Wider runs put the rotation strides on large
/// powers of two and thrash L1 sets.
const MIN_TILE_WIDTH: usize = 32;
const MAX_TILE_WIDTH: usize = 256;

pub const GAMMA_PERIOD: f64 = PI;
pub const BETA_PERIOD: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Depth-`p` angles: `gammas[k]` in `[0, π)`, `betas[k]` in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

/// Reduces `x` into `[0, period)`.
pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to `period` itself for tiny negative inputs.
    if r >= period {
        0.0
    } else {
        r
    }
}

impl ParamVector {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(QaoaError::invalid(format!(
                "{} gammas but {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        if gammas.is_empty() {
            return Err(QaoaError::invalid("depth must be at least 1"));
        }
        if let Some(g) = gammas.iter().find(|g| !(0.0..GAMMA_PERIOD).contains(*g)) {
            return Err(QaoaError::invalid(format!("gamma {g} outside [0, π)")));
        }
        if let Some(b) = betas.iter().find(|b| !(0.0..BETA_PERIOD).contains(*b)) {
            return Err(QaoaError::invalid(format!("beta {b} outside [0, 2π)")));
        }
        Ok(ParamVector { gammas, betas })
    }

    /// Folds arbitrary real angles periodically into the parameter box.
    pub fn wrapped(gammas: &[f64], betas: &[f64]) -> Result<Self> {
        ParamVector::new(
            gammas.iter().map(|&g| wrap(g, GAMMA_PERIOD)).collect(),
            betas.iter().map(|&b| wrap(b, BETA_PERIOD)).collect(),
        )
    }

    pub fn zeros(p: usize) -> Result<Self> {
        ParamVector::new(vec![0.0; p], vec![0.0; p])
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Appends `extra` identity layers (γ = β = 0).
    pub fn padded(&self, extra: usize) -> Self {
        let mut out = self.clone();
        out.gammas.extend(std::iter::repeat_n(0.0, extra));
        out.betas.extend(std::iter::repeat_n(0.0, extra));
        out
    }

    /// Flat `[γ_1..γ_p, β_1..β_p]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }
}

impl StateVector {
    /// `|+⟩^⊗n`: every amplitude `2^(−n/2)`.
    pub fn init_plus(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        Ok(StateVector {
            n,
            re: vec![(dim as f64).sqrt().recip(); dim],
            im: vec![0.0; dim],
        })
    }

    /// Computational basis state `|z⟩`.
    pub fn basis(n: usize, z: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        if z >= dim {
            return Err(QaoaError::invalid(format!("basis index {z} out of range")));
        }
        let mut re = vec![0.0; dim];
        re[z] = 1.0;
        Ok(StateVector {
            n,
            re,
            im: vec![0.0; dim],
        })
    }

    /// Wraps caller-provided amplitudes. The vector must have length `2^n`;
    /// normalization is the caller's responsibility.
    pub fn from_amplitudes(amps: &[Complex64]) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(QaoaError::invalid(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_capacity(n)?;
        Ok(StateVector {
            n,
            re: amps.iter().map(|a| a.re).collect(),
            im: amps.iter().map(|a| a.im).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    pub fn amplitude(&self, z: usize) -> Complex64 {
        Complex64::new(self.re[z], self.im[z])
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.re.iter().zip(&self.im).map(|(r, i)| r * r + i * i).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.reduce(|re, im, _| re.iter().zip(im).map(|(r, i)| r * r + i * i).sum())
    }

    fn check_dim(&self, c: &DiagonalCost) -> Result<()> {
        if self.n != c.n() {
            return Err(QaoaError::invalid(format!(
                "state has {} qubits, cost has {}",
                self.n,
                c.n()
            )));
        }
        Ok(())
    }

    /// Multiplies `amps[z]` by `exp(−iγ C(z))`.
    pub fn apply_cost_phase(&mut self, gamma: f64, c: &DiagonalCost) -> Result<()> {
        self.check_dim(c)?;
        let table = PhaseTable::new(gamma, c.m());
        self.for_each_block(c.values(), |re, im, vals| table.apply(re, im, vals));
        Ok(())
    }

    /// Applies `exp(−iβ Σ_i X_i)`.
    pub fn apply_mixer(&mut self, beta: f64) {
        let rot = Rotation::new(beta);
        let low = self.n.min(BLOCK_BITS);
        let block = 1usize << low;
        let f = |(re, im): (&mut [f64], &mut [f64])| rot.apply_range(re, im, 0, low);
        if self.n >= PAR_MIN_QUBITS {
            self.re
                .par_chunks_mut(block)
                .zip(self.im.par_chunks_mut(block))
                .for_each(f);
        } else {
            self.re.chunks_mut(block).zip(self.im.chunks_mut(block)).for_each(f);
        }
        self.apply_high_qubits(&rot);
    }

    /// One full layer, phase then mixer, in two sweeps over memory.
    pub fn apply_layer(&mut self, gamma: f64, beta: f64, c: &DiagonalCost) -> Result<()> {
        self.check_dim(c)?;
        let table = PhaseTable::new(gamma, c.m());
        let rot = Rotation::new(beta);
        let low = self.n.min(BLOCK_BITS);
        self.for_each_block(c.values(), |re, im, vals| {
            table.apply(re, im, vals);
            rot.apply_range(re, im, 0, low);
        });
        self.apply_high_qubits(&rot);
        Ok(())
    }

    fn reset_plus(&mut self) {
        let a = (self.re.len() as f64).sqrt().recip();
        self.re.fill(a);
        self.im.fill(0.0);
    }

    /// Runs `f` over aligned `2^BLOCK_BITS` blocks of the state and cost.
    fn for_each_block<F>(&mut self, vals: &[i32], f: F)
    where
        F: Fn(&mut [f64], &mut [f64], &[i32]) + Sync,
    {
        let block = 1usize << self.n.min(BLOCK_BITS);
        if self.n >= PAR_MIN_QUBITS {
            self.re
                .par_chunks_mut(block)
                .zip(self.im.par_chunks_mut(block))
                .zip(vals.par_chunks(block))
                .for_each(|((re, im), v)| f(re, im, v));
        } else {
            self.re
                .chunks_mut(block)
                .zip(self.im.chunks_mut(block))
                .zip(vals.chunks(block))
                .for_each(|((re, im), v)| f(re, im, v));
        }
    }

    /// Mixer rotations on qubits `BLOCK_BITS..n`.
    ///
    /// View the state as `2^(n−B)` rows of `2^B` amplitudes; the high qubits
    /// index rows. A tile is the same narrow column range taken from every
    /// row, which is closed under all high-qubit rotations. Each tile is
    /// gathered into contiguous scratch, rotated there on every high qubit,
    /// and written back, so the whole stage costs one sweep over memory.
    fn apply_high_qubits(&mut self, rot: &Rotation) {
        let n = self.n;
        if n <= BLOCK_BITS {
            return;
        }
        let high = n - BLOCK_BITS;
        let row = 1usize << BLOCK_BITS;
        let width = (TILE_ELEMS >> high).clamp(MIN_TILE_WIDTH, MAX_TILE_WIDTH);
        let width_bits = width.trailing_zeros() as usize;

        type Piece<'a> = (&'a mut [f64], &'a mut [f64]);
        let mut tiles: Vec<Vec<Piece>> = (0..row / width)
            .map(|_| Vec::with_capacity(1 << high))
            .collect();
        for (r, i) in self.re.chunks_mut(row).zip(self.im.chunks_mut(row)) {
            for (t, piece) in r.chunks_mut(width).zip(i.chunks_mut(width)).enumerate() {
                tiles[t].push(piece);
            }
        }

        let rotate_tile = |scratch: &mut (Vec<f64>, Vec<f64>), tile: &mut Vec<Piece>| {
            let (sre, sim) = scratch;
            sre.clear();
            sim.clear();
            for (r, i) in tile.iter() {
                sre.extend_from_slice(r);
                sim.extend_from_slice(i);
            }
            rot.apply_range(sre, sim, width_bits, width_bits + high);
            let src = sre.chunks_exact(width).zip(sim.chunks_exact(width));
            for ((r, i), (sr, si)) in tile.iter_mut().zip(src) {
                r.copy_from_slice(sr);
                i.copy_from_slice(si);
            }
        };
        if n >= PAR_MIN_QUBITS {
            tiles
                .par_iter_mut()
                .for_each_init(|| (Vec::new(), Vec::new()), rotate_tile);
        } else {
            let cap = width << high;
            let mut scratch = (Vec::with_capacity(cap), Vec::with_capacity(cap));
            tiles.iter_mut().for_each(|t| rotate_tile(&mut scratch, t));
        }
    }

    /// Order-fixed chunked reduction; `f` gets each chunk and its start index.
    fn reduce<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64], &[f64], usize) -> f64 + Sync,
    {
        let partials: Vec<f64> = if self.n >= PAR_MIN_QUBITS {
            self.re
                .par_chunks(REDUCE_CHUNK)
                .zip(self.im.par_chunks(REDUCE_CHUNK))
                .enumerate()
                .map(|(k, (re, im))| f(re, im, k * REDUCE_CHUNK))
                .collect()
        } else {
            self.re
                .chunks(REDUCE_CHUNK)
                .zip(self.im.chunks(REDUCE_CHUNK))
                .enumerate()
                .map(|(k, (re, im))| f(re, im, k * REDUCE_CHUNK))
                .collect()
        };
        partials.iter().sum()
    }
}

/// Pre-evaluated `exp(−iγv)` for every integer cost value `v` in `[−m, m]`.
struct PhaseTable {
    offset: i32,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl PhaseTable {
    fn new(gamma: f64, m: usize) -> Self {
        let offset = m as i32;
        let (sin, cos) = (-offset..=offset)
            .map(|v| (-gamma * v as f64).sin_cos())
            .unzip();
        PhaseTable { offset, cos, sin }
    }

    #[inline]
    fn apply(&self, re: &mut [f64], im: &mut [f64], vals: &[i32]) {
        for ((r, i), &v) in re.iter_mut().zip(im.iter_mut()).zip(vals) {
            let k = (v + self.offset) as usize;
            let (c, s) = (self.cos[k], self.sin[k]);
            (*r, *i) = (*r * c - *i * s, *r * s + *i * c);
        }
    }
}

/// `exp(−iβX) = [[cos β, −i sin β], [−i sin β, cos β]]`.
#[derive(Clone, Copy)]
struct Rotation {
    cos: f64,
    sin: f64,
}

/// One amplitude pair `(a, b)` as `(a.re, a.im, b.re, b.im)`.
type Pair = (f64, f64, f64, f64);

impl Rotation {
    fn new(beta: f64) -> Self {
        let (sin, cos) = beta.sin_cos();
        Rotation { cos, sin }
    }

    #[inline(always)]
    fn pair(&self, (ar, ai, br, bi): Pair) -> Pair {
        let (c, s) = (self.cos, self.sin);
        (c * ar + s * bi, c * ai - s * br, c * br + s * ai, c * bi - s * ar)
    }

    /// Rotates local qubits `lo..hi`; slice lengths must be multiples of
    /// `2^hi`.
    fn apply_range(&self, re: &mut [f64], im: &mut [f64], lo: usize, hi: usize) {
        #[cfg(target_arch = "x86_64")]
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: AVX2 support was checked just above.
            unsafe { self.apply_range_avx2(re, im, lo, hi) };
            return;
        }
        self.apply_range_generic(re, im, lo, hi)
    }

    /// The generic kernel compiled for 256-bit vectors. No FMA is enabled, so
    /// results are bitwise identical to the generic path.
    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn apply_range_avx2(&self, re: &mut [f64], im: &mut [f64], lo: usize, hi: usize) {
        self.apply_range_generic(re, im, lo, hi)
    }

    #[inline(always)]
    fn apply_range_generic(&self, re: &mut [f64], im: &mut [f64], lo: usize, hi: usize) {
        let mut q = lo;
        while q < hi {
            if q + 1 < hi {
                self.butterfly2(re, im, q);
                q += 2;
            } else {
                self.butterfly(re, im, q);
                q += 1;
            }
        }
    }

    #[inline(always)]
    fn butterfly(&self, re: &mut [f64], im: &mut [f64], q: usize) {
        let s = 1usize << q;
        for (gr, gi) in re.chunks_exact_mut(2 * s).zip(im.chunks_exact_mut(2 * s)) {
            let (ar, br) = gr.split_at_mut(s);
            let (ai, bi) = gi.split_at_mut(s);
            let lanes = ar.iter_mut().zip(ai.iter_mut()).zip(br.iter_mut().zip(bi.iter_mut()));
            for ((ar, ai), (br, bi)) in lanes {
                (*ar, *ai, *br, *bi) = self.pair((*ar, *ai, *br, *bi));
            }
        }
    }

    /// Qubits `q` and `q + 1` in one pass.
    #[inline(always)]
    fn butterfly2(&self, re: &mut [f64], im: &mut [f64], q: usize) {
        if q == 0 {
            for (r, i) in re.chunks_exact_mut(4).zip(im.chunks_exact_mut(4)) {
                let (r0, i0, r1, i1) = self.pair((r[0], i[0], r[1], i[1]));
                let (r2, i2, r3, i3) = self.pair((r[2], i[2], r[3], i[3]));
                (r[0], i[0], r[2], i[2]) = self.pair((r0, i0, r2, i2));
                (r[1], i[1], r[3], i[3]) = self.pair((r1, i1, r3, i3));
            }
            return;
        }
        let s = 1usize << q;
        for (gr, gi) in re.chunks_exact_mut(4 * s).zip(im.chunks_exact_mut(4 * s)) {
            let (r01, r23) = gr.split_at_mut(2 * s);
            let (i01, i23) = gi.split_at_mut(2 * s);
            let (r0, r1) = r01.split_at_mut(s);
            let (r2, r3) = r23.split_at_mut(s);
            let (i0, i1) = i01.split_at_mut(s);
            let (i2, i3) = i23.split_at_mut(s);
            let lanes = r0
                .iter_mut()
                .zip(i0.iter_mut())
                .zip(r1.iter_mut().zip(i1.iter_mut()))
                .zip(r2.iter_mut().zip(i2.iter_mut()).zip(r3.iter_mut().zip(i3.iter_mut())));
            for (((r0, i0), (r1, i1)), ((r2, i2), (r3, i3))) in lanes {
                let (a0r, a0i, a1r, a1i) = self.pair((*r0, *i0, *r1, *i1));
                let (a2r, a2i, a3r, a3i) = self.pair((*r2, *i2, *r3, *i3));
                (*r0, *i0, *r2, *i2) = self.pair((a0r, a0i, a2r, a2i));
                (*r1, *i1, *r3, *i3) = self.pair((a1r, a1i, a3r, a3i));
            }
        }
    }
}

/// Runs the full ansatz from `|+⟩^⊗n`.
pub fn ansatz(c: &DiagonalCost, params: &ParamVector) -> Result<StateVector> {
    let mut s = StateVector::init_plus(c.n())?;
    for (&g, &b) in params.gammas.iter().zip(&params.betas) {
        s.apply_layer(g, b, c)?;
    }
    Ok(s)
}

/// `⟨ψ|C|ψ⟩ = Σ_z |ψ_z|² C(z)`.
pub fn expectation(s: &StateVector, c: &DiagonalCost) -> Result<f64> {
    s.check_dim(c)?;
    let vals = c.values();
    Ok(s.reduce(|re, im, start| {
        re.iter()
            .zip(im)
            .zip(&vals[start..start + re.len()])
            .map(|((r, i), &v)| (r * r + i * i) * v as f64)
            .sum()
    }))
}

/// Total probability on the ground set.
pub fn overlap(s: &StateVector, gs: &GroundSet) -> Result<f64> {
    if gs.indices.last().is_some_and(|&z| z >= s.dim()) {
        return Err(QaoaError::invalid(format!(
            "ground index out of range for a {}-qubit state",
            s.n
        )));
    }
    let mut total = 0.0;
    for block in gs.indices.chunks(REDUCE_CHUNK) {
        total += block
            .iter()
            .map(|&z| s.re[z] * s.re[z] + s.im[z] * s.im[z])
            .sum::<f64>();
    }
    Ok(total)
}

/// Reusable buffer for repeated ansatz energy evaluations on one cost.
pub struct Evaluator<'a> {
    cost: &'a DiagonalCost,
    state: StateVector,
    evals: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(cost: &'a DiagonalCost) -> Result<Self> {
        Ok(Evaluator {
            cost,
            state: StateVector::init_plus(cost.n())?,
            evals: 0,
        })
    }

    /// Energy at raw angles; `x` is `[γ_1..γ_p, β_1..β_p]`. Angles outside the
    /// box are folded back in, which leaves the state's probabilities unchanged.
    pub fn energy(&mut self, x: &[f64]) -> f64 {
        let p = x.len() / 2;
        self.evals += 1;
        self.state.reset_plus();
        for k in 0..p {
            let g = wrap(x[k], GAMMA_PERIOD);
            let b = wrap(x[p + k], BETA_PERIOD);
            self.state
                .apply_layer(g, b, self.cost)
                .expect("evaluator state matches its cost");
        }
        expectation(&self.state, self.cost).expect("evaluator state matches its cost")
    }

    pub fn evals(&self) -> usize {
        self.evals
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }
}
