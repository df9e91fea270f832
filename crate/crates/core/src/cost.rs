//! Diagonal problem Hamiltonian `C = Σ w_ij Z_i Z_j` and its exact ground set.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{QaoaError, Result};
use crate::graphgen::Graph;
use crate::MAX_QUBITS;

/// Amplitude-index block processed per task when filling the diagonal.
const FILL_CHUNK: usize = 1 << 12;

/// `values[z] = C(z)` for every basis state `z` of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalCost {
    n: usize,
    m: usize,
    values: Vec<i32>,
}

impl DiagonalCost {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges the cost was built from.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn min(&self) -> i32 {
        *self.values.iter().min().expect("cost vector is never empty")
    }

    pub fn max(&self) -> i32 {
        *self.values.iter().max().expect("cost vector is never empty")
    }

    /// Raw dump: `values` as consecutive little-endian `i32`s.
    pub fn write_le<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

pub(crate) fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(QaoaError::Capacity { n, max: MAX_QUBITS });
    }
    if n == 0 {
        return Err(QaoaError::invalid("need at least one qubit"));
    }
    Ok(())
}

/// Evaluates the cost on every assignment. Spin of node `i` in state `z` is
/// `+1` when bit `i` is clear and `-1` when it is set, so an edge contributes
/// `w` when its endpoints agree and `-w` when they differ.
pub fn build_cost(g: &Graph) -> Result<DiagonalCost> {
    let n = g.n();
    check_capacity(n)?;
    let edges: Vec<(u32, u32, i32)> = g
        .edges()
        .iter()
        .map(|e| (e.i as u32, e.j as u32, e.w as i32))
        .collect();

    let mut values = vec![0i32; 1 << n];
    values
        .par_chunks_mut(FILL_CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let base = c * FILL_CHUNK;
            for &(i, j, w) in &edges {
                for (k, v) in chunk.iter_mut().enumerate() {
                    let z = base + k;
                    let differ = ((z >> i) ^ (z >> j)) & 1;
                    *v += w - 2 * w * differ as i32;
                }
            }
        });

    Ok(DiagonalCost {
        n,
        m: g.m(),
        values,
    })
}

/// Minimum of the cost and every basis state attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSet {
    pub c_min: i32,
    /// Sorted ascending.
    pub indices: Vec<usize>,
}

impl GroundSet {
    pub fn degeneracy(&self) -> usize {
        self.indices.len()
    }
}

pub fn ground(c: &DiagonalCost) -> GroundSet {
    let c_min = c.min();
    let indices = c
        .values
        .iter()
        .enumerate()
        .filter_map(|(z, &v)| (v == c_min).then_some(z))
        .collect();
    GroundSet { c_min, indices }
}
