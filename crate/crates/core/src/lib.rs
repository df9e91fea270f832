//! Dense state-vector QAOA simulation for ±1-weighted Ising minimization on
//! random graphs, with a seeded sweep harness that measures how fixed-depth
//! performance depends on graph density (edges per node).
//!
//! Bit convention, shared by every module: node `i` of a [`Graph`] is bit `i`
//! of a basis-state index `z` (bit 0 is the least significant). Bit value 0
//! means spin +1, bit value 1 means spin −1.

pub mod cost;
pub mod error;
pub mod graphgen;
pub mod metrics;
pub mod optimizer;
pub mod rng;
pub mod simulator;
pub mod sweep;

pub use cost::{build_cost, ground, DiagonalCost, GroundSet};
pub use error::{QaoaError, Result};
pub use graphgen::{density, Density, Family, Graph};
pub use metrics::{compute_metrics, MetricSet};
pub use optimizer::{optimize, optimize_warmstart, OptimResult, OptimizerConfig};
pub use simulator::{ansatz, expectation, overlap, ParamVector, StateVector};

/// Largest qubit count accepted by the dense representations (2^24 amplitudes).
pub const MAX_QUBITS: usize = 24;
