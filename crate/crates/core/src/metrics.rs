//! Performance figures for one optimized instance: reachability error `f`,
//! ground-state probability `eta`, and approximation ratio `r`.

use crate::cost::{DiagonalCost, GroundSet};
use crate::error::{QaoaError, Result};
use crate::optimizer::OptimResult;
use crate::simulator::{ansatz, overlap, ParamVector};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSet {
    /// `expect_opt − c_min`, never negative.
    pub f: f64,
    pub eta: f64,
    /// `expect_opt / c_min`, or 1 when `c_min = 0`.
    pub r: f64,
    pub c_min: i32,
    pub expect_opt: f64,
    pub degeneracy: usize,
}

/// `f` and `r` come from the optimizer's best value; `eta` is the ground-set
/// probability of the state prepared at `params_for_eta`, which must be the
/// optimizer's best parameters.
pub fn compute_metrics(
    c: &DiagonalCost,
    gs: &GroundSet,
    opt: &OptimResult,
    params_for_eta: &ParamVector,
) -> Result<MetricSet> {
    if params_for_eta != &opt.best_params {
        return Err(QaoaError::invalid(
            "eta must be evaluated at the optimizer's best parameters",
        ));
    }
    let state = ansatz(c, params_for_eta)?;
    let eta = overlap(&state, gs)?.clamp(0.0, 1.0);
    let c_min = gs.c_min;
    // An expectation cannot undercut the minimum; clamp rounding noise.
    let expect_opt = opt.best_value.max(c_min as f64);
    let r = if c_min == 0 {
        1.0
    } else {
        expect_opt / c_min as f64
    };
    Ok(MetricSet {
        f: expect_opt - c_min as f64,
        eta,
        r,
        c_min,
        expect_opt,
        degeneracy: gs.degeneracy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{build_cost, ground};
    use crate::graphgen::{Family, Graph};
    use crate::optimizer::{optimize, OptimizerConfig};

    #[test]
    fn empty_graph_is_solved() {
        let c = build_cost(&Graph::new(4, [], Family::Uniform, 0).unwrap()).unwrap();
        let gs = ground(&c);
        let opt = optimize(&c, 1, &OptimizerConfig::for_depth(1, 0).with_starts(2)).unwrap();
        let m = compute_metrics(&c, &gs, &opt, &opt.best_params).unwrap();
        assert_eq!((m.f, m.r, m.c_min, m.degeneracy), (0.0, 1.0, 0, 16));
        assert!((m.eta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_edge_optimum() {
        let c = build_cost(&Graph::new(2, [(0, 1, 1)], Family::Uniform, 0).unwrap()).unwrap();
        let gs = ground(&c);
        let opt = optimize(&c, 1, &OptimizerConfig::for_depth(1, 0).with_starts(4)).unwrap();
        let m = compute_metrics(&c, &gs, &opt, &opt.best_params).unwrap();
        assert!(m.f <= 1e-3);
        assert!(m.eta > 1.0 - 1e-3);
        assert!((m.r - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_foreign_parameters() {
        let c = build_cost(&Graph::new(2, [(0, 1, 1)], Family::Uniform, 0).unwrap()).unwrap();
        let gs = ground(&c);
        let opt = optimize(&c, 1, &OptimizerConfig::for_depth(1, 0).with_starts(1)).unwrap();
        let other = ParamVector::new(vec![0.1], vec![0.2]).unwrap();
        assert!(compute_metrics(&c, &gs, &opt, &other).is_err());
    }
}
