//! Classical outer loop: multi-start Nelder–Mead over the periodic parameter
//! box `γ ∈ [0, π)^p × β ∈ [0, 2π)^p`.
//!
//! The simplex moves freely in `R^2p`; every evaluation folds the point back
//! into the box, so the search sees the landscape as the torus it is. Start `k`
//! draws its initial point from a stream derived only from `(seed, k)`, which
//! makes a run with more starts a strict extension of one with fewer.

use rand::Rng as _;
use rayon::prelude::*;

use crate::cost::DiagonalCost;
use crate::error::{QaoaError, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::simulator::{Evaluator, ParamVector, BETA_PERIOD, GAMMA_PERIOD};

const START_STREAM: u64 = 0x5354_4152_5453; // "STARTS"
/// Initial simplex edge as a fraction of the box width per coordinate.
const SIMPLEX_SCALE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub starts: usize,
    /// Evaluation budget for each start.
    pub max_evals: usize,
    /// Simplex size tolerance (max coordinate distance from the best vertex).
    pub xtol: f64,
    /// Objective spread tolerance across the simplex.
    pub ftol: f64,
    pub seed: u64,
}

impl OptimizerConfig {
    /// 50 starts at depth 3, `20·p` otherwise; budget `400·p` evaluations per
    /// start.
    pub fn for_depth(p: usize, seed: u64) -> Self {
        OptimizerConfig {
            starts: default_starts(p),
            max_evals: 400 * p.max(1),
            xtol: 1e-4,
            ftol: 1e-6,
            seed,
        }
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(QaoaError::invalid("optimizer needs at least one start"));
        }
        if self.max_evals == 0 {
            return Err(QaoaError::invalid("optimizer budget must be positive"));
        }
        if !(self.xtol > 0.0 && self.ftol > 0.0) {
            return Err(QaoaError::invalid("optimizer tolerances must be positive"));
        }
        Ok(())
    }
}

pub fn default_starts(p: usize) -> usize {
    if p == 3 {
        50
    } else {
        20 * p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best_params: ParamVector,
    pub best_value: f64,
    /// Objective evaluations summed over all starts.
    pub evals_used: usize,
    /// Starts that stopped on the evaluation budget rather than converging.
    pub exhausted_starts: usize,
    /// Best value reached by each start, in start order.
    pub start_values: Vec<f64>,
}

/// Minimizes `⟨ψ(γ, β)|C|ψ(γ, β)⟩` at depth `p` from `cfg.starts` random
/// points.
pub fn optimize(c: &DiagonalCost, p: usize, cfg: &OptimizerConfig) -> Result<OptimResult> {
    if p == 0 {
        return Err(QaoaError::invalid("depth must be at least 1"));
    }
    cfg.validate()?;
    run_starts(c, p, cfg, None)
}

/// Like [`optimize`], but start 0 begins at `init`; starts `1..` are the same
/// random points [`optimize`] would use.
pub fn optimize_warmstart(
    c: &DiagonalCost,
    p: usize,
    init: &ParamVector,
    cfg: &OptimizerConfig,
) -> Result<OptimResult> {
    if init.p() != p {
        return Err(QaoaError::invalid(format!(
            "initial point has depth {}, expected {p}",
            init.p()
        )));
    }
    cfg.validate()?;
    run_starts(c, p, cfg, Some(init))
}

struct StartOutcome {
    x: Vec<f64>,
    value: f64,
    evals: usize,
    exhausted: bool,
}

fn run_starts(
    c: &DiagonalCost,
    p: usize,
    cfg: &OptimizerConfig,
    init: Option<&ParamVector>,
) -> Result<OptimResult> {
    let outcomes: Vec<Result<StartOutcome>> = (0..cfg.starts)
        .into_par_iter()
        .map(|k| {
            let x0 = match (k, init) {
                (0, Some(p0)) => p0.to_flat(),
                _ => random_point(p, cfg.seed, k as u64),
            };
            let mut ev = Evaluator::new(c)?;
            let run = nelder_mead(|x| ev.energy(x), x0, &box_widths(p), cfg);
            let x = ParamVector::wrapped(&run.x[..p], &run.x[p..])?.to_flat();
            let value = if x == run.x { run.f } else { ev.energy(&x) };
            Ok(StartOutcome {
                x,
                value,
                evals: ev.evals(),
                exhausted: run.exhausted,
            })
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    // Lowest value wins; ties go to the lowest start index.
    let best = outcomes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one start");
    let x = &outcomes[best].x;
    Ok(OptimResult {
        best_params: ParamVector::new(x[..p].to_vec(), x[p..].to_vec())?,
        best_value: outcomes[best].value,
        evals_used: outcomes.iter().map(|o| o.evals).sum(),
        exhausted_starts: outcomes.iter().filter(|o| o.exhausted).count(),
        start_values: outcomes.iter().map(|o| o.value).collect(),
    })
}

fn box_widths(p: usize) -> Vec<f64> {
    let mut w = vec![GAMMA_PERIOD; p];
    w.extend(std::iter::repeat_n(BETA_PERIOD, p));
    w
}

fn random_point(p: usize, seed: u64, start: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(derive_seed(seed, &[START_STREAM, start]));
    box_widths(p)
        .into_iter()
        .map(|w| rng.gen_range(0.0..w))
        .collect()
}

pub(crate) struct SimplexRun {
    pub x: Vec<f64>,
    pub f: f64,
    pub exhausted: bool,
}

/// Nelder–Mead with dimension-adaptive coefficients (Gao & Han), which keeps
/// the method effective at the 12–18 dimensions of deeper circuits.
///
/// Stops when both the objective spread and the simplex size fall below the
/// tolerances, or when the budget is spent. The returned point is never worse
/// than `x0`.
pub(crate) fn nelder_mead<F>(
    mut f: F,
    x0: Vec<f64>,
    widths: &[f64],
    cfg: &OptimizerConfig,
) -> SimplexRun
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    let df = d as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / df, 0.75 - 0.5 / df, 1.0 - 1.0 / df);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let f0 = eval(&x0, &mut evals);
    simplex.push((x0.clone(), f0));
    for i in 0..d {
        let mut x = x0.clone();
        x[i] += SIMPLEX_SCALE * widths[i];
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }

    let mut exhausted = false;
    let mut centroid = vec![0.0; d];
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let f_spread = simplex.iter().map(|v| (v.1 - best.1).abs()).fold(0.0, f64::max);
        let x_spread = simplex
            .iter()
            .flat_map(|v| v.0.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= cfg.ftol && x_spread <= cfg.xtol {
            break;
        }
        if evals >= cfg.max_evals {
            exhausted = true;
            break;
        }

        centroid.fill(0.0);
        for (x, _) in &simplex[..d] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / df;
            }
        }
        let worst = simplex[d].clone();
        let toward = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, x)| c + t * (c - x)).collect()
        };

        let xr = toward(alpha, &worst.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = toward(alpha * gamma, &worst.0);
            let fe = eval(&xe, &mut evals);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = toward(alpha * rho, &worst.0);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = toward(-rho, &worst.0);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[d] = (xc, fc);
            continue;
        }
        // Shrink toward the best vertex.
        let best_x = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            for (xi, bi) in v.0.iter_mut().zip(&best_x) {
                *xi = bi + sigma * (*xi - bi);
            }
            v.1 = eval(&v.0, &mut evals);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    SimplexRun { x, f, exhausted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::build_cost;
    use crate::graphgen::{Family, Graph};

    fn cfg(starts: usize) -> OptimizerConfig {
        OptimizerConfig::for_depth(1, 17).with_starts(starts)
    }

    #[test]
    fn simplex_minimizes_quadratic() {
        let target = [1.0, -2.0, 0.5];
        let run = nelder_mead(
            |x| x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum(),
            vec![0.0; 3],
            &[1.0; 3],
            &OptimizerConfig {
                max_evals: 5000,
                xtol: 1e-8,
                ftol: 1e-12,
                ..cfg(1)
            },
        );
        assert!(!run.exhausted);
        for (x, t) in run.x.iter().zip(&target) {
            assert!((x - t).abs() < 1e-6);
        }
        assert!(run.f < 1e-10);
    }

    #[test]
    fn simplex_reports_budget_exhaustion() {
        let run = nelder_mead(
            |x| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(4),
            vec![0.0, 0.0],
            &[1.0, 1.0],
            &OptimizerConfig {
                max_evals: 10,
                ..cfg(1)
            },
        );
        assert!(run.exhausted);
        assert!(run.f <= 9.0 + 1.0);
    }

    #[test]
    fn empty_graph_objective_is_zero() {
        let c = build_cost(&Graph::new(3, [], Family::Uniform, 0).unwrap()).unwrap();
        let r = optimize(&c, 2, &cfg(3)).unwrap();
        assert_eq!(r.best_value, 0.0);
        assert_eq!(r.start_values.len(), 3);
    }

    #[test]
    fn single_edge_depth_one_reaches_ground() {
        let c = build_cost(&Graph::new(2, [(0, 1, 1)], Family::Uniform, 0).unwrap()).unwrap();
        let r = optimize(&c, 1, &cfg(5)).unwrap();
        assert!((r.best_value + 1.0).abs() < 1e-3, "{}", r.best_value);
        assert_eq!(
            r.best_value,
            r.start_values.iter().copied().fold(f64::INFINITY, f64::min)
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        let c = build_cost(&Graph::new(2, [(0, 1, 1)], Family::Uniform, 0).unwrap()).unwrap();
        assert!(optimize(&c, 0, &cfg(1)).is_err());
        assert!(optimize(&c, 1, &cfg(0)).is_err());
        let init = ParamVector::zeros(2).unwrap();
        assert!(optimize_warmstart(&c, 1, &init, &cfg(1)).is_err());
        let bad_tol = OptimizerConfig { xtol: 0.0, ..cfg(1) };
        assert!(optimize(&c, 1, &bad_tol).is_err());
    }

    #[test]
    fn warmstart_from_zero_never_worse() {
        let c = build_cost(&Graph::new(3, [(0, 1, 1), (1, 2, -1)], Family::Uniform, 0).unwrap())
            .unwrap();
        let init = ParamVector::zeros(2).unwrap();
        let r = optimize_warmstart(&c, 2, &init, &cfg(1)).unwrap();
        assert!(r.best_value <= 0.0 + 1e-6);
    }

    #[test]
    fn default_start_counts() {
        assert_eq!(default_starts(3), 50);
        assert_eq!(default_starts(1), 20);
        assert_eq!(default_starts(9), 180);
    }
}
