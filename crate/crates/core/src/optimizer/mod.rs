//! Multistart derivative-free optimization of residual objectives.
//!
//! The objective is a sum of squared residuals (for entanglement runs, the
//! per-pair shortfalls 1 - C_{i,j} at their windowed maxima). The driver
//! samples the bounded parameter space uniformly, clusters the evaluated
//! points into basins, and starts a model-based trust-region least-squares
//! solver from each basin's best point. All geometry (clustering radii,
//! trust regions, deduplication) lives in the unit hypercube obtained by
//! scaling each free parameter by its bounds.

mod cluster;
mod pounders;
mod sampling;

pub use cluster::{cluster_basins, Cluster, ClusterSet};
pub use pounders::{solve_least_squares, LocalSolve, TRConfig};
pub use sampling::sample_uniform;

use rayon::prelude::*;

use crate::{Error, Result};

/// One optimization parameter: name, box bounds, and an optional hold.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// When set, the parameter is excluded from optimization and pinned to
    /// this value.
    pub fixed: Option<f64>,
}

impl Param {
    /// A free parameter on [lower, upper].
    pub fn free(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
            fixed: None,
        }
    }

    /// A parameter pinned to `value`.
    pub fn fixed(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            lower: value,
            upper: value,
            fixed: Some(value),
        }
    }
}

/// The optimization box: every parameter with bounds and fixed flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    params: Vec<Param>,
    free: Vec<usize>,
}

impl Bounds {
    pub fn new(params: Vec<Param>) -> Result<Self> {
        for p in &params {
            if !(p.lower.is_finite() && p.upper.is_finite()) || p.lower > p.upper {
                return Err(Error::config(format!(
                    "parameter {}: invalid bounds [{}, {}]",
                    p.name, p.lower, p.upper
                )));
            }
            if let Some(v) = p.fixed {
                if v < p.lower || v > p.upper {
                    return Err(Error::config(format!(
                        "parameter {}: fixed value {v} outside [{}, {}]",
                        p.name, p.lower, p.upper
                    )));
                }
            } else if p.lower == p.upper {
                return Err(Error::config(format!(
                    "parameter {}: free parameter needs lower < upper",
                    p.name
                )));
            }
        }
        let free: Vec<usize> = params
            .iter()
            .enumerate()
            .filter(|(_, p)| p.fixed.is_none())
            .map(|(i, _)| i)
            .collect();
        if free.is_empty() {
            return Err(Error::config("need at least one free parameter"));
        }
        Ok(Self { params, free })
    }

    /// All parameters in declaration order.
    pub fn params(&self) -> &[Param] {
        &self.params
    }

    /// Total parameter count, fixed ones included.
    pub fn dim(&self) -> usize {
        self.params.len()
    }

    /// Number of free (optimized) parameters.
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Indices of the free parameters within the full vector.
    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    /// Maps a full physical vector onto unit-hypercube coordinates of the
    /// free parameters.
    pub fn scale(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                got: x.len(),
            });
        }
        Ok(self
            .free
            .iter()
            .map(|&i| {
                let p = &self.params[i];
                (x[i] - p.lower) / (p.upper - p.lower)
            })
            .collect())
    }

    /// Expands unit-hypercube coordinates into the full physical vector,
    /// fixed parameters filled in.
    pub fn unscale(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.free.len() {
            return Err(Error::Dimension {
                expected: self.free.len(),
                got: u.len(),
            });
        }
        let mut x: Vec<f64> = self
            .params
            .iter()
            .map(|p| p.fixed.unwrap_or(0.0))
            .collect();
        for (k, &i) in self.free.iter().enumerate() {
            let p = &self.params[i];
            x[i] = p.lower + u[k].clamp(0.0, 1.0) * (p.upper - p.lower);
        }
        Ok(x)
    }
}

/// A parameter vector with its evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedPoint {
    /// Full physical parameter vector.
    pub params: Vec<f64>,
    /// Unit-hypercube coordinates of the free parameters.
    pub scaled: Vec<f64>,
    /// Residual vector at this point.
    pub residuals: Vec<f64>,
    /// Sum of squared residuals.
    pub objective: f64,
}

impl EvaluatedPoint {
    fn from_residuals(bounds: &Bounds, params: Vec<f64>, residuals: Vec<f64>) -> Result<Self> {
        let scaled = bounds.scale(&params)?;
        let objective = residuals.iter().map(|r| r * r).sum();
        Ok(Self {
            params,
            scaled,
            residuals,
            objective,
        })
    }
}

/// Euclidean distance in the unit hypercube.
pub(crate) fn scaled_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Which stage of the multistart produced an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Sample,
    Local,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Sample => "sample",
            Phase::Local => "local",
        }
    }
}

/// One row of the evaluation log.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub eval_id: usize,
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    pub objective: f64,
    pub phase: Phase,
    /// Cluster the local run belongs to; None during sampling.
    pub cluster_id: Option<usize>,
}

/// Multistart controls.
#[derive(Debug, Clone, PartialEq)]
pub struct MultistartConfig {
    /// Uniform samples drawn before clustering.
    pub sample_count: usize,
    /// Clustering radius in the unit hypercube.
    pub cluster_radius: f64,
    /// RNG seed for sampling.
    pub seed: u64,
    /// Total evaluation budget, sampling included.
    pub total_budget: usize,
    /// Per-local-run solver controls; its `max_evals` caps each run.
    pub local: TRConfig,
}

impl Default for MultistartConfig {
    fn default() -> Self {
        Self {
            sample_count: 200,
            cluster_radius: 0.1,
            seed: 1,
            total_budget: 800,
            local: TRConfig::default(),
        }
    }
}

/// Everything a multistart run produces.
#[derive(Debug, Clone)]
pub struct MultistartOutcome {
    /// Deduplicated local optima, best first.
    pub optima: Vec<EvaluatedPoint>,
    /// Every evaluation in order.
    pub log: Vec<EvalRecord>,
    /// Total evaluations spent.
    pub n_evals: usize,
    /// Number of basins found by clustering.
    pub n_clusters: usize,
}

/// Samples, clusters, and runs the local solver from each basin's best
/// point, best basin first, until the budget runs out. Optima closer than
/// 1e-3 (scaled) are merged keeping the better one.
pub fn multistart<F>(
    residual_fn: F,
    bounds: &Bounds,
    config: &MultistartConfig,
) -> Result<MultistartOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if config.sample_count == 0 {
        return Err(Error::config("sample_count must be >= 1"));
    }
    if config.total_budget <= config.sample_count {
        return Err(Error::config(
            "total_budget must exceed sample_count to fund local runs",
        ));
    }
    let samples = sample_uniform(bounds, config.sample_count, config.seed)?;
    let evals: Vec<Result<Vec<f64>>> = samples
        .par_iter()
        .map(|x| residual_fn(x))
        .collect();

    let mut log = Vec::new();
    let mut points = Vec::new();
    for (x, r) in samples.into_iter().zip(evals) {
        let eval_id = log.len();
        match r {
            Ok(res) if res.iter().all(|v| v.is_finite()) => {
                let pt = EvaluatedPoint::from_residuals(bounds, x, res)?;
                log.push(EvalRecord {
                    eval_id,
                    params: pt.params.clone(),
                    residuals: pt.residuals.clone(),
                    objective: pt.objective,
                    phase: Phase::Sample,
                    cluster_id: None,
                });
                points.push(pt);
            }
            _ => {
                log.push(EvalRecord {
                    eval_id,
                    params: x,
                    residuals: Vec::new(),
                    objective: f64::INFINITY,
                    phase: Phase::Sample,
                    cluster_id: None,
                });
            }
        }
    }
    if points.is_empty() {
        return Err(Error::numerical(
            "every sampled point failed to evaluate",
        ));
    }

    let clusters = cluster_basins(&points, config.cluster_radius);
    let n_clusters = clusters.clusters.len();

    // Local runs, best basin first, sharing what is left of the budget.
    let mut order: Vec<usize> = (0..n_clusters).collect();
    order.sort_by(|&a, &b| {
        let fa = points[clusters.clusters[a].best].objective;
        let fb = points[clusters.clusters[b].best].objective;
        fa.total_cmp(&fb).then(a.cmp(&b))
    });

    let mut n_evals = config.sample_count;
    let mut optima: Vec<EvaluatedPoint> = Vec::new();
    for cid in order {
        let remaining = config.total_budget.saturating_sub(n_evals);
        let floor = 2 * bounds.n_free() + 2;
        if remaining < floor {
            break;
        }
        let run_cfg = TRConfig {
            max_evals: config.local.max_evals.min(remaining),
            ..config.local.clone()
        };
        let start = &points[clusters.clusters[cid].best];
        let mut wrapped = |x: &[f64]| {
            let out = residual_fn(x);
            let eval_id = log.len();
            match &out {
                Ok(res) if res.iter().all(|v| v.is_finite()) => log.push(EvalRecord {
                    eval_id,
                    params: x.to_vec(),
                    residuals: res.clone(),
                    objective: res.iter().map(|v| v * v).sum(),
                    phase: Phase::Local,
                    cluster_id: Some(cid),
                }),
                _ => log.push(EvalRecord {
                    eval_id,
                    params: x.to_vec(),
                    residuals: Vec::new(),
                    objective: f64::INFINITY,
                    phase: Phase::Local,
                    cluster_id: Some(cid),
                }),
            }
            out
        };
        let solve = solve_least_squares(&mut wrapped, &start.params, bounds, &run_cfg)?;
        n_evals += solve.n_evals;
        optima.push(solve.best);
    }

    // Merge optima that collapsed onto the same point.
    optima.sort_by(|a, b| a.objective.total_cmp(&b.objective));
    let mut merged: Vec<EvaluatedPoint> = Vec::new();
    for opt in optima {
        if merged
            .iter()
            .all(|kept| scaled_distance(&kept.scaled, &opt.scaled) > 1e-3)
        {
            merged.push(opt);
        }
    }

    Ok(MultistartOutcome {
        optima: merged,
        log,
        n_evals,
        n_clusters,
    })
}
