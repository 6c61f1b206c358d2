//! Model-based derivative-free trust-region solver for bounded least
//! squares.
//!
//! Each residual gets its own local quadratic surrogate, fitted to nearby
//! evaluated points: a full least-squares quadratic when enough points are
//! available, otherwise a minimum-Frobenius-norm Hessian interpolant. The
//! surrogates combine into a Gauss-Newton master model of the sum of
//! squares, which is minimized over the trust region intersected with the
//! bounds by a projected gradient method. Classic accept/expand/shrink
//! rules drive the radius; the best *evaluated* point is always returned.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Factorize, LeastSquaresSvd, Solve};

use super::{scaled_distance, Bounds, EvaluatedPoint};
use crate::{Error, Result};

/// Center residuals, m x n Jacobian, and one Hessian per residual, all in
/// unit-cube coordinates.
type ResidualModels = (Vec<f64>, Array2<f64>, Vec<Array2<f64>>);

/// Trust-region controls; radii live in the unit hypercube.
#[derive(Debug, Clone, PartialEq)]
pub struct TRConfig {
    pub initial_radius: f64,
    /// The iteration stops once the radius falls below this.
    pub min_radius: f64,
    pub max_radius: f64,
    /// Evaluation budget for one local run.
    pub max_evals: usize,
}

impl Default for TRConfig {
    fn default() -> Self {
        Self {
            initial_radius: 0.1,
            min_radius: 1e-6,
            max_radius: 0.8,
            max_evals: 150,
        }
    }
}

/// Result of one local run.
#[derive(Debug, Clone)]
pub struct LocalSolve {
    /// Best evaluated point (never a model prediction).
    pub best: EvaluatedPoint,
    /// Evaluations actually spent (deduplicated repeats are free).
    pub n_evals: usize,
    /// True when the radius collapsed below `min_radius`; false when the
    /// budget ran out first.
    pub converged: bool,
}

struct HistPoint {
    u: Vec<f64>,
    residuals: Option<Vec<f64>>,
    objective: f64,
}

struct Solver<'a, F> {
    f: &'a mut F,
    bounds: &'a Bounds,
    n: usize,
    hist: Vec<HistPoint>,
    n_evals: usize,
    best: usize,
}

impl<F: FnMut(&[f64]) -> Result<Vec<f64>>> Solver<'_, F> {
    /// Evaluates at unit-cube coordinates, reusing any previous evaluation
    /// within 1e-12. Failed or non-finite evaluations are kept with an
    /// infinite objective so they repel the iteration but never enter a
    /// model fit. Returns (history index, whether a fresh evaluation ran).
    fn eval(&mut self, u: Vec<f64>) -> Result<(usize, bool)> {
        let u: Vec<f64> = u.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        if let Some(i) = self
            .hist
            .iter()
            .position(|h| scaled_distance(&h.u, &u) < 1e-12)
        {
            return Ok((i, false));
        }
        let x = self.bounds.unscale(&u)?;
        self.n_evals += 1;
        let rec = match (self.f)(&x) {
            Ok(res) if res.iter().all(|v| v.is_finite()) => {
                let objective = res.iter().map(|v| v * v).sum();
                HistPoint {
                    u,
                    residuals: Some(res),
                    objective,
                }
            }
            _ => HistPoint {
                u,
                residuals: None,
                objective: f64::INFINITY,
            },
        };
        self.hist.push(rec);
        let i = self.hist.len() - 1;
        if self.hist[i].objective < self.hist[self.best].objective {
            self.best = i;
        }
        Ok((i, true))
    }

    /// Fits per-residual quadratics around `center` from points near it.
    /// Returns the center residuals, the m x n Jacobian, and one Hessian
    /// per residual, all in unit-cube coordinates.
    fn build_models(&self, center: usize, delta: f64) -> Option<ResidualModels> {
        let n = self.n;
        let r_c = self.hist[center].residuals.as_ref()?.clone();
        let m = r_c.len();
        let u_c = &self.hist[center].u;
        let ncoef = (n + 1) * (n + 2) / 2;

        let mut cand: Vec<(f64, usize)> = self
            .hist
            .iter()
            .enumerate()
            .filter(|(i, h)| *i != center && h.residuals.is_some())
            .map(|(i, h)| (scaled_distance(&h.u, u_c), i))
            .collect();
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let within: Vec<usize> = cand
            .iter()
            .filter(|(d, _)| *d <= 5.0 * delta)
            .map(|(_, i)| *i)
            .take(ncoef - 1)
            .collect();
        // A starved neighborhood (after sharp shrinks) falls back to the
        // nearest points regardless of distance.
        let sel: Vec<usize> = if within.len() >= n {
            within
        } else {
            cand.iter().map(|(_, i)| *i).take(n).collect()
        };
        if sel.is_empty() {
            return None;
        }

        let npts = sel.len() + 1;
        let mut s = Array2::<f64>::zeros((npts, n));
        let mut y = Array2::<f64>::zeros((npts, m));
        for k in 0..m {
            y[[0, k]] = r_c[k];
        }
        for (row, &i) in sel.iter().enumerate() {
            let h = &self.hist[i];
            for a in 0..n {
                s[[row + 1, a]] = (h.u[a] - u_c[a]) / delta;
            }
            let res = h.residuals.as_ref().unwrap();
            for k in 0..m {
                y[[row + 1, k]] = res[k];
            }
        }
        let fitted = if npts >= ncoef {
            fit_full_quadratic(&s, &y, delta)
        } else {
            fit_mfn(&s, &y, delta)
        };
        fitted.map(|(jac, hes)| (r_c, jac, hes))
    }
}

/// Least-squares fit of full quadratics; needs npts >= (n+1)(n+2)/2.
fn fit_full_quadratic(
    s: &Array2<f64>,
    y: &Array2<f64>,
    delta: f64,
) -> Option<(Array2<f64>, Vec<Array2<f64>>)> {
    let (npts, n) = s.dim();
    let m = y.dim().1;
    let ncoef = (n + 1) * (n + 2) / 2;
    let mut a = Array2::<f64>::zeros((npts, ncoef));
    for p in 0..npts {
        a[[p, 0]] = 1.0;
        for i in 0..n {
            a[[p, 1 + i]] = s[[p, i]];
        }
        let mut col = 1 + n;
        for i in 0..n {
            a[[p, col]] = 0.5 * s[[p, i]] * s[[p, i]];
            col += 1;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                a[[p, col]] = s[[p, i]] * s[[p, j]];
                col += 1;
            }
        }
    }
    let c = a.least_squares(y).ok()?.solution;
    let mut jac = Array2::<f64>::zeros((m, n));
    let mut hes = vec![Array2::<f64>::zeros((n, n)); m];
    let d2 = delta * delta;
    for k in 0..m {
        for i in 0..n {
            jac[[k, i]] = c[[1 + i, k]] / delta;
        }
        let mut col = 1 + n;
        for i in 0..n {
            hes[k][[i, i]] = c[[col, k]] / d2;
            col += 1;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let v = c[[col, k]] / d2;
                hes[k][[i, j]] = v;
                hes[k][[j, i]] = v;
                col += 1;
            }
        }
    }
    Some((jac, hes))
}

/// Interpolation with minimum-Frobenius-norm Hessians via the KKT system
/// [Phi P; P^T 0], Phi_ij = (s_i . s_j)^2 / 2, P_i = [1, s_i].
fn fit_mfn(
    s: &Array2<f64>,
    y: &Array2<f64>,
    delta: f64,
) -> Option<(Array2<f64>, Vec<Array2<f64>>)> {
    let (npts, n) = s.dim();
    let m = y.dim().1;
    let dim = npts + n + 1;
    let mut kkt = Array2::<f64>::zeros((dim, dim));
    for i in 0..npts {
        for j in 0..npts {
            let dot: f64 = (0..n).map(|a| s[[i, a]] * s[[j, a]]).sum();
            kkt[[i, j]] = 0.5 * dot * dot;
        }
        kkt[[i, npts]] = 1.0;
        kkt[[npts, i]] = 1.0;
        for a in 0..n {
            kkt[[i, npts + 1 + a]] = s[[i, a]];
            kkt[[npts + 1 + a, i]] = s[[i, a]];
        }
    }
    let solve_all = |ridge: f64| -> Option<Vec<Array1<f64>>> {
        let mut a = kkt.clone();
        for i in 0..npts {
            a[[i, i]] += ridge;
        }
        let lu = a.factorize().ok()?;
        let mut sols = Vec::with_capacity(m);
        for k in 0..m {
            let mut rhs = Array1::<f64>::zeros(dim);
            for i in 0..npts {
                rhs[i] = y[[i, k]];
            }
            match lu.solve(&rhs) {
                Ok(sol) if sol.iter().all(|v| v.is_finite()) => sols.push(sol),
                _ => return None,
            }
        }
        Some(sols)
    };
    let sols = solve_all(0.0).or_else(|| solve_all(1e-10))?;
    let mut jac = Array2::<f64>::zeros((m, n));
    let mut hes = vec![Array2::<f64>::zeros((n, n)); m];
    let d2 = delta * delta;
    for (k, sol) in sols.iter().enumerate() {
        for a in 0..n {
            jac[[k, a]] = sol[npts + 1 + a] / delta;
        }
        for i in 0..npts {
            let lambda = sol[i];
            if lambda == 0.0 {
                continue;
            }
            for a in 0..n {
                for b in 0..n {
                    hes[k][[a, b]] += lambda * s[[i, a]] * s[[i, b]] / d2;
                }
            }
        }
    }
    Some((jac, hes))
}

/// Minimizes grad.t + t.B.t/2 over the box [lo, hi] by projected gradient
/// descent with Barzilai-Borwein steps, keeping the best iterate.
fn solve_subproblem(
    grad: &Array1<f64>,
    b: &Array2<f64>,
    lo: &[f64],
    hi: &[f64],
) -> Array1<f64> {
    let n = grad.len();
    let clamp_box = |mut t: Array1<f64>| -> Array1<f64> {
        for i in 0..n {
            t[i] = t[i].clamp(lo[i], hi[i]);
        }
        t
    };
    let phi = |t: &Array1<f64>| grad.dot(t) + 0.5 * t.dot(&b.dot(t));
    let mut t = Array1::<f64>::zeros(n);
    let mut g = grad.clone();
    let gg = g.dot(&g);
    if gg == 0.0 {
        return t;
    }
    let gbg = g.dot(&b.dot(&g));
    let span = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| (h - l).abs())
        .fold(0.0, f64::max);
    let mut alpha = if gbg > 0.0 {
        gg / gbg
    } else {
        (span + 1e-300) / gg.sqrt()
    }
    .clamp(1e-12, 1e12);
    let mut best_t = t.clone();
    let mut best_phi = 0.0f64;
    for _ in 0..200 {
        let cand = clamp_box(&t - &g.mapv(|v| v * alpha));
        let diff = &cand - &t;
        let ss = diff.dot(&diff);
        if ss.sqrt() < 1e-14 {
            break;
        }
        let g_new = grad + &b.dot(&cand);
        let p = phi(&cand);
        if p < best_phi {
            best_phi = p;
            best_t = cand.clone();
        }
        let sy = diff.dot(&(&g_new - &g));
        alpha = if sy > 0.0 {
            (ss / sy).clamp(1e-12, 1e12)
        } else {
            (alpha * 2.0).min(1e12)
        };
        t = cand;
        g = g_new;
    }
    best_t
}

/// Minimizes the sum of squared residuals over the bounds, starting from
/// `x0` (full physical coordinates). The returned point is always one that
/// was actually evaluated.
pub fn solve_least_squares<F>(
    residual_fn: &mut F,
    x0: &[f64],
    bounds: &Bounds,
    config: &TRConfig,
) -> Result<LocalSolve>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let radii = [config.min_radius, config.initial_radius, config.max_radius];
    if radii.iter().any(|r| !r.is_finite())
        || config.min_radius <= 0.0
        || config.min_radius > config.initial_radius
        || config.initial_radius > config.max_radius
    {
        return Err(Error::config(
            "trust-region radii must satisfy 0 < min <= initial <= max",
        ));
    }
    if config.max_evals == 0 {
        return Err(Error::config("max_evals must be >= 1"));
    }
    let u0: Vec<f64> = bounds
        .scale(x0)?
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("start point must be finite"));
    }
    let n = u0.len();
    let mut solver = Solver {
        f: residual_fn,
        bounds,
        n,
        hist: Vec::new(),
        n_evals: 0,
        best: 0,
    };
    let mut delta = config.initial_radius;
    solver.eval(u0.clone())?;
    // Coordinate pattern around the start; clipped probes that collapse
    // onto the start are skipped.
    for i in 0..n {
        for sign in [1.0, -1.0] {
            if solver.n_evals >= config.max_evals {
                break;
            }
            let mut u = u0.clone();
            u[i] = (u[i] + sign * delta).clamp(0.0, 1.0);
            if scaled_distance(&u, &u0) > 1e-12 {
                solver.eval(u)?;
            }
        }
    }

    let mut converged = false;
    loop {
        if delta < config.min_radius {
            converged = true;
            break;
        }
        if solver.n_evals >= config.max_evals {
            break;
        }
        let center = solver.best;
        if !solver.hist[center].objective.is_finite() {
            break;
        }
        let Some((r_c, jac, hessians)) = solver.build_models(center, delta) else {
            delta *= 0.5;
            continue;
        };
        let m = r_c.len();
        let mut grad = Array1::<f64>::zeros(n);
        let mut b_mat = Array2::<f64>::zeros((n, n));
        for k in 0..m {
            for i in 0..n {
                grad[i] += 2.0 * jac[[k, i]] * r_c[k];
                for j in 0..n {
                    b_mat[[i, j]] +=
                        2.0 * jac[[k, i]] * jac[[k, j]] + 2.0 * r_c[k] * hessians[k][[i, j]];
                }
            }
        }
        let u_c = solver.hist[center].u.clone();
        let f_c = solver.hist[center].objective;
        let lo: Vec<f64> = (0..n).map(|i| (-delta).max(-u_c[i])).collect();
        let hi: Vec<f64> = (0..n).map(|i| delta.min(1.0 - u_c[i])).collect();
        let step = solve_subproblem(&grad, &b_mat, &lo, &hi);
        let pred = -(grad.dot(&step) + 0.5 * step.dot(&b_mat.dot(&step)));
        let step_inf = step.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if step_inf < 1e-14 || pred <= f_c.abs().max(1.0) * 1e-15 {
            delta *= 0.5;
            continue;
        }
        let cand: Vec<f64> = u_c
            .iter()
            .zip(&step)
            .map(|(a, s)| (a + s).clamp(0.0, 1.0))
            .collect();
        let (idx, fresh) = solver.eval(cand)?;
        let f_new = solver.hist[idx].objective;
        let rho = if f_new.is_finite() {
            (f_c - f_new) / pred
        } else {
            -1.0
        };
        if rho > 0.75 && step_inf >= 0.9 * delta {
            delta = (2.0 * delta).min(config.max_radius);
        } else if rho <= 0.1 {
            delta *= 0.5;
        } else if !fresh && solver.best == center {
            // The model keeps proposing an already-known point without
            // improving the incumbent; force the radius down to move on.
            delta *= 0.5;
        }
    }

    let bh = &solver.hist[solver.best];
    let params = bounds.unscale(&bh.u)?;
    Ok(LocalSolve {
        best: EvaluatedPoint {
            scaled: bh.u.clone(),
            params,
            residuals: bh.residuals.clone().unwrap_or_default(),
            objective: bh.objective,
        },
        n_evals: solver.n_evals,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::Param;

    fn box2(lo: f64, hi: f64) -> Bounds {
        Bounds::new(vec![Param::free("x1", lo, hi), Param::free("x2", lo, hi)]).unwrap()
    }

    #[test]
    fn rosenbrock_least_squares() {
        let bounds = box2(-2.0, 2.0);
        let mut f = |x: &[f64]| Ok(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
        let out = solve_least_squares(
            &mut f,
            &[-1.2, 1.0],
            &bounds,
            &TRConfig {
                max_evals: 150,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.n_evals <= 150);
        assert!(
            out.best.objective < 1e-8,
            "objective {} after {} evals at {:?}",
            out.best.objective,
            out.n_evals,
            out.best.params
        );
        assert!((out.best.params[0] - 1.0).abs() < 1e-3);
        assert!((out.best.params[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn linear_interior_least_squares() {
        let bounds = box2(0.0, 1.0);
        let mut f =
            |x: &[f64]| Ok(vec![x[0] - 0.6, x[1] - 0.4, x[0] + x[1] - 1.0]);
        let out = solve_least_squares(&mut f, &[0.1, 0.9], &bounds, &TRConfig::default()).unwrap();
        assert!(out.best.objective < 1e-8, "objective {}", out.best.objective);
        assert!((out.best.params[0] - 0.6).abs() < 1e-4);
        assert!((out.best.params[1] - 0.4).abs() < 1e-4);
    }

    #[test]
    fn bounded_minimizer_lands_on_boundary_with_kkt() {
        // Unconstrained minimum at (2, 0.5) sits outside the unit box; the
        // projected solution is (1, 0.5) with zero projected gradient.
        let bounds = box2(0.0, 1.0);
        let target = [2.0, 0.5];
        let mut f = |x: &[f64]| Ok(vec![x[0] - target[0], x[1] - target[1]]);
        let out = solve_least_squares(&mut f, &[0.2, 0.3], &bounds, &TRConfig::default()).unwrap();
        let x = &out.best.params;
        let grad = [2.0 * (x[0] - target[0]), 2.0 * (x[1] - target[1])];
        let kkt: f64 = (0..2)
            .map(|i| {
                let projected = (x[i] - grad[i]).clamp(0.0, 1.0);
                (x[i] - projected).abs()
            })
            .fold(0.0, f64::max);
        assert!(kkt < 1e-6, "KKT residual {kkt} at {x:?}");
        assert!((x[0] - 1.0).abs() < 1e-9, "expected boundary point, got {x:?}");
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let bounds = box2(-2.0, 2.0);
        let mut f = |x: &[f64]| Ok(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
        let out = solve_least_squares(
            &mut f,
            &[-1.2, 1.0],
            &bounds,
            &TRConfig {
                max_evals: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.n_evals, 5);
        assert!(!out.converged);
    }

    #[test]
    fn never_evaluates_outside_bounds() {
        let bounds = Bounds::new(vec![
            Param::free("a", 1.0, 3.0),
            Param::free("b", -1.0, 0.0),
        ])
        .unwrap();
        let mut f = |x: &[f64]| {
            assert!((1.0..=3.0).contains(&x[0]), "x0 = {}", x[0]);
            assert!((-1.0..=0.0).contains(&x[1]), "x1 = {}", x[1]);
            Ok(vec![x[0] - 2.9, x[1] + 0.95])
        };
        let out = solve_least_squares(&mut f, &[1.5, -0.5], &bounds, &TRConfig::default()).unwrap();
        assert!(out.best.objective < 1e-8);
    }

    #[test]
    fn evaluation_failures_are_survivable() {
        // The lower-left quadrant fails; the minimum sits elsewhere.
        let bounds = box2(0.0, 1.0);
        let mut f = |x: &[f64]| {
            if x[0] < 0.3 && x[1] < 0.3 {
                Err(Error::numerical("bad region"))
            } else {
                Ok(vec![x[0] - 0.7, x[1] - 0.2])
            }
        };
        let out = solve_least_squares(&mut f, &[0.35, 0.35], &bounds, &TRConfig::default())
            .unwrap();
        assert!(out.best.objective < 1e-8, "objective {}", out.best.objective);
    }

    #[test]
    fn constant_objective_stops_at_start() {
        let bounds = box2(0.0, 1.0);
        let mut f = |_: &[f64]| Ok(vec![2.0]);
        let out = solve_least_squares(&mut f, &[0.4, 0.6], &bounds, &TRConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.best.params, vec![0.4, 0.6]);
        assert_eq!(out.best.objective, 4.0);
    }

    #[test]
    fn config_validation() {
        let bounds = box2(0.0, 1.0);
        let mut f = |x: &[f64]| Ok(vec![x[0]]);
        let bad = TRConfig {
            min_radius: 0.5,
            initial_radius: 0.1,
            ..Default::default()
        };
        assert!(solve_least_squares(&mut f, &[0.5, 0.5], &bounds, &bad).is_err());
    }
}
