//! Time propagation of the master equation and observable recording.
//!
//! d rho / dt = (1/hbar) [ -i [H, rho] - i [H_d(t), rho] + L(rho) ],
//!
//! with H the rotating-frame Hamiltonian, H_d(t) = -(E0 G(t)/2) D the
//! rotating-wave drive, and L the dissipator. The default integrator is an
//! adaptive Dormand-Prince 5(4) pair; a fixed-step RK4 and a dense
//! matrix-exponential oracle (dark runs, M <= 64) serve as cross-checks.

mod expm;
mod integrator;
mod pulse;

pub use expm::{expm, liouvillian_dense, EXPM_MAX_DIM};
pub use pulse::{fluence_to_amplitude, pulse_envelope, DriveCtx, PulseSpec};

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::entanglement::pairwise_concurrences;
use crate::model::{BasisMap, Model};
use crate::units::HBAR_MEV_FS;
use crate::{Error, Result};

use integrator::{rk4_integrate, Dopri5, StepControl};

/// Density matrix over the composite basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub mat: Array2<C64>,
}

impl DensityMatrix {
    /// Pure-state projector |psi><psi| from a ket (normalized first).
    pub fn from_ket(ket: &Array1<C64>) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::config("cannot build a state from the zero ket"));
        }
        let m = ket.len();
        let mut mat = Array2::zeros((m, m));
        for a in 0..m {
            for b in 0..m {
                mat[[a, b]] = ket[a] * ket[b].conj() / C64::new(norm * norm, 0.0);
            }
        }
        Ok(Self { mat })
    }

    /// Dimension M.
    pub fn dim(&self) -> usize {
        self.mat.dim().0
    }

    /// Trace (should be 1 for a state).
    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    /// Largest absolute deviation from Hermiticity.
    pub fn herm_residual(&self) -> f64 {
        let m = self.dim();
        let mut r: f64 = 0.0;
        for i in 0..m {
            for j in i..m {
                r = r.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        r
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let sym = self.symmetrized();
        let (vals, _) = sym.mat.eigh(UPLO::Lower)?;
        Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// (rho + rho^dag) / 2.
    pub fn symmetrized(&self) -> Self {
        let half = C64::new(0.5, 0.0);
        let mat = self.mat.mapv(|z| z * half) + self.mat.t().mapv(|z| z.conj() * half);
        Self { mat }
    }
}

/// Supported initial conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Everything in its ground state, plasmon empty.
    AllGround,
    /// QD `i` (zero based) excited, all else ground.
    SingleExcited(usize),
    /// An arbitrary pure ket over the composite basis.
    Ket(Array1<C64>),
}

/// Builds the pure-state projector for an initial condition.
pub fn initial_state(kind: &InitialState, basis: &BasisMap) -> Result<DensityMatrix> {
    let dim = basis.dim();
    match kind {
        InitialState::AllGround => {
            let mut ket = Array1::zeros(dim);
            ket[basis.index(0, 0)] = C64::new(1.0, 0.0);
            DensityMatrix::from_ket(&ket)
        }
        InitialState::SingleExcited(i) => {
            if *i >= basis.n_qd() {
                return Err(Error::config(format!(
                    "QD index {i} out of range for N = {}",
                    basis.n_qd()
                )));
            }
            let mut ket = Array1::zeros(dim);
            ket[basis.index(1 << i, 0)] = C64::new(1.0, 0.0);
            DensityMatrix::from_ket(&ket)
        }
        InitialState::Ket(ket) => {
            if ket.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: ket.len(),
                });
            }
            DensityMatrix::from_ket(ket)
        }
    }
}

/// Time-stepping method.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Adaptive Dormand-Prince 5(4) with PI step control.
    Dopri5,
    /// Classical fixed-step RK4.
    Rk4 { step_fs: f64 },
    /// Dense matrix-exponential oracle (dark runs only, M <= 64).
    ExpmOracle,
}

/// Integration controls.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Relative tolerance for the adaptive method.
    pub rtol: f64,
    /// Absolute tolerance for the adaptive method.
    pub atol: f64,
    /// Largest allowed internal step in fs.
    pub max_step_fs: f64,
    /// Output sampling stride in fs.
    pub stride_fs: f64,
    /// Compute the smallest eigenvalue of rho at every output step.
    pub check_positivity: bool,
    /// Warn when the top plasmon level's population exceeds this.
    pub trunc_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Dopri5,
            rtol: 1e-8,
            atol: 1e-10,
            max_step_fs: 5.0,
            stride_fs: 1.0,
            check_positivity: true,
            trunc_tol: 1e-6,
        }
    }
}

impl IntegratorConfig {
    fn validate(&self) -> Result<()> {
        if self.rtol <= 0.0 || self.atol <= 0.0 {
            return Err(Error::config("integrator tolerances must be > 0"));
        }
        if self.max_step_fs <= 0.0 || self.stride_fs <= 0.0 {
            return Err(Error::config("step and stride must be > 0"));
        }
        if let Method::Rk4 { step_fs } = self.method {
            if step_fs <= 0.0 {
                return Err(Error::config("rk4 step must be > 0"));
            }
        }
        Ok(())
    }
}

/// Named projector observables tr(|psi><psi| rho).
#[derive(Debug, Clone, Default)]
pub struct ObservableSet {
    entries: Vec<(String, Array1<C64>)>,
}

impl ObservableSet {
    /// No extra observables.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Adds a named (not necessarily normalized) projector ket.
    pub fn push(&mut self, name: impl Into<String>, ket: Array1<C64>) {
        self.entries.push((name.into(), ket));
    }

    /// For two QDs: the symmetric and antisymmetric single-excitation
    /// states |S;0>, |A;0> with |S/A> = (|0,1> +- |1,0>)/sqrt(2), and the
    /// one-plasmon ground state |0,0;1>. Empty for other N.
    pub fn dark_defaults(basis: &BasisMap) -> Self {
        let mut set = Self::default();
        if basis.n_qd() != 2 || basis.n_levels() < 2 {
            return set;
        }
        let dim = basis.dim();
        let s = 1.0 / 2f64.sqrt();
        let mut sym = Array1::zeros(dim);
        sym[basis.index(0b01, 0)] = C64::new(s, 0.0);
        sym[basis.index(0b10, 0)] = C64::new(s, 0.0);
        set.push("S0", sym);
        let mut asym = Array1::zeros(dim);
        asym[basis.index(0b01, 0)] = C64::new(s, 0.0);
        asym[basis.index(0b10, 0)] = C64::new(-s, 0.0);
        set.push("A0", asym);
        let mut plasmon1 = Array1::zeros(dim);
        plasmon1[basis.index(0, 1)] = C64::new(1.0, 0.0);
        set.push("G1", plasmon1);
        set
    }

    /// Observable names in declaration order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    /// Number of observables.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether the set is empty.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn measure(&self, rho: &Array2<C64>) -> Vec<f64> {
        self.entries
            .iter()
            .map(|(_, ket)| {
                let mut acc = C64::new(0.0, 0.0);
                for (a, ka) in ket.iter().enumerate() {
                    if ka.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (b, kb) in ket.iter().enumerate() {
                        if kb.norm_sqr() == 0.0 {
                            continue;
                        }
                        acc += ka.conj() * rho[[a, b]] * kb;
                    }
                }
                acc.re
            })
            .collect()
    }
}

/// Sampled observables, monitors, and the final state of one propagation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample times in fs, strictly increasing, starting at 0.
    pub times: Vec<f64>,
    /// Excitation probability of each QD per sample.
    pub qd_pop: Vec<Vec<f64>>,
    /// Mean plasmon occupation per sample.
    pub plasmon_n: Vec<f64>,
    /// Pair labels (i, j), i < j, zero based, in lexicographic order.
    pub pairs: Vec<(usize, usize)>,
    /// Pairwise concurrences per sample, aligned with `pairs`.
    pub concurrence: Vec<Vec<f64>>,
    /// Names of the extra projector observables.
    pub obs_names: Vec<String>,
    /// Projector populations per sample, aligned with `obs_names`.
    pub obs: Vec<Vec<f64>>,
    /// |trace(rho) - 1| per sample.
    pub trace_err: Vec<f64>,
    /// Hermiticity residual per sample, taken before re-symmetrization.
    pub herm_err: Vec<f64>,
    /// Smallest eigenvalue per sample (NaN when the check is disabled).
    pub min_eig: Vec<f64>,
    /// Largest population seen in the top plasmon level.
    pub top_level_pop_max: f64,
    /// Set when the top-level population exceeded the configured tolerance.
    pub truncation_warning: Option<String>,
    /// The state at the final sample time.
    pub final_state: DensityMatrix,
    /// Accepted steps (adaptive) or total steps (fixed).
    pub n_steps: usize,
    /// Right-hand-side evaluations.
    pub n_rhs: usize,
}

impl Trajectory {
    /// Maximum concurrence of pair (i, j) over the samples and the time at
    /// which it occurs.
    pub fn max_concurrence(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        let pos = self
            .pairs
            .iter()
            .position(|&(a, b)| (a, b) == (i.min(j), i.max(j)))?;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (t, row) in self.times.iter().zip(&self.concurrence) {
            if row[pos] > best.0 {
                best = (row[pos], *t);
            }
        }
        Some(best)
    }

    /// Per-pair maxima over the window, in `pairs` order.
    pub fn max_concurrence_per_pair(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|&(i, j)| self.max_concurrence(i, j).map(|(c, _)| c).unwrap_or(0.0))
            .collect()
    }

    /// Sum over pairs of the per-pair maxima.
    pub fn summed_max_concurrence(&self) -> f64 {
        self.max_concurrence_per_pair().iter().sum()
    }

    /// Worst-case physicality monitors: (max |trace-1|, max herm residual,
    /// min eigenvalue seen). The eigenvalue is +inf when never checked.
    pub fn physicality(&self) -> (f64, f64, f64) {
        let tr = self.trace_err.iter().copied().fold(0.0, f64::max);
        let he = self.herm_err.iter().copied().fold(0.0, f64::max);
        let me = self
            .min_eig
            .iter()
            .copied()
            .filter(|v| !v.is_nan())
            .fold(f64::INFINITY, f64::min);
        (tr, he, me)
    }

    /// Writes the trajectory as CSV: `t_fs,P_qd1..,plasmon_n,C_i_j...,obs_*`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        write!(w, "t_fs")?;
        for i in 0..self.qd_pop.first().map_or(0, |r| r.len()) {
            write!(w, ",P_qd{}", i + 1)?;
        }
        write!(w, ",plasmon_n")?;
        for &(i, j) in &self.pairs {
            write!(w, ",C_{}_{}", i + 1, j + 1)?;
        }
        for name in &self.obs_names {
            write!(w, ",obs_{name}")?;
        }
        writeln!(w)?;
        for (k, t) in self.times.iter().enumerate() {
            write!(w, "{t:.6}")?;
            for p in &self.qd_pop[k] {
                write!(w, ",{p:.9e}")?;
            }
            write!(w, ",{:.9e}", self.plasmon_n[k])?;
            for c in &self.concurrence[k] {
                write!(w, ",{c:.9e}")?;
            }
            for o in &self.obs[k] {
                write!(w, ",{o:.9e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Right-hand side of the master equation at time `t` (in 1/fs), as a
/// freshly allocated matrix. `drive` carries the pulse context for driven
/// runs; pass `None` for dark evolution.
pub fn rhs(t: f64, rho: &Array2<C64>, model: &Model, drive: Option<&DriveCtx>) -> Result<Array2<C64>> {
    let m = model.dim();
    if rho.dim() != (m, m) {
        return Err(Error::Dimension {
            expected: m,
            got: rho.dim().0,
        });
    }
    let mut eval = RhsEval::new(model, drive.cloned());
    let mut out = Array2::zeros((m, m));
    eval.eval(t, rho, &mut out);
    Ok(out)
}

/// Reusable evaluation context holding the scratch buffer.
struct RhsEval<'m> {
    model: &'m Model,
    drive: Option<DriveCtx>,
    work: Array2<C64>,
}

impl<'m> RhsEval<'m> {
    fn new(model: &'m Model, drive: Option<DriveCtx>) -> Self {
        let m = model.dim();
        Self {
            model,
            drive,
            work: Array2::zeros((m, m)),
        }
    }

    fn eval(&mut self, t: f64, rho: &Array2<C64>, out: &mut Array2<C64>) {
        let one = C64::new(1.0, 0.0);
        let m = self.model.dim();
        // T = (H + c(t) D) rho; the commutator then follows from
        // Hermiticity of H, D, rho: [H, rho] = T - T^dag.
        self.work.fill(C64::new(0.0, 0.0));
        self.model.hamiltonian.mul_dense_acc(one, rho, &mut self.work);
        if let Some(drv) = &self.drive {
            let c = drv.coefficient(t);
            if c != 0.0 {
                self.model
                    .drive
                    .mul_dense_acc(C64::new(c, 0.0), rho, &mut self.work);
            }
        }
        let minus_i = C64::new(0.0, -1.0);
        for i in 0..m {
            for j in 0..m {
                let t_ij = self.work[[i, j]];
                let t_ji = self.work[[j, i]].conj();
                out[[i, j]] = minus_i * (t_ij - t_ji);
            }
        }
        self.model.lindblad.apply_acc(rho, out, &mut self.work);
        let inv_hbar = C64::new(1.0 / HBAR_MEV_FS, 0.0);
        out.mapv_inplace(|z| z * inv_hbar);
    }
}

/// Accumulates samples into a [`Trajectory`].
struct Recorder<'m> {
    model: &'m Model,
    config: IntegratorConfig,
    obs: ObservableSet,
    traj: Trajectory,
}

impl<'m> Recorder<'m> {
    fn new(model: &'m Model, config: &IntegratorConfig, obs: &ObservableSet) -> Self {
        let n = model.spec.n_qd();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
        Self {
            model,
            config: config.clone(),
            obs: obs.clone(),
            traj: Trajectory {
                times: Vec::new(),
                qd_pop: Vec::new(),
                plasmon_n: Vec::new(),
                pairs,
                concurrence: Vec::new(),
                obs_names: obs.names().map(str::to_owned).collect(),
                obs: Vec::new(),
                trace_err: Vec::new(),
                herm_err: Vec::new(),
                min_eig: Vec::new(),
                top_level_pop_max: 0.0,
                truncation_warning: None,
                final_state: DensityMatrix {
                    mat: Array2::zeros((model.dim(), model.dim())),
                },
                n_steps: 0,
                n_rhs: 0,
            },
        }
    }

    /// Records the (already re-symmetrized) state; `herm_before` is the
    /// Hermiticity residual measured before symmetrization.
    fn record(&mut self, t: f64, rho: &Array2<C64>, herm_before: f64) -> Result<()> {
        let basis = &self.model.basis;
        self.traj.times.push(t);
        self.traj.herm_err.push(herm_before);
        let trace: C64 = rho.diag().sum();
        self.traj.trace_err.push((trace.re - 1.0).abs().max(trace.im.abs()));
        let pops: Vec<f64> = self
            .model
            .ops
            .n_qd
            .iter()
            .map(|op| op.expectation(rho).re)
            .collect();
        self.traj.qd_pop.push(pops);
        self.traj
            .plasmon_n
            .push(self.model.ops.n_plasmon.expectation(rho).re);
        if basis.n_qd() >= 2 {
            let cm = pairwise_concurrences(rho, basis)?;
            self.traj
                .concurrence
                .push(cm.iter_pairs().map(|(_, _, v)| v).collect());
        } else {
            self.traj.concurrence.push(Vec::new());
        }
        self.traj.obs.push(self.obs.measure(rho));
        if self.config.check_positivity {
            let dm = DensityMatrix { mat: rho.clone() };
            self.traj.min_eig.push(dm.min_eigenvalue()?);
        } else {
            self.traj.min_eig.push(f64::NAN);
        }
        // Truncation monitor: total population of the top plasmon level.
        let ns = basis.n_levels();
        let mut top = 0.0;
        for q in 0..(1usize << basis.n_qd()) {
            let idx = basis.index(q, ns - 1);
            top += rho[[idx, idx]].re;
        }
        if top > self.traj.top_level_pop_max {
            self.traj.top_level_pop_max = top;
        }
        Ok(())
    }

    fn finish(mut self, final_rho: Array2<C64>, n_steps: usize, n_rhs: usize) -> Trajectory {
        if self.traj.top_level_pop_max > self.config.trunc_tol {
            self.traj.truncation_warning = Some(format!(
                "top plasmon level reached population {:.3e} (tolerance {:.1e}); increase n_levels",
                self.traj.top_level_pop_max, self.config.trunc_tol
            ));
        }
        self.traj.final_state = DensityMatrix { mat: final_rho };
        self.traj.n_steps = n_steps;
        self.traj.n_rhs = n_rhs;
        self.traj
    }
}

fn output_times(t_end: f64, stride: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    let mut k = 1usize;
    loop {
        let t = k as f64 * stride;
        if t >= t_end - 1e-9 {
            break;
        }
        times.push(t);
        k += 1;
    }
    times.push(t_end);
    times
}

fn symmetrize_in_place(rho: &mut Array2<C64>) {
    let m = rho.dim().0;
    for i in 0..m {
        for j in (i + 1)..m {
            let avg = (rho[[i, j]] + rho[[j, i]].conj()) * C64::new(0.5, 0.0);
            rho[[i, j]] = avg;
            rho[[j, i]] = avg.conj();
        }
        let d = rho[[i, i]];
        rho[[i, i]] = C64::new(d.re, 0.0);
    }
}

fn herm_residual_of(rho: &Array2<C64>) -> f64 {
    let m = rho.dim().0;
    let mut r: f64 = 0.0;
    for i in 0..m {
        for j in i..m {
            r = r.max((rho[[i, j]] - rho[[j, i]].conj()).norm());
        }
    }
    r
}

/// Propagates an initial state to `t_end_fs`, sampling on the configured
/// stride. `pulse` switches the drive on; `None` is a dark run.
pub fn propagate(
    initial: &DensityMatrix,
    model: &Model,
    pulse: Option<&PulseSpec>,
    config: &IntegratorConfig,
    t_end_fs: f64,
    obs: &ObservableSet,
) -> Result<Trajectory> {
    config.validate()?;
    let m = model.dim();
    if initial.dim() != m {
        return Err(Error::Dimension {
            expected: m,
            got: initial.dim(),
        });
    }
    if t_end_fs <= 0.0 {
        return Err(Error::config("t_end must be > 0"));
    }
    if config.method == Method::ExpmOracle {
        if pulse.is_some() {
            return Err(Error::config(
                "the dense exponential oracle only supports dark (undriven) runs",
            ));
        }
        return propagate_expm_oracle(initial, model, config, t_end_fs, obs);
    }
    let drive = match pulse {
        Some(p) => Some(DriveCtx::new(p.clone(), model.spec.eps_med)?),
        None => None,
    };
    let mut eval = RhsEval::new(model, drive);
    let mut recorder = Recorder::new(model, config, obs);
    let mut rho = initial.mat.clone();
    symmetrize_in_place(&mut rho);
    recorder.record(0.0, &rho, initial.herm_residual())?;

    let times = output_times(t_end_fs, config.stride_fs);
    let mut f = |t: f64, y: &Array2<C64>, out: &mut Array2<C64>| eval.eval(t, y, out);
    match config.method {
        Method::Dopri5 => {
            let mut stepper = Dopri5::new((m, m));
            let ctrl = StepControl {
                rtol: config.rtol,
                atol: config.atol,
                max_step: config.max_step_fs,
            };
            for pair in times.windows(2) {
                stepper.integrate_to(&mut f, pair[0], pair[1], &mut rho, ctrl)?;
                let herm = herm_residual_of(&rho);
                symmetrize_in_place(&mut rho);
                stepper.invalidate_fsal();
                recorder.record(pair[1], &rho, herm)?;
            }
            let (n_steps, n_rhs) = (stepper.n_steps, stepper.n_rhs);
            Ok(recorder.finish(rho, n_steps, n_rhs))
        }
        Method::Rk4 { step_fs } => {
            let mut n_steps = 0usize;
            for pair in times.windows(2) {
                rk4_integrate(&mut f, pair[0], pair[1], &mut rho, step_fs)?;
                n_steps += ((pair[1] - pair[0]) / step_fs).ceil().max(1.0) as usize;
                let herm = herm_residual_of(&rho);
                symmetrize_in_place(&mut rho);
                recorder.record(pair[1], &rho, herm)?;
            }
            let n_rhs = 4 * n_steps;
            Ok(recorder.finish(rho, n_steps, n_rhs))
        }
        Method::ExpmOracle => unreachable!("handled above"),
    }
}

/// Propagates with the dense matrix-exponential oracle: vec(rho) advances
/// by exp(L * stride) per output step, exact for the time-independent dark
/// generator. Restricted to M <= [`EXPM_MAX_DIM`].
pub fn propagate_expm_oracle(
    initial: &DensityMatrix,
    model: &Model,
    config: &IntegratorConfig,
    t_end_fs: f64,
    obs: &ObservableSet,
) -> Result<Trajectory> {
    config.validate()?;
    let m = model.dim();
    if initial.dim() != m {
        return Err(Error::Dimension {
            expected: m,
            got: initial.dim(),
        });
    }
    let l = liouvillian_dense(model)?;
    let times = output_times(t_end_fs, config.stride_fs);
    let mut recorder = Recorder::new(model, config, obs);
    let mut rho = initial.mat.clone();
    symmetrize_in_place(&mut rho);
    recorder.record(0.0, &rho, initial.herm_residual())?;

    // Output times are a uniform stride grid except possibly the last gap;
    // exponentials are cached per distinct gap length.
    let mut props: Vec<(f64, Array2<C64>)> = Vec::new();
    let mut v = expm::vec_rho(&rho);
    let mut n_steps = 0usize;
    for pair in times.windows(2) {
        let dt = pair[1] - pair[0];
        let idx = match props.iter().position(|(d, _)| (d - dt).abs() < 1e-12) {
            Some(i) => i,
            None => {
                let p = expm(&l.mapv(|z| z * C64::new(dt, 0.0)))?;
                props.push((dt, p));
                props.len() - 1
            }
        };
        v = props[idx].1.dot(&v);
        n_steps += 1;
        let mut mat = expm::unvec_rho(&v, m);
        let herm = herm_residual_of(&mat);
        symmetrize_in_place(&mut mat);
        v = expm::vec_rho(&mat);
        recorder.record(pair[1], &mat, herm)?;
        rho = mat;
    }
    Ok(recorder.finish(rho, n_steps, 0))
}
