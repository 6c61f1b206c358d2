//! The four run modes behind the subcommands.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use plexciton::analytic::{contour_scan, ndark_optimal_ratio, three_state_asymptotic, ThreeStateModel};
use plexciton::optimizer::{MultistartConfig, Param};
use plexciton::{
    initial_state, multistart, propagate, Bounds, Error, IntegratorConfig, Model, ObservableSet,
    PulseSpec, Result, SystemSpec, Trajectory,
};

use crate::config::{self, KeyValues, SimSettings, SIM_SECTIONS};
use crate::output::{self, fmt, Provenance};

fn run_one(settings: &SimSettings) -> Result<Trajectory> {
    let model = Model::new(settings.spec.clone())?;
    let obs = ObservableSet::dark_defaults(&model.basis);
    let init = initial_state(&settings.initial, &model.basis)?;
    propagate(
        &init,
        &model,
        settings.pulse.as_ref(),
        &settings.integrator,
        settings.t_end_fs,
        &obs,
    )
}

// ---------------------------------------------------------------------
// simulate

pub fn simulate(kv: &mut KeyValues, out_dir: &Path, prov: &Provenance) -> Result<()> {
    let settings = config::sim_settings(kv)?;
    kv.finish(SIM_SECTIONS)?;
    let traj = run_one(&settings)?;
    if let Some(note) = &traj.truncation_warning {
        eprintln!("note: plasmon truncation warning: {note}");
    }
    let mut w = output::create(out_dir, "trajectory.csv", prov)?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    let mut w = output::create(out_dir, "summary.csv", prov)?;
    write_summary(&mut w, &traj)?;
    w.flush()?;
    Ok(())
}

fn write_summary<W: Write>(w: &mut W, traj: &Trajectory) -> Result<()> {
    writeln!(w, "key,value")?;
    for &(i, j) in &traj.pairs {
        let (c, t) = traj.max_concurrence(i, j).unwrap_or((0.0, 0.0));
        writeln!(w, "max_c_{}_{},{}", i + 1, j + 1, fmt(c))?;
        writeln!(w, "t_max_c_{}_{},{}", i + 1, j + 1, fmt(t))?;
    }
    writeln!(w, "c_sum,{}", fmt(traj.summed_max_concurrence()))?;
    if let Some(last) = traj.qd_pop.last() {
        for (i, p) in last.iter().enumerate() {
            writeln!(w, "final_p_qd{},{}", i + 1, fmt(*p))?;
        }
    }
    if let Some(n) = traj.plasmon_n.last() {
        writeln!(w, "final_plasmon_n,{}", fmt(*n))?;
    }
    writeln!(w, "top_level_pop_max,{}", fmt(traj.top_level_pop_max))?;
    writeln!(w, "n_steps,{}", traj.n_steps)?;
    writeln!(w, "n_rhs,{}", traj.n_rhs)?;
    writeln!(
        w,
        "truncation_warning,{}",
        u8::from(traj.truncation_warning.is_some())
    )?;
    Ok(())
}

// ---------------------------------------------------------------------
// sweep

struct Axis {
    key: String,
    values: Vec<f64>,
}

fn read_axis(kv: &mut KeyValues, which: usize) -> Result<Option<Axis>> {
    let prefix = format!("sweep.axis{which}");
    let Some(key) = kv.get_str(&format!("{prefix}.param")) else {
        if which == 1 {
            return Err(Error::config("missing required key `sweep.axis1.param`"));
        }
        return Ok(None);
    };
    let min = kv.req_f64(&format!("{prefix}.min"))?;
    let max = kv.req_f64(&format!("{prefix}.max"))?;
    let steps = kv.req_usize(&format!("{prefix}.steps"))?;
    Ok(Some(Axis {
        key,
        values: config::linspace(min, max, steps)?,
    }))
}

/// Enough digits to reproduce the f64 exactly after parsing.
fn exact(v: f64) -> String {
    format!("{v:.17e}")
}

struct SweepRow {
    axis: (f64, Option<f64>),
    max_c: Vec<f64>,
    c_sum: f64,
    final_p_qd: Vec<f64>,
    final_plasmon_n: f64,
    truncated: bool,
}

pub fn sweep(kv: &mut KeyValues, out_dir: &Path, prov: &Provenance) -> Result<()> {
    let axis1 = read_axis(kv, 1)?.expect("axis1 is required");
    let axis2 = read_axis(kv, 2)?;
    let declared: Vec<&str> = SIM_SECTIONS.iter().copied().chain(["sweep"]).collect();

    let grid: Vec<(f64, Option<f64>)> = match &axis2 {
        Some(a2) => axis1
            .values
            .iter()
            .flat_map(|&v1| a2.values.iter().map(move |&v2| (v1, Some(v2))))
            .collect(),
        None => axis1.values.iter().map(|&v| (v, None)).collect(),
    };

    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&(v1, v2)| -> Result<SweepRow> {
            let mut point = kv.clone();
            point.set(&axis1.key, exact(v1));
            if let (Some(a2), Some(v2)) = (&axis2, v2) {
                point.set(&a2.key, exact(v2));
            }
            let settings = config::sim_settings(&mut point)?;
            for (axis, which) in [(Some(&axis1), 1usize), (axis2.as_ref(), 2)] {
                if let Some(axis) = axis {
                    if !point.was_consumed(&axis.key) {
                        return Err(Error::config(format!(
                            "sweep.axis{which}.param `{}` is not a simulation parameter",
                            axis.key
                        )));
                    }
                }
            }
            point.finish(&declared)?;
            let traj = run_one(&settings)?;
            Ok(SweepRow {
                axis: (v1, v2),
                max_c: traj.max_concurrence_per_pair(),
                c_sum: traj.summed_max_concurrence(),
                final_p_qd: traj.qd_pop.last().cloned().unwrap_or_default(),
                final_plasmon_n: traj.plasmon_n.last().copied().unwrap_or(0.0),
                truncated: traj.truncation_warning.is_some(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let truncated = rows.iter().filter(|r| r.truncated).count();
    if truncated > 0 {
        eprintln!("note: plasmon truncation warning on {truncated} of {} grid points", rows.len());
    }

    let n_qd = rows
        .first()
        .map(|r| r.final_p_qd.len())
        .unwrap_or_default();
    let mut w = output::create(out_dir, "sweep.csv", prov)?;
    write!(w, "{}", axis1.key)?;
    if let Some(a2) = &axis2 {
        write!(w, ",{}", a2.key)?;
    }
    for i in 0..n_qd {
        for j in (i + 1)..n_qd {
            write!(w, ",max_c_{}_{}", i + 1, j + 1)?;
        }
    }
    for i in 0..n_qd {
        write!(w, ",final_p_qd{}", i + 1)?;
    }
    writeln!(w, ",c_sum,final_plasmon_n,truncation_warning")?;
    for row in &rows {
        write!(w, "{}", fmt(row.axis.0))?;
        if let Some(v2) = row.axis.1 {
            write!(w, ",{}", fmt(v2))?;
        }
        for c in &row.max_c {
            write!(w, ",{}", fmt(*c))?;
        }
        for p in &row.final_p_qd {
            write!(w, ",{}", fmt(*p))?;
        }
        writeln!(
            w,
            ",{},{},{}",
            fmt(row.c_sum),
            fmt(row.final_plasmon_n),
            u8::from(row.truncated)
        )?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------
// optimize

/// The optimization vector layout: one coupling per QD, then fluence,
/// pulse width, shared pure dephasing, and plasmon loss.
fn param_names(n_qd: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n_qd).map(|i| format!("g{i}")).collect();
    names.extend(["fluence", "tau", "gamma_d", "gamma_s"].map(String::from));
    names
}

fn bounded_param(kv: &mut KeyValues, name: &str, lo: f64, hi: f64) -> Result<Param> {
    if let Some(v) = kv.get_f64(&format!("optimize.{name}.fixed"))? {
        return Ok(Param::fixed(name, v));
    }
    let lower = kv.get_f64(&format!("optimize.{name}.lower"))?.unwrap_or(lo);
    let upper = kv.get_f64(&format!("optimize.{name}.upper"))?.unwrap_or(hi);
    Ok(Param::free(name, lower, upper))
}

/// Applies an optimization vector to the configured template.
fn realize(settings: &SimSettings, x: &[f64]) -> (SystemSpec, PulseSpec) {
    let n = settings.spec.n_qd();
    let mut spec = settings.spec.clone();
    for (qd, &g) in spec.qds.iter_mut().zip(&x[..n]) {
        qd.g_mev = g;
    }
    for qd in &mut spec.qds {
        qd.gamma_d_mev = x[n + 2];
    }
    spec.plasmon.gamma_s_mev = x[n + 3];
    let carrier = settings
        .pulse
        .as_ref()
        .map(|p| p.carrier_mev)
        .unwrap_or(spec.plasmon.omega_mev);
    let mut pulse = PulseSpec::new(x[n], x[n + 1], carrier);
    if let Some(p) = &settings.pulse {
        pulse.trunc_halfwidth = p.trunc_halfwidth;
    }
    (spec, pulse)
}

fn evaluate(settings: &SimSettings, integrator: &IntegratorConfig, x: &[f64]) -> Result<Trajectory> {
    let (spec, pulse) = realize(settings, x);
    let model = Model::new(spec)?;
    let init = initial_state(&settings.initial, &model.basis)?;
    propagate(
        &init,
        &model,
        Some(&pulse),
        integrator,
        settings.t_end_fs,
        &ObservableSet::empty(),
    )
}

pub fn optimize(kv: &mut KeyValues, out_dir: &Path, prov: &Provenance, seed: u64) -> Result<()> {
    let settings = config::sim_settings(kv)?;
    let n_qd = settings.spec.n_qd();

    let names = param_names(n_qd);
    let mut params = Vec::with_capacity(names.len());
    for i in 1..=n_qd {
        params.push(bounded_param(kv, &format!("g{i}"), 0.0, 25.0)?);
    }
    params.push(bounded_param(kv, "fluence", 0.0, 700.0)?);
    params.push(bounded_param(kv, "tau", 10.0, 200.0)?);
    params.push(bounded_param(kv, "gamma_d", 0.0, 5.0)?);
    params.push(bounded_param(kv, "gamma_s", 100.0, 300.0)?);
    let bounds = Bounds::new(params)?;

    let mut mc = MultistartConfig {
        seed,
        ..Default::default()
    };
    if let Some(v) = kv.get_usize("optimize.samples")? {
        mc.sample_count = v;
    }
    if let Some(v) = kv.get_usize("optimize.budget")? {
        mc.total_budget = v;
    }
    if let Some(v) = kv.get_f64("optimize.cluster_radius")? {
        mc.cluster_radius = v;
    }
    if let Some(v) = kv.get_usize("optimize.max_local_evals")? {
        mc.local.max_evals = v;
    }
    let declared: Vec<&str> = SIM_SECTIONS.iter().copied().chain(["optimize"]).collect();
    kv.finish(&declared)?;

    // Positivity checks are diagnostics, not dynamics; skip them in the
    // inner loop and audit the re-simulated optima instead.
    let eval_integrator = IntegratorConfig {
        check_positivity: false,
        ..settings.integrator.clone()
    };
    let objective =
        |x: &[f64]| -> Result<Vec<f64>> {
            let traj = evaluate(&settings, &eval_integrator, x)?;
            Ok(traj
                .max_concurrence_per_pair()
                .iter()
                .map(|c| 1.0 - c)
                .collect())
        };
    let outcome = multistart(objective, &bounds, &mc)?;

    let pair_labels: Vec<String> = (0..n_qd)
        .flat_map(|i| ((i + 1)..n_qd).map(move |j| format!("{}_{}", i + 1, j + 1)))
        .collect();

    let mut w = output::create(out_dir, "log.csv", prov)?;
    write!(w, "eval_id")?;
    for name in &names {
        write!(w, ",{name}")?;
    }
    for label in &pair_labels {
        write!(w, ",r_{label}")?;
    }
    writeln!(w, ",objective,phase,cluster_id")?;
    for rec in &outcome.log {
        write!(w, "{}", rec.eval_id)?;
        for v in &rec.params {
            write!(w, ",{}", fmt(*v))?;
        }
        for r in &rec.residuals {
            write!(w, ",{}", fmt(*r))?;
        }
        let cluster = rec
            .cluster_id
            .map(|c| c.to_string())
            .unwrap_or_default();
        writeln!(w, ",{},{},{}", fmt(rec.objective), rec.phase.as_str(), cluster)?;
    }
    w.flush()?;

    let ranked: Vec<(Vec<f64>, f64)> = if outcome.optima.is_empty() {
        eprintln!("note: budget too small for local refinement; reporting the best sampled point");
        let best = outcome
            .log
            .iter()
            .filter(|r| r.objective.is_finite())
            .min_by(|a, b| a.objective.total_cmp(&b.objective))
            .expect("multistart guarantees at least one finite evaluation");
        vec![(best.params.clone(), best.objective)]
    } else {
        outcome
            .optima
            .iter()
            .map(|o| (o.params.clone(), o.objective))
            .collect()
    };

    let mut w = output::create(out_dir, "optima.csv", prov)?;
    write!(w, "rank")?;
    for name in &names {
        write!(w, ",{name}")?;
    }
    write!(w, ",objective")?;
    for label in &pair_labels {
        write!(w, ",max_c_{label},t_max_c_{label}")?;
    }
    writeln!(w, ",c_sum")?;
    for (k, (params, objective)) in ranked.iter().enumerate() {
        let traj = evaluate(&settings, &settings.integrator, params)?;
        let mut t = output::create(out_dir, &format!("optimum_{}_trajectory.csv", k + 1), prov)?;
        traj.write_csv(&mut t)?;
        t.flush()?;
        write!(w, "{}", k + 1)?;
        for v in params {
            write!(w, ",{}", fmt(*v))?;
        }
        write!(w, ",{}", fmt(*objective))?;
        for &(i, j) in &traj.pairs {
            let (c, tc) = traj.max_concurrence(i, j).unwrap_or((0.0, 0.0));
            write!(w, ",{},{}", fmt(c), fmt(tc))?;
        }
        writeln!(w, ",{}", fmt(traj.summed_max_concurrence()))?;
    }
    w.flush()?;
    eprintln!(
        "optimization finished: {} evaluations, {} basins, {} optima",
        outcome.n_evals,
        outcome.n_clusters,
        ranked.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------
// analytic

pub fn analytic(kv: &mut KeyValues, out_dir: &Path, prov: &Provenance) -> Result<()> {
    let mode = kv.req_str("analytic.mode")?;
    match mode.as_str() {
        "dark" => {
            let n_qd = kv.get_usize("analytic.n_qd")?.unwrap_or(3);
            let gamma_s = kv.get_f64("analytic.gamma_s_mev")?.unwrap_or(100.0);
            let ratio_min = kv.req_f64("analytic.ratio_min")?;
            let ratio_max = kv.req_f64("analytic.ratio_max")?;
            let steps = kv.req_usize("analytic.steps")?;
            kv.finish(&["analytic"])?;
            let ratios = config::linspace(ratio_min, ratio_max, steps)?;
            let mut w = output::create(out_dir, "analytic.csv", prov)?;
            match n_qd {
                2 => {
                    writeln!(w, "ratio,fom,c_1_2")?;
                    for &r in &ratios {
                        let model = ThreeStateModel::new(10.0, 10.0 * r, gamma_s)?;
                        let (_, _, c) = three_state_asymptotic(&model)?;
                        writeln!(w, "{},{},{}", fmt(r), fmt((1.0 - c) * (1.0 - c)), fmt(c))?;
                    }
                }
                3 => {
                    writeln!(w, "ratio2,ratio3,fom,c_1_2,c_1_3,c_2_3")?;
                    for row in contour_scan(&ratios, &ratios, gamma_s)? {
                        writeln!(
                            w,
                            "{},{},{},{},{},{}",
                            fmt(row.ratio2),
                            fmt(row.ratio3),
                            fmt(row.fom),
                            fmt(row.c12),
                            fmt(row.c13),
                            fmt(row.c23)
                        )?;
                    }
                }
                other => {
                    return Err(Error::config(format!(
                        "analytic.n_qd must be 2 or 3, got {other}"
                    )));
                }
            }
            w.flush()?;
        }
        "scaling" => {
            let n_min = kv.get_usize("analytic.n_min")?.unwrap_or(2);
            let n_max = kv.get_usize("analytic.n_max")?.unwrap_or(150);
            kv.finish(&["analytic"])?;
            if n_min < 2 || n_max < n_min {
                return Err(Error::config(format!(
                    "scaling range must satisfy 2 <= n_min <= n_max, got {n_min}..={n_max}"
                )));
            }
            let mut w = output::create(out_dir, "analytic.csv", prov)?;
            writeln!(w, "n,x_opt,c_maj,c_min")?;
            for n in n_min..=n_max {
                let (x, c_maj, c_min) = ndark_optimal_ratio(n)?;
                writeln!(w, "{n},{},{},{}", fmt(x), fmt(c_maj), fmt(c_min))?;
            }
            w.flush()?;
        }
        other => {
            return Err(Error::config(format!(
                "analytic.mode must be dark or scaling, got `{other}`"
            )));
        }
    }
    Ok(())
}
