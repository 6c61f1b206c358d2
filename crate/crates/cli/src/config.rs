//! Flat key-value configuration files.
//!
//! One `section.key = value` assignment per line, `#` starts a comment,
//! blank lines are ignored. Keys are dotted paths such as `qd.1.g_mev`
//! (QD indices are 1-based). Parsing is strict within the sections a
//! command reads: a leftover key in one of those sections is an error,
//! while sections belonging to the other commands are ignored so a single
//! file can drive several run modes.

use std::collections::{BTreeMap, BTreeSet};

use plexciton::{
    Error, InitialState, IntegratorConfig, Method, PulseSpec, Result, SystemSpec,
};

/// Sections every trajectory-producing command reads.
pub const SIM_SECTIONS: &[&str] = &[
    "system",
    "qd",
    "plasmon",
    "pulse",
    "integrator",
    "run",
    "initial",
];

/// All section names the schema knows about.
const KNOWN_SECTIONS: &[&str] = &[
    "system",
    "qd",
    "plasmon",
    "pulse",
    "integrator",
    "run",
    "initial",
    "sweep",
    "optimize",
    "analytic",
];

/// Parsed assignments with consumption tracking.
#[derive(Debug, Clone)]
pub struct KeyValues {
    vals: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
}

impl KeyValues {
    /// Parses config text; duplicate keys and malformed lines are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vals = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::config(format!("line {}: empty key", lineno + 1)));
            }
            if vals.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(Self {
            vals,
            consumed: BTreeSet::new(),
        })
    }

    /// Inserts or replaces an assignment (used by sweep axis overrides).
    pub fn set(&mut self, key: &str, value: String) {
        self.vals.insert(key.to_string(), value);
        self.consumed.remove(key);
    }

    /// Whether a builder has read this key.
    pub fn was_consumed(&self, key: &str) -> bool {
        self.consumed.contains(key)
    }

    pub fn get_str(&mut self, key: &str) -> Option<String> {
        let v = self.vals.get(key).cloned();
        if v.is_some() {
            self.consumed.insert(key.to_string());
        }
        v
    }

    pub fn req_str(&mut self, key: &str) -> Result<String> {
        self.get_str(key)
            .ok_or_else(|| Error::config(format!("missing required key `{key}`")))
    }

    pub fn get_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.get_str(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::config(format!("key `{key}`: `{s}` is not a number"))),
        }
    }

    pub fn req_f64(&mut self, key: &str) -> Result<f64> {
        self.get_f64(key)?
            .ok_or_else(|| Error::config(format!("missing required key `{key}`")))
    }

    pub fn get_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.get_str(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Error::config(format!("key `{key}`: `{s}` is not a count"))),
        }
    }

    pub fn req_usize(&mut self, key: &str) -> Result<usize> {
        self.get_usize(key)?
            .ok_or_else(|| Error::config(format!("missing required key `{key}`")))
    }

    pub fn get_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.get_str(key) {
            None => Ok(None),
            Some(s) => match s.as_str() {
                "true" | "1" | "yes" => Ok(Some(true)),
                "false" | "0" | "no" => Ok(Some(false)),
                _ => Err(Error::config(format!(
                    "key `{key}`: `{s}` is not a boolean"
                ))),
            },
        }
    }

    /// Rejects leftover keys in the sections this command declared it
    /// reads, and unknown sections anywhere. Leftovers in other commands'
    /// sections are allowed.
    pub fn finish(&self, declared: &[&str]) -> Result<()> {
        for key in self.vals.keys() {
            if self.consumed.contains(key) {
                continue;
            }
            let section = key.split('.').next().unwrap_or("");
            if declared.contains(&section) {
                return Err(Error::config(format!("unknown key `{key}`")));
            }
            if !KNOWN_SECTIONS.contains(&section) {
                return Err(Error::config(format!("unknown section in key `{key}`")));
            }
        }
        Ok(())
    }
}

/// Everything a single propagation needs.
#[derive(Debug, Clone)]
pub struct SimSettings {
    pub spec: SystemSpec,
    pub pulse: Option<PulseSpec>,
    pub integrator: IntegratorConfig,
    pub t_end_fs: f64,
    pub initial: InitialState,
}

/// Builds propagation settings from the shared sections.
pub fn sim_settings(kv: &mut KeyValues) -> Result<SimSettings> {
    let n_qd = kv.req_usize("system.n_qd")?;
    if n_qd == 0 {
        return Err(Error::config("system.n_qd must be >= 1"));
    }
    let n_levels = kv.req_usize("plasmon.n_levels")?;
    let gamma_s = kv.req_f64("plasmon.gamma_s_mev")?;
    let g: Vec<f64> = (1..=n_qd)
        .map(|i| kv.req_f64(&format!("qd.{i}.g_mev")))
        .collect::<Result<_>>()?;

    let mut spec = SystemSpec::resonant(&g, gamma_s, n_levels);
    for i in 0..n_qd {
        let k = i + 1;
        if let Some(v) = kv.get_f64(&format!("qd.{k}.omega_mev"))? {
            spec.qds[i].omega_mev = v;
        }
        if let Some(v) = kv.get_f64(&format!("qd.{k}.d_debye"))? {
            spec.qds[i].d_debye = v;
        }
        if let Some(v) = kv.get_f64(&format!("qd.{k}.gamma_p_mev"))? {
            spec.qds[i].gamma_p_mev = v;
        }
        if let Some(v) = kv.get_f64(&format!("qd.{k}.gamma_d_mev"))? {
            spec.qds[i].gamma_d_mev = v;
        }
    }
    if let Some(v) = kv.get_f64("plasmon.omega_mev")? {
        spec.plasmon.omega_mev = v;
    }
    if let Some(v) = kv.get_f64("system.eps_med")? {
        spec.eps_med = v;
    }

    let pulse = pulse_settings(kv, spec.plasmon.omega_mev)?;
    let integrator = integrator_settings(kv)?;
    let t_end_fs = kv.req_f64("run.t_end_fs")?;

    let initial = match kv.get_str("initial.kind").as_deref() {
        None | Some("all_ground") => InitialState::AllGround,
        Some("single_excited") => {
            let qd = kv.req_usize("initial.qd")?;
            if qd == 0 || qd > n_qd {
                return Err(Error::config(format!(
                    "initial.qd must be in 1..={n_qd}, got {qd}"
                )));
            }
            InitialState::SingleExcited(qd - 1)
        }
        Some(other) => {
            return Err(Error::config(format!(
                "initial.kind must be all_ground or single_excited, got `{other}`"
            )));
        }
    };

    Ok(SimSettings {
        spec,
        pulse,
        integrator,
        t_end_fs,
        initial,
    })
}

/// A pulse is configured by giving a fluence; everything else defaults.
pub fn pulse_settings(kv: &mut KeyValues, carrier_default: f64) -> Result<Option<PulseSpec>> {
    let Some(fluence) = kv.get_f64("pulse.fluence_nj_cm2")? else {
        return Ok(None);
    };
    let tau = kv.req_f64("pulse.tau_fs")?;
    let carrier = kv.get_f64("pulse.carrier_mev")?.unwrap_or(carrier_default);
    let mut pulse = PulseSpec::new(fluence, tau, carrier);
    if let Some(v) = kv.get_f64("pulse.t_center_fs")? {
        pulse.t_center_fs = v;
    }
    if let Some(v) = kv.get_f64("pulse.trunc_halfwidth")? {
        pulse.trunc_halfwidth = v;
    }
    pulse.validate()?;
    Ok(Some(pulse))
}

fn integrator_settings(kv: &mut KeyValues) -> Result<IntegratorConfig> {
    let mut config = IntegratorConfig::default();
    if let Some(m) = kv.get_str("integrator.method") {
        config.method = match m.as_str() {
            "dopri5" => Method::Dopri5,
            "rk4" => Method::Rk4 {
                step_fs: kv.req_f64("integrator.step_fs")?,
            },
            "expm" => Method::ExpmOracle,
            other => {
                return Err(Error::config(format!(
                    "integrator.method must be dopri5, rk4, or expm, got `{other}`"
                )));
            }
        };
    }
    if let Some(v) = kv.get_f64("integrator.rtol")? {
        config.rtol = v;
    }
    if let Some(v) = kv.get_f64("integrator.atol")? {
        config.atol = v;
    }
    if let Some(v) = kv.get_f64("integrator.max_step_fs")? {
        config.max_step_fs = v;
    }
    if let Some(v) = kv.get_f64("integrator.stride_fs")? {
        config.stride_fs = v;
    }
    if let Some(v) = kv.get_bool("integrator.check_positivity")? {
        config.check_positivity = v;
    }
    if let Some(v) = kv.get_f64("integrator.trunc_tol")? {
        config.trunc_tol = v;
    }
    Ok(config)
}

/// Inclusive linear grid; a single step collapses to the lower edge.
pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::config("grid steps must be >= 1"));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    if max < min {
        return Err(Error::config(format!("grid range inverted: {min} > {max}")));
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps).map(|k| min + h * k as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_blanks_and_assignments() {
        let mut kv = KeyValues::parse(
            "# header\n\nsystem.n_qd = 2  # trailing\nqd.1.g_mev = 12.5\n",
        )
        .unwrap();
        assert_eq!(kv.req_usize("system.n_qd").unwrap(), 2);
        assert_eq!(kv.req_f64("qd.1.g_mev").unwrap(), 12.5);
    }

    #[test]
    fn rejects_duplicates_and_malformed_lines() {
        assert!(KeyValues::parse("a.b = 1\na.b = 2\n").is_err());
        assert!(KeyValues::parse("just words\n").is_err());
    }

    #[test]
    fn finish_flags_unread_keys_in_declared_sections_only() {
        let mut kv =
            KeyValues::parse("system.n_qd = 2\nsystem.typo = 3\noptimize.samples = 9\n").unwrap();
        kv.req_usize("system.n_qd").unwrap();
        let err = kv.finish(&["system"]).unwrap_err();
        assert!(err.to_string().contains("system.typo"), "{err}");
        kv.get_usize("system.typo").unwrap();
        kv.finish(&["system"]).unwrap();
    }

    #[test]
    fn finish_rejects_unknown_sections() {
        let kv = KeyValues::parse("nonsense.key = 1\n").unwrap();
        assert!(kv.finish(&["system"]).is_err());
    }

    #[test]
    fn sim_settings_round_trip() {
        let text = "\
system.n_qd = 2
qd.1.g_mev = 12.5
qd.2.g_mev = 25.0
qd.2.gamma_d_mev = 2.0
plasmon.n_levels = 3
plasmon.gamma_s_mev = 100.0
pulse.fluence_nj_cm2 = 263.4
pulse.tau_fs = 12.5
integrator.stride_fs = 2.0
run.t_end_fs = 600.0
initial.kind = all_ground
";
        let mut kv = KeyValues::parse(text).unwrap();
        let s = sim_settings(&mut kv).unwrap();
        kv.finish(SIM_SECTIONS).unwrap();
        assert_eq!(s.spec.n_qd(), 2);
        assert_eq!(s.spec.qds[1].gamma_d_mev, 2.0);
        let pulse = s.pulse.unwrap();
        assert_eq!(pulse.carrier_mev, s.spec.plasmon.omega_mev);
        assert_eq!(s.integrator.stride_fs, 2.0);
        assert_eq!(s.initial, InitialState::AllGround);
    }

    #[test]
    fn missing_required_key_is_a_config_error() {
        let mut kv = KeyValues::parse("system.n_qd = 2\n").unwrap();
        assert!(matches!(
            sim_settings(&mut kv),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn linspace_edges() {
        assert_eq!(linspace(1.0, 3.0, 3).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(linspace(5.0, 9.0, 1).unwrap(), vec![5.0]);
        assert!(linspace(1.0, 0.0, 3).is_err());
        assert!(linspace(0.0, 1.0, 0).is_err());
    }
}
