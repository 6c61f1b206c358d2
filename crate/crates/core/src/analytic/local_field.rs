//! Classical coupled-dipole picture of the plasmon-enhanced drive.
//!
//! Treating plasmon and QD as driven damped dipole oscillators
//!
//! mu'' + gamma mu' + omega^2 mu = A E(t), A = 2 d^2 omega / hbar,
//!
//! the plasmon's steady response to a resonant carrier re-radiates a local
//! field at the QD that is much larger than the incident one. The
//! enhancement and the resulting QD Rabi energy have the closed forms
//! carried by [`local_field`]; the cycle-matching rule for two QDs flopping
//! under that common enhanced field is [`rabi_ratio`].

use crate::model::SystemSpec;
use crate::units::{DEBYE_VM_TO_MEV, HBAR_MEV_FS};
use crate::{Error, Result};

/// Classical-model parameters mapped from the cavity-QED description, plus
/// the local-field enhancement for one QD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFieldModel {
    /// Peak local field at the QD in V/m: 2 (d_s/d_q)(g/gamma_s) E0.
    pub e0_loc_vm: f64,
    /// Rabi energy hbar*Omega_R = 2 g d_s E0 / gamma_s in meV.
    pub omega_r_mev: f64,
    /// Dipole-dipole coupling g/(d_s d_q) in meV per Debye^2 (couplings
    /// quoted as energies, so the hbar is already absorbed).
    pub j_mev_per_debye2: f64,
    /// Plasmon oscillator strength 2 d_s^2 omega_s / hbar in Debye^2/fs.
    pub a_s: f64,
    /// QD oscillator strength 2 d_q^2 omega_q / hbar in Debye^2/fs.
    pub a_q: f64,
    /// Classical QD linewidth 2 gamma_d in meV.
    pub gamma_q_mev: f64,
}

/// Maps the system onto the classical two-dipole model and evaluates the
/// local-field enhancement seen by QD `qd_index` under a peak incident
/// field `e0_vm` (V/m).
pub fn local_field(spec: &SystemSpec, qd_index: usize, e0_vm: f64) -> Result<LocalFieldModel> {
    let qd = spec
        .qds
        .get(qd_index)
        .ok_or_else(|| Error::config(format!("QD index {qd_index} out of range")))?;
    let gamma_s = spec.plasmon.gamma_s_mev;
    if gamma_s <= 0.0 {
        return Err(Error::config(
            "local-field enhancement needs gamma_s > 0",
        ));
    }
    let d_s = spec.plasmon.d_debye;
    let d_q = qd.d_debye;
    if d_q <= 0.0 || d_s <= 0.0 {
        return Err(Error::config("dipole moments must be > 0"));
    }
    let g = qd.g_mev;
    Ok(LocalFieldModel {
        e0_loc_vm: 2.0 * (d_s / d_q) * (g / gamma_s) * e0_vm,
        omega_r_mev: 2.0 * g * d_s * e0_vm * DEBYE_VM_TO_MEV / gamma_s,
        j_mev_per_debye2: g / (d_s * d_q),
        a_s: 2.0 * d_s * d_s * spec.plasmon.omega_mev / HBAR_MEV_FS,
        a_q: 2.0 * d_q * d_q * qd.omega_mev / HBAR_MEV_FS,
        gamma_q_mev: 2.0 * qd.gamma_d_mev,
    })
}

/// Coupling ratio g2/g1 = n/(m - 1/2) for which QD 2 completes n full Rabi
/// cycles while QD 1 ends inverted on its m-th half cycle.
pub fn rabi_ratio(m: u32, n: u32) -> f64 {
    assert!(m >= 1 && n >= 1, "cycle counts must be positive");
    n as f64 / (m as f64 - 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec() -> SystemSpec {
        SystemSpec::resonant(&[12.5, 24.9], 100.0, 3)
    }

    #[test]
    fn zero_field_gives_zero_rabi() {
        let lf = local_field(&spec(), 0, 0.0).unwrap();
        assert_eq!(lf.omega_r_mev, 0.0);
        assert_eq!(lf.e0_loc_vm, 0.0);
    }

    #[test]
    fn rabi_energy_linear_in_coupling_and_field() {
        let base = local_field(&spec(), 0, 1e7).unwrap();
        let mut doubled_g = spec();
        doubled_g.qds[0].g_mev *= 2.0;
        let lf2 = local_field(&doubled_g, 0, 1e7).unwrap();
        assert_abs_diff_eq!(lf2.omega_r_mev, 2.0 * base.omega_r_mev, epsilon = 1e-12);
        let lf3 = local_field(&spec(), 0, 3e7).unwrap();
        assert_abs_diff_eq!(lf3.omega_r_mev, 3.0 * base.omega_r_mev, epsilon = 1e-12);
    }

    #[test]
    fn rabi_energy_equals_dipole_times_local_field() {
        let s = spec();
        let lf = local_field(&s, 1, 5e6).unwrap();
        let direct = s.qds[1].d_debye * lf.e0_loc_vm * DEBYE_VM_TO_MEV;
        assert_abs_diff_eq!(lf.omega_r_mev, direct, epsilon = 1e-12 * direct.abs());
    }

    #[test]
    fn enhancement_magnitude() {
        // d_s/d_q ~ 308 and g/gamma_s = 0.125 put the enhancement near 77.
        let lf = local_field(&spec(), 0, 1.0).unwrap();
        assert_abs_diff_eq!(lf.e0_loc_vm, 2.0 * (4000.0 / 13.0) * 0.125, epsilon = 1e-12);
    }

    #[test]
    fn lossless_plasmon_rejected() {
        let s = SystemSpec::resonant(&[10.0], 0.0, 2);
        assert!(local_field(&s, 0, 1e7).is_err());
        assert!(local_field(&spec(), 5, 1e7).is_err());
    }

    #[test]
    fn rabi_ratio_values() {
        assert_abs_diff_eq!(rabi_ratio(1, 1), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rabi_ratio(4, 4), 8.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rabi_ratio(2, 1), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn dipole_ode_steady_state() {
        // Uncoupled plasmon dipole driven on resonance: the steady
        // amplitude must be A_s E0 / (omega_s gamma_s). Integrated with RK4
        // on mu'' + gamma mu' + omega^2 mu = A_s E0 cos(omega t) * k, with
        // rates in 1/fs and k converting Debye*(V/m) to meV.
        let s = spec();
        let e0 = 1e7;
        let lf = local_field(&s, 0, e0).unwrap();
        let omega = s.plasmon.omega_mev / HBAR_MEV_FS;
        let gamma = s.plasmon.gamma_s_mev / HBAR_MEV_FS;
        let drive_amp = lf.a_s * e0 * DEBYE_VM_TO_MEV / HBAR_MEV_FS;
        let expect = drive_amp / (omega * gamma);

        let mut mu = 0.0f64;
        let mut v = 0.0f64;
        let h = 0.002;
        let accel = |t: f64, mu: f64, v: f64| {
            drive_amp * (omega * t).cos() - gamma * v - omega * omega * mu
        };
        let mut t = 0.0;
        for _ in 0..150_000 {
            let k1v = accel(t, mu, v);
            let k1m = v;
            let k2v = accel(t + h / 2.0, mu + k1m * h / 2.0, v + k1v * h / 2.0);
            let k2m = v + k1v * h / 2.0;
            let k3v = accel(t + h / 2.0, mu + k2m * h / 2.0, v + k2v * h / 2.0);
            let k3m = v + k2v * h / 2.0;
            let k4v = accel(t + h, mu + k3m * h, v + k3v * h);
            let k4m = v + k3v * h;
            mu += h * (k1m + 2.0 * k2m + 2.0 * k3m + k4m) / 6.0;
            v += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0;
            t += h;
        }
        // At steady state mu and mu'/omega form a constant-amplitude
        // quadrature pair.
        let amplitude = (mu * mu + (v / omega) * (v / omega)).sqrt();
        assert!(
            (amplitude - expect).abs() / expect < 1e-3,
            "amplitude {amplitude:.6e} vs closed form {expect:.6e}"
        );
    }
}
