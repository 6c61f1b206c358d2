//! Composite QD-plasmon model: parameters, basis, operators, Hamiltonian,
//! drive, and dissipator action.
//!
//! N two-level quantum dots couple to a single bosonic plasmon mode
//! truncated at `n_levels`. The composite basis |q_N..q_1; s> is indexed
//! s-fastest: `index = q * n_levels + s` with `q` the bitmask of excited
//! QDs (QD i stored in bit i, zero based). Energies are meV throughout;
//! rates are quoted as hbar*gamma in meV.

mod lindblad;
mod operators;
mod sparse;

pub use lindblad::{apply_lindblad, LindbladSet};
pub use operators::{build_drive, build_hamiltonian, build_operators, Operators};
pub use sparse::SparseOperator;

use crate::{Error, Result};

/// Hard cap on the composite dimension M; configurations beyond this are
/// rejected as configuration errors before any allocation happens.
pub const MAX_DIM: usize = 4096;

/// Parameters of a single two-level quantum dot.
#[derive(Debug, Clone, PartialEq)]
pub struct QDParams {
    /// Transition energy hbar*omega_i in meV.
    pub omega_mev: f64,
    /// Transition dipole moment in Debye.
    pub d_debye: f64,
    /// Population decay rate hbar*gamma_p in meV.
    pub gamma_p_mev: f64,
    /// Pure dephasing rate hbar*gamma_d in meV.
    pub gamma_d_mev: f64,
    /// Plasmon coupling hbar*g_i in meV.
    pub g_mev: f64,
}

impl QDParams {
    /// A QD resonant with the default plasmon (2050 meV), with the standard
    /// dipole moment (13 D) and population decay (190 neV), dephasing off.
    pub fn resonant(g_mev: f64) -> Self {
        Self {
            omega_mev: 2050.0,
            d_debye: 13.0,
            gamma_p_mev: 1.90e-4,
            gamma_d_mev: 0.0,
            g_mev,
        }
    }

    /// Returns a copy with the dephasing rate replaced.
    pub fn with_gamma_d(mut self, gamma_d_mev: f64) -> Self {
        self.gamma_d_mev = gamma_d_mev;
        self
    }

    /// Returns a copy with the population decay rate replaced.
    pub fn with_gamma_p(mut self, gamma_p_mev: f64) -> Self {
        self.gamma_p_mev = gamma_p_mev;
        self
    }

    fn validate(&self, label: usize) -> Result<()> {
        if self.omega_mev <= 0.0 {
            return Err(Error::config(format!("qd {label}: omega must be > 0")));
        }
        if self.gamma_p_mev < 0.0 || self.gamma_d_mev < 0.0 || self.g_mev < 0.0 {
            return Err(Error::config(format!(
                "qd {label}: rates and couplings must be >= 0"
            )));
        }
        Ok(())
    }
}

/// Parameters of the truncated plasmon mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PlasmonParams {
    /// Mode energy hbar*omega_s in meV.
    pub omega_mev: f64,
    /// Mode dipole moment in Debye.
    pub d_debye: f64,
    /// Decay rate hbar*gamma_s in meV.
    pub gamma_s_mev: f64,
    /// Number of retained levels N_s (occupation 0..N_s-1).
    pub n_levels: usize,
}

impl PlasmonParams {
    /// The standard plasmon: 2050 meV, 4000 D, with caller-chosen decay and
    /// truncation.
    pub fn standard(gamma_s_mev: f64, n_levels: usize) -> Self {
        Self {
            omega_mev: 2050.0,
            d_debye: 4000.0,
            gamma_s_mev,
            n_levels,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_levels < 2 {
            return Err(Error::config("plasmon: n_levels must be >= 2"));
        }
        if self.gamma_s_mev < 0.0 {
            return Err(Error::config("plasmon: gamma_s must be >= 0"));
        }
        if self.omega_mev <= 0.0 {
            return Err(Error::config("plasmon: omega must be > 0"));
        }
        Ok(())
    }
}

/// Full physical description of the composite system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// The quantum dots, in index order (QD i is `qds[i]`, zero based).
    pub qds: Vec<QDParams>,
    /// The plasmon mode.
    pub plasmon: PlasmonParams,
    /// Relative dielectric constant of the host medium.
    pub eps_med: f64,
}

impl SystemSpec {
    /// An all-resonant system with the given couplings, standard dipoles,
    /// and zero dephasing; the usual starting point for dark-evolution runs.
    pub fn resonant(g_mev: &[f64], gamma_s_mev: f64, n_levels: usize) -> Self {
        Self {
            qds: g_mev.iter().map(|&g| QDParams::resonant(g)).collect(),
            plasmon: PlasmonParams::standard(gamma_s_mev, n_levels),
            eps_med: 2.25,
        }
    }

    /// Number of quantum dots N.
    pub fn n_qd(&self) -> usize {
        self.qds.len()
    }

    /// Composite dimension M = 2^N * N_s.
    pub fn dim(&self) -> usize {
        (1usize << self.n_qd()) * self.plasmon.n_levels
    }

    /// Validates parameter ranges and the memory budget.
    pub fn validate(&self) -> Result<()> {
        if self.qds.is_empty() {
            return Err(Error::config("at least one QD required"));
        }
        if self.eps_med <= 0.0 {
            return Err(Error::config("eps_med must be > 0"));
        }
        for (i, qd) in self.qds.iter().enumerate() {
            qd.validate(i + 1)?;
        }
        self.plasmon.validate()?;
        if self.n_qd() >= usize::BITS as usize
            || self
                .plasmon
                .n_levels
                .checked_shl(self.n_qd() as u32)
                .is_none()
            || self.dim() > MAX_DIM
        {
            return Err(Error::config(format!(
                "dimension 2^{} * {} exceeds the budget of {MAX_DIM} states",
                self.n_qd(),
                self.plasmon.n_levels
            )));
        }
        Ok(())
    }
}

/// Bijection between flat indices 0..M-1 and occupation tuples (q; s).
///
/// `q` is the QD bitmask (bit i set when QD i is excited) and `s` the
/// plasmon occupation; the flat index is `q * n_levels + s`, so s varies
/// fastest. This order is stable and part of the serialization contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisMap {
    n_qd: usize,
    n_levels: usize,
}

impl BasisMap {
    /// Number of QDs.
    pub fn n_qd(&self) -> usize {
        self.n_qd
    }

    /// Plasmon levels N_s.
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    /// Total dimension M.
    pub fn dim(&self) -> usize {
        (1 << self.n_qd) * self.n_levels
    }

    /// Flat index of |q; s>.
    pub fn index(&self, q: usize, s: usize) -> usize {
        debug_assert!(q < (1 << self.n_qd) && s < self.n_levels);
        q * self.n_levels + s
    }

    /// Occupation tuple (q, s) of a flat index.
    pub fn split(&self, index: usize) -> (usize, usize) {
        debug_assert!(index < self.dim());
        (index / self.n_levels, index % self.n_levels)
    }

    /// Whether QD `i` (zero based) is excited in QD bitmask `q`.
    pub fn qd_excited(&self, q: usize, i: usize) -> bool {
        q & (1 << i) != 0
    }
}

/// Builds the basis bijection after validating the spec.
pub fn build_basis(spec: &SystemSpec) -> Result<BasisMap> {
    spec.validate()?;
    Ok(BasisMap {
        n_qd: spec.n_qd(),
        n_levels: spec.plasmon.n_levels,
    })
}

/// Immutable bundle of everything the propagator needs: basis, operators,
/// Hamiltonian (rotating frame), drive operator, and dissipator channels.
#[derive(Debug, Clone)]
pub struct Model {
    pub spec: SystemSpec,
    pub basis: BasisMap,
    pub ops: Operators,
    pub hamiltonian: SparseOperator,
    pub drive: SparseOperator,
    pub lindblad: LindbladSet,
}

impl Model {
    /// Builds all operators for a validated spec.
    pub fn new(spec: SystemSpec) -> Result<Self> {
        let basis = build_basis(&spec)?;
        let ops = build_operators(&spec, &basis);
        let hamiltonian = build_hamiltonian(&spec, &ops);
        let drive = build_drive(&spec, &ops);
        let lindblad = LindbladSet::build(&spec, &ops);
        Ok(Self {
            spec,
            basis,
            ops,
            hamiltonian,
            drive,
            lindblad,
        })
    }

    /// Composite dimension M.
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_enumeration_single_qd() {
        let spec = SystemSpec::resonant(&[10.0], 100.0, 2);
        let basis = build_basis(&spec).unwrap();
        assert_eq!(basis.dim(), 4);
        // s-fastest: |q=0;s=0>, |q=0;s=1>, |q=1;s=0>, |q=1;s=1>.
        assert_eq!(basis.index(0, 0), 0);
        assert_eq!(basis.index(0, 1), 1);
        assert_eq!(basis.index(1, 0), 2);
        assert_eq!(basis.index(1, 1), 3);
    }

    #[test]
    fn basis_dimension_two_qd() {
        let spec = SystemSpec::resonant(&[10.0, 10.0], 100.0, 10);
        assert_eq!(spec.dim(), 40);
    }

    #[test]
    fn basis_roundtrip_identity() {
        let spec = SystemSpec::resonant(&[5.0, 7.0, 9.0], 100.0, 5);
        let basis = build_basis(&spec).unwrap();
        for idx in 0..basis.dim() {
            let (q, s) = basis.split(idx);
            assert_eq!(basis.index(q, s), idx);
        }
    }

    #[test]
    fn dimension_budget_enforced() {
        let spec = SystemSpec::resonant(&[1.0; 12], 100.0, 64);
        assert!(matches!(build_basis(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn negative_rate_rejected() {
        let mut spec = SystemSpec::resonant(&[5.0], 100.0, 3);
        spec.qds[0].gamma_d_mev = -1.0;
        assert!(spec.validate().is_err());
    }
}
