//! Ladder operators, Hamiltonian, and drive operator on the composite basis.

use num_complex::Complex64 as C64;

use super::{BasisMap, SparseOperator, SystemSpec};

/// The elementary operators of the composite system.
#[derive(Debug, Clone)]
pub struct Operators {
    /// QD lowering operators sigma_i.
    pub sigma: Vec<SparseOperator>,
    /// QD raising operators sigma_i^dag.
    pub sigma_dag: Vec<SparseOperator>,
    /// QD number operators sigma_i^dag sigma_i.
    pub n_qd: Vec<SparseOperator>,
    /// Plasmon lowering operator b.
    pub b: SparseOperator,
    /// Plasmon raising operator b^dag.
    pub b_dag: SparseOperator,
    /// Plasmon number operator b^dag b.
    pub n_plasmon: SparseOperator,
}

/// Builds sigma_i, b and companions on the s-fastest basis.
///
/// b|s> = sqrt(s)|s-1>, truncated at the top level N_s - 1; sigma_i flips
/// q_i from 1 to 0 and leaves every other label untouched.
pub fn build_operators(spec: &SystemSpec, basis: &BasisMap) -> Operators {
    let dim = basis.dim();
    let n = spec.n_qd();
    let ns = spec.plasmon.n_levels;
    let one = C64::new(1.0, 0.0);

    let mut sigma = Vec::with_capacity(n);
    for i in 0..n {
        let mut triplets = Vec::new();
        for q in 0..(1usize << n) {
            if q & (1 << i) != 0 {
                let q_low = q & !(1 << i);
                for s in 0..ns {
                    triplets.push((basis.index(q_low, s), basis.index(q, s), one));
                }
            }
        }
        sigma.push(SparseOperator::from_triplets(dim, &triplets).expect("in-range triplets"));
    }

    let mut b_triplets = Vec::new();
    for q in 0..(1usize << n) {
        for s in 1..ns {
            b_triplets.push((
                basis.index(q, s - 1),
                basis.index(q, s),
                C64::new((s as f64).sqrt(), 0.0),
            ));
        }
    }
    let b = SparseOperator::from_triplets(dim, &b_triplets).expect("in-range triplets");
    let b_dag = b.dagger();
    let n_plasmon = b_dag.matmul(&b).expect("same dimension");

    let sigma_dag: Vec<_> = sigma.iter().map(|s| s.dagger()).collect();
    let n_qd: Vec<_> = sigma_dag
        .iter()
        .zip(&sigma)
        .map(|(sd, s)| sd.matmul(s).expect("same dimension"))
        .collect();

    Operators {
        sigma,
        sigma_dag,
        n_qd,
        b,
        b_dag,
        n_plasmon,
    }
}

/// Hamiltonian in the frame rotating at the plasmon frequency:
/// H = sum_i hbar(omega_i - omega_s) n_i + 0 * b^dag b
///     - sum_i hbar g_i (sigma_i^dag b + sigma_i b^dag),
/// in meV. On resonance the diagonal vanishes and only the coupling
/// terms remain.
pub fn build_hamiltonian(spec: &SystemSpec, ops: &Operators) -> SparseOperator {
    let dim = ops.b.dim();
    let mut h = SparseOperator::zero(dim);
    let omega0 = spec.plasmon.omega_mev;
    for (i, qd) in spec.qds.iter().enumerate() {
        let detuning = qd.omega_mev - omega0;
        if detuning != 0.0 {
            h = h
                .add(&ops.n_qd[i].scaled(C64::new(detuning, 0.0)))
                .expect("same dimension");
        }
        let coupling = ops.sigma_dag[i]
            .matmul(&ops.b)
            .expect("same dimension")
            .add(&ops.sigma[i].matmul(&ops.b_dag).expect("same dimension"))
            .expect("same dimension");
        h = h
            .add(&coupling.scaled(C64::new(-qd.g_mev, 0.0)))
            .expect("same dimension");
    }
    h
}

/// Composite dipole operator D = sum_i d_i (sigma_i + sigma_i^dag)
/// + d_s (b + b^dag), in Debye.
///
/// The drive Hamiltonian at time t is -(E0 G(t) / 2) * D after the
/// rotating-wave reduction of the cos(omega0 t) carrier, with the field in
/// V/m and the product converted to meV by the caller.
pub fn build_drive(spec: &SystemSpec, ops: &Operators) -> SparseOperator {
    let dim = ops.b.dim();
    let mut d = ops
        .b
        .add(&ops.b_dag)
        .expect("same dimension")
        .scaled(C64::new(spec.plasmon.d_debye, 0.0));
    for (i, qd) in spec.qds.iter().enumerate() {
        let pair = ops.sigma[i].add(&ops.sigma_dag[i]).expect("same dimension");
        d = d
            .add(&pair.scaled(C64::new(qd.d_debye, 0.0)))
            .expect("same dimension");
    }
    debug_assert_eq!(d.dim(), dim);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_basis;
    use ndarray::Array2;

    fn dense_norm_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn bosonic_ladder_entries() {
        let spec = SystemSpec::resonant(&[5.0], 100.0, 3);
        let basis = build_basis(&spec).unwrap();
        let ops = build_operators(&spec, &basis);
        assert!((ops.b.get(basis.index(0, 0), basis.index(0, 1)).re - 1.0).abs() < 1e-15);
        assert!(
            (ops.b.get(basis.index(0, 1), basis.index(0, 2)).re - 2f64.sqrt()).abs() < 1e-15
        );
        assert_eq!(ops.b.nnz(), 4);
    }

    #[test]
    fn sigma_squares_to_zero() {
        let spec = SystemSpec::resonant(&[5.0, 5.0], 100.0, 3);
        let basis = build_basis(&spec).unwrap();
        let ops = build_operators(&spec, &basis);
        for s in &ops.sigma {
            assert_eq!(s.matmul(s).unwrap().nnz(), 0);
        }
    }

    #[test]
    fn ladder_commutator_below_truncation() {
        let spec = SystemSpec::resonant(&[5.0], 100.0, 4);
        let basis = build_basis(&spec).unwrap();
        let ops = build_operators(&spec, &basis);
        let comm = ops
            .b
            .matmul(&ops.b_dag)
            .unwrap()
            .add(&ops.b_dag.matmul(&ops.b).unwrap().scaled(C64::new(-1.0, 0.0)))
            .unwrap();
        // [b, b^dag] = 1 except on the top plasmon level.
        for q in 0..2 {
            for s in 0..3 {
                let idx = basis.index(q, s);
                assert!((comm.get(idx, idx).re - 1.0).abs() < 1e-15);
            }
            let top = basis.index(q, 3);
            assert!((comm.get(top, top).re + 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_single_qd_resonant() {
        let spec = SystemSpec::resonant(&[7.5], 100.0, 2);
        let basis = build_basis(&spec).unwrap();
        let ops = build_operators(&spec, &basis);
        let h = build_hamiltonian(&spec, &ops);
        // Only the coupling element -g between |1;0> and |0;1>.
        let i10 = basis.index(1, 0);
        let i01 = basis.index(0, 1);
        assert!((h.get(i10, i01).re + 7.5).abs() < 1e-15);
        assert!((h.get(i01, i10).re + 7.5).abs() < 1e-15);
        for idx in 0..basis.dim() {
            assert_eq!(h.get(idx, idx), C64::new(0.0, 0.0));
        }
        assert_eq!(h.nnz(), 2);
    }

    #[test]
    fn hamiltonian_zero_coupling_resonant_is_zero() {
        let spec = SystemSpec::resonant(&[0.0, 0.0], 100.0, 3);
        let basis = build_basis(&spec).unwrap();
        let ops = build_operators(&spec, &basis);
        let h = build_hamiltonian(&spec, &ops);
        assert_eq!(h.nnz(), 0);
    }

    #[test]
    fn hamiltonian_and_drive_hermitian() {
        let mut spec = SystemSpec::resonant(&[5.0, 12.5], 150.0, 4);
        spec.qds[1].omega_mev = 2060.0;
        let basis = build_basis(&spec).unwrap();
        let ops = build_operators(&spec, &basis);
        let h = build_hamiltonian(&spec, &ops);
        let d = build_drive(&spec, &ops);
        assert_eq!(h.herm_residual(), 0.0);
        assert_eq!(d.herm_residual(), 0.0);
        let hd = h.to_dense();
        assert!(dense_norm_diff(&hd, &hd.t().mapv(|z| z.conj()).to_owned()) == 0.0);
    }

    #[test]
    fn drive_without_qd_dipoles_is_plasmon_only() {
        let mut spec = SystemSpec::resonant(&[5.0], 100.0, 3);
        spec.qds[0].d_debye = 0.0;
        let basis = build_basis(&spec).unwrap();
        let ops = build_operators(&spec, &basis);
        let d = build_drive(&spec, &ops);
        let expect = ops
            .b
            .add(&ops.b_dag)
            .unwrap()
            .scaled(C64::new(spec.plasmon.d_debye, 0.0));
        assert_eq!(d, expect);
    }

    #[test]
    fn drive_ladder_element() {
        for ns in [2usize, 3, 6] {
            let spec = SystemSpec::resonant(&[5.0, 5.0], 100.0, ns);
            let basis = build_basis(&spec).unwrap();
            let ops = build_operators(&spec, &basis);
            let d = build_drive(&spec, &ops);
            let elem = d.get(basis.index(0, 1), basis.index(0, 0));
            assert!((elem.re - spec.plasmon.d_debye).abs() < 1e-12);
        }
    }
}
