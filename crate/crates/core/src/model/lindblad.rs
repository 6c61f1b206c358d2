//! Dissipator channels and their action on a density matrix.
//!
//! The dissipative part of the master equation is
//!
//! L(rho) = gamma_s D[b] rho + sum_i gamma_p,i D[sigma_i] rho
//!          + sum_i 2 gamma_d,i D[sigma_i^dag sigma_i] rho,
//!
//! with D[A] rho = A rho A^dag - 1/2 {A^dag A, rho}. The dephasing channel
//! uses the number-operator jump at twice gamma_d so the off-diagonal
//! coherence of a single QD decays at exactly gamma_d, matching the factor
//! of two between classical dipole decay and quantum dephasing used in the
//! local-field correspondence. All rates are hbar*gamma in meV; dividing
//! the returned action by hbar yields 1/fs.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::{Operators, SparseOperator, SystemSpec};
use crate::{Error, Result};

/// One dissipation channel: rate Gamma (meV) and jump operator A.
#[derive(Debug, Clone)]
pub struct Channel {
    pub rate_mev: f64,
    pub op: SparseOperator,
    pub op_dag: SparseOperator,
}

/// The full set of channels plus the precomputed rate-weighted sum
/// Q = sum_k Gamma_k A_k^dag A_k entering the anticommutator.
#[derive(Debug, Clone)]
pub struct LindbladSet {
    channels: Vec<Channel>,
    q_sum: SparseOperator,
    dim: usize,
}

impl LindbladSet {
    /// Assembles the channels for a spec: plasmon decay, QD population
    /// decay, and QD dephasing. Channels with zero rate are dropped.
    pub fn build(spec: &SystemSpec, ops: &Operators) -> Self {
        let dim = ops.b.dim();
        let mut channels = Vec::new();
        let mut push = |rate_mev: f64, op: &SparseOperator| {
            if rate_mev > 0.0 {
                channels.push(Channel {
                    rate_mev,
                    op: op.clone(),
                    op_dag: op.dagger(),
                });
            }
        };
        push(spec.plasmon.gamma_s_mev, &ops.b);
        for (i, qd) in spec.qds.iter().enumerate() {
            push(qd.gamma_p_mev, &ops.sigma[i]);
            push(2.0 * qd.gamma_d_mev, &ops.n_qd[i]);
        }
        let mut q_sum = SparseOperator::zero(dim);
        for ch in &channels {
            let ada = ch.op_dag.matmul(&ch.op).expect("same dimension");
            q_sum = q_sum
                .add(&ada.scaled(C64::new(ch.rate_mev, 0.0)))
                .expect("same dimension");
        }
        LindbladSet {
            channels,
            q_sum,
            dim,
        }
    }

    /// Dimension M of the space the channels act on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of active channels.
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Iterates over the channels.
    pub fn channels(&self) -> impl Iterator<Item = &Channel> {
        self.channels.iter()
    }

    /// `out += L(rho)` in meV, using `work` as scratch.
    ///
    /// The anticommutator part uses U = Q rho and the Hermiticity of Q:
    /// {Q, rho} = U + U^dag.
    pub fn apply_acc(&self, rho: &Array2<C64>, out: &mut Array2<C64>, work: &mut Array2<C64>) {
        let one = C64::new(1.0, 0.0);
        // Jump terms Gamma_k * A_k rho A_k^dag.
        for ch in &self.channels {
            work.fill(C64::new(0.0, 0.0));
            ch.op.mul_dense_acc(one, rho, work);
            ch.op_dag
                .dense_mul_acc(C64::new(ch.rate_mev, 0.0), work, out);
        }
        // Anticommutator -1/2 {Q, rho}.
        work.fill(C64::new(0.0, 0.0));
        self.q_sum.mul_dense_acc(one, rho, work);
        let half = C64::new(0.5, 0.0);
        let (n, _) = out.dim();
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] -= half * (work[[i, j]] + work[[j, i]].conj());
            }
        }
    }
}

/// Returns L(rho) in meV for a density matrix of matching dimension.
pub fn apply_lindblad(
    spec: &SystemSpec,
    ops: &Operators,
    rho: &Array2<C64>,
) -> Result<Array2<C64>> {
    let dim = ops.b.dim();
    if rho.dim() != (dim, dim) {
        return Err(Error::Dimension {
            expected: dim,
            got: rho.dim().0,
        });
    }
    let set = LindbladSet::build(spec, ops);
    let mut out = Array2::zeros((dim, dim));
    let mut work = Array2::zeros((dim, dim));
    set.apply_acc(rho, &mut out, &mut work);
    Ok(out)
}
