//! Two-qubit reduction and Wootters concurrence.
//!
//! The pairwise concurrence of QDs (i, j) is computed from the reduced
//! density matrix rho' obtained by tracing out the plasmon and all other
//! QDs: C = max{0, l1 - l2 - l3 - l4}, where the l_k are the descending
//! square roots of the eigenvalues of rho' rho~' and
//! rho~' = (sigma_y x sigma_y) conj(rho') (sigma_y x sigma_y).
//!
//! The l_k are computed as the singular values of sqrt(rho') Y
//! conj(sqrt(rho')) with Y = sigma_y x sigma_y: the Gram matrix of that
//! product is exactly sqrt(rho') rho~' sqrt(rho'), and singular values
//! keep full absolute accuracy for the near-zero members of the
//! quadruple, where square roots of eigenvalues lose half the digits.

use ndarray::Array2;
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64 as C64;

use crate::model::BasisMap;
use crate::{Error, Result};

/// Reduced two-qubit density matrix over {|00>, |01>, |10>, |11>}.
///
/// For a pair (i, j), QD i is the HIGH bit and QD j the LOW bit: |q_i q_j>.
#[derive(Debug, Clone)]
pub struct ReducedDM(pub Array2<C64>);

impl ReducedDM {
    /// Trace of the reduced matrix.
    pub fn trace(&self) -> C64 {
        self.0.diag().sum()
    }

    /// Largest absolute deviation from Hermiticity.
    pub fn herm_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                r = r.max((self.0[[a, b]] - self.0[[b, a]].conj()).norm());
            }
        }
        r
    }
}

/// Symmetric pairwise concurrence matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceMatrix {
    n: usize,
    /// Upper-triangle values in row-major pair order (0,1), (0,2), ...
    vals: Vec<f64>,
}

impl ConcurrenceMatrix {
    /// Creates a matrix of zeros for `n` qubits.
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            vals: vec![0.0; n * (n - 1) / 2],
        }
    }

    /// Number of qubits N.
    pub fn n(&self) -> usize {
        self.n
    }

    fn pair_pos(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // Offset of row a in the packed upper triangle.
        a * self.n - a * (a + 1) / 2 + (b - a - 1)
    }

    /// C_{i,j}; symmetric, zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.vals[self.pair_pos(i, j)]
        }
    }

    /// Sets C_{i,j} = C_{j,i}.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let pos = self.pair_pos(i, j);
        self.vals[pos] = value;
    }

    /// Iterates pairs (i, j, C_ij) with i < j in lexicographic order.
    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).map(move |j| (i, j, self.vals[self.pair_pos(i, j)]))
        })
    }
}

/// Traces the full density matrix down to the (i, j) QD pair.
///
/// Sums over the plasmon label and the occupations of every other QD;
/// the result keeps QD i as the high bit and QD j as the low bit.
pub fn partial_trace_pair(
    rho: &Array2<C64>,
    i: usize,
    j: usize,
    basis: &BasisMap,
) -> Result<ReducedDM> {
    let n = basis.n_qd();
    if i == j || i >= n || j >= n {
        return Err(Error::config(format!(
            "invalid QD pair ({i}, {j}) for N = {n}"
        )));
    }
    let dim = basis.dim();
    if rho.dim() != (dim, dim) {
        return Err(Error::Dimension {
            expected: dim,
            got: rho.dim().0,
        });
    }
    let ns = basis.n_levels();
    let mut red = Array2::zeros((4, 4));
    let pair_bits = |q: usize| -> usize {
        (((q >> i) & 1) << 1) | ((q >> j) & 1)
    };
    let rest_mask = !((1usize << i) | (1usize << j));
    for q_row in 0..(1usize << n) {
        let row_pair = pair_bits(q_row);
        for q_col in 0..(1usize << n) {
            if (q_row & rest_mask) != (q_col & rest_mask) {
                continue;
            }
            let col_pair = pair_bits(q_col);
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..ns {
                acc += rho[[basis.index(q_row, s), basis.index(q_col, s)]];
            }
            red[[row_pair, col_pair]] += acc;
        }
    }
    Ok(ReducedDM(red))
}

/// The spin-flip matrix sigma_y x sigma_y (real in this basis).
fn spin_flip() -> Array2<C64> {
    let mut y = Array2::zeros((4, 4));
    y[[0, 3]] = C64::new(-1.0, 0.0);
    y[[1, 2]] = C64::new(1.0, 0.0);
    y[[2, 1]] = C64::new(1.0, 0.0);
    y[[3, 0]] = C64::new(-1.0, 0.0);
    y
}

/// Hermitian square root via eigendecomposition, clamping tiny negative
/// eigenvalues of the input to zero.
fn herm_sqrt(m: &Array2<C64>) -> Result<Array2<C64>> {
    let (vals, vecs) = m.eigh(UPLO::Lower)?;
    let roots = Array2::from_diag(&vals.mapv(|v| C64::new(v.max(0.0).sqrt(), 0.0)));
    let cand = vecs.dot(&roots).dot(&vecs.t().mapv(|z| z.conj()));
    // LAPACK backends disagree on whether the returned columns hold the
    // eigenvectors of m or of its transpose; in the latter case `cand` is
    // the root of conj(m). Keep whichever candidate squares back to m.
    let alt = cand.mapv(|z| z.conj());
    let residual = |s: &Array2<C64>| -> f64 {
        (&s.dot(s) - m).iter().map(|z| z.norm_sqr()).sum()
    };
    Ok(if residual(&alt) < residual(&cand) {
        alt
    } else {
        cand
    })
}

/// Wootters concurrence of a reduced two-qubit state.
pub fn concurrence(red: &ReducedDM) -> Result<f64> {
    let herm = red.herm_residual();
    if herm > 1e-8 {
        return Err(Error::numerical(format!(
            "reduced state far from Hermitian (residual {herm:.2e})"
        )));
    }
    // Work on the symmetrized copy so roundoff asymmetry cannot leak in.
    let rho = red.0.mapv(|z| z) * C64::new(0.5, 0.0)
        + red.0.t().mapv(|z| z.conj()) * C64::new(0.5, 0.0);
    let sqrt_rho = herm_sqrt(&rho)?;
    let b = sqrt_rho.dot(&spin_flip()).dot(&sqrt_rho.mapv(|z| z.conj()));
    let (_, sv, _) = b.svd(false, false)?;
    let mut lambdas: Vec<f64> = sv.to_vec();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Concurrence of every QD pair of the full state.
pub fn pairwise_concurrences(rho: &Array2<C64>, basis: &BasisMap) -> Result<ConcurrenceMatrix> {
    let n = basis.n_qd();
    if n < 2 {
        return Err(Error::config("pairwise concurrence needs at least 2 QDs"));
    }
    let mut out = ConcurrenceMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let red = partial_trace_pair(rho, i, j, basis)?;
            out.set(i, j, concurrence(&red)?);
        }
    }
    Ok(out)
}

/// Optimization figure of merit sum_{i<j} (1 - C_ij)^2.
pub fn figure_of_merit(c: &ConcurrenceMatrix) -> f64 {
    c.iter_pairs().map(|(_, _, v)| (1.0 - v) * (1.0 - v)).sum()
}
