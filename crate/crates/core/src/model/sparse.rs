//! Compressed sparse row storage for the system operators.
//!
//! Every operator in the model (ladder operators, Hamiltonian, drive, jump
//! operators) is extremely sparse, with O(M) nonzeros on an M-dimensional
//! space. CSR keeps construction explicit and makes the two kernels that
//! dominate the master-equation right-hand side (sparse * dense and
//! dense * sparse products) cache-friendly simple loops.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Complex sparse matrix in CSR layout with canonical (sorted, deduplicated)
/// column order inside each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    /// The zero operator on a `dim`-dimensional space.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// The identity operator.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![C64::new(1.0, 0.0); dim],
        }
    }

    /// Builds an operator from `(row, col, value)` triplets, summing
    /// duplicates and dropping exact zeros.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: r.max(c) + 1,
                });
            }
        }
        let mut entries: Vec<(usize, usize, C64)> = triplets.to_vec();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals: Vec<C64> = Vec::new();
        row_ptr.push(0);
        let mut row = 0usize;
        for (r, c, v) in entries {
            while row < r {
                row_ptr.push(cols.len());
                row += 1;
            }
            if let (Some(&last_c), Some(last_v)) = (cols.last(), vals.last_mut()) {
                if row_ptr.len() - 1 == row && *row_ptr.last().unwrap() < cols.len() && last_c == c
                {
                    *last_v += v;
                    continue;
                }
            }
            cols.push(c);
            vals.push(v);
        }
        while row < dim {
            row_ptr.push(cols.len());
            row += 1;
        }
        let mut op = Self {
            dim,
            row_ptr,
            cols,
            vals,
        };
        op.drop_zeros();
        Ok(op)
    }

    fn drop_zeros(&mut self) {
        let zero = C64::new(0.0, 0.0);
        if !self.vals.contains(&zero) {
            return;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != zero {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    /// Matrix dimension M.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored nonzeros.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entry at `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.cols[lo..hi].binary_search(&j) {
            Ok(k) => self.vals[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Iterates stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    /// The adjoint (conjugate transpose), itself in canonical CSR form.
    pub fn dagger(&self) -> Self {
        let triplets: Vec<_> = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, &triplets).expect("adjoint preserves dimension")
    }

    /// Scales all entries by `alpha`.
    pub fn scaled(&self, alpha: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= alpha;
        }
        out.drop_zeros();
        out
    }

    /// Sum of two operators.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut triplets: Vec<_> = self.iter().collect();
        triplets.extend(other.iter());
        Self::from_triplets(self.dim, &triplets)
    }

    /// Sparse-sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: other.dim,
            });
        }
        let zero = C64::new(0.0, 0.0);
        let mut acc = vec![zero; self.dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut triplets = Vec::new();
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let mid = self.cols[k];
                let va = self.vals[k];
                for k2 in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let j = other.cols[k2];
                    if acc[j] == zero && !touched.contains(&j) {
                        touched.push(j);
                    }
                    acc[j] += va * other.vals[k2];
                }
            }
            for &j in &touched {
                triplets.push((i, j, acc[j]));
                acc[j] = zero;
            }
            touched.clear();
        }
        Self::from_triplets(self.dim, &triplets)
    }

    /// Dense representation.
    pub fn to_dense(&self) -> Array2<C64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for (r, c, v) in self.iter() {
            out[[r, c]] += v;
        }
        out
    }

    /// Largest absolute deviation from Hermiticity, max |A - A^dag|.
    pub fn herm_residual(&self) -> f64 {
        let dag = self.dagger();
        let mut res: f64 = 0.0;
        for (r, c, v) in self.iter() {
            res = res.max((v - dag.get(r, c)).norm());
        }
        for (r, c, v) in dag.iter() {
            res = res.max((v - self.get(r, c)).norm());
        }
        res
    }

    /// `out += alpha * self * b` for dense `b`; both must be M x M in
    /// standard (row-major) layout.
    pub fn mul_dense_acc(&self, alpha: C64, b: &Array2<C64>, out: &mut Array2<C64>) {
        debug_assert_eq!(b.dim(), (self.dim, self.dim));
        debug_assert_eq!(out.dim(), (self.dim, self.dim));
        let bs = b.as_slice().expect("standard layout");
        let os = out.as_slice_mut().expect("standard layout");
        let m = self.dim;
        for i in 0..m {
            let orow = &mut os[i * m..(i + 1) * m];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let coeff = alpha * self.vals[k];
                let brow = &bs[self.cols[k] * m..(self.cols[k] + 1) * m];
                for (o, bv) in orow.iter_mut().zip(brow) {
                    *o += coeff * bv;
                }
            }
        }
    }

    /// `out += alpha * b * self` for dense `b`.
    pub fn dense_mul_acc(&self, alpha: C64, b: &Array2<C64>, out: &mut Array2<C64>) {
        debug_assert_eq!(b.dim(), (self.dim, self.dim));
        debug_assert_eq!(out.dim(), (self.dim, self.dim));
        let bs = b.as_slice().expect("standard layout");
        let os = out.as_slice_mut().expect("standard layout");
        let m = self.dim;
        for r in 0..m {
            let brow = &bs[r * m..(r + 1) * m];
            let orow = &mut os[r * m..(r + 1) * m];
            for (i, &bv) in brow.iter().enumerate() {
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    orow[self.cols[k]] += alpha * bv * self.vals[k];
                }
            }
        }
    }

    /// Applies the operator to a ket.
    pub fn apply_ket(&self, ket: &Array1<C64>) -> Array1<C64> {
        let mut out = Array1::zeros(self.dim);
        for (r, c, v) in self.iter() {
            out[r] += v * ket[c];
        }
        out
    }

    /// Expectation value tr(A rho).
    pub fn expectation(&self, rho: &Array2<C64>) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (r, c, v) in self.iter() {
            acc += v * rho[[c, r]];
        }
        acc
    }
}
