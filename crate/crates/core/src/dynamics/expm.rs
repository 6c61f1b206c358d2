//! Dense Liouvillian construction and matrix-exponential propagation.
//!
//! The master equation is vectorized row-major, vec(A rho B) =
//! (A kron B^T) vec(rho), giving the M^2 x M^2 generator
//!
//! L = (1/hbar) [ -i (H kron I - I kron H^T)
//!     + sum_k Gamma_k (A_k kron conj(A_k)
//!     - 1/2 ((A_k^dag A_k) kron I + I kron (A_k^dag A_k)^T)) ].
//!
//! exp(L dt) is computed once by Pade scaling-and-squaring (degrees
//! 3/5/7/9/13 with the standard 1-norm thresholds) and applied per output
//! step, which is exact for time-independent (dark) generators.

use ndarray::linalg::kron;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Inverse, OperationNorm};
use num_complex::Complex64 as C64;

use crate::model::Model;
use crate::units::HBAR_MEV_FS;
use crate::{Error, Result};

/// Largest M for which the dense M^2 x M^2 oracle is allowed.
pub const EXPM_MAX_DIM: usize = 64;

/// Dense complex matrix product via BLAS (row-major zgemm).
pub(crate) fn zgemm_nn(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (m, k) = a.dim();
    let (k2, n) = b.dim();
    assert_eq!(k, k2, "inner dimensions must agree");
    let mut c = Array2::<C64>::zeros((m, n));
    let one = [1.0f64, 0.0];
    let zero = [0.0f64, 0.0];
    let a_s = a.as_slice().expect("standard layout");
    let b_s = b.as_slice().expect("standard layout");
    let c_s = c.as_slice_mut().expect("standard layout");
    unsafe {
        cblas_sys::cblas_zgemm(
            cblas_sys::CBLAS_LAYOUT::CblasRowMajor,
            cblas_sys::CBLAS_TRANSPOSE::CblasNoTrans,
            cblas_sys::CBLAS_TRANSPOSE::CblasNoTrans,
            m as i32,
            n as i32,
            k as i32,
            &one as *const [f64; 2] as *const _,
            a_s.as_ptr() as *const _,
            k as i32,
            b_s.as_ptr() as *const _,
            n as i32,
            &zero as *const [f64; 2] as *const _,
            c_s.as_mut_ptr() as *mut _,
            n as i32,
        );
    }
    c
}

/// The dense Liouvillian of the dark (undriven) master equation, in 1/fs.
pub fn liouvillian_dense(model: &Model) -> Result<Array2<C64>> {
    let m = model.dim();
    if m > EXPM_MAX_DIM {
        return Err(Error::config(format!(
            "dense oracle limited to M <= {EXPM_MAX_DIM}, got {m}"
        )));
    }
    let eye = Array2::<C64>::eye(m);
    let h = model.hamiltonian.to_dense();
    let minus_i = C64::new(0.0, -1.0);
    let mut l = (kron(&h, &eye) - kron(&eye, &h.t().to_owned())).mapv(|z| z * minus_i);
    for ch in model.lindblad.channels() {
        let a = ch.op.to_dense();
        let rate = C64::new(ch.rate_mev, 0.0);
        let jump = kron(&a, &a.mapv(|z| z.conj()));
        let ada = ch.op_dag.matmul(&ch.op).expect("same dimension").to_dense();
        let anti = kron(&ada, &eye) + kron(&eye, &ada.t().to_owned());
        l = l + jump.mapv(|z| z * rate) - anti.mapv(|z| z * rate * C64::new(0.5, 0.0));
    }
    Ok(l.mapv(|z| z / HBAR_MEV_FS))
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const PADE9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA3: f64 = 1.495_585_217_958_292e-2;
const THETA5: f64 = 2.539_398_330_063_23e-1;
const THETA7: f64 = 9.504_178_996_162_932e-1;
const THETA9: f64 = 2.097_847_961_257_068;
const THETA13: f64 = 5.371_920_351_148_152;

fn pade_uv_low(a: &Array2<C64>, coeffs: &[f64]) -> (Array2<C64>, Array2<C64>) {
    // Even/odd split: U = A * sum b_{2k+1} A^{2k}, V = sum b_{2k} A^{2k}.
    let n = a.dim().0;
    let eye = Array2::<C64>::eye(n);
    let a2 = zgemm_nn(a, a);
    let mut even_pows = vec![eye.clone()];
    let deg = coeffs.len() - 1;
    let max_pow = deg / 2;
    for _ in 1..=max_pow {
        let next = zgemm_nn(even_pows.last().unwrap(), &a2);
        even_pows.push(next);
    }
    let mut u_sum = Array2::<C64>::zeros((n, n));
    let mut v = Array2::<C64>::zeros((n, n));
    for (k, pow) in even_pows.iter().enumerate() {
        if 2 * k < deg {
            u_sum = u_sum + pow.mapv(|z| z * C64::new(coeffs[2 * k + 1], 0.0));
        }
        v = v + pow.mapv(|z| z * C64::new(coeffs[2 * k], 0.0));
    }
    (zgemm_nn(a, &u_sum), v)
}

fn pade13_uv(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let n = a.dim().0;
    let eye = Array2::<C64>::eye(n);
    let b = &PADE13;
    let a2 = zgemm_nn(a, a);
    let a4 = zgemm_nn(&a2, &a2);
    let a6 = zgemm_nn(&a2, &a4);
    let cs = |x: f64| C64::new(x, 0.0);
    let u_inner = a6.mapv(|z| z * cs(b[13])) + a4.mapv(|z| z * cs(b[11])) + a2.mapv(|z| z * cs(b[9]));
    let u_poly = zgemm_nn(&a6, &u_inner)
        + a6.mapv(|z| z * cs(b[7]))
        + a4.mapv(|z| z * cs(b[5]))
        + a2.mapv(|z| z * cs(b[3]))
        + eye.mapv(|z| z * cs(b[1]));
    let u = zgemm_nn(a, &u_poly);
    let v_inner = a6.mapv(|z| z * cs(b[12])) + a4.mapv(|z| z * cs(b[10])) + a2.mapv(|z| z * cs(b[8]));
    let v = zgemm_nn(&a6, &v_inner)
        + a6.mapv(|z| z * cs(b[6]))
        + a4.mapv(|z| z * cs(b[4]))
        + a2.mapv(|z| z * cs(b[2]))
        + eye.mapv(|z| z * cs(b[0]));
    (u, v)
}

/// Matrix exponential by Pade scaling-and-squaring.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let (n, n2) = a.dim();
    if n != n2 {
        return Err(Error::config("expm needs a square matrix"));
    }
    let norm = a.opnorm_one()?;
    let (u, v, squarings) = if norm <= THETA3 {
        let (u, v) = pade_uv_low(a, &PADE3);
        (u, v, 0u32)
    } else if norm <= THETA5 {
        let (u, v) = pade_uv_low(a, &PADE5);
        (u, v, 0)
    } else if norm <= THETA7 {
        let (u, v) = pade_uv_low(a, &PADE7);
        (u, v, 0)
    } else if norm <= THETA9 {
        let (u, v) = pade_uv_low(a, &PADE9);
        (u, v, 0)
    } else {
        let s = ((norm / THETA13).log2().ceil()).max(0.0) as u32;
        let scaled = a.mapv(|z| z / C64::new(2f64.powi(s as i32), 0.0));
        let (u, v) = pade13_uv(&scaled);
        (u, v, s)
    };
    let p = &v + &u;
    let q = &v - &u;
    let q_inv = q.inv().map_err(|e| {
        Error::numerical(format!("singular Pade denominator in expm: {e}"))
    })?;
    let mut r = zgemm_nn(&q_inv, &p);
    for _ in 0..squarings {
        r = zgemm_nn(&r, &r);
    }
    Ok(r)
}

/// vec(rho) row-major.
pub(crate) fn vec_rho(rho: &Array2<C64>) -> Array1<C64> {
    Array1::from_iter(rho.iter().copied())
}

/// Inverse of [`vec_rho`].
pub(crate) fn unvec_rho(v: &Array1<C64>, m: usize) -> Array2<C64> {
    Array2::from_shape_vec((m, m), v.to_vec()).expect("length m^2")
}
