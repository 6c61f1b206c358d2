//! N QDs coupled to one lossy plasmon in the single-excitation subspace.
//!
//! The amplitudes b = (b_plasmon, b_1 .. b_N) obey i hbar db/dt = W b with
//!
//! W[0][0] = -i eps, W[0][j] = W[j][0] = g_j, all else zero,
//!
//! eps = gamma_s/2. W is complex symmetric with N-1 exactly dark (zero)
//! eigenvalues whose eigenvectors vanish on the plasmon entry and are
//! orthogonal to the coupling vector, plus two decaying branches
//! w = (-i eps -+ sqrt(4G - eps^2))/2, G = sum g^2. The propagator expands
//! over the eigenvectors with bilinear norms n_k = v^T v.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::entanglement::ConcurrenceMatrix;
use crate::units::HBAR_MEV_FS;
use crate::{Error, Result};

/// Seed for the degenerate-subspace basis construction. The physics is
/// basis-independent inside the dark subspace; the seed only fixes which
/// orthonormal basis gets reported.
const GRAM_SCHMIDT_SEED: u64 = 7;

/// Relative branch-collision threshold triggering the epsilon nudge.
const BRANCH_DEGENERACY_TOL: f64 = 1e-10;

/// Vectors whose residual norm falls below this after two orthogonalization
/// passes are treated as linearly dependent and redrawn.
const RANK_TOL: f64 = 1e-8;

/// Eigen-decomposed dark model for N QDs.
#[derive(Debug, Clone)]
pub struct DarkModel {
    /// Couplings hbar*g_i in meV.
    pub g_mev: Vec<f64>,
    /// Plasmon half-width eps = hbar*gamma_s/2 in meV.
    pub epsilon_mev: f64,
    /// Eigenvalues in meV; the first N-1 are exactly zero.
    pub eigenvalues: Vec<C64>,
    /// Eigenvectors over (plasmon, QD 1 .. QD N), aligned with `eigenvalues`.
    pub eigenvectors: Vec<Array1<C64>>,
    /// Bilinear norms n_k = v^T v (no conjugation).
    pub norms: Vec<C64>,
}

impl DarkModel {
    /// Number of QDs.
    pub fn n_qd(&self) -> usize {
        self.g_mev.len()
    }

    /// Sum of squared couplings G = sum g_i^2 in meV^2.
    pub fn coupling_sum(&self) -> f64 {
        self.g_mev.iter().map(|g| g * g).sum()
    }

    /// The amplitude vector for QD `i` (zero based) excited.
    pub fn qd_excited(&self, i: usize) -> Result<Array1<C64>> {
        if i >= self.n_qd() {
            return Err(Error::config(format!(
                "QD index {i} out of range for N = {}",
                self.n_qd()
            )));
        }
        let mut b = Array1::zeros(self.n_qd() + 1);
        b[i + 1] = C64::new(1.0, 0.0);
        Ok(b)
    }
}

/// Builds the dark model with the default basis seed.
pub fn ndark_build(g_mev: &[f64], gamma_s_mev: f64) -> Result<DarkModel> {
    ndark_build_seeded(g_mev, gamma_s_mev, GRAM_SCHMIDT_SEED)
}

/// Builds the dark model, seeding the degenerate-basis construction
/// explicitly. Physical outputs must not depend on the seed.
pub fn ndark_build_seeded(g_mev: &[f64], gamma_s_mev: f64, seed: u64) -> Result<DarkModel> {
    let n = g_mev.len();
    if n == 0 {
        return Err(Error::config("need at least one QD"));
    }
    if g_mev.iter().any(|&g| g <= 0.0) {
        return Err(Error::config("all couplings must be > 0"));
    }
    if gamma_s_mev < 0.0 {
        return Err(Error::config("gamma_s must be >= 0"));
    }
    let mut eps = gamma_s_mev / 2.0;
    let big_g: f64 = g_mev.iter().map(|g| g * g).sum();
    let gap = 4.0 * big_g - eps * eps;
    if gap.abs() < BRANCH_DEGENERACY_TOL * (4.0 * big_g).max(eps * eps) {
        eps *= 1.0 + 1e-8;
    }

    let mut eigenvalues = Vec::with_capacity(n + 1);
    let mut eigenvectors = Vec::with_capacity(n + 1);
    let mut norms = Vec::with_capacity(n + 1);

    let dark = dark_basis(g_mev, seed);
    for v in dark {
        let mut full = Array1::zeros(n + 1);
        for (j, x) in v.iter().enumerate() {
            full[j + 1] = C64::new(*x, 0.0);
        }
        eigenvalues.push(C64::new(0.0, 0.0));
        eigenvectors.push(full);
        norms.push(C64::new(1.0, 0.0));
    }

    let root = C64::new(4.0 * big_g - eps * eps, 0.0).sqrt();
    for w in [
        (C64::new(0.0, -eps) - root) / 2.0,
        (C64::new(0.0, -eps) + root) / 2.0,
    ] {
        let mut v = Array1::zeros(n + 1);
        v[0] = w;
        for (j, g) in g_mev.iter().enumerate() {
            v[j + 1] = C64::new(*g, 0.0);
        }
        eigenvalues.push(w);
        eigenvectors.push(v);
        norms.push(w * w + C64::new(big_g, 0.0));
    }

    Ok(DarkModel {
        g_mev: g_mev.to_vec(),
        epsilon_mev: eps,
        eigenvalues,
        eigenvectors,
        norms,
    })
}

/// Real orthonormal basis of the QD-block subspace orthogonal to g, built
/// by Gram-Schmidt on random draws with a second orthogonalization pass.
/// A draw collapsing below [`RANK_TOL`] restarts the whole set with the
/// next seed.
fn dark_basis(g_mev: &[f64], seed: u64) -> Vec<Vec<f64>> {
    let n = g_mev.len();
    let g_norm: f64 = g_mev.iter().map(|g| g * g).sum::<f64>().sqrt();
    let unit_g: Vec<f64> = g_mev.iter().map(|g| g / g_norm).collect();
    'rebuild: for attempt in 0..64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n.saturating_sub(1));
        while basis.len() < n - 1 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _pass in 0..2 {
                let proj: f64 = unit_g.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (x, u) in v.iter_mut().zip(&unit_g) {
                    *x -= proj * u;
                }
                for b in &basis {
                    let proj: f64 = b.iter().zip(&v).map(|(a, b)| a * b).sum();
                    for (x, u) in v.iter_mut().zip(b) {
                        *x -= proj * u;
                    }
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < RANK_TOL {
                continue 'rebuild;
            }
            for x in &mut v {
                *x /= norm;
            }
            basis.push(v);
        }
        return basis;
    }
    unreachable!("random draws cannot stay degenerate across 64 rebuilds");
}

/// Evolves the amplitude vector by `t_fs`:
/// b_j(t) = sum_k exp(-i w_k t/hbar) v_j^k (v^k . b(0)) / n_k.
pub fn ndark_evolve(model: &DarkModel, b0: &Array1<C64>, t_fs: f64) -> Result<Array1<C64>> {
    let m = model.n_qd() + 1;
    if b0.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: b0.len(),
        });
    }
    if t_fs < 0.0 {
        return Err(Error::config("t must be >= 0"));
    }
    let mut out = Array1::zeros(m);
    for ((w, v), n_k) in model
        .eigenvalues
        .iter()
        .zip(&model.eigenvectors)
        .zip(&model.norms)
    {
        let overlap: C64 = v.iter().zip(b0).map(|(a, b)| a * b).sum();
        let phase = (C64::new(0.0, -1.0) * w * t_fs / HBAR_MEV_FS).exp();
        let weight = phase * overlap / n_k;
        for (o, x) in out.iter_mut().zip(v) {
            *o += weight * x;
        }
    }
    Ok(out)
}

/// Asymptotic QD populations and pairwise concurrences: the decaying
/// branches are dropped and only the dark-subspace projection survives.
/// P_i = |b_{i+1}(inf)|^2 and C_{i,j} = 2 sqrt(P_i P_j), the latter valid
/// for initial states with no plasmon amplitude.
pub fn ndark_asymptotic(
    model: &DarkModel,
    b0: &Array1<C64>,
) -> Result<(Vec<f64>, ConcurrenceMatrix)> {
    if model.epsilon_mev <= 0.0 {
        return Err(Error::config(
            "asymptotics need a decaying plasmon (gamma_s > 0)",
        ));
    }
    let m = model.n_qd() + 1;
    if b0.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: b0.len(),
        });
    }
    let mut b_inf = Array1::<C64>::zeros(m);
    for ((w, v), n_k) in model
        .eigenvalues
        .iter()
        .zip(&model.eigenvectors)
        .zip(&model.norms)
    {
        if w.norm() != 0.0 {
            continue;
        }
        let overlap: C64 = v.iter().zip(b0).map(|(a, b)| a * b).sum();
        let weight = overlap / n_k;
        for (o, x) in b_inf.iter_mut().zip(v) {
            *o += weight * x;
        }
    }
    let n = model.n_qd();
    let populations: Vec<f64> = (0..n).map(|i| b_inf[i + 1].norm_sqr()).collect();
    let mut cm = ConcurrenceMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            cm.set(i, j, 2.0 * (populations[i] * populations[j]).sqrt());
        }
    }
    Ok((populations, cm))
}

/// Squared-shortfall objective over the asymptotic pair concurrences of the
/// common-ratio family (g_1, x g_1, .., x g_1) with QD 1 excited.
fn common_ratio_objective(n: usize, x: f64) -> (f64, f64, f64) {
    // Closed form of the dark projection for this family: with
    // G = 1 + (N-1) x^2 (g_1 = 1), b_1 = 1 - 1/G and b_(j>1) = -x/G.
    let big_g = 1.0 + (n as f64 - 1.0) * x * x;
    let p1 = (1.0 - 1.0 / big_g).powi(2);
    let pj = (x / big_g).powi(2);
    let c_maj = 2.0 * (p1 * pj).sqrt();
    let c_min = 2.0 * pj;
    let pairs_maj = (n - 1) as f64;
    let pairs_min = ((n - 1) * (n - 2)) as f64 / 2.0;
    let fom = pairs_maj * (1.0 - c_maj).powi(2) + pairs_min * (1.0 - c_min).powi(2);
    (fom, c_maj, c_min)
}

/// Optimal common coupling ratio x = g_(i>1)/g_1 for N QDs, minimizing the
/// squared-shortfall objective over the asymptotic concurrences by
/// golden-section search on x in (0, 10]. Returns (x, C_maj, C_min); C_min
/// is 0 for N = 2 where no minority pair exists.
pub fn ndark_optimal_ratio(n: usize) -> Result<(f64, f64, f64)> {
    if n < 2 {
        return Err(Error::config("need at least two QDs"));
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-6, 10.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = common_ratio_objective(n, c).0;
    let mut fd = common_ratio_objective(n, d).0;
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = common_ratio_objective(n, c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = common_ratio_objective(n, d).0;
        }
    }
    let x = (a + b) / 2.0;
    let (_, c_maj, c_min) = common_ratio_objective(n, x);
    Ok((x, c_maj, if n == 2 { 0.0 } else { c_min }))
}

/// One grid point of the three-QD ratio scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourRow {
    pub ratio2: f64,
    pub ratio3: f64,
    pub fom: f64,
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
}

/// Scans the three-QD asymptotic concurrences over (g2/g1, g3/g1) with QD 1
/// excited, reporting the squared-shortfall objective per grid point. Rows
/// run in ratio2-major order.
pub fn contour_scan(
    ratio2: &[f64],
    ratio3: &[f64],
    gamma_s_mev: f64,
) -> Result<Vec<ContourRow>> {
    if gamma_s_mev <= 0.0 {
        return Err(Error::config("contour scan needs gamma_s > 0"));
    }
    if ratio2.iter().chain(ratio3).any(|&r| r <= 0.0) {
        return Err(Error::config("ratios must be > 0"));
    }
    let grid: Vec<(f64, f64)> = ratio2
        .iter()
        .flat_map(|&r2| ratio3.iter().map(move |&r3| (r2, r3)))
        .collect();
    grid.par_iter()
        .map(|&(r2, r3)| {
            let model = ndark_build(&[1.0, r2, r3], gamma_s_mev)?;
            let b0 = model.qd_excited(0)?;
            let (_, cm) = ndark_asymptotic(&model, &b0)?;
            let (c12, c13, c23) = (cm.get(0, 1), cm.get(0, 2), cm.get(1, 2));
            let fom = (1.0 - c12).powi(2) + (1.0 - c13).powi(2) + (1.0 - c23).powi(2);
            Ok(ContourRow {
                ratio2: r2,
                ratio3: r3,
                fom,
                c12,
                c13,
                c23,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{three_state_asymptotic, three_state_evolve, ThreeStateAmplitudes, ThreeStateModel};
    use approx::assert_abs_diff_eq;

    #[test]
    fn eigen_residuals_vanish() {
        let g = [3.0, 7.0, 11.0, 2.5];
        let model = ndark_build(&g, 130.0).unwrap();
        let n = g.len();
        let eps = model.epsilon_mev;
        // W v = w v checked entry by entry.
        for (k, (w, v)) in model
            .eigenvalues
            .iter()
            .zip(&model.eigenvectors)
            .enumerate()
        {
            let mut wv = vec![C64::new(0.0, 0.0); n + 1];
            wv[0] = C64::new(0.0, -eps) * v[0];
            for j in 0..n {
                wv[0] += C64::new(g[j], 0.0) * v[j + 1];
                wv[j + 1] = C64::new(g[j], 0.0) * v[0];
            }
            for j in 0..=n {
                assert!(
                    (wv[j] - w * v[j]).norm() < 1e-10,
                    "mode {k} entry {j}: residual {:.2e}",
                    (wv[j] - w * v[j]).norm()
                );
            }
        }
        // Dark modes: zero plasmon entry and orthogonality to g.
        let n_dark = model
            .eigenvalues
            .iter()
            .filter(|w| w.norm() == 0.0)
            .count();
        assert_eq!(n_dark, n - 1);
        for (w, v) in model.eigenvalues.iter().zip(&model.eigenvectors) {
            if w.norm() != 0.0 {
                assert!(w.im < 0.0, "decaying branch must decay: {w}");
                continue;
            }
            assert_eq!(v[0], C64::new(0.0, 0.0));
            let dot: C64 = (0..n).map(|j| C64::new(g[j], 0.0) * v[j + 1]).sum();
            assert!(dot.norm() < 1e-12);
        }
    }

    #[test]
    fn two_qd_eigenvalues_closed_form() {
        let (g1, g2, gs) = (5.0, 8.0, 90.0);
        let model = ndark_build(&[g1, g2], gs).unwrap();
        let eps = gs / 2.0;
        let big_g = g1 * g1 + g2 * g2;
        let root = C64::new(4.0 * big_g - eps * eps, 0.0).sqrt();
        let expect = [
            C64::new(0.0, 0.0),
            (C64::new(0.0, -eps) - root) / 2.0,
            (C64::new(0.0, -eps) + root) / 2.0,
        ];
        for (w, e) in model.eigenvalues.iter().zip(&expect) {
            assert!((w - e).norm() < 1e-12);
        }
    }

    #[test]
    fn evolve_identity_at_t_zero_and_unitary_at_eps_zero() {
        let model = ndark_build(&[4.0, 9.0, 6.0], 0.0).unwrap();
        let b0 = model.qd_excited(1).unwrap();
        let at0 = ndark_evolve(&model, &b0, 0.0).unwrap();
        for (a, b) in at0.iter().zip(&b0) {
            assert!((a - b).norm() < 1e-12);
        }
        for t in [5.0, 17.0, 64.0, 333.0] {
            let bt = ndark_evolve(&model, &b0, t).unwrap();
            let norm: f64 = bt.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn reduces_to_three_state_after_basis_rotation() {
        // The site-basis model maps onto the S/A-basis model through
        // aS = (b1+b2)/sqrt(2), aA = (b1-b2)/sqrt(2).
        let (g1, g2, gs) = (12.5, 21.0, 140.0);
        let model = ndark_build(&[g1, g2], gs).unwrap();
        let three = ThreeStateModel::new(g1, g2, gs).unwrap();
        let b0 = model.qd_excited(0).unwrap();
        let init = ThreeStateAmplitudes::qd1_excited();
        let s = 1.0 / 2f64.sqrt();
        for t in [0.0, 4.0, 19.5, 77.0, 500.0] {
            let bt = ndark_evolve(&model, &b0, t).unwrap();
            let expect = three_state_evolve(&three, &init, t).unwrap();
            let a_s = (bt[1] + bt[2]) * C64::new(s, 0.0);
            let a_a = (bt[1] - bt[2]) * C64::new(s, 0.0);
            assert!((bt[0] - expect.a0).norm() < 1e-10, "a0 at t={t}");
            assert!((a_s - expect.a_s).norm() < 1e-10, "aS at t={t}");
            assert!((a_a - expect.a_a).norm() < 1e-10, "aA at t={t}");
        }
    }

    #[test]
    fn asymptotic_projection_matches_closed_form() {
        // b(inf) = e_1 - (g1/G) g in the QD block for QD 1 excited.
        let g = [6.0, 10.0, 3.0];
        let big_g: f64 = g.iter().map(|x| x * x).sum();
        let model = ndark_build(&g, 110.0).unwrap();
        let b0 = model.qd_excited(0).unwrap();
        let (p, cm) = ndark_asymptotic(&model, &b0).unwrap();
        for j in 0..3 {
            let expect = if j == 0 { 1.0 - g[0] * g[0] / big_g } else { -g[0] * g[j] / big_g };
            assert_abs_diff_eq!(p[j], expect * expect, epsilon = 1e-12);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert_abs_diff_eq!(cm.get(i, j), 2.0 * (p[i] * p[j]).sqrt(), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn asymptotic_agrees_with_long_time_evolution() {
        let g = [6.0, 10.0, 3.0, 8.0];
        let model = ndark_build(&g, 200.0).unwrap();
        let b0 = model.qd_excited(0).unwrap();
        let (p, _) = ndark_asymptotic(&model, &b0).unwrap();
        let late = ndark_evolve(&model, &b0, 30_000.0).unwrap();
        for j in 0..4 {
            assert_abs_diff_eq!(late[j + 1].norm_sqr(), p[j], epsilon = 1e-10);
        }
        assert!(late[0].norm() < 1e-12);
    }

    #[test]
    fn seed_independent_populations() {
        let g = [5.0, 12.0, 7.5, 2.0, 9.0];
        let reference = {
            let model = ndark_build_seeded(&g, 150.0, 1).unwrap();
            let b0 = model.qd_excited(2).unwrap();
            ndark_asymptotic(&model, &b0).unwrap().0
        };
        for seed in [2, 99, 123_456_789] {
            let model = ndark_build_seeded(&g, 150.0, seed).unwrap();
            let b0 = model.qd_excited(2).unwrap();
            let (p, _) = ndark_asymptotic(&model, &b0).unwrap();
            for (a, b) in p.iter().zip(&reference) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn matches_two_qd_asymptotic_concurrence() {
        for (g1, g2) in [(12.5, 12.5 * 3f64.sqrt()), (9.0, 9.0), (4.0, 15.0)] {
            let model = ndark_build(&[g1, g2], 100.0).unwrap();
            let b0 = model.qd_excited(0).unwrap();
            let (_, cm) = ndark_asymptotic(&model, &b0).unwrap();
            let three = ThreeStateModel::new(g1, g2, 100.0).unwrap();
            let (_, _, c) = three_state_asymptotic(&three).unwrap();
            assert_abs_diff_eq!(cm.get(0, 1), c, epsilon = 1e-12);
        }
    }

    #[test]
    fn exactly_two_distinct_concurrence_values() {
        let g = [4.0, 6.3, 6.3, 6.3, 6.3, 6.3];
        let model = ndark_build(&g, 120.0).unwrap();
        let b0 = model.qd_excited(0).unwrap();
        let (_, cm) = ndark_asymptotic(&model, &b0).unwrap();
        let mut values: Vec<f64> = cm.iter_pairs().map(|(_, _, v)| v).collect();
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
        assert_eq!(values.len(), 2, "got {values:?}");
    }

    #[test]
    fn optimal_ratio_two_qd_recovers_sqrt3() {
        let (x, c_maj, c_min) = ndark_optimal_ratio(2).unwrap();
        assert_abs_diff_eq!(x, 3f64.sqrt(), epsilon = 1e-5);
        assert_abs_diff_eq!(c_maj, 0.6495, epsilon = 5e-5);
        assert_eq!(c_min, 0.0);
    }

    #[test]
    fn optimal_ratio_three_qd() {
        let (x, c_maj, c_min) = ndark_optimal_ratio(3).unwrap();
        assert!((x - 1.05).abs() < 0.02, "x = {x}");
        assert!((c_maj - 0.450).abs() < 0.005, "c_maj = {c_maj}");
        assert!((c_min - 0.215).abs() < 0.005, "c_min = {c_min}");
    }

    #[test]
    fn optimal_ratio_matches_grid_search() {
        // Golden-section assumes unimodality; cross-check the minimum
        // against a dense grid for several N.
        for n in [2, 3, 5, 10] {
            let (x_star, _, _) = ndark_optimal_ratio(n).unwrap();
            let mut best = (f64::INFINITY, 0.0);
            for k in 1..=40_000 {
                let x = k as f64 * 10.0 / 40_000.0;
                let (fom, _, _) = common_ratio_objective(n, x);
                if fom < best.0 {
                    best = (fom, x);
                }
            }
            assert!(
                (x_star - best.1).abs() < 5e-4,
                "N = {n}: golden-section {x_star} vs grid {}",
                best.1
            );
        }
    }

    #[test]
    fn large_n_scaling_laws() {
        let n = 150;
        let (x, c_maj, c_min) = ndark_optimal_ratio(n).unwrap();
        let sqrt_n = (n as f64).sqrt();
        assert!((x - 1.09 / sqrt_n).abs() / (1.09 / sqrt_n) < 0.10, "x = {x}");
        assert!(
            (c_maj - 0.54 / sqrt_n).abs() / (0.54 / sqrt_n) < 0.10,
            "c_maj = {c_maj}"
        );
        assert!(
            (c_min - 0.50 / n as f64).abs() / (0.50 / n as f64) < 0.10,
            "c_min = {c_min}"
        );
    }

    #[test]
    fn closed_form_objective_matches_generic_path() {
        // The scan's generic eigen-projection and the common-ratio closed
        // form must agree where they overlap.
        for x in [0.4, 1.0, 1.05, 2.5] {
            let (_, c_maj, c_min) = common_ratio_objective(3, x);
            let model = ndark_build(&[1.0, x, x], 100.0).unwrap();
            let b0 = model.qd_excited(0).unwrap();
            let (_, cm) = ndark_asymptotic(&model, &b0).unwrap();
            assert_abs_diff_eq!(cm.get(0, 1), c_maj, epsilon = 1e-12);
            assert_abs_diff_eq!(cm.get(1, 2), c_min, epsilon = 1e-12);
        }
    }

    #[test]
    fn contour_scan_minimum_near_common_optimum() {
        let grid: Vec<f64> = (0..=50).map(|k| 0.8 + k as f64 * 0.01).collect();
        let rows = contour_scan(&grid, &grid, 100.0).unwrap();
        assert_eq!(rows.len(), grid.len() * grid.len());
        let best = rows
            .iter()
            .min_by(|a, b| a.fom.total_cmp(&b.fom))
            .unwrap();
        assert!((best.ratio2 - 1.05).abs() < 0.02, "{best:?}");
        assert!((best.ratio3 - 1.05).abs() < 0.02, "{best:?}");
        assert!((best.c12 - 0.450).abs() < 0.005, "{best:?}");
        assert!((best.c13 - 0.450).abs() < 0.005, "{best:?}");
        assert!((best.c23 - 0.215).abs() < 0.005, "{best:?}");
    }
}
