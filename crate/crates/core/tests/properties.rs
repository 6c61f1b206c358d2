//! Structural invariants checked over randomized inputs: conservation
//! laws of the master-equation generator, unitary invariance and closed
//! forms of the concurrence, bijectivity of the basis map, norm
//! conservation of the lossless reduced models, and the optimizer's box
//! mapping.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use plexciton::analytic::{
    ndark_build, ndark_evolve, three_state_evolve, ThreeStateAmplitudes, ThreeStateModel,
};
use plexciton::dynamics::rhs;
use plexciton::optimizer::Param;
use plexciton::{
    build_basis, concurrence, figure_of_merit, partial_trace_pair, pulse_envelope, Bounds,
    ConcurrenceMatrix, Model, PulseSpec, ReducedDM, SystemSpec,
};

/// Random Hermitian positive-semidefinite matrix with unit trace.
fn random_density(dim: usize, rng: &mut ChaCha20Rng) -> Array2<C64> {
    let mut a = Array2::zeros((dim, dim));
    for v in a.iter_mut() {
        *v = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let herm = a.t().mapv(|z: C64| z.conj());
    let h = (&a + &herm).mapv(|z| z * 0.5);
    let sq = h.dot(&h);
    let tr: f64 = (0..dim).map(|k| sq[[k, k]].re).sum();
    sq.mapv(|z| z / tr)
}

fn single_qubit_unitary(theta: f64, phi: f64, lambda: f64) -> Array2<C64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = |x: f64| C64::new(0.0, x).exp();
    ndarray::array![
        [C64::new(c, 0.0), -s * e(lambda)],
        [s * e(phi), c * e(phi + lambda)],
    ]
}

fn kron2(u1: &Array2<C64>, u2: &Array2<C64>) -> Array2<C64> {
    let mut out = Array2::zeros((4, 4));
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    out[[2 * a + c, 2 * b + d]] = u1[[a, b]] * u2[[c, d]];
                }
            }
        }
    }
    out
}

fn pure_density(amps: &[C64; 4]) -> Array2<C64> {
    let mut m = Array2::zeros((4, 4));
    for a in 0..4 {
        for b in 0..4 {
            m[[a, b]] = amps[a] * amps[b].conj();
        }
    }
    m
}

/// Normalized 4-component amplitude vector with a safely bounded norm.
fn amplitude_strategy() -> impl Strategy<Value = [C64; 4]> {
    prop::array::uniform8(-1.0f64..1.0)
        .prop_filter("norm too small", |raw| {
            raw.iter().map(|x| x * x).sum::<f64>() > 1e-2
        })
        .prop_map(|raw| {
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            [
                C64::new(raw[0], raw[1]) / norm,
                C64::new(raw[2], raw[3]) / norm,
                C64::new(raw[4], raw[5]) / norm,
                C64::new(raw[6], raw[7]) / norm,
            ]
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        n_qd in 1usize..=3,
        n_levels in 2usize..=4,
        seed in any::<u64>(),
        gamma_s in 0.0f64..=300.0,
        gamma_d in 0.0f64..=5.0,
        gamma_p in 0.0f64..=0.1,
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..n_qd).map(|_| rng.random_range(0.0..=25.0)).collect();
        let mut spec = SystemSpec::resonant(&g, gamma_s, n_levels);
        for qd in &mut spec.qds {
            qd.gamma_d_mev = gamma_d;
            qd.gamma_p_mev = gamma_p;
        }
        let model = Model::new(spec).unwrap();
        let rho = random_density(model.dim(), &mut rng);
        let out = rhs(0.0, &rho, &model, None).unwrap();
        let trace: C64 = (0..model.dim()).map(|k| out[[k, k]]).sum();
        prop_assert!(trace.norm() < 1e-12, "generator leaks trace: {trace}");
        let herm = out.t().mapv(|z: C64| z.conj());
        let asym = (&out - &herm)
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        prop_assert!(asym < 1e-12, "generator breaks Hermiticity: {asym}");
    }
}

proptest! {
    #[test]
    fn concurrence_invariant_under_local_unitaries(
        amps in amplitude_strategy(),
        angles in prop::array::uniform6(0.0f64..std::f64::consts::TAU),
    ) {
        let rho = pure_density(&amps);
        let u = kron2(
            &single_qubit_unitary(angles[0], angles[1], angles[2]),
            &single_qubit_unitary(angles[3], angles[4], angles[5]),
        );
        let udag = u.t().mapv(|z: C64| z.conj());
        let rotated = u.dot(&rho).dot(&udag);
        let c0 = concurrence(&ReducedDM(rho)).unwrap();
        let c1 = concurrence(&ReducedDM(rotated)).unwrap();
        prop_assert!((c0 - c1).abs() < 1e-9, "C changed under local unitary: {c0} vs {c1}");
    }

    #[test]
    fn pure_state_concurrence_matches_closed_form(amps in amplitude_strategy()) {
        let c = concurrence(&ReducedDM(pure_density(&amps))).unwrap();
        let expect = 2.0 * (amps[0] * amps[3] - amps[1] * amps[2]).norm();
        prop_assert!((c - expect).abs() < 1e-9, "got {c}, closed form {expect}");
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&c), "C out of range: {c}");
    }

    #[test]
    fn basis_map_is_a_bijection(n_qd in 1usize..=6, n_levels in 2usize..=12) {
        let g = vec![10.0; n_qd];
        let spec = SystemSpec::resonant(&g, 100.0, n_levels);
        let basis = build_basis(&spec).unwrap();
        prop_assert_eq!(basis.dim(), (1 << n_qd) * n_levels);
        for idx in 0..basis.dim() {
            let (q, s) = basis.split(idx);
            prop_assert!(q < (1 << n_qd) && s < n_levels);
            prop_assert_eq!(basis.index(q, s), idx);
        }
    }

    #[test]
    fn three_state_norm_conserved_without_loss(
        g1 in 0.5f64..=25.0,
        g2 in 0.5f64..=25.0,
        t in 0.0f64..=400.0,
    ) {
        let model = ThreeStateModel::new(g1, g2, 0.0).unwrap();
        let amps = three_state_evolve(&model, &ThreeStateAmplitudes::qd1_excited(), t).unwrap();
        let norm = amps.a0.norm_sqr() + amps.a_s.norm_sqr() + amps.a_a.norm_sqr();
        prop_assert!((norm - 1.0).abs() < 1e-9, "norm drifted to {norm} at t = {t}");
    }

    #[test]
    fn ndark_norm_conserved_without_loss(
        n in 2usize..=6,
        seed in any::<u64>(),
        t in 0.0f64..=300.0,
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..=25.0)).collect();
        let model = ndark_build(&g, 0.0).unwrap();
        let b0 = model.qd_excited(0).unwrap();
        let b = ndark_evolve(&model, &b0, t).unwrap();
        let norm: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-9, "norm drifted to {norm} at t = {t}");
    }

    #[test]
    fn reduced_state_keeps_trace_and_hermiticity(
        n_qd in 2usize..=3,
        n_levels in 2usize..=3,
        seed in any::<u64>(),
        j in 1usize..=2,
    ) {
        let j = j.min(n_qd - 1);
        let g = vec![12.0; n_qd];
        let spec = SystemSpec::resonant(&g, 100.0, n_levels);
        let basis = build_basis(&spec).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut psi = Array1::<C64>::zeros(basis.dim());
        for v in psi.iter_mut() {
            *v = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi.mapv_inplace(|z| z / norm);
        let mut rho = Array2::<C64>::zeros((basis.dim(), basis.dim()));
        for a in 0..basis.dim() {
            for b in 0..basis.dim() {
                rho[[a, b]] = psi[a] * psi[b].conj();
            }
        }
        let red = partial_trace_pair(&rho, 0, j, &basis).unwrap();
        let trace: C64 = (0..4).map(|k| red.0[[k, k]]).sum();
        prop_assert!((trace - C64::new(1.0, 0.0)).norm() < 1e-12, "reduced trace {trace}");
        for a in 0..4 {
            for b in 0..4 {
                let gap = (red.0[[a, b]] - red.0[[b, a]].conj()).norm();
                prop_assert!(gap < 1e-12, "reduced state not Hermitian at ({a}, {b})");
            }
        }
    }

    #[test]
    fn box_mapping_roundtrips(
        seed in any::<u64>(),
        n in 1usize..=6,
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params: Vec<Param> = (0..n)
            .map(|k| {
                let lower = rng.random_range(-5.0..5.0);
                let width = rng.random_range(0.1..10.0);
                if k % 3 == 2 {
                    Param::fixed(format!("p{k}"), lower)
                } else {
                    Param::free(format!("p{k}"), lower, lower + width)
                }
            })
            .collect();
        let bounds = Bounds::new(params.clone()).unwrap();
        let n_free = bounds.free_indices().len();
        let u: Vec<f64> = (0..n_free).map(|_| rng.random_range(0.0..=1.0)).collect();
        let x = bounds.unscale(&u).unwrap();
        for (p, &xi) in params.iter().zip(&x) {
            prop_assert!(
                p.lower - 1e-12 <= xi && xi <= p.upper + 1e-12,
                "{} = {xi} escaped [{}, {}]",
                p.name,
                p.lower,
                p.upper
            );
        }
        let back = bounds.scale(&x).unwrap();
        for (orig, round) in u.iter().zip(&back) {
            prop_assert!((orig - round).abs() < 1e-12, "roundtrip {orig} -> {round}");
        }
    }

    #[test]
    fn envelope_is_bounded_and_truncated(
        fluence in 0.0f64..=700.0,
        tau in 10.0f64..=200.0,
        t in -100.0f64..=2000.0,
    ) {
        let pulse = PulseSpec::new(fluence, tau, 2000.0);
        let g = pulse_envelope(&pulse, t);
        prop_assert!((0.0..=1.0).contains(&g), "envelope {g} out of [0, 1]");
        prop_assert!((pulse_envelope(&pulse, pulse.t_center_fs) - 1.0).abs() < 1e-15);
        if (t - pulse.t_center_fs).abs() > pulse.trunc_halfwidth * tau {
            prop_assert_eq!(g, 0.0, "envelope not truncated at t = {}", t);
        }
        prop_assert_eq!(pulse_envelope(&pulse, pulse.t_off() + 1e-9), 0.0);
    }

    #[test]
    fn figure_of_merit_rewards_any_improvement(
        n in 2usize..=5,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut c = ConcurrenceMatrix::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                c.set(i, j, rng.random_range(0.0..0.9));
            }
        }
        let before = figure_of_merit(&c);
        prop_assert!(before >= 0.0);
        let bumped = c.get(0, 1) + 0.05;
        let mut improved = c.clone();
        improved.set(0, 1, bumped);
        prop_assert!(
            figure_of_merit(&improved) < before,
            "raising a pair concurrence did not lower the figure of merit"
        );
    }
}
