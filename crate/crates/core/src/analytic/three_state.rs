//! Two QDs and a lossy plasmon in the single-excitation subspace.
//!
//! With dephasing and radiative decay off, the amplitudes of |0,0;1>, |S;0>,
//! and |A;0> close under
//!
//! i hbar d/dt (a0, aS, aA) = W (a0, aS, aA),
//! W = [[-i eps, alpha, beta], [alpha, 0, 0], [beta, 0, 0]],
//!
//! with alpha = (g1+g2)/sqrt(2), beta = (g1-g2)/sqrt(2), eps = gamma_s/2
//! (all in meV). W is complex symmetric, so the propagator expands over
//! eigenvectors with the bilinear norms n_k = phi_k^T phi_k rather than
//! Hermitian ones.

use num_complex::Complex64 as C64;

use crate::units::HBAR_MEV_FS;
use crate::{Error, Result};

/// Asymmetry x = beta/alpha at which the asymptotic concurrence peaks.
pub const OPTIMAL_X: f64 = -2.0 + 1.7320508075688772;

/// Relative detuning of the two decay branches below which the generator is
/// treated as defective and epsilon is nudged off the degeneracy.
const BRANCH_DEGENERACY_TOL: f64 = 1e-10;

/// The three-state dark model for two QDs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeStateModel {
    /// Coupling hbar*g_1 in meV.
    pub g1_mev: f64,
    /// Coupling hbar*g_2 in meV.
    pub g2_mev: f64,
    /// Plasmon half-width eps = hbar*gamma_s/2 in meV.
    pub epsilon_mev: f64,
}

impl ThreeStateModel {
    /// Builds the model from couplings and the plasmon decay rate (all meV).
    pub fn new(g1_mev: f64, g2_mev: f64, gamma_s_mev: f64) -> Result<Self> {
        if g1_mev < 0.0 || g2_mev < 0.0 {
            return Err(Error::config("couplings must be >= 0"));
        }
        if gamma_s_mev < 0.0 {
            return Err(Error::config("gamma_s must be >= 0"));
        }
        Ok(Self {
            g1_mev,
            g2_mev,
            epsilon_mev: gamma_s_mev / 2.0,
        })
    }

    /// Symmetric coupling alpha = (g1+g2)/sqrt(2).
    pub fn alpha(&self) -> f64 {
        (self.g1_mev + self.g2_mev) / 2f64.sqrt()
    }

    /// Antisymmetric coupling beta = (g1-g2)/sqrt(2).
    pub fn beta(&self) -> f64 {
        (self.g1_mev - self.g2_mev) / 2f64.sqrt()
    }

    /// Quadrature sum eta = sqrt(alpha^2 + beta^2) = sqrt(g1^2 + g2^2).
    pub fn eta(&self) -> f64 {
        self.alpha().hypot(self.beta())
    }

    /// Asymmetry x = beta/alpha = (g1-g2)/(g1+g2).
    pub fn x(&self) -> f64 {
        self.beta() / self.alpha()
    }
}

/// Amplitudes of |0,0;1>, |S;0>, |A;0>.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeStateAmplitudes {
    pub a0: C64,
    pub a_s: C64,
    pub a_a: C64,
}

impl ThreeStateAmplitudes {
    /// The QD-1-excited initial condition (0, 1/sqrt(2), 1/sqrt(2)).
    pub fn qd1_excited() -> Self {
        let s = 1.0 / 2f64.sqrt();
        Self {
            a0: C64::new(0.0, 0.0),
            a_s: C64::new(s, 0.0),
            a_a: C64::new(s, 0.0),
        }
    }

    /// Total population held in the three tracked states.
    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a_s.norm_sqr() + self.a_a.norm_sqr()
    }

    /// Site-basis QD amplitudes (a1, a2) = ((aS+aA), (aS-aA))/sqrt(2).
    pub fn qd_amplitudes(&self) -> (C64, C64) {
        let s = C64::new(1.0 / 2f64.sqrt(), 0.0);
        ((self.a_s + self.a_a) * s, (self.a_s - self.a_a) * s)
    }

    /// Concurrence 2|a1 a2| of the reduced two-QD state.
    pub fn concurrence(&self) -> f64 {
        let (a1, a2) = self.qd_amplitudes();
        2.0 * a1.norm() * a2.norm()
    }
}

/// Propagates the amplitudes by `t_fs` femtoseconds.
///
/// Uses the eigen-decomposition of W. The zero mode (0, -beta, alpha) never
/// decays; the two branches w = (-i eps -+ sqrt(4 eta^2 - eps^2))/2 carry
/// negative imaginary parts for eps > 0. When the two branches collide
/// (4 eta^2 = eps^2) the generator is defective and epsilon is nudged by one
/// part in 1e8; eta = 0 degenerates to free evolution with a decaying
/// plasmon amplitude.
pub fn three_state_evolve(
    model: &ThreeStateModel,
    init: &ThreeStateAmplitudes,
    t_fs: f64,
) -> Result<ThreeStateAmplitudes> {
    if t_fs < 0.0 {
        return Err(Error::config("t must be >= 0"));
    }
    let alpha = model.alpha();
    let beta = model.beta();
    let eta = model.eta();
    let mut eps = model.epsilon_mev;
    if eta == 0.0 {
        let decay = C64::new(-eps * t_fs / HBAR_MEV_FS, 0.0).exp();
        return Ok(ThreeStateAmplitudes {
            a0: init.a0 * decay,
            a_s: init.a_s,
            a_a: init.a_a,
        });
    }
    let gap = 4.0 * eta * eta - eps * eps;
    if gap.abs() < BRANCH_DEGENERACY_TOL * (4.0 * eta * eta).max(eps * eps) {
        eps *= 1.0 + 1e-8;
    }
    let root = C64::new(4.0 * eta * eta - eps * eps, 0.0).sqrt();
    let w_plus = (C64::new(0.0, -eps) - root) / 2.0;
    let w_minus = (C64::new(0.0, -eps) + root) / 2.0;

    let c0 = [init.a0, init.a_s, init.a_a];
    let mut out = [C64::new(0.0, 0.0); 3];
    let modes = [
        (C64::new(0.0, 0.0), [C64::new(0.0, 0.0), C64::new(-beta, 0.0), C64::new(alpha, 0.0)]),
        (w_plus, [w_plus, C64::new(alpha, 0.0), C64::new(beta, 0.0)]),
        (w_minus, [w_minus, C64::new(alpha, 0.0), C64::new(beta, 0.0)]),
    ];
    for (w, phi) in modes {
        let n_k: C64 = phi.iter().map(|p| p * p).sum();
        let overlap: C64 = phi.iter().zip(&c0).map(|(p, c)| p * c).sum();
        if n_k.norm() == 0.0 {
            return Err(Error::numerical("defective three-state generator"));
        }
        let phase = (C64::new(0.0, -1.0) * w * t_fs / HBAR_MEV_FS).exp();
        let weight = phase * overlap / n_k;
        for (o, p) in out.iter_mut().zip(&phi) {
            *o += weight * p;
        }
    }
    Ok(ThreeStateAmplitudes {
        a0: out[0],
        a_s: out[1],
        a_a: out[2],
    })
}

/// Asymptotic amplitudes and concurrence for the QD-1-excited initial state.
///
/// Only the non-decaying mode survives:
///
/// aS(inf) = x(1-x)/(sqrt(2)(1+x^2)),
/// aA(inf) = (1-x)/(sqrt(2)(1+x^2)),
/// C(inf)  = (1-x)^2 (1-x^2) / (2 (1+x^2)^2),
///
/// with x = (g1-g2)/(g1+g2). Independent of the plasmon rate and of the
/// overall coupling scale. Returns (aS, aA, C).
pub fn three_state_asymptotic(model: &ThreeStateModel) -> Result<(f64, f64, f64)> {
    if model.epsilon_mev <= 0.0 {
        return Err(Error::config(
            "asymptotic amplitudes need a decaying plasmon (gamma_s > 0)",
        ));
    }
    if model.g1_mev + model.g2_mev <= 0.0 {
        return Err(Error::config("asymptotics need g1 + g2 > 0"));
    }
    let x = model.x();
    Ok(asymptotic_of_x(x))
}

/// The asymptotic triple (aS, aA, C) as a function of the asymmetry x.
pub fn asymptotic_of_x(x: f64) -> (f64, f64, f64) {
    let denom = 1.0 + x * x;
    let a_s = x * (1.0 - x) / (2f64.sqrt() * denom);
    let a_a = (1.0 - x) / (2f64.sqrt() * denom);
    let c = (1.0 - x).powi(2) * (1.0 - x * x) / (2.0 * denom * denom);
    (a_s, a_a, c)
}

/// Short-time expansion of the QD-1-excited evolution:
///
/// a0 = -i g1 t/hbar,
/// aS = 1/sqrt(2) - g1(g1+g2) t^2 / (2 sqrt(2) hbar^2),
/// aA = 1/sqrt(2) + g1(g2-g1) t^2 / (2 sqrt(2) hbar^2).
pub fn short_time_amplitudes(g1_mev: f64, g2_mev: f64, t_fs: f64) -> ThreeStateAmplitudes {
    let s = 1.0 / 2f64.sqrt();
    let th = t_fs / HBAR_MEV_FS;
    ThreeStateAmplitudes {
        a0: C64::new(0.0, -g1_mev * th),
        a_s: C64::new(s - g1_mev * (g1_mev + g2_mev) * th * th / (2.0 * 2f64.sqrt()), 0.0),
        a_a: C64::new(s + g1_mev * (g2_mev - g1_mev) * th * th / (2.0 * 2f64.sqrt()), 0.0),
    }
}
