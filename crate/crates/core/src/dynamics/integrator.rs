//! Adaptive Dormand-Prince 5(4) and fixed-step RK4 over complex matrices.
//!
//! The embedded pair uses the standard coefficients with FSAL (first same
//! as last), an RMS error norm over the componentwise scale
//! atol + rtol * max(|y|, |y_new|), and the PI step-size controller of
//! Hairer's DOPRI5 (beta = 0.04, safety 0.9, growth clamped to [0.2, 10]).

use ndarray::{Array2, Zip};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// Difference between the 5th-order and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MIN_STEP_FRACTION: f64 = 1e-14;

/// Error-control knobs for one integration segment.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

/// Mutable integration state carried across output segments so the
/// controller memory and FSAL stage survive between samples.
pub struct Dopri5 {
    k: Vec<Array2<C64>>,
    y_stage: Array2<C64>,
    y_new: Array2<C64>,
    h: f64,
    facold: f64,
    fsal_valid: bool,
    pub n_steps: usize,
    pub n_rejected: usize,
    pub n_rhs: usize,
}

impl Dopri5 {
    pub fn new(shape: (usize, usize)) -> Self {
        Self {
            k: (0..7).map(|_| Array2::zeros(shape)).collect(),
            y_stage: Array2::zeros(shape),
            y_new: Array2::zeros(shape),
            h: 0.0,
            facold: 1e-4,
            fsal_valid: false,
            n_steps: 0,
            n_rejected: 0,
            n_rhs: 0,
        }
    }

    /// Invalidates the FSAL cache (call after mutating the state outside
    /// the integrator, e.g. re-symmetrizing at an output point).
    pub fn invalidate_fsal(&mut self) {
        self.fsal_valid = false;
    }

    /// Picks an initial step from the scaled norms of y and f(t0, y),
    /// following the usual starting-step heuristic.
    fn initial_step<F>(
        &mut self,
        f: &mut F,
        t0: f64,
        y: &Array2<C64>,
        span: f64,
        ctrl: StepControl,
    ) -> f64
    where
        F: FnMut(f64, &Array2<C64>, &mut Array2<C64>),
    {
        let scale = |v: &C64, y_ref: &C64| v.norm() / (ctrl.atol + ctrl.rtol * y_ref.norm());
        f(t0, y, &mut self.k[0]);
        self.n_rhs += 1;
        let d0 = rms(y.iter().zip(y.iter()).map(|(v, r)| scale(v, r)));
        let d1 = rms(self.k[0].iter().zip(y.iter()).map(|(v, r)| scale(v, r)));
        let h0 = if d1 < 1e-10 || d0 < 1e-10 {
            1e-6 * span.max(1.0)
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(ctrl.max_step).min(span);
        // One explicit Euler probe to estimate the second derivative.
        Zip::from(&mut self.y_stage)
            .and(y)
            .and(&self.k[0])
            .for_each(|s, &yv, &kv| *s = yv + kv * C64::new(h0, 0.0));
        f(t0 + h0, &self.y_stage, &mut self.k[1]);
        self.n_rhs += 1;
        let d2 = rms(
            self.k[1]
                .iter()
                .zip(self.k[0].iter())
                .zip(y.iter())
                .map(|((a, b), r)| scale(&(a - b), r)),
        ) / h0;
        let d_max = d1.max(d2);
        let h1 = if d_max <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d_max).powf(0.2)
        };
        self.fsal_valid = false;
        (100.0 * h0).min(h1).min(ctrl.max_step).min(span)
    }

    /// Advances `y` in place from `t0` to `t1`, calling `f(t, y, out)` for
    /// the right-hand side. Returns the number of accepted steps.
    pub fn integrate_to<F>(
        &mut self,
        f: &mut F,
        t0: f64,
        t1: f64,
        y: &mut Array2<C64>,
        ctrl: StepControl,
    ) -> Result<()>
    where
        F: FnMut(f64, &Array2<C64>, &mut Array2<C64>),
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let mut t = t0;
        if self.h <= 0.0 {
            self.h = self.initial_step(f, t0, y, span, ctrl);
        }
        let mut rejected_last = false;
        while t < t1 {
            let h = self.h.min(ctrl.max_step).min(t1 - t);
            if h < MIN_STEP_FRACTION * t1.abs().max(1.0) {
                return Err(Error::numerical(format!(
                    "step size underflow at t = {t:.6} fs"
                )));
            }
            if !self.fsal_valid {
                f(t, y, &mut self.k[0]);
                self.n_rhs += 1;
            }

            macro_rules! stage {
                ($idx:expr, $c:expr, $($a:expr => $kj:expr),+) => {{
                    let hs = C64::new(h, 0.0);
                    // y_stage = y + h * sum(a_j * k_j)
                    self.y_stage.assign(y);
                    $(
                        {
                            let coeff = hs * C64::new($a, 0.0);
                            let kj = &self.k[$kj];
                            Zip::from(&mut self.y_stage).and(kj).for_each(|s, &kv| {
                                *s += coeff * kv;
                            });
                        }
                    )+
                    let (before, after) = self.k.split_at_mut($idx);
                    let _ = before;
                    f(t + $c * h, &self.y_stage, &mut after[0]);
                    self.n_rhs += 1;
                }};
            }

            stage!(1, C2, A21 => 0);
            stage!(2, C3, A31 => 0, A32 => 1);
            stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
            stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
            stage!(5, 1.0, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);

            // 5th-order solution into y_new (also the 7th stage input).
            {
                let hs = C64::new(h, 0.0);
                self.y_new.assign(y);
                for (b, kj) in [(B1, 0), (B3, 2), (B4, 3), (B5, 4), (B6, 5)] {
                    let coeff = hs * C64::new(b, 0.0);
                    let kj = &self.k[kj];
                    Zip::from(&mut self.y_new).and(kj).for_each(|s, &kv| {
                        *s += coeff * kv;
                    });
                }
            }
            f(t + h, &self.y_new, &mut self.k[6]);
            self.n_rhs += 1;

            // Scaled RMS error over all components; the embedded-error
            // combination is accumulated in y_stage (free at this point)
            // to stay within Zip's producer arity.
            Zip::from(&mut self.y_stage)
                .and(&self.k[0])
                .and(&self.k[2])
                .and(&self.k[3])
                .for_each(|s, k1, k3, k4| {
                    *s = k1 * C64::new(E1, 0.0)
                        + k3 * C64::new(E3, 0.0)
                        + k4 * C64::new(E4, 0.0);
                });
            Zip::from(&mut self.y_stage)
                .and(&self.k[4])
                .and(&self.k[5])
                .and(&self.k[6])
                .for_each(|s, k5, k6, k7| {
                    *s += k5 * C64::new(E5, 0.0)
                        + k6 * C64::new(E6, 0.0)
                        + k7 * C64::new(E7, 0.0);
                });
            let mut err_sq = 0.0f64;
            let n_elems = y.len() as f64;
            Zip::from(&self.y_stage)
                .and(&*y)
                .and(&self.y_new)
                .for_each(|ev, yv, ynv| {
                    let sc = ctrl.atol + ctrl.rtol * yv.norm().max(ynv.norm());
                    let e = h.abs() * ev.norm() / sc;
                    err_sq += e * e;
                });
            let err = (err_sq / n_elems).sqrt();

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                // Accept.
                self.facold = err.max(1e-4);
                t += h;
                std::mem::swap(y, &mut self.y_new);
                self.k.swap(0, 6);
                self.fsal_valid = true;
                self.n_steps += 1;
                let fac = (fac11 / self.facold.powf(BETA) / SAFETY)
                    .clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if rejected_last {
                    h_new = h_new.min(h);
                }
                rejected_last = false;
                self.h = h_new;
            } else {
                // Reject and shrink.
                self.n_rejected += 1;
                rejected_last = true;
                self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            }
        }
        Ok(())
    }
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v * v;
        n += 1;
    }
    (sum / n.max(1) as f64).sqrt()
}

/// Classical fixed-step RK4 from `t0` to `t1` with at most `max_step` per
/// step (the span is divided evenly).
pub fn rk4_integrate<F>(
    f: &mut F,
    t0: f64,
    t1: f64,
    y: &mut Array2<C64>,
    max_step: f64,
) -> Result<()>
where
    F: FnMut(f64, &Array2<C64>, &mut Array2<C64>),
{
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(());
    }
    let n = (span / max_step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let shape = y.dim();
    let mut k1 = Array2::zeros(shape);
    let mut k2 = Array2::zeros(shape);
    let mut k3 = Array2::zeros(shape);
    let mut k4 = Array2::zeros(shape);
    let mut stage = Array2::zeros(shape);
    for i in 0..n {
        let t = t0 + i as f64 * h;
        f(t, y, &mut k1);
        axpy_into(&mut stage, y, &k1, 0.5 * h);
        f(t + 0.5 * h, &stage, &mut k2);
        axpy_into(&mut stage, y, &k2, 0.5 * h);
        f(t + 0.5 * h, &stage, &mut k3);
        axpy_into(&mut stage, y, &k3, h);
        f(t + h, &stage, &mut k4);
        let w = C64::new(h / 6.0, 0.0);
        let two = C64::new(2.0, 0.0);
        Zip::from(&mut *y)
            .and(&k1)
            .and(&k2)
            .and(&k3)
            .and(&k4)
            .for_each(|yv, a, b, c, d| {
                *yv += w * (a + two * b + two * c + d);
            });
    }
    Ok(())
}

fn axpy_into(out: &mut Array2<C64>, y: &Array2<C64>, k: &Array2<C64>, h: f64) {
    let hc = C64::new(h, 0.0);
    Zip::from(out).and(y).and(k).for_each(|o, &yv, &kv| {
        *o = yv + hc * kv;
    });
}
