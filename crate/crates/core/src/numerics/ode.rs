//! Dormand–Prince 5(4) integrator with embedded error control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { rtol: 1e-10, atol: 1e-12, h_init: None, h_max: f64::INFINITY, max_steps: 1_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Adaptive integrator for autonomous-or-not systems y' = f(t, y).
pub struct DormandPrince<F, const N: usize> {
    rhs: F,
    ctl: StepControl,
    h: f64,
    accepted: usize,
    rejected: usize,
}

impl<F, const N: usize> DormandPrince<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, ctl: StepControl) -> Self {
        DormandPrince { rhs, ctl, h: ctl.h_init.unwrap_or(0.0), accepted: 0, rejected: 0 }
    }

    pub fn accepted_steps(&self) -> usize {
        self.accepted
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    fn initial_step(&mut self, t: f64, y: &[f64; N], f0: &[f64; N], span: f64) -> f64 {
        let scale = |i: usize| self.ctl.atol + self.ctl.rtol * y[i].abs();
        let d0 = (0..N).map(|i| (y[i] / scale(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
        let d1 = (0..N).map(|i| (f0[i] / scale(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = axpy(y, h0, &[(1.0, f0)]);
        let f1 = (self.rhs)(t + h0, &y1);
        let d2 = (0..N).map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 5.0) };
        (100.0 * h0).min(h1).min(span.abs()).min(self.ctl.h_max)
    }

    /// Advance `y` from `t` to exactly `t_end`.
    pub fn advance(&mut self, t: &mut f64, y: &mut [f64; N], t_end: f64) -> Result<()> {
        if t_end <= *t {
            return Ok(());
        }
        let mut f0 = (self.rhs)(*t, y);
        if self.h <= 0.0 {
            self.h = self.initial_step(*t, y, &f0, t_end - *t);
        }
        let mut steps = 0usize;
        while *t < t_end {
            if steps >= self.ctl.max_steps {
                return Err(Error::NoConvergence(format!("step budget exhausted at t = {:e}", *t)));
            }
            steps += 1;
            let h_min = 16.0 * f64::EPSILON * t.abs().max(1e-300);
            let mut h = self.h.min(self.ctl.h_max);
            let last = *t + h >= t_end;
            if last {
                h = t_end - *t;
            }
            if h < h_min && !last {
                return Err(Error::StepUnderflow { t: *t, h });
            }

            let k1 = f0;
            let k2 = (self.rhs)(*t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
            let k3 = (self.rhs)(*t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = (self.rhs)(*t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = (self.rhs)(*t + C5 * h, &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = (self.rhs)(*t + h, &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = (self.rhs)(*t + h, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.ctl.atol + self.ctl.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();

            if !err.is_finite() {
                self.rejected += 1;
                self.h = h * 0.1;
                if self.h < h_min {
                    return Err(Error::StepUnderflow { t: *t, h: self.h });
                }
                continue;
            }

            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                *t = if last { t_end } else { *t + h };
                *y = y_new;
                f0 = k7;
                self.accepted += 1;
                // Keep the controller's proposal rather than the clipped final step.
                if !last {
                    self.h = h * factor;
                } else {
                    self.h = self.h.max(h * factor).min(self.ctl.h_max);
                }
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
                if self.h < h_min {
                    return Err(Error::StepUnderflow { t: *t, h: self.h });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut solver = DormandPrince::new(|_t, y: &[f64; 1]| [-2.0 * y[0]], StepControl::default());
        let (mut t, mut y) = (0.0, [1.0]);
        solver.advance(&mut t, &mut y, 3.0).unwrap();
        assert_eq!(t, 3.0);
        assert!((y[0] - (-6.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let ctl = StepControl { rtol: 1e-12, atol: 1e-14, ..StepControl::default() };
        let mut solver = DormandPrince::new(|_t, y: &[f64; 2]| [y[1], -y[0]], ctl);
        let (mut t, mut y) = (0.0, [1.0, 0.0]);
        for i in 1..=4 {
            solver.advance(&mut t, &mut y, i as f64 * std::f64::consts::FRAC_PI_2).unwrap();
        }
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }

    #[test]
    fn blowup_underflows() {
        // y' = y², y(0) = 1 blows up at t = 1.
        let mut solver = DormandPrince::new(|_t, y: &[f64; 1]| [y[0] * y[0]], StepControl::default());
        let (mut t, mut y) = (0.0, [1.0]);
        let err = solver.advance(&mut t, &mut y, 2.0).unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. } | Error::NoConvergence(_)));
        assert!(t < 1.0 && t > 0.99);
    }
}
