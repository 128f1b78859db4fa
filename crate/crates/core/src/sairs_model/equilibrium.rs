//! Endemic equilibrium of a single regime.

use super::{residual_norm, EpidemicState3, ModelError, Subsystem};
use crate::linalg;

/// Residual the endemic solver must reach.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;
const INTERIOR_MARGIN: f64 = 1e-12;

/// Outcome of the damped Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonReport {
    pub state: EpidemicState3,
    pub iterations: usize,
    pub residual: f64,
}

fn clamp_interior(x: [f64; 3]) -> [f64; 3] {
    let mut y = x.map(|v| v.max(INTERIOR_MARGIN));
    let total: f64 = y.iter().sum();
    if total > 1.0 - INTERIOR_MARGIN {
        let scale = (1.0 - INTERIOR_MARGIN) / total;
        y.iter_mut().for_each(|v| *v *= scale);
    }
    y
}

impl Subsystem {
    fn symptomatic_ratio(&self) -> f64 {
        self.alpha / (self.delta_i + self.mu)
    }

    /// Interior equilibrium for `R0 > 1`: deflated damped Newton from a point
    /// shifted off the disease-free equilibrium, falling back to bisection on the
    /// reduced scalar equation in `A` if Newton stalls or lands on the DFE.
    pub fn endemic_equilibrium(&self) -> Result<EpidemicState3, ModelError> {
        let r0 = self.r0();
        if !(r0 > 1.0) {
            return Err(ModelError::NoEndemicEquilibrium { r0 });
        }
        match self.endemic_newton() {
            Ok(report) => Ok(report.state),
            Err(_) => self.endemic_bisection(),
        }
    }

    /// Damped Newton iteration on the three-dimensional drift, deflated at
    /// the disease-free equilibrium: it solves `m(x) g(x) = 0` with
    /// `m(x) = 1 / |x - x0|^2 + 1`, which has the same interior roots as `g`
    /// but repels the iterates from `x0`. Steps are halved until the iterate
    /// is interior and the deflated residual decreases. Fails rather than
    /// falls back, so callers can inspect the Newton path itself.
    pub fn endemic_newton(&self) -> Result<NewtonReport, ModelError> {
        let r0 = self.r0();
        if !(r0 > 1.0) {
            return Err(ModelError::NoEndemicEquilibrium { r0 });
        }
        let shift = (r0 - 1.0).min(1.0);
        let s0 = self.s0();
        let dfe = [s0, 0.0, 0.0];
        let deflation = |x: &[f64; 3]| {
            let d = linalg::sub(x, &dfe);
            let q = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            (1.0 / q + 1.0, d.map(|v| -2.0 * v / (q * q)))
        };
        let merit = |x: &[f64; 3]| deflation(x).0 * residual_norm(self, &EpidemicState3::from_array(*x));
        let mut x = clamp_interior([s0 - 0.1 * shift, 0.05 * shift, 0.05 * shift]);
        let mut iterations = 0;
        while iterations < NEWTON_MAX_ITER {
            let state = EpidemicState3::from_array(x);
            let g = self.drift3(&state);
            if linalg::norm_inf(&g) <= 0.01 * EQUILIBRIUM_TOL {
                break;
            }
            iterations += 1;
            let (m, grad_m) = deflation(&x);
            let j = self.jacobian3(&state);
            let mut jd = [[0.0; 3]; 3];
            for r in 0..3 {
                for c in 0..3 {
                    jd[r][c] = m * j[r][c] + g[r] * grad_m[c];
                }
            }
            let Some(dx) = linalg::solve3(&jd, &g.map(|v| -m * v)) else {
                break;
            };
            let current = m * linalg::norm_inf(&g);
            let mut step = 1.0;
            let mut accepted = None;
            while step > 1e-10 {
                let trial = [x[0] + step * dx[0], x[1] + step * dx[1], x[2] + step * dx[2]];
                if EpidemicState3::from_array(trial).is_interior() && merit(&trial) < current {
                    accepted = Some(trial);
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some(next) => x = next,
                None => break,
            }
        }
        // Pin the exact I-nullcline relation.
        x[2] = self.symptomatic_ratio() * x[1];
        let state = EpidemicState3::from_array(x);
        let residual = residual_norm(self, &state);
        if residual > EQUILIBRIUM_TOL || !state.is_interior() || state.a < 1e-10 {
            return Err(ModelError::EquilibriumNotConverged { residual });
        }
        Ok(NewtonReport {
            state,
            iterations,
            residual,
        })
    }

    /// Bisection on `h(A) = k S(A) - (alpha + delta_A + mu)`, where `I = c A`
    /// and `S(A)` solves the S-equation; `h` decreases from `h(0) > 0`
    /// (when `R0 > 1`) to a negative value at `A = 1 / (1 + c)`.
    pub fn endemic_bisection(&self) -> Result<EpidemicState3, ModelError> {
        let r0 = self.r0();
        if !(r0 > 1.0) {
            return Err(ModelError::NoEndemicEquilibrium { r0 });
        }
        let c = self.symptomatic_ratio();
        let k = self.beta_a + self.beta_i * c;
        let outflow = self.alpha + self.delta_a + self.mu;
        let s_of =
            |a: f64| (self.mu + self.gamma - self.gamma * (1.0 + c) * a) / (self.mu + self.nu + self.gamma + k * a);
        let h = |a: f64| k * s_of(a) - outflow;
        let (mut lo, mut hi) = (0.0, 1.0 / (1.0 + c));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = 0.5 * (lo + hi);
        let state = EpidemicState3::new(s_of(a), a, c * a);
        let residual = residual_norm(self, &state);
        if residual > EQUILIBRIUM_TOL {
            return Err(ModelError::EquilibriumNotConverged { residual });
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sairs_model::EpidemicParams;
    use alloc::vec;

    fn params() -> EpidemicParams {
        EpidemicParams {
            beta_a: vec![0.05, 0.9],
            beta_i: vec![0.05, 0.9],
            delta_a: 0.07,
            delta_i: 0.07,
            alpha: 0.5,
            gamma: 0.02,
            nu: 0.01,
            mu: 1.0 / (60.0 * 365.0),
        }
    }

    #[test]
    fn no_equilibrium_below_threshold() {
        let p = params();
        assert!(matches!(
            p.endemic_equilibrium(0),
            Err(ModelError::NoEndemicEquilibrium { .. })
        ));
    }

    #[test]
    fn newton_zeroes_drift_and_pins_i() {
        let sub = params().subsystem(1).unwrap();
        let report = sub.endemic_newton().unwrap();
        assert!(report.residual <= EQUILIBRIUM_TOL);
        let x = report.state;
        assert_eq!(x.i, sub.alpha / (sub.delta_i + sub.mu) * x.a);
        assert!(x.is_interior());
    }

    #[test]
    fn newton_and_bisection_agree_unequal_rates() {
        let p = EpidemicParams {
            beta_a: vec![0.004, 0.97],
            beta_i: vec![0.008, 0.99],
            delta_a: 0.105,
            delta_i: 0.1,
            alpha: 0.3,
            gamma: 0.03,
            nu: 0.01,
            mu: 1.0 / (60.0 * 365.0),
        };
        let sub = p.subsystem(1).unwrap();
        let n = sub.endemic_newton().unwrap().state;
        let _ = sub.endemic_newton();
        let b = sub.endemic_bisection().unwrap();
        assert!((n.s - b.s).abs() < 1e-10 && (n.a - b.a).abs() < 1e-10 && (n.i - b.i).abs() < 1e-10);
    }

    #[test]
    fn barely_supercritical_regime() {
        let mut p = params();
        // R0 = beta S0 / (delta + mu) slightly above one.
        p.beta_a[1] = 1.02 * (p.delta_a + p.mu) / p.s0();
        p.beta_i[1] = p.beta_a[1];
        let x = p.endemic_equilibrium(1).unwrap();
        assert!(x.a > 0.0 && residual_norm(&p.subsystem(1).unwrap(), &x) <= EQUILIBRIUM_TOL);
    }
}
