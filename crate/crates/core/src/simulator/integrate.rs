//! Fixed-step RK4 on a single constant-regime segment.

use super::{IntegratorConfig, SimError};
use crate::sairs_model::{EpidemicState3, EpidemicState4, Subsystem};
use alloc::vec::Vec;

/// Largest tolerated excursion outside the invariant region.
pub const VIOLATION_TOL: f64 = 1e-9;

// A remaining interval this close to one step is taken as the final step.
const LANDING_SLACK: f64 = 1e-9;

fn rk4_step<const N: usize>(f: &impl Fn(&[f64; N]) -> [f64; N], x: &[f64; N], h: f64) -> [f64; N] {
    let shifted = |k: &[f64; N], c: f64| core::array::from_fn::<f64, N, _>(|j| x[j] + c * k[j]);
    let k1 = f(x);
    let k2 = f(&shifted(&k1, 0.5 * h));
    let k3 = f(&shifted(&k2, 0.5 * h));
    let k4 = f(&shifted(&k3, h));
    core::array::from_fn(|j| x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
}

/// Clamps rounding-level excursions below 0 or above 1 and rejects real
/// violations of the invariant region. `full` states must also sum to one.
fn project<const N: usize>(x: &mut [f64; N], t: f64, eps: f64, full: bool) -> Result<(), SimError> {
    let total: f64 = x.iter().sum();
    let outside = x
        .iter()
        .any(|v| !(v.is_finite() && *v >= -VIOLATION_TOL && *v <= 1.0 + VIOLATION_TOL));
    let bad_total = if full {
        (total - 1.0).abs() > VIOLATION_TOL
    } else {
        total > 1.0 + VIOLATION_TOL
    };
    if outside || bad_total {
        return Err(SimError::InvariantViolation { t, state: x.to_vec() });
    }
    for v in x.iter_mut() {
        if *v < 0.0 && *v >= -eps {
            *v = 0.0;
        } else if *v > 1.0 && *v <= 1.0 + eps {
            *v = 1.0;
        }
    }
    Ok(())
}

/// Advances `(t, x)` to `target` in steps of `step`, the last one
/// shortened to land on `target` exactly.
fn advance<const N: usize>(
    f: &impl Fn(&[f64; N]) -> [f64; N],
    x: &mut [f64; N],
    t: &mut f64,
    target: f64,
    config: &IntegratorConfig,
    full: bool,
) -> Result<(), SimError> {
    while *t < target {
        let remaining = target - *t;
        if remaining <= config.step * (1.0 + LANDING_SLACK) {
            *x = rk4_step(f, x, remaining);
            *t = target;
        } else {
            *x = rk4_step(f, x, config.step);
            *t += config.step;
        }
        project(x, *t, config.clamp_eps, full)?;
    }
    Ok(())
}

/// Integrates from `(t0, x0)` to `t1`, calling `emit` at every output grid
/// point `k * sample_every` strictly inside `(t0, t1)`. Steps are `step`
/// long except the last one before each grid point and before `t1`, which
/// are shortened to land on them exactly.
pub(crate) fn integrate_segment<const N: usize>(
    f: impl Fn(&[f64; N]) -> [f64; N],
    x0: [f64; N],
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
    full: bool,
    mut emit: impl FnMut(f64, &[f64; N]),
) -> Result<[f64; N], SimError> {
    let every = config.sample_every;
    let mut k = libm::floor(t0 / every) as u64;
    while (k as f64) * every <= t0 {
        k += 1;
    }
    let mut x = x0;
    let mut t = t0;
    loop {
        let g = (k as f64) * every;
        let target = if g < t1 { g } else { t1 };
        advance(&f, &mut x, &mut t, target, config, full)?;
        if target == t1 {
            return Ok(x);
        }
        emit(target, &x);
        k += 1;
    }
}

fn check_interval(t0: f64, t1: f64) -> Result<(), SimError> {
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(SimError::InvalidInterval { t0, t1 });
    }
    Ok(())
}

/// States on `[t0, t1]` under the frozen regime `sub`: the start, every
/// output grid point strictly inside, and the end.
pub fn integrate_between_jumps(
    sub: &Subsystem,
    x0: EpidemicState4,
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
) -> Result<Vec<(f64, EpidemicState4)>, SimError> {
    config.validate()?;
    check_interval(t0, t1)?;
    let x0 = EpidemicState4::new(x0.s, x0.a, x0.i, x0.r)?;
    let mut out = alloc::vec![(t0, x0)];
    let f = |x: &[f64; 4]| sub.drift4(&EpidemicState4::from_array(*x));
    let end = integrate_segment(f, x0.to_array(), t0, t1, config, true, |t, x| {
        out.push((t, EpidemicState4::from_array(*x)))
    })?;
    out.push((t1, EpidemicState4::from_array(end)));
    Ok(out)
}

/// Three-dimensional counterpart of [`integrate_between_jumps`].
pub fn integrate_between_jumps3(
    sub: &Subsystem,
    x0: EpidemicState3,
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
) -> Result<Vec<(f64, EpidemicState3)>, SimError> {
    config.validate()?;
    check_interval(t0, t1)?;
    if !x0.in_gamma(VIOLATION_TOL) {
        return Err(SimError::InvalidStart);
    }
    let mut out = alloc::vec![(t0, x0)];
    let f = |x: &[f64; 3]| sub.drift3(&EpidemicState3::from_array(*x));
    let end = integrate_segment(f, x0.to_array(), t0, t1, config, false, |t, x| {
        out.push((t, EpidemicState3::from_array(*x)))
    })?;
    out.push((t1, EpidemicState3::from_array(end)));
    Ok(out)
}

/// Endpoint of the regime flow started at `x0` after `duration`, without
/// intermediate output.
pub fn flow3(sub: &Subsystem, x0: EpidemicState3, duration: f64, step: f64) -> Result<EpidemicState3, SimError> {
    if duration == 0.0 {
        return Ok(x0);
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(SimError::InvalidInterval { t0: 0.0, t1: duration });
    }
    let config = IntegratorConfig {
        step,
        sample_every: step,
        ..IntegratorConfig::default()
    };
    config.validate()?;
    let f = |x: &[f64; 3]| sub.drift3(&EpidemicState3::from_array(*x));
    let (mut x, mut t) = (x0.to_array(), 0.0);
    advance(&f, &mut x, &mut t, duration, &config, false)?;
    Ok(EpidemicState3::from_array(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sairs_model::EpidemicParams;
    use alloc::vec;

    fn sub(beta: f64) -> Subsystem {
        EpidemicParams {
            beta_a: vec![beta],
            beta_i: vec![beta],
            delta_a: 0.07,
            delta_i: 0.07,
            alpha: 0.5,
            gamma: 0.02,
            nu: 0.01,
            mu: 1.0 / (60.0 * 365.0),
        }
        .subsystem(0)
        .unwrap()
    }

    fn start() -> EpidemicState4 {
        EpidemicState4::new(0.9, 0.05, 0.05, 0.0).unwrap()
    }

    #[test]
    fn zero_drift_is_constant() {
        let zero = Subsystem {
            beta_a: 0.0,
            beta_i: 0.0,
            delta_a: 0.0,
            delta_i: 0.0,
            alpha: 0.0,
            gamma: 0.0,
            nu: 0.0,
            mu: 0.0,
        };
        let out = integrate_between_jumps(&zero, start(), 0.0, 5.0, &IntegratorConfig::default()).unwrap();
        assert!(out.iter().all(|(_, x)| *x == start()));
    }

    #[test]
    fn lands_on_grid_and_endpoint() {
        let out = integrate_between_jumps(&sub(0.9), start(), 0.37, 1.234, &IntegratorConfig::default()).unwrap();
        let times: Vec<f64> = out.iter().map(|p| p.0).collect();
        assert_eq!(times.first(), Some(&0.37));
        assert_eq!(times.last(), Some(&1.234));
        let grid: Vec<f64> = times[1..times.len() - 1].to_vec();
        assert_eq!(grid.len(), 9);
        for (k, t) in grid.iter().enumerate() {
            assert_eq!(*t, (k as f64 + 4.0) * 0.1);
        }
    }

    #[test]
    fn subcritical_segment_approaches_dfe() {
        let s = sub(0.05);
        assert!(s.r0() < 1.0);
        let config = IntegratorConfig {
            step: 0.05,
            sample_every: 100.0,
            clamp_eps: 1e-12,
        };
        let out = integrate_between_jumps(&s, start(), 0.0, 3000.0, &config).unwrap();
        let end = out.last().unwrap().1;
        assert!((end.s - s.s0()).abs() < 1e-8);
        assert!(end.infectious() < 1e-10);
    }

    fn endpoint(s: &Subsystem, step: f64) -> [f64; 4] {
        let config = IntegratorConfig {
            step,
            sample_every: 100.0,
            clamp_eps: 0.0,
        };
        integrate_between_jumps(s, start(), 0.0, 20.0, &config)
            .unwrap()
            .last()
            .unwrap()
            .1
            .to_array()
    }

    #[test]
    fn fourth_order_convergence() {
        let s = sub(0.9);
        let reference = endpoint(&s, 0.2 / 8.0);
        let err = |h: f64| {
            let x = endpoint(&s, h);
            (0..4).map(|j| (x[j] - reference[j]).abs()).fold(0.0, f64::max)
        };
        let ratio = err(0.4) / err(0.2);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn three_and_four_dimensional_agree() {
        let s = sub(0.9);
        let config = IntegratorConfig::default();
        let four = integrate_between_jumps(&s, start(), 0.0, 50.0, &config).unwrap();
        let three = integrate_between_jumps3(&s, start().to_state3(), 0.0, 50.0, &config).unwrap();
        assert_eq!(four.len(), three.len());
        for ((t4, x4), (t3, x3)) in four.iter().zip(&three) {
            assert_eq!(t4, t3);
            let r = 1.0 - x3.s - x3.a - x3.i;
            assert!((x4.s - x3.s).abs() < 1e-12 && (x4.r - r).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_backwards_interval() {
        let err = integrate_between_jumps(&sub(0.9), start(), 1.0, 1.0, &IntegratorConfig::default());
        assert!(matches!(err, Err(SimError::InvalidInterval { .. })));
    }

    #[test]
    fn flow_of_zero_duration_is_identity() {
        let x = start().to_state3();
        assert_eq!(flow3(&sub(0.9), x, 0.0, 0.01).unwrap(), x);
    }
}
