//! Points reachable by composing the regimes' deterministic flows.
//!
//! The long-run hybrid trajectory of a persistent system accumulates on the
//! closure of `{ phi_{e_k}(t_k) o ... o phi_{e_1}(t_1) (x*) }` over all
//! finite regime sequences and durations, where `x*` is an endemic
//! equilibrium.

use alloc::vec::Vec;
use rand::Rng;

use super::{flow3, SimError};
use crate::sairs_model::{EpidemicParams, EpidemicState3, ModelError};
use crate::semi_markov::SemiMarkovSpec;

/// Endemic equilibrium of the first regime that has one (`R0(r) > 1`),
/// with that regime's index.
pub fn psi_default_start(params: &EpidemicParams) -> Result<(usize, EpidemicState3), SimError> {
    params.validate()?;
    let mut best = f64::NEG_INFINITY;
    for r in 0..params.regime_count() {
        match params.endemic_equilibrium(r) {
            Ok(x) => return Ok((r, x)),
            Err(ModelError::NoEndemicEquilibrium { r0 }) => best = best.max(r0),
            Err(e) => return Err(e.into()),
        }
    }
    Err(ModelError::NoEndemicEquilibrium { r0: best }.into())
}

/// Applies the legs `(regime, duration)` in order, starting from `start`.
pub fn psi_reachable(
    params: &EpidemicParams,
    start: EpidemicState3,
    legs: &[(usize, f64)],
    step: f64,
) -> Result<EpidemicState3, SimError> {
    if !start.is_interior() {
        return Err(SimError::InvalidStart);
    }
    let mut x = start;
    for &(r, duration) in legs {
        if !(duration >= 0.0) {
            return Err(SimError::InvalidSetting("leg durations must be non-negative"));
        }
        x = flow3(&params.subsystem(r)?, x, duration, step)?;
    }
    Ok(x)
}

/// Random points of the reachable set. Each point composes between one and
/// `max_legs` legs; regimes follow the embedded chain from a uniformly
/// chosen first regime and durations are drawn from the holding
/// distributions.
pub fn psi_cloud<R: Rng + ?Sized>(
    params: &EpidemicParams,
    spec: &SemiMarkovSpec,
    start: EpidemicState3,
    points: usize,
    max_legs: usize,
    step: f64,
    rng: &mut R,
) -> Result<Vec<EpidemicState3>, SimError> {
    if max_legs == 0 {
        return Err(SimError::InvalidSetting("need at least one leg per point"));
    }
    params.validate_for(spec.state_count())?;
    let m = spec.state_count();
    let mut out = Vec::with_capacity(points);
    let mut legs = Vec::with_capacity(max_legs);
    for _ in 0..points {
        legs.clear();
        let n = rng.random_range(1..=max_legs);
        let mut r = rng.random_range(0..m);
        for _ in 0..n {
            legs.push((r, spec.holding()[r].sample(rng)));
            r = spec.next_state(r, rng);
        }
        out.push(psi_reachable(params, start, &legs, step)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{case3, gamma_spec};
    use super::*;
    use crate::rng::path_rng;

    #[test]
    fn empty_legs_is_identity() {
        let (_, x) = psi_default_start(&case3()).unwrap();
        assert_eq!(psi_reachable(&case3(), x, &[], 0.01).unwrap(), x);
    }

    #[test]
    fn default_start_skips_subcritical_regime() {
        let (r, x) = psi_default_start(&case3()).unwrap();
        assert_eq!(r, 1);
        assert!(x.is_interior());
        let mut sub = case3();
        sub.beta_a[1] = 0.05;
        sub.beta_i[1] = 0.05;
        assert!(matches!(
            psi_default_start(&sub),
            Err(SimError::Model(ModelError::NoEndemicEquilibrium { .. }))
        ));
    }

    #[test]
    fn equilibrium_is_fixed_by_its_own_flow() {
        let (r, x) = psi_default_start(&case3()).unwrap();
        let y = psi_reachable(&case3(), x, &[(r, 50.0)], 0.01).unwrap();
        assert!((y.s - x.s).abs() < 1e-10 && (y.a - x.a).abs() < 1e-10);
    }

    #[test]
    fn legs_compose() {
        let (_, x) = psi_default_start(&case3()).unwrap();
        let p = case3();
        let ab = psi_reachable(&p, x, &[(0, 3.0), (1, 2.0)], 0.01).unwrap();
        let a = psi_reachable(&p, x, &[(0, 3.0)], 0.01).unwrap();
        assert_eq!(psi_reachable(&p, a, &[(1, 2.0)], 0.01).unwrap(), ab);
    }

    #[test]
    fn cloud_is_interior() {
        let (_, x) = psi_default_start(&case3()).unwrap();
        let mut rng = path_rng(1, 0);
        let cloud = psi_cloud(&case3(), &gamma_spec([4.0, 15.0]), x, 50, 4, 0.05, &mut rng).unwrap();
        assert_eq!(cloud.len(), 50);
        assert!(cloud.iter().all(|p| p.in_gamma(1e-12)));
        assert!(psi_cloud(&case3(), &gamma_spec([4.0, 15.0]), x, 1, 0, 0.05, &mut rng).is_err());
    }
}
