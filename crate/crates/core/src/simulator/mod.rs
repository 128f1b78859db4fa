//! Hybrid trajectories of the switched system and their statistics.
//!
//! A trajectory is built from one sampled [`RegimePath`]: each
//! constant-regime segment is integrated with fixed-step RK4 that lands
//! exactly on the jump times, and the segments are stitched so the state is
//! continuous while the regime and backward recurrence time jump.
//! Samples are taken on the uniform grid `k * sample_every` and at every
//! jump time; at a jump the sample carries the new regime and `eta = 0`.

mod ensemble;
mod integrate;
mod occupation;
mod psi;
mod stats;

use alloc::vec::Vec;

use crate::rng::path_rng;
use crate::sairs_model::{EpidemicParams, EpidemicState4, ModelError};
use crate::semi_markov::{RegimePath, SemiMarkovError, SemiMarkovSpec};

#[cfg(feature = "parallel")]
pub use ensemble::ensemble_parallel;
pub use ensemble::{ensemble, EnsembleOptions, EnsembleSummary, MemberSummary, Quantiles};
pub use integrate::{flow3, integrate_between_jumps, integrate_between_jumps3, VIOLATION_TOL};
pub use occupation::{occupation, stationarity_tv, Binning, CellIndex, OccupationHistogram};
pub use psi::{psi_cloud, psi_default_start, psi_reachable};
pub use stats::{check_extinction, time_means, ExtinctionCheck, TimeMeans};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("state left the invariant region at t = {t}: {state:?} (reduce the step)")]
    InvariantViolation { t: f64, state: Vec<f64> },
    #[error("initial state outside the invariant region")]
    InvalidStart,
    #[error("invalid switching specification: {0}")]
    InvalidSpec(alloc::string::String),
    #[error("burn-in {burn_in} must lie in [0, {horizon})")]
    InvalidBurnIn { burn_in: f64, horizon: f64 },
    #[error("invalid analysis setting: {0}")]
    InvalidSetting(&'static str),
    #[error("histograms use different binnings")]
    BinningMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Switching(#[from] SemiMarkovError),
}

/// Fixed-step integration and output sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegratorConfig {
    /// RK4 step.
    pub step: f64,
    /// Spacing of the uniform output grid.
    pub sample_every: f64,
    /// Excursions below 0 (or above 1) up to this size are clamped.
    pub clamp_eps: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            sample_every: 0.1,
            clamp_eps: 1e-12,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(SimError::InvalidConfig("step must be positive"));
        }
        if !(self.sample_every >= self.step && self.sample_every.is_finite()) {
            return Err(SimError::InvalidConfig("sample_every must be finite and at least step"));
        }
        if !(0.0..=1e-9).contains(&self.clamp_eps) {
            return Err(SimError::InvalidConfig("clamp_eps must lie in [0, 1e-9]"));
        }
        Ok(())
    }
}

/// Seed of the random stream a trajectory was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathSeed {
    pub master: u64,
    pub index: u64,
}

/// Sampled hybrid trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<EpidemicState4>,
    pub regimes: Vec<usize>,
    pub eta: Vec<f64>,
    /// `None` when simulated on a given path.
    pub seed: Option<PathSeed>,
    pub path: RegimePath,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.path.horizon()
    }

    pub fn last_state(&self) -> EpidemicState4 {
        *self.states.last().expect("trajectory has samples")
    }

    fn push(&mut self, t: f64, x: EpidemicState4, r: usize, eta: f64) {
        self.times.push(t);
        self.states.push(x);
        self.regimes.push(r);
        self.eta.push(eta);
    }
}

fn check_spec(params: &EpidemicParams, spec: &SemiMarkovSpec) -> Result<(), SimError> {
    let report = spec.validate();
    if !report.is_ok() {
        return Err(SimError::InvalidSpec(alloc::format!("{report}")));
    }
    params.validate_for(spec.state_count())?;
    Ok(())
}

/// Integrates along a given switching path.
pub fn simulate_on_path(
    params: &EpidemicParams,
    path: &RegimePath,
    x0: EpidemicState4,
    config: &IntegratorConfig,
) -> Result<Trajectory, SimError> {
    config.validate()?;
    params.validate()?;
    let x0 = EpidemicState4::new(x0.s, x0.a, x0.i, x0.r).map_err(|_| SimError::InvalidStart)?;
    let subs = params.subsystems();
    if let Some(&r) = path.states().iter().find(|&&r| r >= subs.len()) {
        return Err(ModelError::InvalidRegime {
            regime: r,
            count: subs.len(),
        }
        .into());
    }
    let capacity = (path.horizon() / config.sample_every) as usize + path.jump_times().len() + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        regimes: Vec::with_capacity(capacity),
        eta: Vec::with_capacity(capacity),
        seed: None,
        path: path.clone(),
    };
    let mut x = x0.to_array();
    for (a, b, r) in path.segments() {
        traj.push(a, EpidemicState4::from_array(x), r, 0.0);
        let sub = &subs[r];
        let f = |y: &[f64; 4]| sub.drift4(&EpidemicState4::from_array(*y));
        x = integrate::integrate_segment(f, x, a, b, config, true, |t, y| {
            traj.push(t, EpidemicState4::from_array(*y), r, t - a)
        })?;
    }
    let (last_jump, last_regime) = (
        *path.jump_times().last().expect("non-empty path"),
        *path.states().last().expect("non-empty path"),
    );
    traj.push(
        path.horizon(),
        EpidemicState4::from_array(x),
        last_regime,
        path.horizon() - last_jump,
    );
    Ok(traj)
}

/// Samples a switching path from stream `index` of `seed` and integrates
/// along it.
#[allow(clippy::too_many_arguments)]
pub fn simulate_indexed(
    params: &EpidemicParams,
    spec: &SemiMarkovSpec,
    x0: EpidemicState4,
    r0: usize,
    horizon: f64,
    config: &IntegratorConfig,
    seed: u64,
    index: u64,
) -> Result<Trajectory, SimError> {
    check_spec(params, spec)?;
    config.validate()?;
    let mut rng = path_rng(seed, index);
    let path = spec.sample_path(r0, horizon, &mut rng)?;
    let mut traj = simulate_on_path(params, &path, x0, config)?;
    traj.seed = Some(PathSeed { master: seed, index });
    Ok(traj)
}

/// One hybrid trajectory on `[0, horizon]` from `(x0, r0)` with `eta(0) = 0`.
/// Deterministic given `seed`.
pub fn simulate(
    params: &EpidemicParams,
    spec: &SemiMarkovSpec,
    x0: EpidemicState4,
    r0: usize,
    horizon: f64,
    config: &IntegratorConfig,
    seed: u64,
) -> Result<Trajectory, SimError> {
    simulate_indexed(params, spec, x0, r0, horizon, config, seed, 0)
}
