//! Monte Carlo ensembles over independent switching paths.
//!
//! Member `k` always uses stream `k` of the master seed and members are
//! merged by index, so a summary does not depend on evaluation order or on
//! the number of worker threads.

use alloc::vec::Vec;

use super::{check_extinction, simulate_indexed, time_means, ExtinctionCheck, IntegratorConfig, SimError, TimeMeans};
use crate::sairs_model::{EpidemicParams, EpidemicState4};
use crate::semi_markov::SemiMarkovSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleOptions {
    pub master_seed: u64,
    pub trajectories: usize,
    /// Start of the time-mean window.
    pub burn_in: f64,
    /// `A + I` level regarded as extinct.
    pub threshold: f64,
    /// Trailing window over which `A + I` must stay below `threshold`.
    pub window: f64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            master_seed: 0,
            trajectories: 100,
            burn_in: 0.0,
            threshold: 1e-5,
            window: 500.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MemberSummary {
    pub index: u64,
    pub means: TimeMeans,
    pub extinction: ExtinctionCheck,
    /// Largest sampled `A + I` after burn-in.
    pub max_ai: f64,
    pub final_state: EpidemicState4,
    pub jumps: usize,
}

/// Linear-interpolation quantiles of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quantiles {
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() || values.iter().any(|v| v.is_nan()) {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = libm::floor(pos) as usize;
            let hi = (lo + 1).min(v.len() - 1);
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            min: v[0],
            q05: q(0.05),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            q95: q(0.95),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleSummary {
    pub options: EnsembleOptions,
    pub horizon: f64,
    /// Ordered by index.
    pub members: Vec<MemberSummary>,
    pub extinction_fraction: f64,
    pub mean_s: Quantiles,
    pub mean_ai: Quantiles,
    pub max_ai: Quantiles,
}

impl EnsembleSummary {
    fn from_members(options: EnsembleOptions, horizon: f64, members: Vec<MemberSummary>) -> Self {
        let col = |f: fn(&MemberSummary) -> f64| -> Quantiles {
            let v: Vec<f64> = members.iter().map(f).collect();
            Quantiles::of(&v).expect("finite member summaries")
        };
        let extinct = members.iter().filter(|m| m.extinction.extinct).count();
        Self {
            options,
            horizon,
            extinction_fraction: extinct as f64 / members.len() as f64,
            mean_s: col(|m| m.means.s),
            mean_ai: col(|m| m.means.ai),
            max_ai: col(|m| m.max_ai),
            members,
        }
    }

    /// Members satisfying `pred`.
    pub fn count(&self, pred: impl Fn(&MemberSummary) -> bool) -> usize {
        self.members.iter().filter(|m| pred(m)).count()
    }
}

fn check_options(options: &EnsembleOptions, horizon: f64) -> Result<(), SimError> {
    if options.trajectories == 0 {
        return Err(SimError::InvalidSetting("ensemble needs at least one trajectory"));
    }
    if !(options.burn_in >= 0.0 && options.burn_in < horizon) {
        return Err(SimError::InvalidBurnIn {
            burn_in: options.burn_in,
            horizon,
        });
    }
    if !(options.threshold > 0.0) {
        return Err(SimError::InvalidSetting("extinction threshold must be positive"));
    }
    if !(options.window >= 0.0) {
        return Err(SimError::InvalidSetting("extinction window must be non-negative"));
    }
    Ok(())
}

struct Run<'a> {
    params: &'a EpidemicParams,
    spec: &'a SemiMarkovSpec,
    x0: EpidemicState4,
    r0: usize,
    horizon: f64,
    config: &'a IntegratorConfig,
    options: EnsembleOptions,
}

impl Run<'_> {
    fn member(&self, index: u64) -> Result<MemberSummary, SimError> {
        let o = &self.options;
        let traj = simulate_indexed(
            self.params,
            self.spec,
            self.x0,
            self.r0,
            self.horizon,
            self.config,
            o.master_seed,
            index,
        )?;
        let max_ai = traj
            .times
            .iter()
            .zip(&traj.states)
            .filter(|(t, _)| **t >= o.burn_in)
            .map(|(_, x)| x.infectious())
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(MemberSummary {
            index,
            means: time_means(&traj, o.burn_in)?,
            extinction: check_extinction(&traj, o.threshold, o.window)?,
            max_ai,
            final_state: traj.last_state(),
            jumps: traj.path.jump_count(),
        })
    }
}

/// `options.trajectories` independent trajectories, evaluated serially.
pub fn ensemble(
    params: &EpidemicParams,
    spec: &SemiMarkovSpec,
    x0: EpidemicState4,
    r0: usize,
    horizon: f64,
    config: &IntegratorConfig,
    options: &EnsembleOptions,
) -> Result<EnsembleSummary, SimError> {
    check_options(options, horizon)?;
    let run = Run {
        params,
        spec,
        x0,
        r0,
        horizon,
        config,
        options: *options,
    };
    let members = (0..options.trajectories as u64)
        .map(|k| run.member(k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleSummary::from_members(*options, horizon, members))
}

/// Same result as [`ensemble`], with members spread over the rayon pool.
#[cfg(feature = "parallel")]
pub fn ensemble_parallel(
    params: &EpidemicParams,
    spec: &SemiMarkovSpec,
    x0: EpidemicState4,
    r0: usize,
    horizon: f64,
    config: &IntegratorConfig,
    options: &EnsembleOptions,
) -> Result<EnsembleSummary, SimError> {
    use rayon::prelude::*;
    check_options(options, horizon)?;
    let run = Run {
        params,
        spec,
        x0,
        r0,
        horizon,
        config,
        options: *options,
    };
    let members = (0..options.trajectories as u64)
        .into_par_iter()
        .map(|k| run.member(k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleSummary::from_members(*options, horizon, members))
}
