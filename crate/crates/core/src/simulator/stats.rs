//! Time means and extinction detection on sampled trajectories.

use super::{SimError, Trajectory};

/// Long-run time averages over `[burn_in, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeMeans {
    pub s: f64,
    pub a: f64,
    pub i: f64,
    pub ai: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtinctionCheck {
    /// `A + I` stayed below the threshold over the whole trailing window.
    pub extinct: bool,
    /// Start of the final run of samples with `A + I` below the threshold.
    pub first_crossing: Option<f64>,
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    a + (b - a) * w
}

/// Trapezoidal time means of `S`, `A`, `I` and `A + I` over
/// `[burn_in, horizon]`, interpolating linearly at `burn_in`.
pub fn time_means(traj: &Trajectory, burn_in: f64) -> Result<TimeMeans, SimError> {
    let horizon = traj.horizon();
    if !(burn_in >= 0.0 && burn_in < horizon) {
        return Err(SimError::InvalidBurnIn { burn_in, horizon });
    }
    let mut acc = [0.0f64; 3];
    for k in 0..traj.len() - 1 {
        let (t0, t1) = (traj.times[k], traj.times[k + 1]);
        if t1 <= burn_in {
            continue;
        }
        let (x0, x1) = (traj.states[k], traj.states[k + 1]);
        let mut a = [x0.s, x0.a, x0.i];
        let b = [x1.s, x1.a, x1.i];
        let mut start = t0;
        if t0 < burn_in {
            let w = (burn_in - t0) / (t1 - t0);
            a = core::array::from_fn(|j| lerp(a[j], b[j], w));
            start = burn_in;
        }
        let dt = t1 - start;
        for j in 0..3 {
            acc[j] += 0.5 * (a[j] + b[j]) * dt;
        }
    }
    let len = horizon - burn_in;
    let [s, a, i] = acc.map(|v| v / len);
    Ok(TimeMeans { s, a, i, ai: a + i })
}

/// Extinction flag for the trailing `window`: true iff every sample of
/// `A + I` in `[horizon - window, horizon]` is below `threshold`.
pub fn check_extinction(traj: &Trajectory, threshold: f64, window: f64) -> Result<ExtinctionCheck, SimError> {
    if !(threshold > 0.0) {
        return Err(SimError::InvalidSetting("extinction threshold must be positive"));
    }
    if !(window >= 0.0) {
        return Err(SimError::InvalidSetting("extinction window must be non-negative"));
    }
    let below = |k: usize| traj.states[k].infectious() < threshold;
    let mut first = traj.len();
    while first > 0 && below(first - 1) {
        first -= 1;
    }
    let first_crossing = (first < traj.len()).then(|| traj.times[first]);
    let extinct = match first_crossing {
        Some(t) => window <= traj.horizon() && t <= traj.horizon() - window,
        None => false,
    };
    Ok(ExtinctionCheck {
        extinct,
        first_crossing,
    })
}
