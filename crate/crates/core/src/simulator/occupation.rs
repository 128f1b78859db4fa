//! Time-weighted occupation histograms of `(S, A, I, eta, regime)`.
//!
//! Long-run occupation measures of a single trajectory approximate the
//! invariant law of the augmented process. Each sample interval
//! `[t_k, t_{k+1}]` (clipped to the window) contributes its length to the
//! cell of its midpoint: the average of the endpoint states, `eta_k` plus
//! half the interval, and regime `r_k`. The regime is constant on every
//! sample interval because jump times are samples.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{SimError, Trajectory};
use crate::semi_markov::SemiMarkovSpec;

/// Uniform bins over `[0, 1]` for `S`, `A`, `I`, and over `[0, eta_max]` for
/// `eta` with one extra overflow bin for larger values.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Binning {
    pub s_bins: u32,
    pub a_bins: u32,
    pub i_bins: u32,
    pub eta_bins: u32,
    pub eta_max: f64,
    pub regimes: u32,
}

/// Histogram cell. `eta == eta_bins` is the overflow bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellIndex {
    pub s: u32,
    pub a: u32,
    pub i: u32,
    pub eta: u32,
    pub regime: u32,
}

fn bin(v: f64, lo: f64, hi: f64, n: u32) -> u32 {
    let pos = (v - lo) / (hi - lo) * n as f64;
    if pos <= 0.0 {
        0
    } else {
        (pos as u32).min(n - 1)
    }
}

fn edges(lo: f64, hi: f64, n: u32) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

impl Binning {
    pub fn new(
        s_bins: u32,
        a_bins: u32,
        i_bins: u32,
        eta_bins: u32,
        eta_max: f64,
        regimes: u32,
    ) -> Result<Self, SimError> {
        if s_bins < 2 || a_bins < 2 || i_bins < 2 || eta_bins < 2 {
            return Err(SimError::InvalidSetting("need at least 2 bins per axis"));
        }
        if !(eta_max > 0.0 && eta_max.is_finite()) {
            return Err(SimError::InvalidSetting("eta range must be positive"));
        }
        if regimes == 0 {
            return Err(SimError::InvalidSetting("need at least one regime"));
        }
        Ok(Self {
            s_bins,
            a_bins,
            i_bins,
            eta_bins,
            eta_max,
            regimes,
        })
    }

    /// 32 bins per compartment and 16 `eta` bins up to three times the
    /// largest mean sojourn.
    pub fn default_for(spec: &SemiMarkovSpec) -> Self {
        let max_mean = spec.holding().iter().map(|d| d.mean()).fold(0.0, f64::max);
        Self::new(32, 32, 32, 16, 3.0 * max_mean, spec.state_count() as u32)
            .expect("valid spec has positive finite means")
    }

    pub fn cell(&self, s: f64, a: f64, i: f64, eta: f64, regime: usize) -> CellIndex {
        let eta_bin = if eta >= self.eta_max {
            self.eta_bins
        } else {
            bin(eta, 0.0, self.eta_max, self.eta_bins)
        };
        CellIndex {
            s: bin(s, 0.0, 1.0, self.s_bins),
            a: bin(a, 0.0, 1.0, self.a_bins),
            i: bin(i, 0.0, 1.0, self.i_bins),
            eta: eta_bin,
            regime: regime as u32,
        }
    }

    pub fn s_edges(&self) -> Vec<f64> {
        edges(0.0, 1.0, self.s_bins)
    }

    pub fn a_edges(&self) -> Vec<f64> {
        edges(0.0, 1.0, self.a_bins)
    }

    pub fn i_edges(&self) -> Vec<f64> {
        edges(0.0, 1.0, self.i_bins)
    }

    /// Edges of the finite `eta` bins; the overflow bin is `[eta_max, inf)`.
    pub fn eta_edges(&self) -> Vec<f64> {
        edges(0.0, self.eta_max, self.eta_bins)
    }
}

/// Sparse time-weighted histogram over a window `[t0, t1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationHistogram {
    binning: Binning,
    window: (f64, f64),
    counts: BTreeMap<CellIndex, f64>,
    total: f64,
}

impl OccupationHistogram {
    /// Occupation over `[burn_in, horizon]`.
    pub fn from_trajectory(traj: &Trajectory, burn_in: f64, binning: Binning) -> Result<Self, SimError> {
        let horizon = traj.horizon();
        if !(burn_in >= 0.0 && burn_in < horizon) {
            return Err(SimError::InvalidBurnIn { burn_in, horizon });
        }
        Self::window(traj, burn_in, horizon, binning)
    }

    /// Occupation over `[t0, t1]`.
    pub fn window(traj: &Trajectory, t0: f64, t1: f64, binning: Binning) -> Result<Self, SimError> {
        if !(t0 >= 0.0 && t1 > t0 && t1 <= traj.horizon()) {
            return Err(SimError::InvalidInterval { t0, t1 });
        }
        if let Some(&r) = traj.regimes.iter().find(|&&r| r as u32 >= binning.regimes) {
            return Err(SimError::Model(crate::sairs_model::ModelError::InvalidRegime {
                regime: r,
                count: binning.regimes as usize,
            }));
        }
        let mut counts = BTreeMap::new();
        let mut total = 0.0;
        let first = traj.times.partition_point(|&t| t <= t0).saturating_sub(1);
        for k in first..traj.len() - 1 {
            let (a, b) = (traj.times[k], traj.times[k + 1]);
            if a >= t1 {
                break;
            }
            let w = b.min(t1) - a.max(t0);
            if w <= 0.0 {
                continue;
            }
            let (x, y) = (traj.states[k], traj.states[k + 1]);
            let eta = traj.eta[k] + 0.5 * (b - a);
            let cell = binning.cell(
                0.5 * (x.s + y.s),
                0.5 * (x.a + y.a),
                0.5 * (x.i + y.i),
                eta,
                traj.regimes[k],
            );
            *counts.entry(cell).or_insert(0.0) += w;
            total += w;
        }
        Ok(Self {
            binning,
            window: (t0, t1),
            counts,
            total,
        })
    }

    pub fn binning(&self) -> &Binning {
        &self.binning
    }

    pub fn window_bounds(&self) -> (f64, f64) {
        self.window
    }

    /// Accumulated time.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Occupied cells with their weights, in index order.
    pub fn cells(&self) -> impl Iterator<Item = (&CellIndex, &f64)> {
        self.counts.iter()
    }

    pub fn weight(&self, cell: &CellIndex) -> f64 {
        self.counts.get(cell).copied().unwrap_or(0.0)
    }

    /// Fraction of time spent in each regime.
    pub fn regime_marginal(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.binning.regimes as usize];
        for (c, w) in &self.counts {
            out[c.regime as usize] += w;
        }
        out.iter_mut().for_each(|v| *v /= self.total);
        out
    }

    /// Fraction of time with `eta` beyond `eta_max`.
    pub fn overflow_fraction(&self) -> f64 {
        let over: f64 = self
            .counts
            .iter()
            .filter(|(c, _)| c.eta == self.binning.eta_bins)
            .map(|(_, w)| w)
            .sum();
        over / self.total
    }

    /// Occupied `(S, A, I)` cells.
    pub fn state_cells(&self) -> alloc::collections::BTreeSet<(u32, u32, u32)> {
        self.counts.keys().map(|c| (c.s, c.a, c.i)).collect()
    }
}

/// Occupation histogram of `traj` over `[burn_in, horizon]`.
pub fn occupation(traj: &Trajectory, burn_in: f64, binning: Binning) -> Result<OccupationHistogram, SimError> {
    OccupationHistogram::from_trajectory(traj, burn_in, binning)
}

/// Total variation distance between two normalized histograms,
/// `0.5 * sum |p - q|`.
pub fn stationarity_tv(h1: &OccupationHistogram, h2: &OccupationHistogram) -> Result<f64, SimError> {
    if h1.binning != h2.binning {
        return Err(SimError::BinningMismatch);
    }
    if !(h1.total > 0.0 && h2.total > 0.0) {
        return Err(SimError::InvalidSetting("empty histogram"));
    }
    let mut l1 = 0.0;
    for (c, w) in &h1.counts {
        l1 += (w / h1.total - h2.weight(c) / h2.total).abs();
    }
    for (c, w) in &h2.counts {
        if !h1.counts.contains_key(c) {
            l1 += w / h2.total;
        }
    }
    Ok((0.5 * l1).min(1.0))
}
