//! The semi-Markov switching environment.
//!
//! Regimes are indexed from `0` to `M - 1`. The process stays in regime `i`
//! for a holding time drawn from `F_i`, then jumps to `j` with probability
//! `P[i][j]`; `P` has a zero diagonal, so every jump changes the regime.
//! [`ErgodicWeights`] carries the embedded-chain stationary law `pi` and mean
//! sojourn times `m`; long-run time averages weight regime `r` by
//! `pi_r * m_r`.

use alloc::vec::Vec;
use core::fmt;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::Distribution;

use crate::special;

/// Probabilities below this are treated as absent edges when checking
/// irreducibility.
pub const EDGE_EPS: f64 = 1e-15;
/// Row-sum tolerance for the transition matrix.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SemiMarkovError {
    #[error("invalid holding distribution: {0}")]
    InvalidDistribution(&'static str),
    #[error("invalid semi-Markov spec: {0}")]
    InvalidSpec(ValidationReport),
    #[error("no unique stationary distribution")]
    NoUniqueStationary,
    #[error("time {0} is negative")]
    NegativeTime(f64),
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("regime {regime} out of range for {count} states")]
    InvalidRegime { regime: usize, count: usize },
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("invalid regime path: {0}")]
    InvalidPath(&'static str),
    #[error("invalid ergodic weights: {0}")]
    InvalidWeights(&'static str),
}

/// Conditional holding-time distribution of one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "distribution", rename_all = "lowercase"))]
pub enum HoldingDistribution {
    Exponential {
        rate: f64,
    },
    /// Shape `k`, rate `theta`; density `theta^k t^(k-1) e^(-theta t) / Gamma(k)`.
    Gamma {
        shape: f64,
        rate: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl HoldingDistribution {
    pub fn exponential(rate: f64) -> Result<Self, SemiMarkovError> {
        let d = Self::Exponential { rate };
        d.check().map(|()| d)
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self, SemiMarkovError> {
        let d = Self::Gamma { shape, rate };
        d.check().map(|()| d)
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self, SemiMarkovError> {
        let d = Self::Weibull { shape, scale };
        d.check().map(|()| d)
    }

    /// All parameters must be strictly positive and finite.
    pub fn check(&self) -> Result<(), SemiMarkovError> {
        let ok = match *self {
            Self::Exponential { rate } => positive(rate),
            Self::Gamma { shape, rate } => positive(shape) && positive(rate),
            Self::Weibull { shape, scale } => positive(shape) && positive(scale),
        };
        if ok {
            Ok(())
        } else {
            Err(SemiMarkovError::InvalidDistribution(
                "parameters must be strictly positive and finite",
            ))
        }
    }

    /// Mean sojourn time `m = ∫ (1 - F(u)) du`.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Gamma { shape, rate } => shape / rate,
            Self::Weibull { shape, scale } => scale * special::gamma(1.0 + 1.0 / shape),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => rate * libm::exp(-rate * t),
            Self::Gamma { shape, rate } => {
                if t == 0.0 {
                    return if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        rate
                    } else {
                        0.0
                    };
                }
                libm::exp(shape * libm::log(rate) + (shape - 1.0) * libm::log(t) - rate * t - special::ln_gamma(shape))
            }
            Self::Weibull { shape, scale } => {
                let z = t / scale;
                (shape / scale) * libm::pow(z, shape - 1.0) * libm::exp(-libm::pow(z, shape))
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => -libm::expm1(-rate * t),
            Self::Gamma { shape, rate } => special::gamma_p(shape, rate * t),
            Self::Weibull { shape, scale } => -libm::expm1(-libm::pow(t / scale, shape)),
        }
    }

    /// `f(t) / (1 - F(t))`. At `t = 0` a density that diverges (gamma or
    /// Weibull with shape below one) reports `f64::INFINITY`.
    pub fn hazard(&self, t: f64) -> Result<f64, SemiMarkovError> {
        if t < 0.0 || t.is_nan() {
            return Err(SemiMarkovError::NegativeTime(t));
        }
        let h = match *self {
            Self::Exponential { rate } => rate,
            Self::Gamma { shape, rate } => {
                if t == 0.0 {
                    self.pdf(0.0)
                } else {
                    let ln_f =
                        shape * libm::log(rate) + (shape - 1.0) * libm::log(t) - rate * t - special::ln_gamma(shape);
                    libm::exp(ln_f - special::ln_gamma_q(shape, rate * t))
                }
            }
            Self::Weibull { shape, scale } => {
                if t == 0.0 {
                    if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        1.0 / scale
                    } else {
                        0.0
                    }
                } else {
                    (shape / scale) * libm::pow(t / scale, shape - 1.0)
                }
            }
        };
        Ok(h)
    }

    /// Draws one strictly positive holding time.
    ///
    /// Exponential and Weibull use the inverse CDF on a uniform draw in
    /// `(0, 1)`; gamma uses `rand_distr`'s Marsaglia–Tsang sampler.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = match *self {
                Self::Exponential { rate } => {
                    let u: f64 = rng.sample(Open01);
                    -libm::log(u) / rate
                }
                Self::Gamma { shape, rate } => rand_distr::Gamma::new(shape, 1.0 / rate)
                    .expect("validated gamma parameters")
                    .sample(rng),
                Self::Weibull { shape, scale } => {
                    let u: f64 = rng.sample(Open01);
                    scale * libm::pow(-libm::log(u), 1.0 / shape)
                }
            };
            if x > 0.0 && x.is_finite() {
                return x;
            }
        }
    }
}

/// Mean sojourn time of a holding distribution.
pub fn mean_sojourn(d: &HoldingDistribution) -> f64 {
    d.mean()
}

/// A violated constraint on a semi-Markov spec.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewStates { count: usize },
    NotSquare { row: usize, len: usize },
    HoldingCount { expected: usize, found: usize },
    InvalidProbability { row: usize, col: usize, value: f64 },
    RowSum { row: usize, sum: f64 },
    NonzeroDiagonal { state: usize, value: f64 },
    NotIrreducible,
    InvalidHolding { state: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewStates { count } => write!(f, "need at least 2 states, got {count}"),
            Self::NotSquare { row, len } => write!(f, "row {row} has length {len}"),
            Self::HoldingCount { expected, found } => {
                write!(f, "expected {expected} holding distributions, found {found}")
            }
            Self::InvalidProbability { row, col, value } => {
                write!(f, "entry ({row},{col}) = {value} is not a probability")
            }
            Self::RowSum { row, sum } => write!(f, "row {row} sums to {sum}, not 1"),
            Self::NonzeroDiagonal { state, value } => write!(
                f,
                "diagonal entry ({state},{state}) = {value}: self-transitions must have probability 0"
            ),
            Self::NotIrreducible => write!(f, "transition matrix is not irreducible"),
            Self::InvalidHolding { state } => write!(
                f,
                "holding distribution of state {state} needs strictly positive finite parameters"
            ),
        }
    }
}

/// Outcome of [`validate_spec`]; empty means valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// True when the directed graph of entries above [`EDGE_EPS`] is strongly
/// connected.
pub fn is_irreducible(p: &[Vec<f64>]) -> bool {
    let n = p.len();
    if n == 0 || p.iter().any(|row| row.len() != n) {
        return false;
    }
    let reach = |forward: bool| {
        let mut seen = alloc::vec![false; n];
        let mut stack = alloc::vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let w = if forward { p[i][j] } else { p[j][i] };
                if w > EDGE_EPS && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Checks every constraint on a transition matrix and its holding
/// distributions, reporting all violations rather than the first.
pub fn validate_spec(transition: &[Vec<f64>], holding: &[HoldingDistribution]) -> ValidationReport {
    let mut violations = Vec::new();
    let n = transition.len();
    if n < 2 {
        violations.push(Violation::TooFewStates { count: n });
    }
    if holding.len() != n {
        violations.push(Violation::HoldingCount {
            expected: n,
            found: holding.len(),
        });
    }
    let mut square = true;
    for (i, row) in transition.iter().enumerate() {
        if row.len() != n {
            violations.push(Violation::NotSquare { row: i, len: row.len() });
            square = false;
            continue;
        }
        for (j, &v) in row.iter().enumerate() {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                violations.push(Violation::InvalidProbability {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            violations.push(Violation::RowSum { row: i, sum });
        }
        if row[i] != 0.0 {
            violations.push(Violation::NonzeroDiagonal {
                state: i,
                value: row[i],
            });
        }
    }
    if square && n >= 1 && !is_irreducible(transition) {
        violations.push(Violation::NotIrreducible);
    }
    for (state, d) in holding.iter().enumerate() {
        if d.check().is_err() {
            violations.push(Violation::InvalidHolding { state });
        }
    }
    ValidationReport { violations }
}

/// A validated semi-Markov environment.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiMarkovSpec {
    transition: Vec<Vec<f64>>,
    holding: Vec<HoldingDistribution>,
}

impl SemiMarkovSpec {
    pub fn new(transition: Vec<Vec<f64>>, holding: Vec<HoldingDistribution>) -> Result<Self, SemiMarkovError> {
        let report = validate_spec(&transition, &holding);
        if !report.is_ok() {
            return Err(SemiMarkovError::InvalidSpec(report));
        }
        Ok(Self { transition, holding })
    }

    /// Two regimes that alternate deterministically.
    pub fn two_state_swap(first: HoldingDistribution, second: HoldingDistribution) -> Result<Self, SemiMarkovError> {
        Self::new(
            alloc::vec![alloc::vec![0.0, 1.0], alloc::vec![1.0, 0.0]],
            alloc::vec![first, second],
        )
    }

    pub fn state_count(&self) -> usize {
        self.transition.len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn holding(&self) -> &[HoldingDistribution] {
        &self.holding
    }

    pub fn validate(&self) -> ValidationReport {
        validate_spec(&self.transition, &self.holding)
    }

    /// Stationary law of the embedded chain and mean sojourn times.
    pub fn ergodic_weights(&self) -> ErgodicWeights {
        let pi = embedded_stationary(&self.transition).expect("validated spec is irreducible");
        let m = self.holding.iter().map(HoldingDistribution::mean).collect();
        ErgodicWeights { pi, m }
    }

    /// Draws the regime entered after leaving `current`.
    pub fn next_state<R: Rng + ?Sized>(&self, current: usize, rng: &mut R) -> usize {
        let row = &self.transition[current];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = current;
        for (j, &p) in row.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = j;
            if u < acc {
                return j;
            }
        }
        // Rounding left u above the accumulated mass.
        last
    }

    /// Samples the regime path on `[0, horizon]` starting in `r0` with
    /// `eta(0) = 0`: holding time from the current regime, then the next
    /// regime from its row of `P`, until the horizon is passed.
    pub fn sample_path<R: Rng + ?Sized>(
        &self,
        r0: usize,
        horizon: f64,
        rng: &mut R,
    ) -> Result<RegimePath, SemiMarkovError> {
        if r0 >= self.state_count() {
            return Err(SemiMarkovError::InvalidRegime {
                regime: r0,
                count: self.state_count(),
            });
        }
        if !positive(horizon) {
            return Err(SemiMarkovError::InvalidHorizon(horizon));
        }
        let mut jump_times = alloc::vec![0.0];
        let mut states = alloc::vec![r0];
        let mut t = 0.0;
        let mut current = r0;
        loop {
            let next_t = t + self.holding[current].sample(rng);
            if next_t >= horizon {
                break;
            }
            // Holding times far below the clock resolution cannot advance t.
            if next_t <= t {
                continue;
            }
            current = self.next_state(current, rng);
            t = next_t;
            jump_times.push(t);
            states.push(current);
        }
        Ok(RegimePath {
            jump_times,
            states,
            horizon,
        })
    }
}

/// Stationary distribution of an irreducible row-stochastic matrix, by a
/// direct linear solve of `pi P = pi`, `sum(pi) = 1` followed by one step of
/// iterative refinement.
pub fn embedded_stationary(p: &[Vec<f64>]) -> Result<Vec<f64>, SemiMarkovError> {
    let n = p.len();
    if !is_irreducible(p) {
        return Err(SemiMarkovError::NoUniqueStationary);
    }
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = alloc::vec![alloc::vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate().take(n - 1) {
        for (j, v) in row.iter_mut().enumerate() {
            *v = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1].iter_mut().for_each(|v| *v = 1.0);
    let mut b = alloc::vec![0.0; n];
    b[n - 1] = 1.0;
    let mut pi = crate::linalg::solve(a.clone(), b.clone()).ok_or(SemiMarkovError::NoUniqueStationary)?;
    let residual: Vec<f64> = (0..n)
        .map(|i| b[i] - a[i].iter().zip(&pi).map(|(x, y)| x * y).sum::<f64>())
        .collect();
    if let Some(correction) = crate::linalg::solve(a, residual) {
        for (x, c) in pi.iter_mut().zip(correction) {
            *x += c;
        }
    }
    if pi.iter().any(|&x| !(x > 0.0)) {
        return Err(SemiMarkovError::NoUniqueStationary);
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    Ok(pi)
}

/// Stationary embedded-chain probabilities and mean sojourn times.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErgodicWeights {
    pub pi: Vec<f64>,
    pub m: Vec<f64>,
}

impl ErgodicWeights {
    pub fn new(pi: Vec<f64>, m: Vec<f64>) -> Result<Self, SemiMarkovError> {
        if pi.len() != m.len() || pi.is_empty() {
            return Err(SemiMarkovError::InvalidWeights(
                "pi and m must have equal nonzero length",
            ));
        }
        if pi.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(SemiMarkovError::InvalidWeights("pi must be positive"));
        }
        if (pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(SemiMarkovError::InvalidWeights("pi must sum to 1"));
        }
        if m.iter().any(|&x| !positive(x)) {
            return Err(SemiMarkovError::InvalidWeights("mean sojourn times must be positive"));
        }
        Ok(Self { pi, m })
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// `pi_r * m_r` for regime `r`.
    pub fn weight(&self, r: usize) -> f64 {
        self.pi[r] * self.m[r]
    }

    /// `sum_r pi_r m_r`, the mean cycle length per embedded step.
    pub fn total(&self) -> f64 {
        (0..self.len()).map(|r| self.weight(r)).sum()
    }

    /// Long-run fraction of time spent in each regime.
    pub fn occupation_fractions(&self) -> Vec<f64> {
        let total = self.total();
        (0..self.len()).map(|r| self.weight(r) / total).collect()
    }

    /// `sum_r f(r) pi_r m_r / sum_r pi_r m_r`.
    ///
    /// # Panics
    /// If `f` does not have one value per regime.
    pub fn ergodic_limit(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.len(), "one value per regime");
        let num: f64 = f.iter().enumerate().map(|(r, v)| v * self.weight(r)).sum();
        num / self.total()
    }
}

/// One realization of the switching signal on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimePath {
    jump_times: Vec<f64>,
    states: Vec<usize>,
    horizon: f64,
}

impl RegimePath {
    /// Builds a path from explicit jump times (starting at 0) and the regime
    /// entered at each.
    pub fn new(jump_times: Vec<f64>, states: Vec<usize>, horizon: f64) -> Result<Self, SemiMarkovError> {
        if jump_times.is_empty() || jump_times.len() != states.len() {
            return Err(SemiMarkovError::InvalidPath("need one state per jump time"));
        }
        if jump_times[0] != 0.0 {
            return Err(SemiMarkovError::InvalidPath("first jump time must be 0"));
        }
        if !jump_times.windows(2).all(|w| w[0] < w[1]) {
            return Err(SemiMarkovError::InvalidPath("jump times must strictly increase"));
        }
        if !states.windows(2).all(|w| w[0] != w[1]) {
            return Err(SemiMarkovError::InvalidPath("consecutive states must differ"));
        }
        if !positive(horizon) || *jump_times.last().unwrap() > horizon {
            return Err(SemiMarkovError::InvalidPath("last jump must not exceed the horizon"));
        }
        Ok(Self {
            jump_times,
            states,
            horizon,
        })
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of regime changes (excludes the start at `t = 0`).
    pub fn jump_count(&self) -> usize {
        self.jump_times.len() - 1
    }

    /// `(start, end, regime)` for each constant-regime segment.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        (0..self.states.len()).map(move |n| {
            let end = self.jump_times.get(n + 1).copied().unwrap_or(self.horizon);
            (self.jump_times[n], end, self.states[n])
        })
    }

    fn segment_index(&self, t: f64) -> Result<usize, SemiMarkovError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(SemiMarkovError::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.jump_times.partition_point(|&tau| tau <= t) - 1)
    }

    /// Regime `X_n` for `t` in `[tau_n, tau_{n+1})`.
    pub fn regime_at(&self, t: f64) -> Result<usize, SemiMarkovError> {
        self.segment_index(t).map(|n| self.states[n])
    }

    /// Backward recurrence time `t - tau_n` for `t` in `[tau_n, tau_{n+1})`.
    pub fn eta_at(&self, t: f64) -> Result<f64, SemiMarkovError> {
        self.segment_index(t).map(|n| t - self.jump_times[n])
    }

    /// Exact time average of the piecewise-constant signal `f(r(t))` over
    /// `[0, horizon]`.
    pub fn empirical_time_average(&self, f: &[f64]) -> f64 {
        let integral: f64 = self.segments().map(|(a, b, r)| f[r] * (b - a)).sum();
        integral / self.horizon
    }

    /// Fraction of `[0, horizon]` spent in each of `count` regimes.
    pub fn occupation_fractions(&self, count: usize) -> Vec<f64> {
        let mut out = alloc::vec![0.0; count];
        for (a, b, r) in self.segments() {
            out[r] += b - a;
        }
        out.iter_mut().for_each(|x| *x /= self.horizon);
        out
    }
}
