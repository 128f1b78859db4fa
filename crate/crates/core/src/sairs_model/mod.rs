//! SAIRS vector fields, equilibria and per-regime spectral quantities.
//!
//! Only the transmission rates `beta_A(r)`, `beta_I(r)` depend on the regime;
//! recovery, symptom onset, immunity loss, vaccination and demography are
//! shared. [`EpidemicParams::subsystem`] freezes a regime into a
//! [`Subsystem`], the deterministic vector field followed between jumps.

mod equilibrium;
pub mod lie;

use alloc::vec::Vec;

use crate::linalg::{self, Mat3, Vec3};

pub use equilibrium::NewtonReport;
pub use lie::{lie_bracket, lie_span_rank, lie_span_vectors, PolyField, VectorField};

/// Absolute tolerance for membership in the closed invariant region.
pub const GAMMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("regime {regime} out of range for {count} regimes")]
    InvalidRegime { regime: usize, count: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("degenerate disease-free equilibrium: mu + nu + gamma = 0")]
    DegenerateDfe,
    #[error("no endemic equilibrium: R0 = {r0} <= 1")]
    NoEndemicEquilibrium { r0: f64 },
    #[error("endemic equilibrium solver did not converge (residual {residual:e})")]
    EquilibriumNotConverged { residual: f64 },
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
}

/// SAIRS rates. `beta_a[r]`, `beta_i[r]` are the transmission rates of
/// asymptomatic and symptomatic infectives in regime `r`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpidemicParams {
    pub beta_a: Vec<f64>,
    pub beta_i: Vec<f64>,
    pub delta_a: f64,
    pub delta_i: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub nu: f64,
    pub mu: f64,
}

/// Susceptible, asymptomatic and symptomatic fractions; `R = 1 - S - A - I`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpidemicState3 {
    pub s: f64,
    pub a: f64,
    pub i: f64,
}

/// Full compartment fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpidemicState4 {
    pub s: f64,
    pub a: f64,
    pub i: f64,
    pub r: f64,
}

impl EpidemicState3 {
    pub const fn new(s: f64, a: f64, i: f64) -> Self {
        Self { s, a, i }
    }

    pub fn to_array(self) -> Vec3 {
        [self.s, self.a, self.i]
    }

    pub fn from_array(x: Vec3) -> Self {
        Self {
            s: x[0],
            a: x[1],
            i: x[2],
        }
    }

    /// Membership in `{S, A, I >= 0, S + A + I <= 1}` up to `tol`.
    pub fn in_gamma(&self, tol: f64) -> bool {
        self.s >= -tol && self.a >= -tol && self.i >= -tol && self.s + self.a + self.i <= 1.0 + tol
    }

    /// Strict interior of the invariant region.
    pub fn is_interior(&self) -> bool {
        self.s > 0.0 && self.a > 0.0 && self.i > 0.0 && self.s + self.a + self.i < 1.0
    }

    pub fn with_recovered(self) -> EpidemicState4 {
        EpidemicState4 {
            s: self.s,
            a: self.a,
            i: self.i,
            r: 1.0 - self.s - self.a - self.i,
        }
    }
}

impl EpidemicState4 {
    /// Validated state: all compartments non-negative and summing to one
    /// within [`GAMMA_TOL`].
    pub fn new(s: f64, a: f64, i: f64, r: f64) -> Result<Self, ModelError> {
        let x = Self { s, a, i, r };
        if !x.to_array().iter().all(|v| v.is_finite()) {
            return Err(ModelError::InvalidState("compartments must be finite"));
        }
        if x.to_array().iter().any(|&v| v < -GAMMA_TOL) {
            return Err(ModelError::InvalidState("compartments must be non-negative"));
        }
        if (x.total() - 1.0).abs() > GAMMA_TOL {
            return Err(ModelError::InvalidState("compartments must sum to 1"));
        }
        Ok(x)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.a, self.i, self.r]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self {
            s: x[0],
            a: x[1],
            i: x[2],
            r: x[3],
        }
    }

    pub fn total(&self) -> f64 {
        self.s + self.a + self.i + self.r
    }

    pub fn infectious(&self) -> f64 {
        self.a + self.i
    }

    pub fn to_state3(self) -> EpidemicState3 {
        EpidemicState3 {
            s: self.s,
            a: self.a,
            i: self.i,
        }
    }
}

/// Spectral summary of one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeSpectrum {
    pub r0: f64,
    pub fv_matrix: [[f64; 2]; 2],
    /// Eigenvalues of `fv_matrix`, largest first.
    pub fv_eigenvalues: [f64; 2],
    pub lambda1_sym: f64,
}

/// The deterministic SAIRS system of one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subsystem {
    pub beta_a: f64,
    pub beta_i: f64,
    pub delta_a: f64,
    pub delta_i: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub nu: f64,
    pub mu: f64,
}

impl Subsystem {
    /// Susceptible fraction at the disease-free equilibrium.
    pub fn s0(&self) -> f64 {
        (self.mu + self.gamma) / (self.mu + self.nu + self.gamma)
    }

    pub fn dfe(&self) -> EpidemicState3 {
        EpidemicState3::new(self.s0(), 0.0, 0.0)
    }

    fn force(&self, a: f64, i: f64) -> f64 {
        self.beta_a * a + self.beta_i * i
    }

    /// Right-hand side of the three-dimensional reduction.
    pub fn drift3(&self, x: &EpidemicState3) -> Vec3 {
        let infection = self.force(x.a, x.i) * x.s;
        [
            self.mu - infection - (self.mu + self.nu + self.gamma) * x.s + self.gamma * (1.0 - x.a - x.i),
            infection - (self.alpha + self.delta_a + self.mu) * x.a,
            self.alpha * x.a - (self.delta_i + self.mu) * x.i,
        ]
    }

    /// Right-hand side of the four-compartment system. The recovered
    /// component is returned as minus the sum of the others, so the four
    /// rates sum to exactly zero in floating point.
    pub fn drift4(&self, x: &EpidemicState4) -> [f64; 4] {
        let infection = self.force(x.a, x.i) * x.s;
        let ds = self.mu - infection - (self.mu + self.nu) * x.s + self.gamma * x.r;
        let da = infection - (self.alpha + self.delta_a + self.mu) * x.a;
        let di = self.alpha * x.a - (self.delta_i + self.mu) * x.i;
        [ds, da, di, -(ds + da + di)]
    }

    /// Analytic Jacobian of [`Subsystem::drift3`] with respect to `(S, A, I)`.
    pub fn jacobian3(&self, x: &EpidemicState3) -> Mat3 {
        let force = self.force(x.a, x.i);
        [
            [
                -force - (self.mu + self.nu + self.gamma),
                -self.beta_a * x.s - self.gamma,
                -self.beta_i * x.s - self.gamma,
            ],
            [
                force,
                self.beta_a * x.s - (self.alpha + self.delta_a + self.mu),
                self.beta_i * x.s,
            ],
            [0.0, self.alpha, -(self.delta_i + self.mu)],
        ]
    }

    /// Basic reproduction number of this regime's deterministic system.
    pub fn r0(&self) -> f64 {
        (self.beta_a + self.alpha * self.beta_i / (self.delta_i + self.mu)) * (self.gamma + self.mu)
            / ((self.alpha + self.delta_a + self.mu) * (self.nu + self.gamma + self.mu))
    }

    /// `F - V` at the disease-free equilibrium (linearized infection block).
    pub fn f_minus_v(&self) -> [[f64; 2]; 2] {
        let s0 = self.s0();
        [
            [
                self.beta_a * s0 - (self.alpha + self.delta_a + self.mu),
                self.beta_i * s0,
            ],
            [self.alpha, -(self.delta_i + self.mu)],
        ]
    }

    /// Largest eigenvalue of `B + B^T` with `B = F - V`, closed form.
    pub fn lambda1_sym(&self) -> f64 {
        let s0 = self.s0();
        let diag = self.beta_a * s0 - (self.alpha + self.delta_a) + self.delta_i;
        let off = self.beta_i * s0 + self.alpha;
        self.beta_a * s0 - (self.alpha + self.delta_a + self.mu) - (self.delta_i + self.mu)
            + libm::sqrt(diag * diag + off * off)
    }

    pub fn spectrum(&self) -> RegimeSpectrum {
        let b = self.f_minus_v();
        let tr = b[0][0] + b[1][1];
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        // Non-negative off-diagonal entries make the discriminant
        // ((b00 - b11)/2)^2 + b01 b10 non-negative.
        let gap = b[0][0] - b[1][1];
        let half_gap = libm::sqrt((0.25 * gap * gap + b[0][1] * b[1][0]).max(0.0));
        let hi = 0.5 * tr + half_gap;
        let lo = if hi != 0.0 { det / hi } else { 0.5 * tr - half_gap };
        RegimeSpectrum {
            r0: self.r0(),
            fv_matrix: b,
            fv_eigenvalues: [hi.max(lo), hi.min(lo)],
            lambda1_sym: self.lambda1_sym(),
        }
    }
}

impl EpidemicParams {
    pub fn regime_count(&self) -> usize {
        self.beta_a.len()
    }

    /// Checks rate signs and per-regime list lengths.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.beta_a.is_empty() || self.beta_a.len() != self.beta_i.len() {
            return Err(ModelError::InvalidParams(
                "beta lists must be non-empty and equally long",
            ));
        }
        let scalars = [self.delta_a, self.delta_i, self.alpha, self.gamma, self.nu, self.mu];
        if self
            .beta_a
            .iter()
            .chain(&self.beta_i)
            .chain(&scalars)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(ModelError::InvalidParams("rates must be finite and non-negative"));
        }
        if !(self.mu > 0.0) {
            return Err(ModelError::InvalidParams("mu must be positive"));
        }
        if !(self.alpha > 0.0) {
            return Err(ModelError::InvalidParams("alpha must be positive"));
        }
        if !(self.delta_a + self.delta_i > 0.0) {
            return Err(ModelError::InvalidParams("delta_a + delta_i must be positive"));
        }
        Ok(())
    }

    /// Checks the parameters against a switching process with `m` states.
    pub fn validate_for(&self, m: usize) -> Result<(), ModelError> {
        self.validate()?;
        if self.regime_count() != m {
            return Err(ModelError::InvalidParams("beta lists must have one entry per regime"));
        }
        Ok(())
    }

    pub fn subsystem(&self, r: usize) -> Result<Subsystem, ModelError> {
        if r >= self.regime_count() || r >= self.beta_i.len() {
            return Err(ModelError::InvalidRegime {
                regime: r,
                count: self.regime_count(),
            });
        }
        Ok(Subsystem {
            beta_a: self.beta_a[r],
            beta_i: self.beta_i[r],
            delta_a: self.delta_a,
            delta_i: self.delta_i,
            alpha: self.alpha,
            gamma: self.gamma,
            nu: self.nu,
            mu: self.mu,
        })
    }

    pub fn subsystems(&self) -> Vec<Subsystem> {
        (0..self.regime_count())
            .map(|r| self.subsystem(r).expect("index in range"))
            .collect()
    }

    /// True when `beta_A(r) = beta_I(r)` for every regime and
    /// `delta_A = delta_I`.
    pub fn is_equal_rate(&self) -> bool {
        self.delta_a == self.delta_i && self.beta_a.iter().zip(&self.beta_i).all(|(a, i)| a == i)
    }

    pub fn s0(&self) -> f64 {
        (self.mu + self.gamma) / (self.mu + self.nu + self.gamma)
    }

    /// Disease-free equilibrium `((mu + gamma) / (mu + nu + gamma), 0, 0)`,
    /// shared by every regime.
    pub fn dfe(&self) -> Result<EpidemicState3, ModelError> {
        let denom = self.mu + self.nu + self.gamma;
        if !(denom > 0.0) {
            return Err(ModelError::DegenerateDfe);
        }
        Ok(EpidemicState3::new((self.mu + self.gamma) / denom, 0.0, 0.0))
    }

    pub fn drift3(&self, r: usize, x: &EpidemicState3) -> Result<Vec3, ModelError> {
        Ok(self.subsystem(r)?.drift3(x))
    }

    pub fn drift4(&self, r: usize, x: &EpidemicState4) -> Result<[f64; 4], ModelError> {
        Ok(self.subsystem(r)?.drift4(x))
    }

    pub fn jacobian3(&self, r: usize, x: &EpidemicState3) -> Result<Mat3, ModelError> {
        Ok(self.subsystem(r)?.jacobian3(x))
    }

    pub fn r0_regime(&self, r: usize) -> Result<f64, ModelError> {
        Ok(self.subsystem(r)?.r0())
    }

    pub fn f_minus_v(&self, r: usize) -> Result<[[f64; 2]; 2], ModelError> {
        Ok(self.subsystem(r)?.f_minus_v())
    }

    pub fn lambda1_sym(&self, r: usize) -> Result<f64, ModelError> {
        Ok(self.subsystem(r)?.lambda1_sym())
    }

    pub fn spectrum(&self, r: usize) -> Result<RegimeSpectrum, ModelError> {
        Ok(self.subsystem(r)?.spectrum())
    }

    pub fn endemic_equilibrium(&self, r: usize) -> Result<EpidemicState3, ModelError> {
        self.subsystem(r)?.endemic_equilibrium()
    }
}

pub(crate) fn residual_norm(sub: &Subsystem, x: &EpidemicState3) -> f64 {
    linalg::norm_inf(&sub.drift3(x))
}
