//! Threshold quantities for the switched system.
//!
//! Every margin is a sum `sum_r pi_r m_r c(r)` of per-regime terms, reported
//! as is (unnormalized) together with its value divided by
//! `sum_r pi_r m_r`, which is the long-run time average of `c(r(t))`.
//!
//! | margin | per-regime term | certifies |
//! |---|---|---|
//! | equal | `beta(r) S0 - (delta + mu)` | extinction if < 0, persistence if > 0 (equal rates) |
//! | ext_maxmin | `max(beta_A, beta_I)(r) S0 - (min(delta_A, delta_I) + mu)` | extinction if < 0 |
//! | ext_spectral | `lambda_1(B(r) + B(r)^T)` | extinction if < 0 |
//! | pers | `min(beta_A, beta_I)(r) S0 - (max(delta_A, delta_I) + mu)` | persistence if > 0 |

use alloc::vec::Vec;

use crate::sairs_model::{EpidemicParams, ModelError, RegimeSpectrum};
use crate::semi_markov::ErgodicWeights;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThresholdError {
    #[error("composite R0 defined only for equal-rate model")]
    UnequalRates,
    #[error("no persistence certificate (margin {margin})")]
    NoPersistenceCertificate { margin: f64 },
    #[error("internal inconsistency: both extinction and persistence are certified")]
    InconsistentCertificates,
    #[error("ergodic weights cover {weights} regimes but the model has {regimes}")]
    RegimeCountMismatch { weights: usize, regimes: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Weighted sum and its time-average normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Margin {
    pub value: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Classification {
    ExtinctAS,
    PersistentInMean,
    Indeterminate,
}

/// Sufficient conditions that hold for a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Certificate {
    /// Equal rates, composite R0 below one.
    CompositeExtinction,
    /// Equal rates, composite R0 above one.
    CompositePersistence,
    MaxMinExtinction,
    SpectralExtinction,
    Persistence,
}

/// Lower bounds on the liminf time means of `S`, `A + I`, `I` and `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PersistenceBounds {
    pub s_bound: f64,
    pub ai_bound: f64,
    pub i_bound: f64,
    pub a_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdReport {
    pub equal_rates: bool,
    pub s0: f64,
    /// `sum_r pi_r m_r`.
    pub weight_total: f64,
    pub occupation: Vec<f64>,
    pub regimes: Vec<RegimeSpectrum>,
    pub composite_r0: Option<f64>,
    pub margin_equal: Option<Margin>,
    pub margin_ext_maxmin: Margin,
    pub margin_ext_spectral: Margin,
    pub margin_pers: Margin,
    pub bounds: Option<PersistenceBounds>,
    pub certificates: Vec<Certificate>,
    pub classification: Classification,
}

fn check_lengths(params: &EpidemicParams, weights: &ErgodicWeights) -> Result<(), ThresholdError> {
    params.validate()?;
    if weights.len() != params.regime_count() {
        return Err(ThresholdError::RegimeCountMismatch {
            weights: weights.len(),
            regimes: params.regime_count(),
        });
    }
    Ok(())
}

fn weighted(weights: &ErgodicWeights, term: impl Fn(usize) -> f64) -> Margin {
    let value: f64 = (0..weights.len()).map(|r| weights.weight(r) * term(r)).sum();
    Margin {
        value,
        normalized: value / weights.total(),
    }
}

fn max_beta(params: &EpidemicParams, r: usize) -> f64 {
    params.beta_a[r].max(params.beta_i[r])
}

fn min_beta(params: &EpidemicParams, r: usize) -> f64 {
    params.beta_a[r].min(params.beta_i[r])
}

/// `max_r max(beta_A(r), beta_I(r))`.
fn global_max_beta(params: &EpidemicParams) -> f64 {
    (0..params.regime_count())
        .map(|r| max_beta(params, r))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `max_r min(beta_A(r), beta_I(r))`.
fn max_of_min_beta(params: &EpidemicParams) -> f64 {
    (0..params.regime_count())
        .map(|r| min_beta(params, r))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `sum_r pi_r m_r beta(r) S0 / sum_r pi_r m_r (delta + mu)`.
pub fn composite_r0(params: &EpidemicParams, weights: &ErgodicWeights) -> Result<f64, ThresholdError> {
    check_lengths(params, weights)?;
    if !params.is_equal_rate() {
        return Err(ThresholdError::UnequalRates);
    }
    let s0 = params.s0();
    let num = weighted(weights, |r| params.beta_a[r] * s0).value;
    let den = weighted(weights, |_| params.delta_a + params.mu).value;
    Ok(num / den)
}

pub fn margin_equal(params: &EpidemicParams, weights: &ErgodicWeights) -> Result<Margin, ThresholdError> {
    check_lengths(params, weights)?;
    if !params.is_equal_rate() {
        return Err(ThresholdError::UnequalRates);
    }
    let s0 = params.s0();
    Ok(weighted(weights, |r| {
        params.beta_a[r] * s0 - (params.delta_a + params.mu)
    }))
}

pub fn margin_ext_maxmin(params: &EpidemicParams, weights: &ErgodicWeights) -> Result<Margin, ThresholdError> {
    check_lengths(params, weights)?;
    let s0 = params.s0();
    let delta = params.delta_a.min(params.delta_i);
    Ok(weighted(weights, |r| max_beta(params, r) * s0 - (delta + params.mu)))
}

pub fn margin_ext_spectral(params: &EpidemicParams, weights: &ErgodicWeights) -> Result<Margin, ThresholdError> {
    check_lengths(params, weights)?;
    let subs = params.subsystems();
    Ok(weighted(weights, |r| subs[r].lambda1_sym()))
}

pub fn margin_pers(params: &EpidemicParams, weights: &ErgodicWeights) -> Result<Margin, ThresholdError> {
    check_lengths(params, weights)?;
    let s0 = params.s0();
    let delta = params.delta_a.max(params.delta_i);
    Ok(weighted(weights, |r| min_beta(params, r) * s0 - (delta + params.mu)))
}

/// Lower bounds on long-run time means. Equal rates use the composite
/// margin and `max_r beta(r)`; otherwise the persistence margin, with
/// `max_r min(beta_A, beta_I)` in the `A + I` denominator and `delta_I` in
/// the split between `I` and `A`.
pub fn persistence_bounds(
    params: &EpidemicParams,
    weights: &ErgodicWeights,
) -> Result<PersistenceBounds, ThresholdError> {
    check_lengths(params, weights)?;
    let (mu, nu, gamma, alpha) = (params.mu, params.nu, params.gamma, params.alpha);
    let beta_max = global_max_beta(params);
    let (margin, beta_den, delta) = if params.is_equal_rate() {
        (margin_equal(params, weights)?, beta_max, params.delta_a)
    } else {
        (margin_pers(params, weights)?, max_of_min_beta(params), params.delta_i)
    };
    if !(margin.value > 0.0) {
        return Err(ThresholdError::NoPersistenceCertificate { margin: margin.value });
    }
    let ai_bound = (mu + nu + gamma) / (beta_den * (beta_max + gamma)) * margin.normalized;
    let split = alpha + delta + mu;
    Ok(PersistenceBounds {
        s_bound: mu / (mu + nu + beta_max),
        ai_bound,
        i_bound: alpha / split * ai_bound,
        a_bound: (delta + mu) / split * ai_bound,
    })
}

/// Extinction / persistence classification; see [`ThresholdReport::compute`].
pub fn classify(params: &EpidemicParams, weights: &ErgodicWeights) -> Result<Classification, ThresholdError> {
    ThresholdReport::compute(params, weights).map(|r| r.classification)
}

impl ThresholdReport {
    /// All margins, bounds and the classification.
    ///
    /// With equal rates the composite R0 decides (exactly one is
    /// Indeterminate). Otherwise either extinction margin below zero
    /// certifies extinction, a positive persistence margin certifies
    /// persistence, and anything else is Indeterminate. Zero margins never
    /// certify anything.
    pub fn compute(params: &EpidemicParams, weights: &ErgodicWeights) -> Result<Self, ThresholdError> {
        check_lengths(params, weights)?;
        let equal_rates = params.is_equal_rate();
        let maxmin = margin_ext_maxmin(params, weights)?;
        let spectral = margin_ext_spectral(params, weights)?;
        let pers = margin_pers(params, weights)?;
        let (r0, m_equal) = if equal_rates {
            (
                Some(composite_r0(params, weights)?),
                Some(margin_equal(params, weights)?),
            )
        } else {
            (None, None)
        };

        let mut certificates = Vec::new();
        if let Some(r0) = r0 {
            if r0 < 1.0 {
                certificates.push(Certificate::CompositeExtinction);
            } else if r0 > 1.0 {
                certificates.push(Certificate::CompositePersistence);
            }
        }
        if maxmin.value < 0.0 {
            certificates.push(Certificate::MaxMinExtinction);
        }
        if spectral.value < 0.0 {
            certificates.push(Certificate::SpectralExtinction);
        }
        if pers.value > 0.0 {
            certificates.push(Certificate::Persistence);
        }
        let extinct = certificates.iter().any(|c| {
            matches!(
                c,
                Certificate::CompositeExtinction | Certificate::MaxMinExtinction | Certificate::SpectralExtinction
            )
        });
        let persistent = certificates
            .iter()
            .any(|c| matches!(c, Certificate::CompositePersistence | Certificate::Persistence));
        if extinct && persistent {
            return Err(ThresholdError::InconsistentCertificates);
        }
        let classification = match r0 {
            Some(r0) if r0 < 1.0 => Classification::ExtinctAS,
            Some(r0) if r0 > 1.0 => Classification::PersistentInMean,
            Some(_) => Classification::Indeterminate,
            None if extinct => Classification::ExtinctAS,
            None if persistent => Classification::PersistentInMean,
            None => Classification::Indeterminate,
        };
        let bounds = persistence_bounds(params, weights).ok();
        Ok(Self {
            equal_rates,
            s0: params.s0(),
            weight_total: weights.total(),
            occupation: weights.occupation_fractions(),
            regimes: params.subsystems().iter().map(|s| s.spectrum()).collect(),
            composite_r0: r0,
            margin_equal: m_equal,
            margin_ext_maxmin: maxmin,
            margin_ext_spectral: spectral,
            margin_pers: pers,
            bounds,
            certificates,
            classification,
        })
    }
}
