//! SAIRS epidemic dynamics with transmission rates driven by a semi-Markov
//! environment.
//!
//! The crate is `no_std` (with `alloc`) unless the default `std` feature is
//! enabled. It covers:
//!
//! - [`semi_markov`]: the switching environment (holding distributions,
//!   path sampling, embedded stationary law, ergodic averages);
//! - [`sairs_model`]: per-regime vector fields, equilibria, spectral
//!   quantities and Lie brackets;
//! - [`thresholds`]: composite reproduction number, extinction and
//!   persistence margins, persistence lower bounds and classification;
//! - [`simulator`]: event-exact hybrid integration, ensembles, time means,
//!   occupation histograms and reachable-set sampling.
//!
//! All floating-point transcendental functions go through `libm`, so results
//! are bit-identical with and without `std`.

#![cfg_attr(not(feature = "std"), no_std)]
// Negated comparisons deliberately treat NaN as invalid input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod linalg;
pub mod rng;
pub mod sairs_model;
pub mod semi_markov;
pub mod simulator;
pub mod special;
pub mod thresholds;

pub use sairs_model::{EpidemicParams, EpidemicState3, EpidemicState4, ModelError, Subsystem};
pub use thresholds::{Classification, ThresholdError, ThresholdReport};

pub use rng::{path_rng, PathRng};

pub use semi_markov::{
    ErgodicWeights, HoldingDistribution, RegimePath, SemiMarkovError, SemiMarkovSpec, ValidationReport, Violation,
};
