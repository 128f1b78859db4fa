//! Subcommand implementations. Each returns the text it would print or
//! write, so the binary only handles arguments, output and exit codes.

use std::fmt;

use sairs_core::simulator::{ensemble_parallel, occupation, simulate, SimError};
use sairs_core::thresholds::ThresholdError;
use sairs_core::ThresholdReport;

use crate::config::{ConfigError, ScenarioConfig};
use crate::fixtures;
use crate::output::{histogram_json, trajectory_csv};

#[derive(Debug)]
pub enum CliError {
    /// Bad scenario file or command line.
    Validation(String),
    /// A published value was not reproduced.
    Fixture(String),
    /// Integration, analysis or I/O failure.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Fixture(_) => 2,
            Self::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) | Self::Fixture(m) | Self::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<ThresholdError> for CliError {
    fn from(e: ThresholdError) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Short human-readable summary of a valid scenario.
pub fn cmd_validate(c: &ScenarioConfig) -> String {
    let w = c.switching.ergodic_weights();
    let occ: Vec<String> = w.occupation_fractions().iter().map(|f| format!("{f:.6}")).collect();
    format!(
        "ok: {} regimes, {} rates, mean sojourns {:?}, long-run occupation [{}]\n",
        c.switching.state_count(),
        if c.params.is_equal_rate() { "equal" } else { "unequal" },
        w.m,
        occ.join(", ")
    )
}

pub fn threshold_report(c: &ScenarioConfig) -> Result<ThresholdReport, CliError> {
    Ok(ThresholdReport::compute(&c.params, &c.switching.ergodic_weights())?)
}

pub fn cmd_thresholds(c: &ScenarioConfig) -> Result<String, CliError> {
    Ok(pretty(&threshold_report(c)?))
}

pub fn cmd_simulate(c: &ScenarioConfig) -> Result<String, CliError> {
    let r = &c.run;
    let traj = simulate(
        &c.params,
        &c.switching,
        c.initial,
        c.initial_regime,
        r.horizon,
        &r.integrator,
        r.seed,
    )?;
    Ok(trajectory_csv(&traj))
}

pub fn cmd_ensemble(c: &ScenarioConfig) -> Result<String, CliError> {
    let r = &c.run;
    let summary = ensemble_parallel(
        &c.params,
        &c.switching,
        c.initial,
        c.initial_regime,
        r.horizon,
        &r.integrator,
        &c.ensemble_options(),
    )?;
    let report = threshold_report(c)?;
    let above = report.bounds.map(|b| {
        serde_json::json!({
            "ai_bound": b.ai_bound,
            "s_bound": b.s_bound,
            "members_mean_ai_at_least_bound": summary.count(|m| m.means.ai >= b.ai_bound),
            "members_mean_s_at_least_bound": summary.count(|m| m.means.s >= b.s_bound),
        })
    });
    Ok(pretty(&serde_json::json!({
        "classification": report.classification,
        "bounds_check": above,
        "summary": summary,
    })))
}

pub fn cmd_occupation(c: &ScenarioConfig) -> Result<String, CliError> {
    let r = &c.run;
    let traj = simulate(
        &c.params,
        &c.switching,
        c.initial,
        c.initial_regime,
        r.horizon,
        &r.integrator,
        r.seed,
    )?;
    let h = occupation(&traj, r.burn_in, c.binning())?;
    let expected = c.switching.ergodic_weights().occupation_fractions();
    Ok(pretty(&histogram_json(&h, &expected)))
}

/// Table for one case or `all`; a failed comparison is a [`CliError::Fixture`]
/// carrying the table.
pub fn cmd_reproduce(case: &str) -> Result<String, CliError> {
    let cases: Vec<&str> = if case == "all" {
        fixtures::CASES.to_vec()
    } else {
        vec![case]
    };
    let mut reports = Vec::new();
    for c in cases {
        match fixtures::reproduce(c) {
            Some(r) => reports.push(r),
            None => {
                return Err(CliError::Validation(format!(
                    "unknown case `{c}` (expected one of {} or all)",
                    fixtures::CASES.join(", ")
                )))
            }
        }
    }
    let table = fixtures::render_table(&reports);
    if reports.iter().all(|r| r.pass()) {
        Ok(table)
    } else {
        Err(CliError::Fixture(table))
    }
}
