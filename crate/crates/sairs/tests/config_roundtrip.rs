//! Writing a scenario and reading it back is the identity.

use proptest::prelude::*;
use sairs::config::{OccupationSettings, RunSettings, ScenarioConfig};
use sairs::fixtures::{self, CASES};
use sairs::{parse_config, to_toml_string};
use sairs_core::simulator::IntegratorConfig;
use sairs_core::{EpidemicParams, EpidemicState4, HoldingDistribution, SemiMarkovSpec};

fn holding() -> impl Strategy<Value = HoldingDistribution> {
    prop_oneof![
        (0.01f64..10.0).prop_map(|rate| HoldingDistribution::exponential(rate).unwrap()),
        (0.1f64..30.0, 0.01f64..10.0).prop_map(|(k, r)| HoldingDistribution::gamma(k, r).unwrap()),
        (0.1f64..10.0, 0.1f64..30.0).prop_map(|(k, s)| HoldingDistribution::weibull(k, s).unwrap()),
    ]
}

/// Row-stochastic matrix with a zero diagonal, built from positive weights.
fn transition(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.1f64..1.0, n - 1), n).prop_map(move |rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, w)| {
                let total: f64 = w.iter().sum();
                let mut row: Vec<f64> = w.iter().map(|v| v / total).collect();
                row.insert(i, 0.0);
                row
            })
            .collect()
    })
}

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    (2usize..5).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..2.0, n),
            prop::collection::vec(0.0f64..2.0, n),
            prop::collection::vec(0.01f64..1.0, 6),
            transition(n),
            prop::collection::vec(holding(), n),
            prop::collection::vec(0.01f64..1.0, 4),
            0..n,
            (
                1.0f64..1e5,
                0u64..(i64::MAX as u64),
                1usize..1000,
                2u32..64,
                prop::option::of(1.0f64..500.0),
            ),
        )
            .prop_map(
                |(beta_a, beta_i, rates, p, hold, x, r0, (horizon, seed, trajectories, bins, eta_max))| {
                    let total: f64 = x.iter().sum();
                    let x: Vec<f64> = x.iter().map(|v| v / total).collect();
                    ScenarioConfig {
                        params: EpidemicParams {
                            beta_a,
                            beta_i,
                            delta_a: rates[0],
                            delta_i: rates[1],
                            alpha: rates[2],
                            gamma: rates[3],
                            nu: rates[4],
                            mu: rates[5] * 1e-3,
                        },
                        switching: SemiMarkovSpec::new(p, hold).unwrap(),
                        initial: EpidemicState4::from_array([x[0], x[1], x[2], 1.0 - x[0] - x[1] - x[2]]),
                        initial_regime: r0,
                        run: RunSettings {
                            horizon,
                            seed,
                            trajectories,
                            burn_in: horizon / 4.0,
                            extinction_threshold: 1e-6,
                            extinction_window: horizon / 10.0,
                            integrator: IntegratorConfig::default(),
                            occupation: OccupationSettings {
                                state_bins: bins,
                                eta_bins: bins,
                                eta_max,
                            },
                            output: None,
                        },
                    }
                },
            )
    })
}

proptest! {
    #[test]
    fn write_then_parse_is_identity(c in scenario()) {
        let text = to_toml_string(&c);
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, c);
    }
}

#[test]
fn embedded_scenarios_round_trip() {
    for case in CASES {
        let c = fixtures::scenario(case).unwrap();
        assert_eq!(parse_config(&to_toml_string(&c)).unwrap(), c, "case {case}");
    }
}
