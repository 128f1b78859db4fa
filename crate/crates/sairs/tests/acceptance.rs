//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. `cargo test --test acceptance -- 5 9` runs a subset.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::Matrix2;
use rand::Rng;
use sairs::fixtures::{self, CASES};
use sairs::ScenarioConfig;
use sairs_core::semi_markov::ErgodicWeights;
use sairs_core::simulator::{
    ensemble_parallel, flow3, occupation, simulate_indexed, stationarity_tv, Binning, EnsembleOptions,
    IntegratorConfig, OccupationHistogram,
};
use sairs_core::thresholds::{composite_r0, margin_equal};
use sairs_core::{path_rng, EpidemicParams, EpidemicState3, EpidemicState4, PathRng, Subsystem, ThresholdReport};

const MU: f64 = 1.0 / (60.0 * 365.0);
const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn case(name: &str) -> ScenarioConfig {
    fixtures::scenario(name).expect("known case")
}

fn report(c: &ScenarioConfig) -> ThresholdReport {
    ThresholdReport::compute(&c.params, &c.switching.ergodic_weights()).expect("fixture thresholds")
}

fn elapsed(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn uniform(rng: &mut PathRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Uniform point on the open 3-simplex {S, A, I, R > 0, sum = 1}.
fn interior_start(rng: &mut PathRng) -> EpidemicState4 {
    loop {
        let mut u = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        u.sort_by(f64::total_cmp);
        let (s, a, i) = (u[0], u[1] - u[0], u[2] - u[1]);
        let r = 1.0 - u[2];
        if s > 1e-6 && a > 1e-6 && i > 1e-6 && r > 1e-6 {
            return EpidemicState4::new(s, a, i, r).expect("simplex point");
        }
    }
}

fn equal_rate_draw(rng: &mut PathRng, regimes: usize) -> EpidemicParams {
    let beta: Vec<f64> = (0..regimes).map(|_| uniform(rng, 0.0, 1.5)).collect();
    let delta = uniform(rng, 0.001, 1.0);
    EpidemicParams {
        beta_a: beta.clone(),
        beta_i: beta,
        delta_a: delta,
        delta_i: delta,
        alpha: uniform(rng, 0.001, 1.0),
        gamma: uniform(rng, 0.001, 1.0),
        nu: uniform(rng, 0.001, 1.0),
        mu: MU,
    }
}

fn general_subsystem(rng: &mut PathRng) -> Subsystem {
    Subsystem {
        beta_a: uniform(rng, 0.0, 1.5),
        beta_i: uniform(rng, 0.0, 1.5),
        delta_a: uniform(rng, 0.001, 1.0),
        delta_i: uniform(rng, 0.001, 1.0),
        alpha: uniform(rng, 0.001, 1.0),
        gamma: uniform(rng, 0.001, 1.0),
        nu: uniform(rng, 0.001, 1.0),
        mu: MU,
    }
}

fn c1_fixture_margins() -> Outcome {
    let start = Instant::now();
    let reports: Vec<_> = CASES
        .iter()
        .map(|c| fixtures::reproduce(c).expect("known case"))
        .collect();
    let time = start.elapsed();
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass()).map(|r| r.case).collect();
    let values: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.rows
                .iter()
                .map(move |row| format!("{} {}={:.4}", r.case, row.quantity, row.computed.unwrap_or(f64::NAN)))
        })
        .collect();
    outcome(
        failed.is_empty() && time < Duration::from_secs(1),
        format!("{}; failed cases {failed:?}; {}", values.join(", "), elapsed(time)),
    )
}

fn c2_threshold_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = path_rng(SEED, 2);
    let mut exceptions = 0;
    let (mut above, mut below) = (0, 0);
    for _ in 0..1000 {
        let n = rng.random_range(1..=4);
        let params = equal_rate_draw(&mut rng, n);
        let pi: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.05, 1.0)).collect();
        let total: f64 = pi.iter().sum();
        let m: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.1, 30.0)).collect();
        let w = ErgodicWeights::new(pi.iter().map(|p| p / total).collect(), m).expect("weights");
        let r0 = composite_r0(&params, &w).expect("equal rates");
        let margin = margin_equal(&params, &w).expect("equal rates").value;
        if r0 > 1.0 {
            above += 1;
        } else {
            below += 1;
        }
        let agree = (r0 > 1.0) == (margin > 0.0) && (r0 < 1.0) == (margin < 0.0);
        if !agree {
            exceptions += 1;
        }
    }
    let time = start.elapsed();
    outcome(
        exceptions == 0 && time < Duration::from_secs(5),
        format!(
            "1000 draws ({above} with R0 > 1, {below} with R0 <= 1), {exceptions} exceptions, {}",
            elapsed(time)
        ),
    )
}

fn c3_lambda1() -> Outcome {
    let mut rng = path_rng(SEED, 3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let sub = general_subsystem(&mut rng);
        let b = sub.f_minus_v();
        let m = Matrix2::new(b[0][0], b[0][1], b[1][0], b[1][1]);
        let sym = m + m.transpose();
        let numeric = sym.symmetric_eigen().eigenvalues.max();
        let closed = sub.lambda1_sym();
        worst = worst.max((numeric - closed).abs() / numeric.abs().max(1.0));
    }
    outcome(worst <= 1e-12, format!("1000 draws, worst deviation {worst:.2e}"))
}

fn c4_gamma_invariance() -> Outcome {
    let config = IntegratorConfig::default();
    let mut rng = path_rng(SEED, 4);
    let (mut samples, mut worst_neg, mut worst_mass) = (0usize, 0.0f64, 0.0f64);
    for k in 0..200u64 {
        let c = case(CASES[k as usize % CASES.len()]);
        let x0 = if k % 4 == 0 {
            c.initial
        } else {
            interior_start(&mut rng)
        };
        let traj =
            simulate_indexed(&c.params, &c.switching, x0, c.initial_regime, 1e3, &config, SEED, k).expect("trajectory");
        for x in &traj.states {
            samples += 1;
            let low = [x.s, x.a, x.i, x.r].into_iter().fold(f64::INFINITY, f64::min);
            worst_neg = worst_neg.max(-low);
            worst_mass = worst_mass.max((x.total() - 1.0).abs());
        }
    }
    outcome(
        worst_neg <= 1e-9 && worst_mass <= 1e-9,
        format!(
            "200 trajectories, {samples} samples, most negative {:.2e}, worst |sum-1| {worst_mass:.2e}",
            -worst_neg
        ),
    )
}

fn c5_ergodic_occupation() -> Outcome {
    let c = case("1a");
    let expected = c.switching.ergodic_weights().occupation_fractions();
    let mut within = 0;
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let mut rng = path_rng(SEED, k);
        let path = c.switching.sample_path(c.initial_regime, 1e5, &mut rng).expect("path");
        let f = path.occupation_fractions(expected.len());
        let dev = f.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
        if dev <= 0.02 {
            within += 1;
        }
    }
    outcome(
        within >= 95,
        format!("{within}/100 seeds within 0.02 of {expected:.4?}, worst deviation {worst:.4}"),
    )
}

fn c6_extinction() -> Outcome {
    let config = IntegratorConfig::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["3c", "1b"] {
        let c = case(name);
        let options = EnsembleOptions {
            master_seed: SEED,
            trajectories: 100,
            burn_in: 0.0,
            threshold: 1e-5,
            window: 500.0,
        };
        let summary = ensemble_parallel(
            &c.params,
            &c.switching,
            c.initial,
            c.initial_regime,
            5000.0,
            &config,
            &options,
        )
        .expect("ensemble");
        let extinct = summary.count(|m| m.extinction.extinct);
        pass &= extinct >= 95;
        parts.push(format!("{name}: {extinct}/100 extinct"));
    }
    outcome(pass, parts.join(", "))
}

fn c7_persistence_bounds() -> Outcome {
    let config = IntegratorConfig::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["3a", "1a"] {
        let c = case(name);
        let bounds = report(&c).bounds.expect("persistence bounds");
        let options = EnsembleOptions {
            master_seed: SEED,
            trajectories: 100,
            burn_in: 1e3,
            threshold: 1e-5,
            window: 500.0,
        };
        let summary = ensemble_parallel(
            &c.params,
            &c.switching,
            c.initial,
            c.initial_regime,
            1e4,
            &config,
            &options,
        )
        .expect("ensemble");
        let ai_ok = summary.count(|m| m.means.ai >= bounds.ai_bound);
        let s_ok = summary.count(|m| m.means.s >= bounds.s_bound);
        pass &= ai_ok >= 95 && s_ok >= 95;
        parts.push(format!(
            "{name}: mean(A+I) >= {:.3e} in {ai_ok}/100 (min {:.3e}), mean(S) >= {:.3e} in {s_ok}/100 (min {:.3e})",
            bounds.ai_bound, summary.mean_ai.min, bounds.s_bound, summary.mean_s.min
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Integrates until the state stays within `tol` of `target` over a full
/// check interval, or `horizon` is reached. Returns the time of arrival.
fn settle(sub: &Subsystem, x0: EpidemicState3, target: EpidemicState3, tol: f64, horizon: f64) -> Option<f64> {
    const CHUNK: f64 = 50.0;
    const STEP: f64 = 0.01;
    let dist = |x: &EpidemicState3| {
        (x.s - target.s)
            .abs()
            .max((x.a - target.a).abs())
            .max((x.i - target.i).abs())
    };
    let mut x = x0;
    let mut t = 0.0;
    let mut inside_since = None;
    while t < horizon {
        x = flow3(sub, x, CHUNK, STEP).expect("flow");
        t += CHUNK;
        if dist(&x) <= tol {
            match inside_since {
                Some(t0) if t - t0 >= 10.0 * CHUNK => return Some(t0),
                None => inside_since = Some(t),
                _ => {}
            }
        } else {
            inside_since = None;
        }
    }
    inside_since
}

fn c8_subsystem_stability() -> Outcome {
    let mut rng = path_rng(SEED, 8);
    let mut parts = Vec::new();
    let mut pass = true;
    let mut seen: Vec<Subsystem> = Vec::new();
    for name in CASES {
        let c = case(name);
        for (r, sub) in c.params.subsystems().into_iter().enumerate() {
            if seen.contains(&sub) {
                continue;
            }
            seen.push(sub);
            let r0 = sub.r0();
            let equal = sub.beta_a == sub.beta_i && sub.delta_a == sub.delta_i;
            let target = if r0 < 1.0 {
                sub.dfe()
            } else {
                sub.endemic_equilibrium().expect("endemic equilibrium")
            };
            let asserted = r0 < 1.0 || equal;
            let mut converged = 0;
            let mut latest = 0.0f64;
            for _ in 0..50 {
                let x0 = interior_start(&mut rng).to_state3();
                if let Some(t) = settle(&sub, x0, target, 1e-6, 1e5) {
                    converged += 1;
                    latest = latest.max(t);
                }
            }
            if asserted {
                pass &= converged == 50;
            }
            let kind = if r0 < 1.0 { "DFE" } else { "x*" };
            let note = if asserted {
                ""
            } else {
                " (unequal rates, informational)"
            };
            parts.push(format!(
                "{name} regime {} R0={r0:.3}: {converged}/50 to {kind} by t={latest:.0}{note}",
                r + 1
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn c9_stationarity() -> Outcome {
    let c = case("3a");
    let config = IntegratorConfig::default();
    let traj = simulate_indexed(
        &c.params,
        &c.switching,
        c.initial,
        c.initial_regime,
        1e5,
        &config,
        SEED,
        0,
    )
    .expect("trajectory");
    let binning = Binning::default_for(&c.switching);
    let early = OccupationHistogram::window(&traj, 2e4, 6e4, binning).expect("window");
    let late = OccupationHistogram::window(&traj, 6e4, 1e5, binning).expect("window");
    let tv = stationarity_tv(&early, &late).expect("tv");
    let whole = occupation(&traj, 2e4, binning).expect("occupation");
    outcome(
        tv <= 0.1,
        format!(
            "TV = {tv:.4} over {} occupied cells, regime marginal {:.4?}",
            whole.cells().count(),
            whole.regime_marginal()
        ),
    )
}

fn c10_newton_bisection() -> Outcome {
    let mut rng = path_rng(SEED, 10);
    let mut worst = 0.0f64;
    let mut failures = 0;
    let mut draws = 0;
    while draws < 100 {
        let p = equal_rate_draw(&mut rng, 1);
        let sub = p.subsystem(0).expect("one regime");
        if sub.r0() <= 1.0 {
            continue;
        }
        draws += 1;
        match (sub.endemic_newton(), sub.endemic_bisection()) {
            (Ok(n), Ok(b)) => {
                let d = (n.state.s - b.s)
                    .abs()
                    .max((n.state.a - b.a).abs())
                    .max((n.state.i - b.i).abs());
                worst = worst.max(d);
            }
            _ => failures += 1,
        }
    }
    outcome(
        failures == 0 && worst <= 1e-10,
        format!("100 draws with R0 > 1, {failures} solver failures, worst deviation {worst:.2e}"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "published fixture margins", c1_fixture_margins),
    (
        2,
        "composite R0 and equal-rate margin agree in sign",
        c2_threshold_equivalence,
    ),
    (3, "closed-form lambda1 of B + B^T", c3_lambda1),
    (4, "trajectories stay in the invariant region", c4_gamma_invariance),
    (
        5,
        "regime occupation matches the ergodic weights",
        c5_ergodic_occupation,
    ),
    (6, "extinction ensembles", c6_extinction),
    (7, "persistence lower bounds on time means", c7_persistence_bounds),
    (8, "single-regime convergence", c8_subsystem_stability),
    (9, "occupation histogram stationarity", c9_stationarity),
    (
        10,
        "Newton against bisection for the endemic equilibrium",
        c10_newton_bisection,
    ),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} [{id}] {name} ({}): {}",
            elapsed(start.elapsed()),
            result.detail
        );
        if !result.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
