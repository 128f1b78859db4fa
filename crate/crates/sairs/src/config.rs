//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! [model]
//! beta_a = [0.05, 0.9]          # one entry per regime
//! beta_i = [0.05, 0.9]
//! delta_a = 0.07
//! delta_i = 0.07
//! alpha = 0.5
//! gamma = 0.02
//! nu = 0.01
//! mu = 4.566210045662101e-5
//!
//! [switching]
//! transition = [[0.0, 1.0], [1.0, 0.0]]
//!
//! [switching.state.1]           # regimes are numbered from 1
//! distribution = "gamma"        # or "exponential" (rate), "weibull" (shape, scale)
//! shape = 4.0
//! rate = 0.8                    # or scale = 1.25
//!
//! [switching.state.2]
//! distribution = "gamma"
//! shape = 15.0
//! rate = 0.8
//!
//! [initial]
//! s = 0.9
//! a = 0.05
//! i = 0.05
//! r = 0.0
//! regime = 1
//!
//! [run]
//! horizon = 10000.0
//! seed = 42
//! ```
//!
//! Optional `[run]` keys: `trajectories` (100), `burn_in` (0),
//! `extinction_threshold` (1e-5), `extinction_window` (500), `output`, and
//! the tables `[run.integrator]` (`step` 0.01, `sample_every` 0.1,
//! `clamp_eps` 1e-12) and `[run.occupation]` (`state_bins` 32, `eta_bins` 16,
//! `eta_max` three times the largest mean sojourn). Unknown keys are errors.

use std::fmt;

use sairs_core::semi_markov::{validate_spec, Violation};
use sairs_core::simulator::{Binning, EnsembleOptions, IntegratorConfig};
use sairs_core::{EpidemicParams, EpidemicState4, HoldingDistribution, SemiMarkovSpec};
use toml::{Table, Value};

/// Tolerance on `S + A + I + R = 1` for initial states.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationSettings {
    pub state_bins: u32,
    pub eta_bins: u32,
    /// `None` means three times the largest mean sojourn.
    pub eta_max: Option<f64>,
}

impl Default for OccupationSettings {
    fn default() -> Self {
        Self {
            state_bins: 32,
            eta_bins: 16,
            eta_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub horizon: f64,
    pub seed: u64,
    pub trajectories: usize,
    pub burn_in: f64,
    pub extinction_threshold: f64,
    pub extinction_window: f64,
    pub integrator: IntegratorConfig,
    pub occupation: OccupationSettings,
    pub output: Option<String>,
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: EpidemicParams,
    pub switching: SemiMarkovSpec,
    pub initial: EpidemicState4,
    /// Zero-based.
    pub initial_regime: usize,
    pub run: RunSettings,
}

impl ScenarioConfig {
    pub fn ensemble_options(&self) -> EnsembleOptions {
        EnsembleOptions {
            master_seed: self.run.seed,
            trajectories: self.run.trajectories,
            burn_in: self.run.burn_in,
            threshold: self.run.extinction_threshold,
            window: self.run.extinction_window,
        }
    }

    pub fn binning(&self) -> Binning {
        let default = Binning::default_for(&self.switching);
        let o = &self.run.occupation;
        Binning::new(
            o.state_bins,
            o.state_bins,
            o.state_bins,
            o.eta_bins,
            o.eta_max.unwrap_or(default.eta_max),
            default.regimes,
        )
        .expect("occupation settings validated at parse time")
    }

    /// Re-checks run settings that command-line overrides may have changed.
    pub fn check_run(&self) -> Result<(), ConfigError> {
        let mut r = Reader::default();
        r.check_run(&self.run);
        r.finish(())
    }
}

/// One problem in a scenario file, located by its key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Syntax(String),
    Invalid(Vec<ConfigIssue>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax(msg) => write!(f, "syntax error: {msg}"),
            Self::Invalid(issues) => {
                write!(f, "invalid scenario:")?;
                for issue in issues {
                    write!(f, "\n  {}: {}", issue.path, issue.message)?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            Self::Syntax(_) => &[],
            Self::Invalid(v) => v,
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

#[derive(Default)]
struct Reader {
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn finish<T>(self, value: T) -> Result<T, ConfigError> {
        if self.issues.is_empty() {
            Ok(value)
        } else {
            Err(ConfigError::Invalid(self.issues))
        }
    }

    fn unknown(&mut self, t: &Table, allowed: &[&str], path: &str) {
        for key in t.keys() {
            if !allowed.contains(&key.as_str()) {
                self.issue(
                    join(path, key),
                    format!("unknown key (expected one of: {})", allowed.join(", ")),
                );
            }
        }
    }

    fn opt_table<'a>(&mut self, t: &'a Table, key: &str, path: &str) -> Option<&'a Table> {
        match t.get(key)? {
            Value::Table(inner) => Some(inner),
            other => {
                self.issue(join(path, key), format!("expected a table, found {}", type_name(other)));
                None
            }
        }
    }

    fn table<'a>(&mut self, t: &'a Table, key: &str, path: &str) -> Option<&'a Table> {
        if !t.contains_key(key) {
            self.issue(join(path, key), "missing table");
            return None;
        }
        self.opt_table(t, key, path)
    }

    fn as_float(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Float(x) if x.is_finite() => Some(*x),
            Value::Float(_) => {
                self.issue(path, "must be finite");
                None
            }
            Value::Integer(n) => Some(*n as f64),
            other => {
                self.issue(path, format!("expected a number, found {}", type_name(other)));
                None
            }
        }
    }

    fn opt_float(&mut self, t: &Table, key: &str, path: &str) -> Option<f64> {
        let v = t.get(key)?;
        self.as_float(v, &join(path, key))
    }

    fn float(&mut self, t: &Table, key: &str, path: &str) -> Option<f64> {
        if !t.contains_key(key) {
            self.issue(join(path, key), "missing value");
            return None;
        }
        self.opt_float(t, key, path)
    }

    fn opt_uint(&mut self, t: &Table, key: &str, path: &str) -> Option<u64> {
        match t.get(key)? {
            Value::Integer(n) if *n >= 0 => Some(*n as u64),
            Value::Integer(_) => {
                self.issue(join(path, key), "must be non-negative");
                None
            }
            other => {
                self.issue(
                    join(path, key),
                    format!("expected an integer, found {}", type_name(other)),
                );
                None
            }
        }
    }

    fn uint(&mut self, t: &Table, key: &str, path: &str) -> Option<u64> {
        if !t.contains_key(key) {
            self.issue(join(path, key), "missing value");
            return None;
        }
        self.opt_uint(t, key, path)
    }

    fn float_list(&mut self, t: &Table, key: &str, path: &str) -> Option<Vec<f64>> {
        let p = join(path, key);
        let Some(v) = t.get(key) else {
            self.issue(p, "missing value");
            return None;
        };
        let Value::Array(items) = v else {
            self.issue(p, format!("expected an array of numbers, found {}", type_name(v)));
            return None;
        };
        let parsed: Vec<Option<f64>> = items
            .iter()
            .enumerate()
            .map(|(k, x)| self.as_float(x, &format!("{p}[{}]", k + 1)))
            .collect();
        parsed.into_iter().collect()
    }

    fn matrix(&mut self, t: &Table, key: &str, path: &str) -> Option<Vec<Vec<f64>>> {
        let p = join(path, key);
        let Some(v) = t.get(key) else {
            self.issue(p, "missing value");
            return None;
        };
        let Value::Array(rows) = v else {
            self.issue(p, format!("expected an array of rows, found {}", type_name(v)));
            return None;
        };
        let mut out = Vec::with_capacity(rows.len());
        let mut ok = true;
        for (i, row) in rows.iter().enumerate() {
            let rp = format!("{p}[{}]", i + 1);
            let Value::Array(cells) = row else {
                self.issue(rp, format!("expected an array of numbers, found {}", type_name(row)));
                ok = false;
                continue;
            };
            let parsed: Vec<Option<f64>> = cells
                .iter()
                .enumerate()
                .map(|(j, x)| self.as_float(x, &format!("{rp}[{}]", j + 1)))
                .collect();
            match parsed.into_iter().collect::<Option<Vec<_>>>() {
                Some(r) => out.push(r),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn model(&mut self, t: &Table) -> Option<EpidemicParams> {
        const P: &str = "model";
        self.unknown(
            t,
            &["beta_a", "beta_i", "delta_a", "delta_i", "alpha", "gamma", "nu", "mu"],
            P,
        );
        let beta_a = self.float_list(t, "beta_a", P);
        let beta_i = self.float_list(t, "beta_i", P);
        let scalars = ["delta_a", "delta_i", "alpha", "gamma", "nu", "mu"].map(|k| (k, self.float(t, k, P)));
        for (k, v) in &scalars {
            if let Some(v) = v {
                if *v < 0.0 {
                    self.issue(join(P, k), format!("rate must be non-negative, got {v}"));
                }
            }
        }
        for (key, list) in [("beta_a", &beta_a), ("beta_i", &beta_i)] {
            for (k, v) in list.iter().flatten().enumerate() {
                if *v < 0.0 {
                    self.issue(
                        format!("{P}.{key}[{}]", k + 1),
                        format!("rate must be non-negative, got {v}"),
                    );
                }
            }
        }
        let [(_, delta_a), (_, delta_i), (_, alpha), (_, gamma), (_, nu), (_, mu)] = scalars;
        if matches!(mu, Some(m) if m <= 0.0) {
            self.issue(join(P, "mu"), "must be positive");
        }
        if matches!(alpha, Some(a) if a <= 0.0) {
            self.issue(join(P, "alpha"), "must be positive");
        }
        if let (Some(a), Some(b)) = (delta_a, delta_i) {
            if a + b <= 0.0 {
                self.issue(join(P, "delta_a"), "delta_a + delta_i must be positive");
            }
        }
        Some(EpidemicParams {
            beta_a: beta_a?,
            beta_i: beta_i?,
            delta_a: delta_a?,
            delta_i: delta_i?,
            alpha: alpha?,
            gamma: gamma?,
            nu: nu?,
            mu: mu?,
        })
    }

    fn holding(&mut self, t: &Table, path: &str) -> Option<HoldingDistribution> {
        let name = match t.get("distribution") {
            Some(Value::String(s)) => s.as_str(),
            Some(other) => {
                self.issue(
                    join(path, "distribution"),
                    format!("expected a string, found {}", type_name(other)),
                );
                return None;
            }
            None => {
                self.issue(join(path, "distribution"), "missing value");
                return None;
            }
        };
        let positive = |r: &mut Self, key: &str| -> Option<f64> {
            let v = r.float(t, key, path)?;
            if v > 0.0 {
                Some(v)
            } else {
                r.issue(join(path, key), format!("must be positive, got {v}"));
                None
            }
        };
        match name {
            "exponential" => {
                self.unknown(t, &["distribution", "rate"], path);
                HoldingDistribution::exponential(positive(self, "rate")?).ok()
            }
            "gamma" => {
                self.unknown(t, &["distribution", "shape", "rate", "scale"], path);
                let shape = positive(self, "shape");
                let rate = match (t.contains_key("rate"), t.contains_key("scale")) {
                    (true, false) => positive(self, "rate"),
                    (false, true) => positive(self, "scale").map(|s| 1.0 / s),
                    _ => {
                        self.issue(path, "gamma needs exactly one of `rate` or `scale`");
                        None
                    }
                };
                HoldingDistribution::gamma(shape?, rate?).ok()
            }
            "weibull" => {
                self.unknown(t, &["distribution", "shape", "scale"], path);
                let shape = positive(self, "shape");
                let scale = positive(self, "scale");
                HoldingDistribution::weibull(shape?, scale?).ok()
            }
            other => {
                self.issue(
                    join(path, "distribution"),
                    format!("unknown distribution `{other}` (expected exponential, gamma or weibull)"),
                );
                None
            }
        }
    }

    fn switching(&mut self, t: &Table) -> Option<SemiMarkovSpec> {
        const P: &str = "switching";
        self.unknown(t, &["transition", "state"], P);
        let transition = self.matrix(t, "transition", P);
        let states = self.table(t, "state", P);
        let m = transition.as_ref().map(Vec::len);
        let mut holding = Vec::new();
        let mut ok = true;
        if let (Some(states), Some(m)) = (states, m) {
            let sp = join(P, "state");
            let expected: Vec<String> = (1..=m).map(|k| k.to_string()).collect();
            for key in states.keys() {
                if !expected.contains(key) {
                    self.issue(
                        join(&sp, key),
                        format!("no such regime (the transition matrix has {m} rows)"),
                    );
                    ok = false;
                }
            }
            for key in &expected {
                let path = join(&sp, key);
                match self.opt_table(states, key, &sp) {
                    Some(inner) => match self.holding(inner, &path) {
                        Some(d) => holding.push(d),
                        None => ok = false,
                    },
                    None => {
                        if !states.contains_key(key) {
                            self.issue(path, "missing holding distribution for this regime");
                        }
                        ok = false;
                    }
                }
            }
        }
        let transition = transition?;
        let report = validate_spec(&transition, &holding);
        let tp = join(P, "transition");
        for v in &report.violations {
            match *v {
                Violation::TooFewStates { count } => self.issue(&tp, format!("need at least 2 regimes, got {count}")),
                Violation::NotSquare { row, len } => self.issue(
                    format!("{tp}[{}]", row + 1),
                    format!("row has {len} entries, expected {}", transition.len()),
                ),
                Violation::InvalidProbability { row, col, value } => self.issue(
                    format!("{tp}[{}][{}]", row + 1, col + 1),
                    format!("{value} is not a probability"),
                ),
                Violation::RowSum { row, sum } => {
                    self.issue(format!("{tp}[{}]", row + 1), format!("row sums to {sum}, expected 1"))
                }
                Violation::NonzeroDiagonal { state, value } => self.issue(
                    format!("{tp}[{}][{}]", state + 1, state + 1),
                    format!(
                        "p_{{{0},{0}}} = {value}: the embedded chain must leave every regime at a jump, \
                         so diagonal entries must be 0",
                        state + 1
                    ),
                ),
                Violation::NotIrreducible => self.issue(
                    &tp,
                    "transition matrix must be irreducible (every regime reachable from every other)",
                ),
                // Reported by the per-state parser already.
                Violation::HoldingCount { .. } | Violation::InvalidHolding { .. } => ok = false,
            }
        }
        if !report.is_ok() || !ok {
            return None;
        }
        SemiMarkovSpec::new(transition, holding).ok()
    }

    fn initial(&mut self, t: &Table, regimes: Option<usize>) -> Option<(EpidemicState4, usize)> {
        const P: &str = "initial";
        self.unknown(t, &["s", "a", "i", "r", "regime"], P);
        let x = ["s", "a", "i", "r"].map(|k| self.float(t, k, P));
        let regime = self.uint(t, "regime", P);
        let mut ok = true;
        for (k, v) in ["s", "a", "i", "r"].iter().zip(&x) {
            if let Some(v) = v {
                if *v < 0.0 {
                    self.issue(
                        join(P, k),
                        format!("compartment fraction must be non-negative, got {v}"),
                    );
                    ok = false;
                }
            }
        }
        let [s, a, i, r] = x;
        let (s, a, i, r) = (s?, a?, i?, r?);
        let total = s + a + i + r;
        if (total - 1.0).abs() > SIMPLEX_TOL {
            self.issue(
                P,
                format!("S + A + I + R = {total}, but compartment fractions must lie on the simplex (sum to 1)"),
            );
            ok = false;
        }
        let regime = regime?;
        if let Some(m) = regimes {
            if regime < 1 || regime as usize > m {
                self.issue(join(P, "regime"), format!("regime {regime} out of range 1..={m}"));
                ok = false;
            }
        }
        if !ok {
            return None;
        }
        Some((EpidemicState4::new(s, a, i, r).ok()?, regime as usize - 1))
    }

    fn run(&mut self, t: &Table) -> Option<RunSettings> {
        const P: &str = "run";
        self.unknown(
            t,
            &[
                "horizon",
                "seed",
                "trajectories",
                "burn_in",
                "extinction_threshold",
                "extinction_window",
                "output",
                "integrator",
                "occupation",
            ],
            P,
        );
        let horizon = self.float(t, "horizon", P);
        let seed = self.uint(t, "seed", P);
        let trajectories = self.opt_uint(t, "trajectories", P).unwrap_or(100) as usize;
        let burn_in = self.opt_float(t, "burn_in", P).unwrap_or(0.0);
        let extinction_threshold = self.opt_float(t, "extinction_threshold", P).unwrap_or(1e-5);
        let extinction_window = self.opt_float(t, "extinction_window", P).unwrap_or(500.0);
        let output = match t.get("output") {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.issue(
                    join(P, "output"),
                    format!("expected a string, found {}", type_name(other)),
                );
                None
            }
        };

        let mut integrator = IntegratorConfig::default();
        if let Some(it) = self.opt_table(t, "integrator", P) {
            let ip = join(P, "integrator");
            self.unknown(it, &["step", "sample_every", "clamp_eps"], &ip);
            integrator.step = self.opt_float(it, "step", &ip).unwrap_or(integrator.step);
            integrator.sample_every = self
                .opt_float(it, "sample_every", &ip)
                .unwrap_or(integrator.sample_every);
            integrator.clamp_eps = self.opt_float(it, "clamp_eps", &ip).unwrap_or(integrator.clamp_eps);
        }
        let mut occupation = OccupationSettings::default();
        if let Some(ot) = self.opt_table(t, "occupation", P) {
            let op = join(P, "occupation");
            self.unknown(ot, &["state_bins", "eta_bins", "eta_max"], &op);
            let bins = |r: &mut Self, key: &str, default: u32| match r.opt_uint(ot, key, &op) {
                Some(v) => u32::try_from(v).unwrap_or_else(|_| {
                    r.issue(join(&op, key), "too many bins");
                    default
                }),
                None => default,
            };
            occupation.state_bins = bins(self, "state_bins", occupation.state_bins);
            occupation.eta_bins = bins(self, "eta_bins", occupation.eta_bins);
            occupation.eta_max = self.opt_float(ot, "eta_max", &op);
        }
        let settings = RunSettings {
            horizon: horizon?,
            seed: seed?,
            trajectories,
            burn_in,
            extinction_threshold,
            extinction_window,
            integrator,
            occupation,
            output,
        };
        self.check_run(&settings);
        Some(settings)
    }

    fn check_run(&mut self, s: &RunSettings) {
        const P: &str = "run";
        if !(s.horizon > 0.0) {
            self.issue(join(P, "horizon"), format!("must be positive, got {}", s.horizon));
        } else if !(s.burn_in >= 0.0 && s.burn_in < s.horizon) {
            self.issue(
                join(P, "burn_in"),
                format!("must lie in [0, horizon), got {}", s.burn_in),
            );
        }
        if s.trajectories == 0 {
            self.issue(join(P, "trajectories"), "must be at least 1");
        }
        if !(s.extinction_threshold > 0.0) {
            self.issue(join(P, "extinction_threshold"), "must be positive");
        }
        if !(s.extinction_window >= 0.0) {
            self.issue(join(P, "extinction_window"), "must be non-negative");
        }
        if let Err(e) = s.integrator.validate() {
            self.issue(join(P, "integrator"), e.to_string());
        }
        let o = &s.occupation;
        if o.state_bins < 2 || o.eta_bins < 2 {
            self.issue(join(P, "occupation"), "need at least 2 bins per axis");
        }
        if let Some(k) = o.eta_max {
            if !(k > 0.0) {
                self.issue(join(P, "occupation.eta_max"), "must be positive");
            }
        }
    }
}

/// Parses and validates a scenario, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let root: Table = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut r = Reader::default();
    r.unknown(&root, &["model", "switching", "initial", "run"], "");
    let params = r.table(&root, "model", "").and_then(|t| r.model(t));
    let switching = r.table(&root, "switching", "").and_then(|t| r.switching(t));
    let regimes = switching.as_ref().map(SemiMarkovSpec::state_count);
    let initial = r.table(&root, "initial", "").and_then(|t| r.initial(t, regimes));
    let run = r.table(&root, "run", "").and_then(|t| r.run(t));
    if let (Some(p), Some(m)) = (&params, regimes) {
        for (key, list) in [("beta_a", &p.beta_a), ("beta_i", &p.beta_i)] {
            if list.len() != m {
                r.issue(
                    join("model", key),
                    format!("has {} entries but there are {m} regimes", list.len()),
                );
            }
        }
    }
    if !r.issues.is_empty() {
        return Err(ConfigError::Invalid(r.issues));
    }
    let (initial, initial_regime) = initial.expect("no issues recorded");
    r.finish(ScenarioConfig {
        params: params.expect("no issues recorded"),
        switching: switching.expect("no issues recorded"),
        initial,
        initial_regime,
        run: run.expect("no issues recorded"),
    })
}

fn float_array(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| Value::Float(*x)).collect())
}

fn holding_table(d: &HoldingDistribution) -> Table {
    let mut t = Table::new();
    let mut put = |k: &str, v: Value| {
        t.insert(k.to_string(), v);
    };
    match *d {
        HoldingDistribution::Exponential { rate } => {
            put("distribution", Value::String("exponential".into()));
            put("rate", Value::Float(rate));
        }
        HoldingDistribution::Gamma { shape, rate } => {
            put("distribution", Value::String("gamma".into()));
            put("shape", Value::Float(shape));
            put("rate", Value::Float(rate));
        }
        HoldingDistribution::Weibull { shape, scale } => {
            put("distribution", Value::String("weibull".into()));
            put("shape", Value::Float(shape));
            put("scale", Value::Float(scale));
        }
    }
    t
}

/// Writes a scenario in the format read by [`parse_config`], with every
/// optional setting spelled out.
pub fn to_toml_string(c: &ScenarioConfig) -> String {
    let p = &c.params;
    let mut model = Table::new();
    model.insert("beta_a".into(), float_array(&p.beta_a));
    model.insert("beta_i".into(), float_array(&p.beta_i));
    for (k, v) in [
        ("delta_a", p.delta_a),
        ("delta_i", p.delta_i),
        ("alpha", p.alpha),
        ("gamma", p.gamma),
        ("nu", p.nu),
        ("mu", p.mu),
    ] {
        model.insert(k.into(), Value::Float(v));
    }

    let mut states = Table::new();
    for (k, d) in c.switching.holding().iter().enumerate() {
        states.insert((k + 1).to_string(), Value::Table(holding_table(d)));
    }
    let mut switching = Table::new();
    switching.insert(
        "transition".into(),
        Value::Array(c.switching.transition().iter().map(|row| float_array(row)).collect()),
    );
    switching.insert("state".into(), Value::Table(states));

    let x = c.initial;
    let mut initial = Table::new();
    for (k, v) in [("s", x.s), ("a", x.a), ("i", x.i), ("r", x.r)] {
        initial.insert(k.into(), Value::Float(v));
    }
    initial.insert("regime".into(), Value::Integer(c.initial_regime as i64 + 1));

    let s = &c.run;
    let mut run = Table::new();
    run.insert("horizon".into(), Value::Float(s.horizon));
    run.insert("seed".into(), Value::Integer(s.seed as i64));
    run.insert("trajectories".into(), Value::Integer(s.trajectories as i64));
    run.insert("burn_in".into(), Value::Float(s.burn_in));
    run.insert("extinction_threshold".into(), Value::Float(s.extinction_threshold));
    run.insert("extinction_window".into(), Value::Float(s.extinction_window));
    if let Some(out) = &s.output {
        run.insert("output".into(), Value::String(out.clone()));
    }
    let mut integrator = Table::new();
    integrator.insert("step".into(), Value::Float(s.integrator.step));
    integrator.insert("sample_every".into(), Value::Float(s.integrator.sample_every));
    integrator.insert("clamp_eps".into(), Value::Float(s.integrator.clamp_eps));
    run.insert("integrator".into(), Value::Table(integrator));
    let mut occupation = Table::new();
    occupation.insert("state_bins".into(), Value::Integer(s.occupation.state_bins as i64));
    occupation.insert("eta_bins".into(), Value::Integer(s.occupation.eta_bins as i64));
    if let Some(k) = s.occupation.eta_max {
        occupation.insert("eta_max".into(), Value::Float(k));
    }
    run.insert("occupation".into(), Value::Table(occupation));

    let mut root = Table::new();
    root.insert("model".into(), Value::Table(model));
    root.insert("switching".into(), Value::Table(switching));
    root.insert("initial".into(), Value::Table(initial));
    root.insert("run".into(), Value::Table(run));
    toml::to_string(&root).expect("tables of finite floats always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
[model]
beta_a = [0.05, 0.9]
beta_i = [0.05, 0.9]
delta_a = 0.07
delta_i = 0.07
alpha = 0.5
gamma = 0.02
nu = 0.01
mu = 4.566210045662101e-5

[switching]
transition = [[0, 1], [1, 0]]

[switching.state.1]
distribution = "gamma"
shape = 4
scale = 1.25

[switching.state.2]
distribution = "gamma"
shape = 15.0
rate = 0.8

[initial]
s = 0.9
a = 0.05
i = 0.05
r = 0.0
regime = 1

[run]
horizon = 1000
seed = 7
"#;

    fn issue_paths(text: &str) -> Vec<String> {
        parse_config(text)
            .unwrap_err()
            .issues()
            .iter()
            .map(|i| i.path.clone())
            .collect()
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.params.regime_count(), 2);
        assert_eq!(
            c.switching.holding()[0],
            HoldingDistribution::Gamma { shape: 4.0, rate: 0.8 }
        );
        assert_eq!(c.initial_regime, 0);
        assert_eq!(c.run.integrator, IntegratorConfig::default());
        assert_eq!(c.run.trajectories, 100);
        assert_eq!(c.binning().eta_max, 3.0 * 18.75);
    }

    #[test]
    fn self_transition_rejected() {
        let text = MINIMAL.replace("[[0, 1], [1, 0]]", "[[0.2, 0.8], [1, 0]]");
        let err = parse_config(&text).unwrap_err();
        let issue = &err.issues()[0];
        assert_eq!(issue.path, "switching.transition[1][1]");
        assert!(issue.message.contains("p_{1,1} = 0.2"), "{}", issue.message);
    }

    #[test]
    fn off_simplex_initial_state_rejected() {
        let text = MINIMAL.replace("r = 0.0", "r = 0.1");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues()[0].path, "initial");
        assert!(err.issues()[0].message.contains("S + A + I + R = 1.1"));
        assert!(err.issues()[0].message.contains("simplex"));
    }

    #[test]
    fn unknown_keys_rejected_with_paths() {
        let text = MINIMAL
            .replace("seed = 7", "seed = 7\nseeds = 3")
            .replace("nu = 0.01", "nu = 0.01\nkappa = 1");
        assert_eq!(issue_paths(&text), vec!["model.kappa", "run.seeds"]);
    }

    #[test]
    fn collects_several_errors() {
        let text = MINIMAL
            .replace("alpha = 0.5", "alpha = -0.5")
            .replace("horizon = 1000", "horizon = \"long\"");
        let paths = issue_paths(&text);
        assert!(paths.contains(&"model.alpha".to_string()));
        assert!(paths.contains(&"run.horizon".to_string()));
    }

    #[test]
    fn regime_count_mismatch() {
        let text = MINIMAL.replace("beta_a = [0.05, 0.9]", "beta_a = [0.05, 0.9, 0.3]");
        assert_eq!(issue_paths(&text), vec!["model.beta_a"]);
    }

    #[test]
    fn missing_state_and_bad_distribution() {
        let text = MINIMAL.replace(
            "[switching.state.2]\ndistribution = \"gamma\"",
            "[switching.state.3]\ndistribution = \"lognormal\"",
        );
        let paths = issue_paths(&text);
        assert!(paths.contains(&"switching.state.3".to_string()));
        assert!(paths.contains(&"switching.state.2".to_string()));
    }

    #[test]
    fn syntax_error() {
        assert!(matches!(parse_config("[model"), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn initial_regime_range() {
        let text = MINIMAL.replace("regime = 1", "regime = 3");
        assert_eq!(issue_paths(&text), vec!["initial.regime"]);
    }

    #[test]
    fn serialized_config_round_trips() {
        let c = parse_config(MINIMAL).unwrap();
        let text = to_toml_string(&c);
        assert_eq!(parse_config(&text).unwrap(), c);
    }
}
