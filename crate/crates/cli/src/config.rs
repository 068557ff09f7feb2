//! Scenario configuration: parsing, defaults and validation.
//!
//! A config file is TOML with a top-level `scenario` key and an optional table
//! named after the scenario holding flat keys:
//!
//! ```toml
//! scenario = "fig3_qfunctions"
//!
//! [fig3_qfunctions]
//! n_a = 80
//! n_b = 2
//! q_theta = 91
//! ```
//!
//! Every key that is not given takes the scenario default, and every effective
//! value is echoed into the output header.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use spincat_core::dynamics::Picture;
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    Fig1Fidelity,
    Fig2Squeezing,
    Fig3QFunctions,
    Fig4ExpVar,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Fig1Fidelity,
        ScenarioKind::Fig2Squeezing,
        ScenarioKind::Fig3QFunctions,
        ScenarioKind::Fig4ExpVar,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Fig1Fidelity => "fig1_fidelity",
            ScenarioKind::Fig2Squeezing => "fig2_squeezing",
            ScenarioKind::Fig3QFunctions => "fig3_qfunctions",
            ScenarioKind::Fig4ExpVar => "fig4_expvar",
            ScenarioKind::Custom => "custom",
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown scenario {s:?}; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Scalar time-series observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableName {
    /// `|<psi(0)|psi(t)>|`.
    Fidelity,
    Mean(Axis, Side),
    Var(Axis, Side),
    /// Kitagawa-Ueda parameter of A.
    Chi2A,
    Purity(Side),
}

impl ObservableName {
    pub fn label(self) -> String {
        let axis = |a| match a {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        let side = |s| match s {
            Side::A => "a",
            Side::B => "b",
        };
        match self {
            ObservableName::Fidelity => "fidelity".into(),
            ObservableName::Mean(a, s) => format!("mean_{}_{}", axis(a), side(s)),
            ObservableName::Var(a, s) => format!("var_{}_{}", axis(a), side(s)),
            ObservableName::Chi2A => "chi2_a".into(),
            ObservableName::Purity(s) => format!("purity_{}", side(s)),
        }
    }

    pub fn all() -> Vec<ObservableName> {
        let mut out = vec![ObservableName::Fidelity, ObservableName::Chi2A];
        for s in [Side::A, Side::B] {
            for a in [Axis::X, Axis::Y, Axis::Z] {
                out.push(ObservableName::Mean(a, s));
                out.push(ObservableName::Var(a, s));
            }
            out.push(ObservableName::Purity(s));
        }
        out
    }
}

impl FromStr for ObservableName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ObservableName::all()
            .into_iter()
            .find(|o| o.label() == s)
            .ok_or_else(|| format!("unknown observable {s:?}"))
    }
}

/// Sample times in units of `lambda t`.
#[derive(Clone, Debug, PartialEq)]
pub enum TimeSpec {
    /// `steps` evenly spaced points on `[start, stop]`; one point means `start`.
    Grid { start: f64, stop: f64, steps: usize },
    /// Fractions of the period `lambda T = 2 pi N_A / N_B`.
    PeriodFractions(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub n_a: usize,
    pub n_b: usize,
    pub zeta_modulus: f64,
    /// `zeta = zeta_modulus * exp(i zeta_phase)`.
    pub zeta_phase: f64,
    /// Ancilla coherent amplitude for `custom`; the other scenarios reuse `zeta`.
    pub zeta_b_modulus: f64,
    pub zeta_b_phase: f64,
    pub coupling: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub picture: Picture,
    pub times: TimeSpec,
    pub observables: Vec<ObservableName>,
    pub q_theta: usize,
    pub q_phi: usize,
    pub q_squared: bool,
    pub n_a_values: Vec<usize>,
    pub zeta_stop: f64,
    pub zeta_steps: usize,
    pub n_b_values: Vec<usize>,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// One violation, tagged with the offending key path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

const KNOWN_KEYS: [&str; 24] = [
    "n_a",
    "n_b",
    "zeta_modulus",
    "zeta_phase",
    "zeta_b_modulus",
    "zeta_b_phase",
    "coupling",
    "omega_a",
    "omega_b",
    "picture",
    "t_start",
    "t_stop",
    "steps",
    "period_fractions",
    "observables",
    "q_theta",
    "q_phi",
    "q_squared",
    "n_a_values",
    "zeta_stop",
    "zeta_steps",
    "n_b_values",
    "output_path",
    "format",
];

impl ScenarioConfig {
    /// Defaults for a scenario; `custom` still needs `n_a` and `n_b` supplied.
    pub fn defaults(scenario: ScenarioKind) -> Self {
        let base = ScenarioConfig {
            scenario,
            n_a: 80,
            n_b: 2,
            zeta_modulus: 1.0,
            zeta_phase: 0.0,
            zeta_b_modulus: 1.0,
            zeta_b_phase: 0.0,
            coupling: 1.0,
            omega_a: 0.0,
            omega_b: 0.0,
            picture: Picture::Interaction,
            times: TimeSpec::Grid { start: 0.0, stop: 10.0, steps: 101 },
            observables: vec![ObservableName::Fidelity],
            q_theta: 181,
            q_phi: 360,
            q_squared: false,
            n_a_values: vec![25, 100, 400],
            zeta_stop: 3.0,
            zeta_steps: 61,
            n_b_values: vec![1, 2, 3, 4],
            output_path: None,
            format: OutputFormat::Csv,
        };
        match scenario {
            ScenarioKind::Fig1Fidelity => base,
            ScenarioKind::Fig2Squeezing => ScenarioConfig {
                times: TimeSpec::Grid { start: 0.0, stop: 10.0, steps: 1001 },
                observables: vec![ObservableName::Chi2A],
                ..base
            },
            ScenarioKind::Fig3QFunctions => ScenarioConfig {
                times: TimeSpec::PeriodFractions(vec![0.0, 1.0 / 40.0, 0.25, 1.0 / 3.0, 0.5, 1.0]),
                ..base
            },
            ScenarioKind::Fig4ExpVar => ScenarioConfig {
                times: TimeSpec::Grid { start: 0.0, stop: 260.0, steps: 2601 },
                observables: vec![
                    ObservableName::Mean(Axis::X, Side::A),
                    ObservableName::Mean(Axis::Y, Side::A),
                    ObservableName::Mean(Axis::Z, Side::A),
                    ObservableName::Var(Axis::X, Side::A),
                    ObservableName::Mean(Axis::X, Side::B),
                    ObservableName::Mean(Axis::Y, Side::B),
                    ObservableName::Mean(Axis::Z, Side::B),
                    ObservableName::Var(Axis::X, Side::B),
                ],
                ..base
            },
            ScenarioKind::Custom => ScenarioConfig {
                observables: vec![
                    ObservableName::Fidelity,
                    ObservableName::Mean(Axis::Z, Side::A),
                    ObservableName::Mean(Axis::Z, Side::B),
                ],
                ..base
            },
        }
    }

    /// `lambda t` sample points.
    pub fn lambda_times(&self) -> Vec<f64> {
        match &self.times {
            TimeSpec::Grid { start, stop, steps } => {
                if *steps == 1 {
                    vec![*start]
                } else {
                    (0..*steps).map(|k| start + (stop - start) * k as f64 / (*steps - 1) as f64).collect()
                }
            }
            TimeSpec::PeriodFractions(fr) => {
                let period = 2.0 * std::f64::consts::PI * self.n_a as f64 / self.n_b as f64;
                fr.iter().map(|f| f * period).collect()
            }
        }
    }

    /// Every effective parameter as `(key, value)` in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let list = |v: &[usize]| format!("{v:?}");
        let mut out = vec![("scenario".to_string(), self.scenario.name().to_string())];
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        push("n_a", self.n_a.to_string());
        push("n_b", self.n_b.to_string());
        push("zeta_modulus", fmt_f64(self.zeta_modulus));
        push("zeta_phase", fmt_f64(self.zeta_phase));
        push("zeta_b_modulus", fmt_f64(self.zeta_b_modulus));
        push("zeta_b_phase", fmt_f64(self.zeta_b_phase));
        push("coupling", fmt_f64(self.coupling));
        push("omega_a", fmt_f64(self.omega_a));
        push("omega_b", fmt_f64(self.omega_b));
        push(
            "picture",
            match self.picture {
                Picture::Lab => "lab".into(),
                Picture::Interaction => "interaction".into(),
            },
        );
        match &self.times {
            TimeSpec::Grid { start, stop, steps } => {
                push("t_start", fmt_f64(*start));
                push("t_stop", fmt_f64(*stop));
                push("steps", steps.to_string());
            }
            TimeSpec::PeriodFractions(fr) => {
                let v: Vec<String> = fr.iter().map(|f| fmt_f64(*f)).collect();
                push("period_fractions", format!("[{}]", v.join(", ")));
            }
        }
        let obs: Vec<String> = self.observables.iter().map(|o| o.label()).collect();
        push("observables", format!("[{}]", obs.join(", ")));
        push("q_theta", self.q_theta.to_string());
        push("q_phi", self.q_phi.to_string());
        push("q_squared", self.q_squared.to_string());
        push("n_a_values", list(&self.n_a_values));
        push("zeta_stop", fmt_f64(self.zeta_stop));
        push("zeta_steps", self.zeta_steps.to_string());
        push("n_b_values", list(&self.n_b_values));
        push("format", self.format.extension().to_string());
        out
    }
}

/// Round-trip-exact decimal rendering used in headers and CSV cells.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Reader<'a> {
    section: &'a str,
    table: &'a Table,
    issues: Vec<ConfigIssue>,
}

impl<'a> Reader<'a> {
    fn issue(&mut self, key: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue { key: format!("{}.{key}", self.section), message: message.into() });
    }

    fn float(&mut self, key: &str, slot: &mut f64) {
        match self.table.get(key) {
            None => {}
            Some(Value::Float(x)) => *slot = *x,
            Some(Value::Integer(i)) => *slot = *i as f64,
            Some(other) => self.issue(key, format!("expected a number, found {}", other.type_str())),
        }
    }

    fn int(&mut self, key: &str, slot: &mut usize) {
        match self.table.get(key) {
            None => {}
            Some(Value::Integer(i)) if *i >= 0 => *slot = *i as usize,
            Some(Value::Integer(i)) => self.issue(key, format!("must be non-negative, got {i}")),
            Some(other) => self.issue(key, format!("expected an integer, found {}", other.type_str())),
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.table.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.issue(key, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn int_list(&mut self, key: &str, slot: &mut Vec<usize>) {
        match self.table.get(key) {
            None => {}
            Some(Value::Array(items)) => {
                let parsed: Option<Vec<usize>> =
                    items.iter().map(|v| v.as_integer().filter(|i| *i >= 0).map(|i| i as usize)).collect();
                match parsed {
                    Some(v) => *slot = v,
                    None => self.issue(key, "expected a list of non-negative integers"),
                }
            }
            Some(other) => self.issue(key, format!("expected a list, found {}", other.type_str())),
        }
    }

    fn float_list(&mut self, key: &str) -> Option<Vec<f64>> {
        match self.table.get(key) {
            None => None,
            Some(Value::Array(items)) => {
                let parsed: Option<Vec<f64>> = items
                    .iter()
                    .map(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
                    .collect();
                if parsed.is_none() {
                    self.issue(key, "expected a list of numbers");
                }
                parsed
            }
            Some(other) => {
                self.issue(key, format!("expected a list, found {}", other.type_str()));
                None
            }
        }
    }
}

/// Applies `key=value` overrides to the scenario table. Values are read as TOML
/// and fall back to plain strings.
pub fn apply_overrides(table: &mut Table, overrides: &[String]) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    for item in overrides {
        let Some((key, raw)) = item.split_once('=') else {
            issues.push(ConfigIssue { key: item.clone(), message: "expected key=value".into() });
            continue;
        };
        let key = key.trim();
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        table.insert(key.to_string(), value);
    }
    issues
}

/// Parses a whole config file.
pub fn validate_config(raw: &str) -> Result<ScenarioConfig, Vec<ConfigIssue>> {
    validate_config_with(raw, &[])
}

/// Parses a config file, applying `key=value` overrides to the scenario table.
pub fn validate_config_with(raw: &str, overrides: &[String]) -> Result<ScenarioConfig, Vec<ConfigIssue>> {
    let root: Table = raw
        .parse()
        .map_err(|e: toml::de::Error| vec![ConfigIssue { key: "<file>".into(), message: e.message().to_string() }])?;
    let scenario = match root.get("scenario") {
        Some(Value::String(s)) => s.parse::<ScenarioKind>().map_err(|m| vec![ConfigIssue { key: "scenario".into(), message: m }])?,
        Some(other) => {
            return Err(vec![ConfigIssue {
                key: "scenario".into(),
                message: format!("expected a string, found {}", other.type_str()),
            }])
        }
        None => return Err(vec![ConfigIssue { key: "scenario".into(), message: "missing".into() }]),
    };
    let mut issues = Vec::new();
    for key in root.keys() {
        if key != "scenario" && key != scenario.name() {
            issues.push(ConfigIssue { key: key.clone(), message: "unexpected top-level key or section".into() });
        }
    }
    let mut table = match root.get(scenario.name()) {
        Some(Value::Table(t)) => t.clone(),
        Some(other) => {
            issues.push(ConfigIssue {
                key: scenario.name().into(),
                message: format!("expected a table, found {}", other.type_str()),
            });
            Table::new()
        }
        None => Table::new(),
    };
    issues.extend(apply_overrides(&mut table, overrides));
    match build(scenario, &table) {
        Ok(cfg) if issues.is_empty() => Ok(cfg),
        Ok(_) => Err(issues),
        Err(more) => {
            issues.extend(more);
            Err(issues)
        }
    }
}

/// Builds a config for `scenario` from its flat key table.
pub fn build(scenario: ScenarioKind, table: &Table) -> Result<ScenarioConfig, Vec<ConfigIssue>> {
    let mut cfg = ScenarioConfig::defaults(scenario);
    let mut r = Reader { section: scenario.name(), table, issues: Vec::new() };

    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            r.issue(key, "unknown key");
        }
    }
    if scenario == ScenarioKind::Custom {
        for key in ["n_a", "n_b"] {
            if !table.contains_key(key) {
                r.issue(key, "required for the custom scenario");
            }
        }
    }

    r.int("n_a", &mut cfg.n_a);
    r.int("n_b", &mut cfg.n_b);
    r.float("zeta_modulus", &mut cfg.zeta_modulus);
    r.float("zeta_phase", &mut cfg.zeta_phase);
    if scenario == ScenarioKind::Custom {
        cfg.zeta_b_modulus = cfg.zeta_modulus;
        cfg.zeta_b_phase = cfg.zeta_phase;
    }
    r.float("zeta_b_modulus", &mut cfg.zeta_b_modulus);
    r.float("zeta_b_phase", &mut cfg.zeta_b_phase);
    r.float("coupling", &mut cfg.coupling);
    r.float("omega_a", &mut cfg.omega_a);
    r.float("omega_b", &mut cfg.omega_b);
    if let Some(p) = r.string("picture") {
        match p.as_str() {
            "lab" => cfg.picture = Picture::Lab,
            "interaction" => cfg.picture = Picture::Interaction,
            other => r.issue("picture", format!("expected \"lab\" or \"interaction\", got {other:?}")),
        }
    }

    let grid_keys = ["t_start", "t_stop", "steps"].iter().any(|k| table.contains_key(*k));
    if grid_keys && table.contains_key("period_fractions") {
        r.issue("period_fractions", "cannot be combined with t_start/t_stop/steps");
    }
    if let Some(fr) = r.float_list("period_fractions") {
        if fr.is_empty() || fr.iter().any(|f| !f.is_finite() || *f < 0.0) {
            r.issue("period_fractions", "must be a non-empty list of finite non-negative numbers");
        }
        cfg.times = TimeSpec::PeriodFractions(fr);
    } else if grid_keys {
        let (mut start, mut stop, mut steps) = match cfg.times {
            TimeSpec::Grid { start, stop, steps } => (start, stop, steps),
            TimeSpec::PeriodFractions(_) => (0.0, 0.0, 1),
        };
        r.float("t_start", &mut start);
        r.float("t_stop", &mut stop);
        r.int("steps", &mut steps);
        cfg.times = TimeSpec::Grid { start, stop, steps };
    }
    if let TimeSpec::Grid { start, stop, steps } = cfg.times {
        if steps < 1 {
            r.issue("steps", "must be at least 1");
        }
        if !start.is_finite() || !stop.is_finite() {
            r.issue("t_stop", "times must be finite");
        } else if stop < start {
            r.issue("t_stop", format!("t_stop = {stop} is before t_start = {start}"));
        }
    }

    match table.get("observables") {
        None => {}
        Some(Value::Array(items)) => {
            let mut parsed = Vec::new();
            for item in items {
                match item.as_str().map(str::parse::<ObservableName>) {
                    Some(Ok(o)) => parsed.push(o),
                    Some(Err(m)) => r.issue("observables", m),
                    None => r.issue("observables", "expected a list of strings"),
                }
            }
            cfg.observables = parsed;
        }
        Some(other) => r.issue("observables", format!("expected a list, found {}", other.type_str())),
    }

    r.int("q_theta", &mut cfg.q_theta);
    r.int("q_phi", &mut cfg.q_phi);
    match table.get("q_squared") {
        None => {}
        Some(Value::Boolean(b)) => cfg.q_squared = *b,
        Some(other) => r.issue("q_squared", format!("expected a boolean, found {}", other.type_str())),
    }
    r.int_list("n_a_values", &mut cfg.n_a_values);
    r.float("zeta_stop", &mut cfg.zeta_stop);
    r.int("zeta_steps", &mut cfg.zeta_steps);
    r.int_list("n_b_values", &mut cfg.n_b_values);
    if let Some(p) = r.string("output_path") {
        cfg.output_path = Some(PathBuf::from(p));
    }
    if let Some(f) = r.string("format") {
        match f.as_str() {
            "csv" => cfg.format = OutputFormat::Csv,
            "json" => cfg.format = OutputFormat::Json,
            other => r.issue("format", format!("expected \"csv\" or \"json\", got {other:?}")),
        }
    }

    if cfg.n_a < 1 {
        r.issue("n_a", "must be at least 1");
    }
    if cfg.n_b < 1 {
        r.issue("n_b", "must be at least 1");
    }
    for (key, v) in [
        ("zeta_modulus", cfg.zeta_modulus),
        ("zeta_b_modulus", cfg.zeta_b_modulus),
        ("zeta_stop", cfg.zeta_stop),
    ] {
        if !v.is_finite() || v < 0.0 {
            r.issue(key, format!("must be finite and non-negative, got {v}"));
        }
    }
    for (key, v) in [("zeta_phase", cfg.zeta_phase), ("zeta_b_phase", cfg.zeta_b_phase), ("omega_a", cfg.omega_a), ("omega_b", cfg.omega_b)] {
        if !v.is_finite() {
            r.issue(key, format!("must be finite, got {v}"));
        }
    }
    if !(cfg.coupling.is_finite() && cfg.coupling > 0.0) {
        r.issue("coupling", format!("must be positive (times are in units of 1/coupling), got {}", cfg.coupling));
    }
    if cfg.q_theta < 2 {
        r.issue("q_theta", "must be at least 2");
    }
    if cfg.q_phi < 1 {
        r.issue("q_phi", "must be at least 1");
    }
    if cfg.zeta_steps < 1 {
        r.issue("zeta_steps", "must be at least 1");
    }
    if cfg.n_a_values.is_empty() || cfg.n_a_values.contains(&0) {
        r.issue("n_a_values", "must be a non-empty list of positive integers");
    }
    if cfg.n_b_values.is_empty() || cfg.n_b_values.contains(&0) {
        r.issue("n_b_values", "must be a non-empty list of positive integers");
    }
    if cfg.observables.is_empty() && matches!(scenario, ScenarioKind::Fig4ExpVar | ScenarioKind::Custom) {
        r.issue("observables", "at least one observable is needed");
    }

    if r.issues.is_empty() {
        Ok(cfg)
    } else {
        Err(r.issues)
    }
}
