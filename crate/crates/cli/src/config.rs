//! `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment. Lists are comma separated.
//! Parsing never stops at the first problem: every error is collected with
//! its line number.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    Lambda0Check,
    Classical,
    Fock,
    Coherent,
    Scan,
    Meanfield,
    MfScan,
    PhaseGate,
    Compare,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Lambda0Check,
        Scenario::Classical,
        Scenario::Fock,
        Scenario::Coherent,
        Scenario::Scan,
        Scenario::Meanfield,
        Scenario::MfScan,
        Scenario::PhaseGate,
        Scenario::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Lambda0Check => "lambda0-check",
            Scenario::Classical => "classical",
            Scenario::Fock => "fock",
            Scenario::Coherent => "coherent",
            Scenario::Scan => "scan",
            Scenario::Meanfield => "meanfield",
            Scenario::MfScan => "mf-scan",
            Scenario::PhaseGate => "phase-gate",
            Scenario::Compare => "compare",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    List(Vec<f64>),
    Text(String),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x:?}"),
            Value::List(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| format!("{x:?}")).collect();
                f.write_str(&parts.join(", "))
            }
            Value::Text(s) => f.write_str(s),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Range {
    Any,
    Positive,
    NonNegative,
    NonZero,
    AtLeast(f64),
    Within(f64, f64),
}

impl Range {
    fn check(self, x: f64) -> Result<(), String> {
        let ok = x.is_finite()
            && match self {
                Range::Any => true,
                Range::Positive => x > 0.0,
                Range::NonNegative => x >= 0.0,
                Range::NonZero => x != 0.0,
                Range::AtLeast(lo) => x >= lo,
                Range::Within(lo, hi) => (lo..=hi).contains(&x),
            };
        if ok {
            return Ok(());
        }
        Err(match self {
            Range::Any => "must be finite".into(),
            Range::Positive => "must be > 0".into(),
            Range::NonNegative => "must be ≥ 0".into(),
            Range::NonZero => "must be nonzero".into(),
            Range::AtLeast(lo) => format!("must be ≥ {lo}"),
            Range::Within(lo, hi) => format!("must lie in [{lo:e}, {hi:e}]"),
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Int(i64, i64),
    Real(Range),
    /// Nonempty; `true` requires strictly ascending entries.
    List(Range, bool),
    Choice(&'static [&'static str]),
    Text,
    Bool,
}

struct KeySpec {
    key: &'static str,
    kind: Kind,
    /// Empty means every scenario.
    scenarios: &'static [Scenario],
}

use Scenario as S;

const GRID: &[Scenario] = &[S::Classical, S::Meanfield];
const TAU: &[Scenario] = &[S::Fock, S::Coherent, S::Compare];
const FIELDS: &[Scenario] = &[S::Lambda0Check, S::Classical];
const ENSEMBLE: &[Scenario] = &[S::Coherent, S::Scan, S::Compare];
const MAX_POINTS: i64 = 1_000_000;

#[rustfmt::skip]
const KEYS: &[KeySpec] = &[
    KeySpec { key: "scenario", kind: Kind::Text, scenarios: &[] },
    KeySpec { key: "out", kind: Kind::Text, scenarios: &[] },
    KeySpec { key: "workers", kind: Kind::Int(0, 1024), scenarios: &[] },
    KeySpec { key: "long_running", kind: Kind::Bool, scenarios: &[] },
    KeySpec { key: "omega1", kind: Kind::Real(Range::NonNegative), scenarios: FIELDS },
    KeySpec { key: "omega2", kind: Kind::Real(Range::NonNegative), scenarios: FIELDS },
    KeySpec { key: "e1", kind: Kind::Real(Range::NonNegative), scenarios: FIELDS },
    KeySpec { key: "e2", kind: Kind::Real(Range::NonNegative), scenarios: FIELDS },
    KeySpec { key: "kappa", kind: Kind::Real(Range::Positive), scenarios: &[S::Lambda0Check] },
    KeySpec { key: "delta", kind: Kind::Real(Range::NonZero), scenarios: &[S::Lambda0Check] },
    KeySpec { key: "gamma1", kind: Kind::Real(Range::NonNegative), scenarios: &[S::Lambda0Check] },
    KeySpec { key: "gamma2", kind: Kind::Real(Range::NonNegative), scenarios: &[S::Lambda0Check] },
    KeySpec { key: "scales", kind: Kind::List(Range::Positive, false), scenarios: &[S::Lambda0Check] },
    KeySpec { key: "omega1_phase", kind: Kind::Real(Range::Any), scenarios: &[S::Classical] },
    KeySpec { key: "omega2_phase", kind: Kind::Real(Range::Any), scenarios: &[S::Classical] },
    KeySpec { key: "e1_phase", kind: Kind::Real(Range::Any), scenarios: &[S::Classical] },
    KeySpec { key: "e2_phase", kind: Kind::Real(Range::Any), scenarios: &[S::Classical] },
    KeySpec { key: "tol", kind: Kind::Real(Range::Within(1e-14, 1e-3)), scenarios: &[S::Classical] },
    KeySpec { key: "xi_max", kind: Kind::Real(Range::Positive), scenarios: GRID },
    KeySpec { key: "xi_points", kind: Kind::Int(2, MAX_POINTS), scenarios: GRID },
    KeySpec { key: "n", kind: Kind::Int(0, 100_000), scenarios: &[S::Fock] },
    KeySpec { key: "n1", kind: Kind::Int(0, 100_000), scenarios: &[S::Fock] },
    KeySpec { key: "n2", kind: Kind::Int(0, 100_000), scenarios: &[S::Fock] },
    KeySpec { key: "n3", kind: Kind::Int(0, 100_000), scenarios: &[S::Fock] },
    KeySpec { key: "n4", kind: Kind::Int(0, 100_000), scenarios: &[S::Fock] },
    KeySpec { key: "tau_max", kind: Kind::Real(Range::Positive), scenarios: TAU },
    KeySpec { key: "tau_points", kind: Kind::Int(2, MAX_POINTS), scenarios: TAU },
    KeySpec { key: "mean", kind: Kind::Real(Range::Positive), scenarios: &[S::Coherent, S::Compare] },
    KeySpec { key: "mean1", kind: Kind::Real(Range::Positive), scenarios: &[S::Coherent] },
    KeySpec { key: "mean2", kind: Kind::Real(Range::Positive), scenarios: &[S::Coherent] },
    KeySpec { key: "eps_tail", kind: Kind::Real(Range::Within(1e-15, 1e-4)), scenarios: ENSEMBLE },
    KeySpec { key: "mode", kind: Kind::Choice(&["resonant", "constant", "both"]), scenarios: &[S::Coherent, S::Scan] },
    KeySpec { key: "d_ref", kind: Kind::Real(Range::Positive), scenarios: &[S::Coherent, S::Scan] },
    KeySpec { key: "means", kind: Kind::List(Range::Positive, true), scenarios: &[S::Scan] },
    KeySpec { key: "resolution", kind: Kind::Int(10, 100_000), scenarios: &[S::Scan] },
    KeySpec { key: "b0", kind: Kind::Real(Range::AtLeast(1.0)), scenarios: &[S::Meanfield] },
    KeySpec { key: "b0_list", kind: Kind::List(Range::AtLeast(1.0), true), scenarios: &[S::MfScan] },
    KeySpec { key: "tau", kind: Kind::Real(Range::NonNegative), scenarios: &[S::PhaseGate] },
];

/// Coherent means above this need `--long-running`.
pub const LONG_RUNNING_MEAN: f64 = 300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// All problems found in one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// A validated run configuration. Keys not set fall back to per-scenario
/// defaults at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    values: BTreeMap<&'static str, Value>,
}

impl RunConfig {
    /// An empty configuration: every parameter at its default.
    pub fn defaults(scenario: Scenario) -> Self {
        Self {
            scenario,
            values: BTreeMap::new(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn int(&self, key: &str) -> Option<i64> {
        match self.values.get(key) {
            Some(Value::Int(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn real(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some(Value::Real(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn list(&self, key: &str) -> Option<&[f64]> {
        match self.values.get(key) {
            Some(Value::List(xs)) => Some(xs),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn flag(&self, key: &str) -> Option<bool> {
        match self.values.get(key) {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    /// Normalised text form, one `key = value` per line in key order. Two
    /// configurations that parse to the same values share this form.
    pub fn canonical(&self) -> String {
        let mut out = format!("scenario = {}\n", self.scenario);
        for (k, v) in &self.values {
            if *k != "scenario" {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}

/// Parses a configuration that must name its scenario.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_as(text, None)
}

/// Parses a configuration for `expected`, which may then be omitted from the
/// text. A conflicting `scenario` line is an error.
pub fn parse_config_as(text: &str, expected: Option<Scenario>) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        match body.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => lines.push((line, k.trim(), v.trim())),
            _ => errors.push(ConfigError::at(line, format!("expected `key = value`, got `{body}`"))),
        }
    }

    let mut scenario = expected;
    for &(line, k, v) in &lines {
        if k != "scenario" {
            continue;
        }
        match v.parse::<Scenario>() {
            Ok(s) if expected.is_some_and(|e| e != s) => errors.push(ConfigError::at(
                line,
                format!("scenario `{s}` does not match subcommand `{}`", expected.unwrap()),
            )),
            Ok(s) => scenario = Some(s),
            Err(e) => errors.push(ConfigError::at(line, e)),
        }
    }
    if scenario.is_none() && !errors.iter().any(|e| e.message.contains("scenario")) {
        errors.push(ConfigError::global("missing required key `scenario`"));
    }

    let mut values = BTreeMap::new();
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for &(line, k, v) in &lines {
        if let Some(first) = seen.insert(k, line) {
            errors.push(ConfigError::at(
                line,
                format!("duplicate key `{k}` (first set on line {first})"),
            ));
            continue;
        }
        let Some(spec) = KEYS.iter().find(|s| s.key == k) else {
            errors.push(ConfigError::at(line, format!("unknown key `{k}`")));
            continue;
        };
        if let Some(sc) = scenario {
            if !spec.scenarios.is_empty() && !spec.scenarios.contains(&sc) {
                errors.push(ConfigError::at(
                    line,
                    format!("key `{k}` does not apply to scenario `{sc}`"),
                ));
                continue;
            }
        }
        if k == "scenario" {
            continue;
        }
        match parse_value(spec, v) {
            Ok(val) => {
                values.insert(spec.key, val);
            }
            Err(msg) => errors.push(ConfigError::at(line, format!("`{k}`: {msg}"))),
        }
    }

    let line_of = |k: &str| seen.get(k).copied();
    for (a, b) in [("n", "n1"), ("n", "n2"), ("mean", "mean1"), ("mean", "mean2")] {
        if values.contains_key(a) && values.contains_key(b) {
            errors.push(ConfigError {
                line: line_of(b),
                message: format!("`{a}` and `{b}` are mutually exclusive"),
            });
        }
    }

    match (scenario, errors.is_empty()) {
        (Some(scenario), true) => Ok(RunConfig { scenario, values }),
        _ => Err(ConfigErrors(errors)),
    }
}

fn parse_value(spec: &KeySpec, v: &str) -> Result<Value, String> {
    match spec.kind {
        Kind::Int(lo, hi) => {
            let i: i64 = v.parse().map_err(|_| format!("expected an integer, got `{v}`"))?;
            if !(lo..=hi).contains(&i) {
                return Err(format!("{i} out of range [{lo}, {hi}]"));
            }
            Ok(Value::Int(i))
        }
        Kind::Real(range) => {
            let x = parse_real(v)?;
            range.check(x).map_err(|m| format!("{x} {m}"))?;
            Ok(Value::Real(x))
        }
        Kind::List(range, ascending) => {
            let xs = v
                .split(',')
                .map(|p| parse_real(p.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            if xs.is_empty() {
                return Err("list is empty".into());
            }
            for &x in &xs {
                range.check(x).map_err(|m| format!("entry {x} {m}"))?;
            }
            if ascending && xs.windows(2).any(|w| w[1] <= w[0]) {
                return Err("entries must be strictly ascending".into());
            }
            Ok(Value::List(xs))
        }
        Kind::Choice(options) => {
            if options.contains(&v) {
                Ok(Value::Text(v.to_string()))
            } else {
                Err(format!("expected one of {}, got `{v}`", options.join(", ")))
            }
        }
        Kind::Text => {
            if v.is_empty() {
                Err("empty value".into())
            } else {
                Ok(Value::Text(v.to_string()))
            }
        }
        Kind::Bool => match v {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(format!("expected true or false, got `{v}`")),
        },
    }
}

fn parse_real(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got `{v}`"))?;
    if !x.is_finite() {
        return Err(format!("{v} is not finite"));
    }
    Ok(x)
}
