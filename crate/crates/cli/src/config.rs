//! Scenario configuration: per-scenario parameter tables with defaults,
//! layered as defaults < config file < command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    TwoLevel,
    SpinBath,
    IonHeating,
    Fig2,
    Fig3,
    Selftest,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::TwoLevel,
        Scenario::SpinBath,
        Scenario::IonHeating,
        Scenario::Fig2,
        Scenario::Fig3,
        Scenario::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::TwoLevel => "two-level",
            Scenario::SpinBath => "spin-bath",
            Scenario::IonHeating => "ion-heating",
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                CliError::Parse(format!(
                    "key \"scenario\": unknown scenario \"{s}\" (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy)]
enum Bound {
    Any,
    Positive,
    NonNegative,
    AtLeast(f64),
}

impl Bound {
    fn check(self, key: &str, v: f64) -> Result<(), CliError> {
        let (ok, what) = match self {
            Bound::Any => (v.is_finite(), "finite".to_string()),
            Bound::Positive => (v > 0.0 && v.is_finite(), "> 0".to_string()),
            Bound::NonNegative => (v >= 0.0 && v.is_finite(), ">= 0".to_string()),
            Bound::AtLeast(lo) => (v >= lo && v.is_finite(), format!(">= {lo}")),
        };
        if ok {
            Ok(())
        } else {
            Err(CliError::Parse(format!("key \"{key}\": must be {what}, got {v}")))
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Number(Bound),
    Integer { min: u64 },
    Bool,
    Choice(&'static [&'static str]),
    NumberList(Bound),
}

struct ParamSpec {
    key: &'static str,
    kind: Kind,
    /// `Value::Null` means "chosen automatically".
    default: fn() -> Value,
}

macro_rules! param {
    ($key:literal, $kind:expr, $default:expr) => {
        ParamSpec {
            key: $key,
            kind: $kind,
            default: || json!($default),
        }
    };
    ($key:literal, $kind:expr) => {
        ParamSpec {
            key: $key,
            kind: $kind,
            default: || Value::Null,
        }
    };
}

const SIGNS: &[&str] = &["negative", "positive"];
const METHODS: &[&str] = &["analytic", "mc"];

fn table(scenario: Scenario) -> Vec<ParamSpec> {
    use Bound::*;
    use Kind::*;
    match scenario {
        Scenario::TwoLevel => vec![
            param!("g", Number(Positive), 1.0),
            param!("kappa", Number(Positive), 10.0),
            param!("m_zero", Integer { min: 0 }, 0),
            param!("m", Number(NonNegative)),
            param!("nu", Number(NonNegative), 0.0),
            param!("sign", Choice(SIGNS), "negative"),
            param!("t_max", Number(Positive)),
            param!("t_cap", Number(Positive), 1e4),
            param!("points_per_period", Number(AtLeast(20.0)), 20.0),
            param!("max_rows", Integer { min: 2 }, 4000),
        ],
        Scenario::SpinBath => vec![
            param!("kappa_b", Number(Positive), 1.0),
            param!("omega", Number(Any), 0.0),
            param!("c0_minus_plus", Number(NonNegative), 1.0),
            param!("c0_plus_minus", Number(NonNegative), 0.25),
            param!("omega0", Number(Any), 0.0),
            param!("m_zero", Integer { min: 0 }, 1),
            param!("m", Number(NonNegative)),
            param!("nu", Number(NonNegative), 10.0),
            param!("sign", Choice(SIGNS), "negative"),
            param!("counter_rotating", Bool, false),
            param!("rho_ee", Number(NonNegative), 0.5),
            param!("rho_eg_re", Number(Any), 0.5),
            param!("rho_eg_im", Number(Any), 0.0),
            param!("t_max", Number(Positive)),
            param!("points_per_period", Number(AtLeast(20.0)), 20.0),
            param!("max_rows", Integer { min: 2 }, 4000),
        ],
        Scenario::IonHeating => vec![
            param!("omega0", Number(Positive), 1.0),
            param!("kappa", Number(Positive), 1.0),
            param!("omega_field", Number(NonNegative), std::f64::consts::SQRT_2),
            param!("m_zero", Integer { min: 0 }, 1),
            param!("m", Number(NonNegative)),
            param!("nu", Number(NonNegative), 5.0),
            param!("sign", Choice(SIGNS), "negative"),
            param!("t_max", Number(Positive), 10.0),
            param!("dt", Number(Positive), 0.01),
            param!("method", Choice(METHODS), "analytic"),
            param!("n_traj", Integer { min: 100 }, 4000),
            param!("trunc_tol", Number(Positive), 1e-12),
        ],
        Scenario::Fig2 => vec![
            param!("g", Number(Positive), 1.0),
            param!("kappa", Number(Positive), 10.0),
            param!("m_zero", Integer { min: 1 }, 5),
            param!("m", Number(NonNegative)),
            param!("nu_over_pi", NumberList(Positive), [20.0, 5.0, 0.5, 0.05]),
            param!("sign", Choice(SIGNS), "negative"),
            param!("t_cap", Number(Positive), 1e4),
            param!("points_per_period", Number(AtLeast(20.0)), 20.0),
            param!("max_rows", Integer { min: 2 }, 4000),
            param!("baseline", Bool, true),
        ],
        Scenario::Fig3 => vec![
            param!("omega0", Number(Positive), 1.0),
            param!("kappa", Number(Positive), 1.0),
            param!("omega_field", Number(NonNegative), std::f64::consts::SQRT_2),
            param!("m_zero", Integer { min: 1 }, 1),
            param!("m", Number(NonNegative)),
            param!("nu", NumberList(Positive), [5.0, 3.0]),
            param!("sign", Choice(SIGNS), "negative"),
            param!("t_max", Number(Positive), 10.0),
            param!("dt", Number(Positive), 0.01),
            param!("method", Choice(METHODS), "analytic"),
            param!("n_traj", Integer { min: 100 }, 4000),
            param!("trunc_tol", Number(Positive), 1e-12),
        ],
        Scenario::Selftest => vec![],
    }
}

/// Keys accepted for every scenario besides the parameter table.
const GLOBAL_KEYS: &[&str] = &["scenario", "out", "seed", "format_version"];

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Every parameter of the scenario, defaults filled in; `null` marks an
    /// automatically chosen value.
    pub params: BTreeMap<String, Value>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub format_version: u64,
}

impl ScenarioConfig {
    fn get(&self, key: &str) -> &Value {
        self.params
            .get(key)
            .unwrap_or_else(|| panic!("parameter {key} is not defined for {}", self.scenario))
    }

    pub fn number(&self, key: &str) -> f64 {
        self.get(key).as_f64().unwrap_or_else(|| panic!("{key} is not a number"))
    }

    pub fn optional_number(&self, key: &str) -> Option<f64> {
        let v = self.get(key);
        (!v.is_null()).then(|| v.as_f64().unwrap_or_else(|| panic!("{key} is not a number")))
    }

    pub fn integer(&self, key: &str) -> u64 {
        self.get(key).as_u64().unwrap_or_else(|| panic!("{key} is not an integer"))
    }

    pub fn flag(&self, key: &str) -> bool {
        self.get(key).as_bool().unwrap_or_else(|| panic!("{key} is not a boolean"))
    }

    pub fn text(&self, key: &str) -> &str {
        self.get(key).as_str().unwrap_or_else(|| panic!("{key} is not a string"))
    }

    pub fn numbers(&self, key: &str) -> Vec<f64> {
        self.get(key)
            .as_array()
            .unwrap_or_else(|| panic!("{key} is not a list"))
            .iter()
            .map(|v| v.as_f64().unwrap_or_else(|| panic!("{key} holds a non-number")))
            .collect()
    }

    /// `key = value` lines of the resolved configuration, sorted by key.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let mut lines = vec![("scenario".to_string(), self.scenario.to_string())];
        for (k, v) in &self.params {
            let shown = match v {
                Value::Null => "auto".to_string(),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            lines.push((k.clone(), shown));
        }
        lines.push(("seed".to_string(), self.seed.to_string()));
        lines
    }
}

/// Parses a flat JSON object that names its own scenario, e.g.
/// `{"scenario":"fig2","kappa":20}`.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    resolve(None, Some(text), &[])
}

/// Parses a flag value: JSON where it parses (numbers, booleans, lists),
/// otherwise a bare string.
pub fn flag_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Layers defaults, the optional config file text and `(key, value)` flag
/// overrides into a validated configuration.
pub fn resolve(
    scenario: Option<Scenario>,
    file: Option<&str>,
    flags: &[(String, Value)],
) -> Result<ScenarioConfig, CliError> {
    let file_map: Map<String, Value> = match file {
        None => Map::new(),
        Some(text) => match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(map)) => map,
            Ok(_) => return Err(CliError::Parse("config must be a JSON object".into())),
            Err(e) => return Err(CliError::Parse(format!("config is not valid JSON: {e}"))),
        },
    };

    let file_scenario = match file_map.get("scenario") {
        None => None,
        Some(Value::String(s)) => Some(s.parse::<Scenario>()?),
        Some(_) => return Err(CliError::Parse("key \"scenario\": expected a string".into())),
    };
    let scenario = match (scenario, file_scenario) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Parse(format!(
                "key \"scenario\": config file says \"{b}\" but \"{a}\" was requested"
            )))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(CliError::Parse("key \"scenario\": missing".into())),
    };

    let specs = table(scenario);
    let mut params: BTreeMap<String, Value> =
        specs.iter().map(|s| (s.key.to_string(), (s.default)())).collect();
    let mut out_dir = PathBuf::from(".");
    let mut seed = 0u64;
    let mut format_version = FORMAT_VERSION;

    let layers = file_map
        .iter()
        .map(|(k, v)| (k.as_str(), v))
        .chain(flags.iter().map(|(k, v)| (k.as_str(), v)));
    for (key, value) in layers {
        match key {
            "scenario" => {}
            "out" => {
                out_dir = PathBuf::from(
                    value
                        .as_str()
                        .ok_or_else(|| CliError::Parse("key \"out\": expected a string".into()))?,
                )
            }
            "seed" => {
                seed = value.as_u64().ok_or_else(|| {
                    CliError::Parse("key \"seed\": expected a nonnegative integer".into())
                })?
            }
            "format_version" => {
                format_version = value.as_u64().ok_or_else(|| {
                    CliError::Parse("key \"format_version\": expected an integer".into())
                })?;
                if format_version != FORMAT_VERSION {
                    return Err(CliError::Parse(format!(
                        "key \"format_version\": only version {FORMAT_VERSION} is supported, got {format_version}"
                    )));
                }
            }
            _ => {
                let spec = specs.iter().find(|s| s.key == key).ok_or_else(|| {
                    let mut known: Vec<&str> = specs.iter().map(|s| s.key).collect();
                    known.extend_from_slice(GLOBAL_KEYS);
                    CliError::Parse(format!(
                        "unknown key \"{key}\" for scenario {scenario} (known: {})",
                        known.join(", ")
                    ))
                })?;
                params.insert(key.to_string(), validate(key, spec.kind, value)?);
            }
        }
    }
    Ok(ScenarioConfig {
        scenario,
        params,
        out_dir,
        seed,
        format_version,
    })
}

fn validate(key: &str, kind: Kind, value: &Value) -> Result<Value, CliError> {
    let wrong = |what: &str| CliError::Parse(format!("key \"{key}\": expected {what}, got {value}"));
    match kind {
        Kind::Number(bound) => {
            let v = value.as_f64().ok_or_else(|| wrong("a number"))?;
            bound.check(key, v)?;
            Ok(json!(v))
        }
        Kind::Integer { min } => {
            let v = value.as_u64().ok_or_else(|| wrong("a nonnegative integer"))?;
            if v < min {
                return Err(CliError::Parse(format!("key \"{key}\": must be >= {min}, got {v}")));
            }
            Ok(json!(v))
        }
        Kind::Bool => value.as_bool().map(Value::Bool).ok_or_else(|| wrong("true or false")),
        Kind::Choice(options) => {
            let s = value.as_str().ok_or_else(|| wrong("a string"))?;
            if options.contains(&s) {
                Ok(json!(s))
            } else {
                Err(CliError::Parse(format!(
                    "key \"{key}\": expected one of {}, got \"{s}\"",
                    options.join(", ")
                )))
            }
        }
        Kind::NumberList(bound) => {
            let items = match value {
                Value::Array(items) => items.clone(),
                Value::Number(_) => vec![value.clone()],
                _ => return Err(wrong("a list of numbers")),
            };
            if items.is_empty() {
                return Err(CliError::Parse(format!("key \"{key}\": list is empty")));
            }
            let mut out = Vec::with_capacity(items.len());
            for item in &items {
                let v = item.as_f64().ok_or_else(|| wrong("a list of numbers"))?;
                bound.check(key, v)?;
                out.push(json!(v));
            }
            Ok(Value::Array(out))
        }
    }
}
