//! `modbath <scenario> [--config file.json] [--out dir] [--seed N] [--key value ...]`

use std::fs;

use serde_json::Value;

use crate::config::{self, flag_value, Scenario, ScenarioConfig};
use crate::error::CliError;

pub const USAGE: &str = "\
usage: modbath <scenario> [--config file.json] [--out dir] [--seed N] [--key value ...]

scenarios: two-level, spin-bath, ion-heating, fig2, fig3, selftest

Every parameter key of a scenario can be given as a flag (--kappa 20,
--nu [5,3]); flags override the config file, which overrides defaults.
Environment: MODBATH_THREADS caps worker threads (0 = automatic).";

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Help,
    Run(ScenarioConfig),
}

/// Parses the arguments after the program name and reads the config file.
pub fn parse_args<S: AsRef<str>>(args: &[S]) -> Result<Command, CliError> {
    let mut scenario = None;
    let mut config_path = None;
    let mut flags: Vec<(String, Value)> = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let arg = args[i].as_ref();
        if arg == "-h" || arg == "--help" {
            return Ok(Command::Help);
        }
        if let Some(name) = arg.strip_prefix("--") {
            let (key, value) = match name.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    i += 1;
                    let v = args
                        .get(i)
                        .ok_or_else(|| CliError::Parse(format!("key \"{name}\": missing value")))?;
                    (name.to_string(), v.as_ref().to_string())
                }
            };
            let key = key.replace('-', "_");
            match key.as_str() {
                "config" => config_path = Some(value),
                "out" => flags.push((key, Value::String(value))),
                _ => flags.push((key, flag_value(&value))),
            }
        } else if scenario.is_none() {
            scenario = Some(arg.parse::<Scenario>()?);
        } else {
            return Err(CliError::Parse(format!("unexpected argument \"{arg}\"")));
        }
        i += 1;
    }
    let text = match &config_path {
        Some(path) => Some(fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?),
        None => None,
    };
    if scenario.is_none() && text.is_none() {
        return Err(CliError::Parse("key \"scenario\": missing".into()));
    }
    Ok(Command::Run(config::resolve(scenario, text.as_deref(), &flags)?))
}

/// Worker count from `MODBATH_THREADS`; `None` leaves the default.
pub fn thread_count(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Parse(format!(
                "MODBATH_THREADS must be a nonnegative integer, got \"{v}\""
            ))),
        },
    }
}
