//! Experiment configuration: a JSON or TOML file, flag overrides and the
//! seed environment variable.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "USTLAB_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    /// Parameters of the subcommand, named as its long flags with `_`.
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl ExperimentConfig {
    /// Reads `.toml` files as TOML and anything else as JSON.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|x| x.eq_ignore_ascii_case("toml"));
        if is_toml {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }
}

/// Run-level settings after resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

pub fn resolve(
    flag_seed: Option<u64>,
    flag_workers: Option<usize>,
    flag_out: Option<PathBuf>,
    file: &ExperimentConfig,
) -> Result<Resolved, CliError> {
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={s:?} is not a 64-bit unsigned integer")))?,
        ),
        Err(_) => None,
    };
    let workers = flag_workers.or(file.workers).unwrap_or(1);
    if workers == 0 {
        return Err(CliError::Config("workers must be at least 1".into()));
    }
    Ok(Resolved {
        seed: flag_seed.or(file.seed).or(env_seed).unwrap_or(0),
        workers,
        out: flag_out.or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("ustlab-out")),
    })
}

/// Overlays the flags that were given on the config-file parameters.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, params: &Map<String, Value>) -> Result<T, CliError> {
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Config(e.to_string()))? else {
        return Err(CliError::Config("flags do not form a map".into()));
    };
    let mut merged = params.clone();
    for (k, v) in given {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("parameters: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    struct P {
        samples: Option<usize>,
        sizes: Option<Vec<u32>>,
    }

    #[test]
    fn flags_win() {
        let mut params = Map::new();
        params.insert("samples".into(), 10.into());
        params.insert("sizes".into(), serde_json::json!([8, 16]));
        let flags = P {
            samples: Some(99),
            sizes: None,
        };
        let m = merge(&flags, &params).unwrap();
        assert_eq!(m.samples, Some(99));
        assert_eq!(m.sizes, Some(vec![8, 16]));
    }

    #[test]
    fn bad_parameter_type_is_a_config_error() {
        let mut params = Map::new();
        params.insert("samples".into(), "many".into());
        assert!(matches!(merge(&P::default(), &params), Err(CliError::Config(_))));
    }

    #[test]
    fn toml_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        let j = dir.path().join("c.json");
        std::fs::write(&t, "seed = 5\nworkers = 2\n[params]\nsamples = 7\n").unwrap();
        std::fs::write(&j, r#"{"seed": 5, "workers": 2, "params": {"samples": 7}}"#).unwrap();
        assert_eq!(ExperimentConfig::load(&t).unwrap(), ExperimentConfig::load(&j).unwrap());
        std::fs::write(&j, r#"{"seed": 5, "colour": 1}"#).unwrap();
        assert!(ExperimentConfig::load(&j).is_err());
    }
}
