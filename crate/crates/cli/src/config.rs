//! Flat `key=value` config files and flag/env/default resolution.
//!
//! Precedence per field: command-line flag, then config file, then (for the
//! seed) the `TM_RBE_SEED` environment variable, then the built-in default.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Keys accepted in a config file; anything else is a usage error.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "out-dir",
    "threads",
    "deterministic",
    "timing",
    "clauses",
    "margin",
    "s",
    "states",
    "boost",
    "init-state",
    "epochs",
    "rounds",
    "rounds-per-epoch",
    "window",
    "window-proportion",
    "q1-prob",
    "max-vocab",
    "features",
    "train-n",
    "test-n",
    "noise",
    "background-rate",
    "unique",
    "classes",
    "checkpoint-every",
    "probe-clause",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "config line {}: expected `key=value`, got `{raw}`",
                    i + 1
                ))
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::usage(format!(
                    "config line {}: unknown key `{key}`",
                    i + 1
                )));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                CliError::usage(format!("config key `{key}`: cannot parse `{raw}`"))
            }),
        }
    }
}

/// Flag, then config, then default.
pub fn resolve<T: FromStr + Clone>(
    flag: Option<T>,
    cfg: &ConfigFile,
    key: &str,
    default: T,
) -> CliResult<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(cfg.get(key)?.unwrap_or(default))
}

/// Flag, then config, then `TM_RBE_SEED`, then 42.
pub fn resolve_seed(flag: Option<u64>, cfg: &ConfigFile) -> CliResult<u64> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = cfg.get("seed")? {
        return Ok(v);
    }
    match std::env::var("TM_RBE_SEED") {
        Ok(raw) => raw
            .parse()
            .map_err(|_| CliError::usage(format!("TM_RBE_SEED: cannot parse `{raw}`"))),
        Err(_) => Ok(42),
    }
}
