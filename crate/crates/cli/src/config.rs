//! Flat `key = value` configuration with precedence flag > file > default.
//!
//! Every value a command reads is recorded in canonical form so the run can be
//! replayed from the written `resolved.cfg`.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Keys accepted in config files. `out` and `config` are deliberately absent.
pub const KNOWN_KEYS: &[&str] = &[
    "ell",
    "q",
    "variant",
    "strip-x",
    "strip-eps",
    "n",
    "n-ens",
    "n-iter",
    "burn-in",
    "seed",
    "delta",
    "bins",
    "source",
    "scheme",
    "mode",
    "grid",
    "p-max",
    "min-count",
    "ell-points",
    "q-points",
    "biases",
];

pub fn canonical_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = canonical_key(key);
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!(
                "config line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }
    Ok(out)
}

pub struct Settings {
    flags: BTreeMap<String, String>,
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    pub fn new(flags: BTreeMap<String, String>, config: Option<&Path>) -> Result<Self, CliError> {
        let file = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Settings {
            flags,
            file,
            resolved: BTreeMap::new(),
        })
    }

    fn lookup(&self, key: &str) -> Option<(&str, &'static str)> {
        if let Some(v) = self.flags.get(key) {
            Some((v, "flag"))
        } else {
            self.file.get(key).map(|v| (v.as_str(), "config file"))
        }
    }

    pub fn get_opt<T>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let Some((raw, origin)) = self.lookup(key) else {
            return Ok(None);
        };
        let value: T = raw.parse().map_err(|e| {
            CliError::Usage(format!("invalid value '{raw}' for {key} ({origin}): {e}"))
        })?;
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(Some(value))
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.get_opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    /// Comma separated list of floats; recorded only when given.
    pub fn get_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some((raw, origin)) = self.lookup(key) else {
            return Ok(None);
        };
        let values = raw
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| {
                CliError::Usage(format!("invalid list '{raw}' for {key} ({origin}): {e}"))
            })?;
        let canonical: Vec<String> = values.iter().map(f64::to_string).collect();
        self.resolved.insert(key.to_string(), canonical.join(","));
        Ok(Some(values))
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    pub fn resolved_text(&self) -> String {
        self.resolved
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
