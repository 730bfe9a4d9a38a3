//! Flat key-value settings: config files, flags and run manifests share one format.
//!
//! ```text
//! # comment
//! model = saturated
//! beta = 0.5
//! ```
//!
//! Every value a command reads, including defaults, is recorded so that the manifest
//! written next to the outputs names the complete configuration.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Debug;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

pub const SEED_ENV: &str = "SATDYN_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeMap<String, String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!("line {}: expected key = value", lineno + 1))
            })?;
            values.insert(normalize(k), v.trim().to_string());
        }
        Ok(Self {
            values,
            used: RefCell::default(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            std::io::Error::new(e.kind(), format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize(key), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn record(&self, key: &str, value: String) {
        self.used.borrow_mut().insert(key.to_string(), value);
    }

    fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
        raw.parse()
            .map_err(|_| CliError::usage(format!("invalid value '{raw}' for {key}")))
    }

    /// Reads `key`, falling back to `default`; records the value used.
    pub fn get<T: FromStr + Debug>(&self, key: &str, default: T) -> Result<T, CliError> {
        let value = match self.values.get(key) {
            Some(raw) => Self::parse_value(key, raw)?,
            None => default,
        };
        self.record(key, format!("{value:?}"));
        Ok(value)
    }

    pub fn get_opt<T: FromStr + Debug>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            Some(raw) => {
                let v: T = Self::parse_value(key, raw)?;
                self.record(key, format!("{v:?}"));
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    pub fn get_word(&self, key: &str, default: &str) -> String {
        let v = self
            .values
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        v
    }

    pub fn get_word_opt(&self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.record(key, v.clone());
        }
        v
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, CliError> {
        self.get(key, false)
    }

    /// Comma-separated reals.
    pub fn get_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let list = match self.values.get(key) {
            Some(raw) => raw
                .split(',')
                .map(|s| Self::parse_value::<f64>(key, s.trim()))
                .collect::<Result<Vec<_>, _>>()?,
            None => default.to_vec(),
        };
        if list.is_empty() {
            return Err(CliError::usage(format!("{key} must not be empty")));
        }
        self.record(key, join(&list));
        Ok(list)
    }

    pub fn get_list_opt(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        if self.values.contains_key(key) {
            self.get_list(key, &[]).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Seed from settings, else `SATDYN_SEED`, else [`DEFAULT_SEED`].
    pub fn seed(&self) -> Result<u64, CliError> {
        let seed = match self.values.get("seed") {
            Some(raw) => Self::parse_value("seed", raw)?,
            None => match std::env::var(SEED_ENV) {
                Ok(raw) => Self::parse_value(SEED_ENV, raw.trim())?,
                Err(_) => DEFAULT_SEED,
            },
        };
        self.record("seed", seed.to_string());
        Ok(seed)
    }

    /// Every key read so far with the value actually used.
    pub fn used(&self) -> BTreeMap<String, String> {
        self.used.borrow().clone()
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_records() {
        let s = Settings::parse("# c\nbeta = 0.5\nsigma-scale=0.2\n\nbetas = 0, 0.25\n").unwrap();
        assert_eq!(s.get::<f64>("beta", 0.0).unwrap(), 0.5);
        assert_eq!(s.get::<f64>("sigma_scale", 1.0).unwrap(), 0.2);
        assert_eq!(s.get::<usize>("n", 4096).unwrap(), 4096);
        assert_eq!(s.get_list("betas", &[]).unwrap(), vec![0.0, 0.25]);
        let used = s.used();
        assert_eq!(used["n"], "4096");
        assert_eq!(used["betas"], "0.0,0.25");
    }

    #[test]
    fn floats_round_trip_through_records() {
        let s = Settings::default();
        let v = s.get::<f64>("alpha", 0.15 / 365.0).unwrap();
        let back = Settings::parse(&format!("alpha={}", s.used()["alpha"])).unwrap();
        assert_eq!(
            back.get::<f64>("alpha", 0.0).unwrap().to_bits(),
            v.to_bits()
        );
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let s = Settings::parse("n = many").unwrap();
        assert!(matches!(s.get::<usize>("n", 1), Err(CliError::Usage(_))));
        assert!(Settings::parse("no equals sign").is_err());
    }
}
