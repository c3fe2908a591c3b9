//! `key = value` run configuration shared by all subcommands.
//!
//! Explicit flags win over the file, the file wins over built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use gcims_core::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::Io {
                    path: path.to_path_buf(),
                    source: e,
                }
            } else {
                Error::ConfigInvalid(format!("{}: {e}", path.display()))
            }
        })?;
        text.parse()
    }

    /// Flag value, else config value, else `None`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::ConfigInvalid(format!("config key {key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Entries whose key starts with `prefix`, with the prefix removed.
    pub fn prefixed(&self, prefix: &str) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(prefix).map(|k| (k.to_string(), v.clone())))
            .collect()
    }

    /// Fails on keys outside `known` that do not start with an allowed prefix.
    pub fn reject_unknown(&self, known: &[&str], prefixes: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !known.contains(&key.as_str()) && !prefixes.iter().any(|p| key.starts_with(p)) {
                return Err(Error::ConfigInvalid(format!("unknown config key {key:?}")));
            }
        }
        Ok(())
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::ConfigInvalid(format!("config line {}: expected key = value", n + 1)))?;
            let k = k.trim().replace('-', "_");
            if values.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::ConfigInvalid(format!("config line {}: duplicate key {k}", n + 1)));
            }
        }
        Ok(RunConfig { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let c: RunConfig = "seed = 7\n# comment\ncv = 3".parse().unwrap();
        assert_eq!(c.get_or(Some(9u64), "seed", 1).unwrap(), 9);
        assert_eq!(c.get_or(None::<u64>, "seed", 1).unwrap(), 7);
        assert_eq!(c.get_or(None::<u64>, "n", 76).unwrap(), 76);
        assert!(c.get_or(None::<f64>, "cv", 0.0).is_ok());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!("seed 7".parse::<RunConfig>().is_err());
        assert!("a = 1\na = 2".parse::<RunConfig>().is_err());
        let c: RunConfig = "seed = x".parse().unwrap();
        assert!(c.pick(None::<u64>, "seed").is_err());
        let c: RunConfig = "model.max_depth = 3\nbogus = 1".parse().unwrap();
        assert_eq!(c.prefixed("model.").get("max_depth").map(String::as_str), Some("3"));
        assert!(c.reject_unknown(&["seed"], &["model."]).is_err());
    }
}
