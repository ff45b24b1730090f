//! Flat `key = value` configuration files and flag resolution.
//!
//! A value given on the command line wins over the file, which wins over the
//! built-in default. The root seed additionally honors `MPCLAB_SEED`, which
//! sits between the command line and the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const SEED_ENV: &str = "MPCLAB_SEED";

/// Every key a configuration file may set.
pub const KEYS: [&str; 16] = [
    "protocol", "n", "h", "h_ratio", "alpha", "lambda", "depth", "seed", "seeds", "strategy", "function", "width",
    "sender", "twin", "output", "polylog_k",
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: `{key}` set twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("bad value for {key}: `{value}` ({detail})")]
    BadValue { key: String, value: String, detail: String },
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.to_string(),
            })?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.to_string(),
                });
            }
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { line, key });
            }
            if values.insert(key.clone(), value.to_string()).is_some() {
                return Err(ConfigError::Duplicate { line, key });
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Loads `path` if given, otherwise an empty file.
    pub fn load_opt(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.raw(key).map(|v| parse_value(key, v)).transpose()
    }

    /// A comma-separated list.
    pub fn get_list<T>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.raw(key).map(|v| parse_list(key, v)).transpose()
    }

    /// `cli`, else the file's value, else `default`.
    pub fn pick<T>(&self, cli: Option<T>, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(match cli {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn pick_opt<T>(&self, cli: Option<T>, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_list<T>(&self, cli: Vec<T>, key: &str, default: Vec<T>) -> Result<Vec<T>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if !cli.is_empty() {
            return Ok(cli);
        }
        Ok(self.get_list(key)?.unwrap_or(default))
    }

    /// Root seed: command line, then `MPCLAB_SEED`, then the file, then `default`.
    pub fn root_seed(&self, cli: Option<u64>, env: Option<&str>, default: u64) -> Result<u64, ConfigError> {
        if let Some(s) = cli {
            return Ok(s);
        }
        if let Some(v) = env {
            return parse_value(SEED_ENV, v);
        }
        Ok(self.get("seed")?.unwrap_or(default))
    }
}

/// The current value of `MPCLAB_SEED`, if set and non-empty.
pub fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok().filter(|v| !v.trim().is_empty())
}

fn parse_value<T>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T: FromStr,
    T::Err: Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        detail: e.to_string(),
    })
}

fn parse_list<T>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T: FromStr,
    T::Err: Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}
