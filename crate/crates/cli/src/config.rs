//! Flat `key = value` run configuration. Flags override file entries, and
//! every key is checked against the subcommand before anything is computed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

/// Keys understood by each subcommand.
pub fn allowed_keys(command: &str) -> &'static [&'static str] {
    match command {
        "jost" => &["profile", "out", "padding", "m-samples", "j-max"],
        "scatter" => &["profile", "out", "padding", "m-samples"],
        "spectrum" => &["profile", "out", "padding", "m-samples"],
        "evolve" => &["profile", "out", "u0", "t", "dt", "m-samples", "padding", "method"],
        "uncertainty" => &[
            "profile",
            "out",
            "u0",
            "seed",
            "epsilon",
            "constant",
            "time-gap",
            "window-lo",
            "window-hi",
            "m-samples",
            "dt",
            "padding",
        ],
        "continuation" => &[
            "profile",
            "out",
            "u0",
            "padding",
            "dt",
            "samples",
            "m-samples",
            "n0",
            "tolerance",
            "perturb-site",
            "perturb-size",
        ],
        _ => &[],
    }
}

/// `-` and `_` are interchangeable in keys.
fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

#[derive(Debug, Default, Clone)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("config line {}: expected `key = value`", k + 1)))?;
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(ConfigError(format!("config line {}: empty key", k + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(ConfigError(format!("config line {}: duplicate key `{key}`", k + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(normalize_key(key), value);
    }

    /// Rejects keys the subcommand does not know.
    pub fn validate_keys(&self, command: &str) -> ConfigResult<()> {
        let allowed = allowed_keys(command);
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError(format!(
                    "unknown key `{key}` for `{command}` (accepted: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> ConfigResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.entries
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| ConfigError(format!("bad value `{v}` for `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> ConfigResult<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> ConfigResult<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.entries.get(key).map(PathBuf::from)
    }

    pub fn positive(&self, key: &str, default: f64) -> ConfigResult<f64> {
        let v: f64 = self.get_or(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError(format!("`{key}` must be positive and finite, got {v}")));
        }
        Ok(v)
    }
}
