use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },

    #[error("key `{key}` set on line {first} and again on line {second}")]
    DuplicateKey { key: String, first: usize, second: usize },
}

/// A value read from a config file with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub value: String,
    pub line: usize,
}

/// Parses `key = value` lines. Blank lines and text after `#` are ignored.
/// Keys outside `allowed` are rejected.
pub fn parse_config(text: &str, allowed: &[&str]) -> Result<BTreeMap<String, ConfigEntry>, ConfigError> {
    let mut out: BTreeMap<String, ConfigEntry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Parse { line, message: format!("expected `key = value`, found `{content}`") });
        };
        let (key, value) = (k.trim(), v.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Parse { line, message: format!("invalid key `{key}`") });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse { line, message: format!("missing value for `{key}`") });
        }
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey { key: key.to_string(), line });
        }
        if let Some(prev) = out.get(key) {
            return Err(ConfigError::DuplicateKey { key: key.to_string(), first: prev.line, second: line });
        }
        out.insert(key.to_string(), ConfigEntry { value: value.to_string(), line });
    }
    Ok(out)
}

pub fn load_config(path: &Path, allowed: &[&str]) -> Result<BTreeMap<String, ConfigEntry>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text, allowed)
}
