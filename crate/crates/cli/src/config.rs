use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Flat `key = value` parameters. Every lookup is recorded so reports can
/// embed the resolved configuration, defaults included.
#[derive(Clone, Debug, Default)]
pub struct Params {
    given: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Params {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut given = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            given.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params { given, resolved: BTreeMap::new() })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Command-line values take precedence over the file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.given.insert(key.to_string(), value.into());
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let out = match self.given.get(key) {
            Some(raw) => raw.parse().map_err(|e| CliError::Usage(format!("bad value for {key}: {e}")))?,
            None => default,
        };
        self.resolved.insert(key.to_string(), out.to_string());
        Ok(out)
    }

    pub fn get_str(&mut self, key: &str, default: &str) -> String {
        let out = self.given.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), out.clone());
        out
    }

    pub fn get_opt(&mut self, key: &str) -> Option<String> {
        let out = self.given.get(key).cloned();
        if let Some(v) = &out {
            self.resolved.insert(key.to_string(), v.clone());
        }
        out
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}
