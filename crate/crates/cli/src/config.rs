//! Flat `key=value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// A configuration error, always tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub key: String,
    pub reason: String,
}

impl UsageError {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        UsageError {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.reason)
    }
}

impl std::error::Error for UsageError {}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, UsageError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(UsageError::new(
                line,
                format!("line {} is not of the form key=value", i + 1),
            ));
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(UsageError::new("", format!("line {} has an empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::new("config", format!("{}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Turns `--key value` pairs into assignments. `--key=value` is accepted too.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, UsageError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(key) = a.strip_prefix("--") else {
            return Err(UsageError::new(a.as_str(), "expected an option of the form --key value"));
        };
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
            continue;
        }
        match it.next() {
            Some(v) => out.push((key.to_string(), v.clone())),
            None => return Err(UsageError::new(key, "missing value")),
        }
    }
    Ok(out)
}

/// Resolved parameters of one experiment: every declared key with its
/// default or overridden value.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    /// Applies `assignments` in order over `defaults`. Keys not declared in
    /// `defaults` are rejected.
    pub fn resolve(
        defaults: &[(&str, &str)],
        assignments: &[(String, String)],
    ) -> Result<Self, UsageError> {
        let mut values: BTreeMap<String, String> = defaults
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for (k, v) in assignments {
            match values.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => return Err(UsageError::new(k.as_str(), "unknown key for this experiment")),
            }
        }
        Ok(Params { values })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("undeclared key {key}"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, UsageError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|e| UsageError::new(key, format!("cannot parse {raw:?}: {e}")))
    }

    /// A number in the closed range `[lo, hi]`.
    pub fn in_range<T>(&self, key: &str, lo: T, hi: T) -> Result<T, UsageError>
    where
        T: FromStr + PartialOrd + fmt::Display + Copy,
        T::Err: fmt::Display,
    {
        let v: T = self.get(key)?;
        if v < lo || v > hi {
            return Err(UsageError::new(key, format!("{v} is outside [{lo}, {hi}]")));
        }
        Ok(v)
    }

    /// A comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, UsageError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|e| UsageError::new(key, format!("cannot parse {p:?}: {e}")))
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
