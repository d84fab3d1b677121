//! Flat `key = value` configuration files. `#` starts a comment, arrays are
//! comma separated.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::InvalidInput(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::InvalidInput(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
        }
        Ok(Config { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidInput(format!("{key}: cannot parse '{v}'"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::InvalidInput(format!("missing key '{key}'")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.raw(key) {
            None => Ok(None),
            Some("") => Ok(Some(Vec::new())),
            Some(v) => v
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    s.parse()
                        .map_err(|_| Error::InvalidInput(format!("{key}: cannot parse '{s}'")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
