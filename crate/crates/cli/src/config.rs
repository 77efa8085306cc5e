//! `key = value` config files. Flags win over file values. Keys are the
//! long flag names without the leading `--` (`rate = 0.01`, `act-h = relu`).

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("reading config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", i + 1)))?;
            let key = k.trim().replace('_', "-");
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("config line {}: duplicate key {key}", i + 1)));
            }
        }
        Ok(Self {
            values,
            used: RefCell::default(),
        })
    }

    /// The flag value if given, otherwise the file value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.used.borrow_mut().insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Config(format!("config key {key}: {e}"))),
        }
    }

    /// A boolean switch: set by the flag, or by `key = true|false`.
    pub fn switch(&self, flag: bool, key: &str, default: bool) -> Result<bool, CliError> {
        Ok(if flag {
            !default
        } else {
            self.pick(None, key)?.unwrap_or(default)
        })
    }

    /// Fails on keys that no option of the running command read.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.values.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(CliError::Config(format!("unknown config key {k}"))),
            None => Ok(()),
        }
    }
}
