//! Flat `key = value` configuration text.
//!
//! The format is deliberately primitive: one binding per line, `#` lines and
//! blank lines ignored, dotted keys for grouping (`object.1.depth = 0.6`).
//! Values are free text until end of line; typed accessors parse them on
//! demand. Every accessor marks its key as consumed so [`KvMap::finish`] can
//! reject misspelled or misplaced keys instead of silently ignoring them.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Parsed key-value bindings with consumption tracking.
#[derive(Debug)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
    consumed: RefCell<BTreeSet<String>>,
}

impl KvMap {
    /// Parses configuration text. Rejects duplicate keys and lines that are
    /// neither bindings, comments, nor blank.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }
        Ok(KvMap { entries, consumed: RefCell::new(BTreeSet::new()) })
    }

    /// Raw value for `key`, marking it consumed.
    pub fn raw(&self, key: &str) -> Option<&str> {
        let hit = self.entries.get(key).map(String::as_str);
        if hit.is_some() {
            self.consumed.borrow_mut().insert(key.to_string());
        }
        hit
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| Error::config(format!("missing required key '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| Error::config(format!("key '{key}': expected integer, got '{v}'")))
            })
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    /// Comma-separated float list.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|part| parse_f64(key, part))
                    .collect::<Result<Vec<f64>>>()
            })
            .transpose()
    }

    /// Comma-separated unsigned integer list.
    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|part| {
                        part.trim().parse::<usize>().map_err(|_| {
                            Error::config(format!(
                                "key '{key}': expected integer, got '{}'",
                                part.trim()
                            ))
                        })
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .transpose()
    }

    /// Distinct numeric group ids appearing as `<prefix><id>.<rest>`,
    /// ascending. Does not mark anything consumed.
    pub fn group_ids(&self, prefix: &str) -> Result<Vec<usize>> {
        let mut ids = BTreeSet::new();
        for key in self.entries.keys() {
            if let Some(rest) = key.strip_prefix(prefix) {
                let id_text = rest.split('.').next().unwrap_or("");
                let id: usize = id_text.parse().map_err(|_| {
                    Error::config(format!("key '{key}': expected '{prefix}<number>.<field>'"))
                })?;
                ids.insert(id);
            }
        }
        Ok(ids.into_iter().collect())
    }

    /// Errors if any key was never consumed — catches typos and stray
    /// settings that would otherwise be silently ignored.
    pub fn finish(&self) -> Result<()> {
        let consumed = self.consumed.borrow();
        let stray: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| !consumed.contains(*k))
            .map(String::as_str)
            .collect();
        if stray.is_empty() {
            Ok(())
        } else {
            Err(Error::config(format!("unrecognized keys: {}", stray.join(", "))))
        }
    }
}

fn parse_f64(key: &str, text: &str) -> Result<f64> {
    let t = text.trim();
    t.parse::<f64>()
        .map_err(|_| Error::config(format!("key '{key}': expected number, got '{t}'")))
}
