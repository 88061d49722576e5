//! The plain-text key/value format shared by dataset manifests, key tables,
//! and run config files.
//!
//! Syntax: one `key = value` pair per line, `#` starts a comment, blank lines
//! ignored. Keys may be dotted (`items.E`, `recode.race`); values are either
//! a single token or a whitespace-separated list. Duplicate keys are errors.

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KvError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("missing required key {0:?}")]
    MissingKey(String),
    #[error("key {key:?}: {message}")]
    BadValue { key: String, message: String },
}

/// Parsed key/value document, insertion-ordered lookup by exact key.
#[derive(Debug, Clone, Default)]
pub struct KvDoc {
    entries: BTreeMap<String, String>,
}

impl KvDoc {
    pub fn parse(text: &str) -> Result<KvDoc, KvError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let content = content.trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(KvError::Malformed {
                    line,
                    text: content.to_string(),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(KvError::Malformed {
                    line,
                    text: content.to_string(),
                });
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(KvError::Duplicate { line, key });
            }
        }
        Ok(KvDoc { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, KvError> {
        self.get(key).ok_or_else(|| KvError::MissingKey(key.into()))
    }

    /// Whitespace-separated token list.
    pub fn get_list(&self, key: &str) -> Option<Vec<&str>> {
        self.get(key)
            .map(|v| v.split_whitespace().collect::<Vec<_>>())
    }

    /// All keys starting with `prefix.`, with the prefix stripped.
    pub fn with_prefix<'a>(&'a self, prefix: &str) -> Vec<(&'a str, &'a str)> {
        let dotted = format!("{prefix}.");
        self.entries
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(&dotted)
                    .map(|rest| (rest, v.as_str()))
            })
            .collect()
    }
}

/// Parse `a:b` pairs used by recode maps and key tables.
pub fn split_pair<'a>(token: &'a str, key: &str) -> Result<(&'a str, &'a str), KvError> {
    token.split_once(':').ok_or_else(|| KvError::BadValue {
        key: key.to_string(),
        message: format!("expected colon-separated pair, got {token:?}"),
    })
}
