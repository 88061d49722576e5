//! Trait scoring: the sum of ten keyed items per trait. A +keyed item
//! contributes its raw answer X, a -keyed item contributes 6 - X, so every
//! complete trait lands in [10, 50]. Any answer outside {1..5} (the datasets
//! mark a missed answer as 0) invalidates that trait only.

use crate::ingest::{DatasetManifest, RawRecord};
use crate::manifest::{split_pair, KvDoc, KvError};
use crate::types::Trait;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("key table error: {0}")]
    Format(#[from] KvError),
    #[error("key table {id:?}: {message}")]
    BadKeyTable { id: String, message: String },
    #[error("item column {column:?} not present in record (manifest defect)")]
    UnresolvableItem { column: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Key {
    Plus,
    Minus,
}

impl Key {
    pub fn flip(self) -> Key {
        match self {
            Key::Plus => Key::Minus,
            Key::Minus => Key::Plus,
        }
    }
}

/// Ten (column, key) pairs per trait.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyTable {
    pub id: String,
    pub entries: BTreeMap<Trait, Vec<(String, Key)>>,
}

impl KeyTable {
    /// Text format: `key_table_id = ...` plus one `keys.<trait>` line of ten
    /// `column:+` / `column:-` tokens.
    pub fn parse(text: &str) -> Result<KeyTable, ScoringError> {
        let doc = KvDoc::parse(text)?;
        let id = doc.require("key_table_id")?.to_string();
        let bad = |message: String| ScoringError::BadKeyTable {
            id: id.clone(),
            message,
        };
        let mut entries = BTreeMap::new();
        for t in Trait::ALL {
            let key = format!("keys.{t}");
            let tokens = doc
                .get_list(&key)
                .ok_or_else(|| bad(format!("missing {key}")))?;
            if tokens.len() != 10 {
                return Err(bad(format!("{key} must list exactly 10 items")));
            }
            let mut pairs = Vec::with_capacity(10);
            for token in tokens {
                let (col, sign) = split_pair(token, &key)?;
                let k = match sign {
                    "+" => Key::Plus,
                    "-" => Key::Minus,
                    other => return Err(bad(format!("{key}: bad sign {other:?}"))),
                };
                if pairs.iter().any(|(c, _)| c == col) {
                    return Err(bad(format!("{key}: column {col:?} repeats")));
                }
                pairs.push((col.to_string(), k));
            }
            entries.insert(t, pairs);
        }
        Ok(KeyTable { id, entries })
    }

    pub fn from_file(path: &std::path::Path) -> Result<KeyTable, ScoringError> {
        let text = std::fs::read(path)
            .map(|b| String::from_utf8_lossy(&b).into_owned())
            .map_err(|e| ScoringError::BadKeyTable {
                id: path.display().to_string(),
                message: e.to_string(),
            })?;
        Self::parse(&text)
    }
}

/// Five trait sums; missing when any contributing item was invalid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraitScores {
    pub e: Option<u8>,
    pub n: Option<u8>,
    pub a: Option<u8>,
    pub c: Option<u8>,
    pub o: Option<u8>,
}

impl TraitScores {
    pub fn get(&self, t: Trait) -> Option<u8> {
        match t {
            Trait::E => self.e,
            Trait::N => self.n,
            Trait::A => self.a,
            Trait::C => self.c,
            Trait::O => self.o,
        }
    }

    pub fn set(&mut self, t: Trait, v: Option<u8>) {
        match t {
            Trait::E => self.e = v,
            Trait::N => self.n = v,
            Trait::A => self.a = v,
            Trait::C => self.c = v,
            Trait::O => self.o = v,
        }
    }
}

/// Score one trait from ten answers. Returns None if any answer is outside
/// {1..5}.
pub fn score_trait(items: &[i64; 10], keys: &[Key; 10]) -> Option<u8> {
    let mut sum = 0i64;
    for (&x, &k) in items.iter().zip(keys) {
        if !(1..=5).contains(&x) {
            return None;
        }
        sum += match k {
            Key::Plus => x,
            Key::Minus => 6 - x,
        };
    }
    debug_assert!((10..=50).contains(&sum));
    Some(sum as u8)
}

/// Score all five traits of one record. Traits fail independently; an item
/// column missing from the record is a manifest defect and errors out.
pub fn score_record(
    record: &RawRecord<'_>,
    key_table: &KeyTable,
    _manifest: &DatasetManifest,
) -> Result<TraitScores, ScoringError> {
    let mut scores = TraitScores::default();
    for t in Trait::ALL {
        let pairs = &key_table.entries[&t];
        let mut items = [0i64; 10];
        let mut keys = [Key::Plus; 10];
        let mut valid = true;
        for (i, (col, k)) in pairs.iter().enumerate() {
            let cell = record
                .cell(col)
                .ok_or_else(|| ScoringError::UnresolvableItem { column: col.clone() })?;
            keys[i] = *k;
            match cell.trim().parse::<i64>() {
                Ok(v) => items[i] = v,
                Err(_) => {
                    valid = false;
                    items[i] = 0;
                }
            }
        }
        scores.set(t, if valid { score_trait(&items, &keys) } else { None });
    }
    Ok(scores)
}

/// The strictly alternating keying implied by the scoring formula: odd items
/// +keyed, even items -keyed, for every trait.
pub fn alternating_keys() -> [Key; 10] {
    let mut keys = [Key::Plus; 10];
    for (i, k) in keys.iter_mut().enumerate() {
        if i % 2 == 1 {
            *k = Key::Minus;
        }
    }
    keys
}
