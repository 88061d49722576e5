//! Predictor encoding: raw demographics to ordinal category codes, with 0
//! standing for missing, unmapped, or unavailable everywhere.

use crate::ingest::{DatasetManifest, RawRecord};
use crate::types::Predictor;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Ages outside this window are junk (the raw files contain six-digit ages)
/// and encode as missing; the youngest defined bucket starts at 12.
pub const AGE_VALID_MIN: i64 = 12;
pub const AGE_VALID_MAX: i64 = 100;

/// The twelve category codes of one respondent; 0 means missing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedPredictors {
    pub growth: u8,
    pub gender: u8,
    pub hand: u8,
    pub education: u8,
    pub urban: u8,
    pub engnat: u8,
    pub orientation: u8,
    pub married: u8,
    pub family: u8,
    pub voted: u8,
    pub religion: u8,
    pub race: u8,
}

impl EncodedPredictors {
    pub fn get(&self, p: Predictor) -> u8 {
        match p {
            Predictor::Growth => self.growth,
            Predictor::Gender => self.gender,
            Predictor::Hand => self.hand,
            Predictor::Education => self.education,
            Predictor::Urban => self.urban,
            Predictor::Engnat => self.engnat,
            Predictor::Orientation => self.orientation,
            Predictor::Married => self.married,
            Predictor::Family => self.family,
            Predictor::Voted => self.voted,
            Predictor::Religion => self.religion,
            Predictor::Race => self.race,
        }
    }

    pub fn set(&mut self, p: Predictor, code: u8) {
        debug_assert!(code <= p.max_code());
        match p {
            Predictor::Growth => self.growth = code,
            Predictor::Gender => self.gender = code,
            Predictor::Hand => self.hand = code,
            Predictor::Education => self.education = code,
            Predictor::Urban => self.urban = code,
            Predictor::Engnat => self.engnat = code,
            Predictor::Orientation => self.orientation = code,
            Predictor::Married => self.married = code,
            Predictor::Family => self.family = code,
            Predictor::Voted => self.voted = code,
            Predictor::Religion => self.religion = code,
            Predictor::Race => self.race = code,
        }
    }
}

/// Age in years to growth stage: 12-24 youth, 25-40 early adulthood, 41-60
/// late adulthood, 61+ old age. Outside [12, 100] encodes as missing.
pub fn bucket_growth(age: i64) -> u8 {
    if !(AGE_VALID_MIN..=AGE_VALID_MAX).contains(&age) {
        0
    } else if age <= 24 {
        1
    } else if age <= 40 {
        2
    } else if age <= 60 {
        3
    } else {
        4
    }
}

/// Household size to family bucket: 1-3 small, 4-10 medium, 11+ large.
pub fn bucket_family(size: i64) -> u8 {
    if size <= 0 {
        0
    } else if size <= 3 {
        1
    } else if size <= 10 {
        2
    } else {
        3
    }
}

/// Map a raw survey value through a recode table; unmapped values are
/// missing.
pub fn recode_category(raw: i64, map: &BTreeMap<i64, u8>) -> u8 {
    map.get(&raw).copied().unwrap_or(0)
}

/// Encode all twelve predictors of one record. Total: predictors without a
/// column in this dataset, or with unparseable/unmapped cells, encode as 0.
pub fn encode_record(record: &RawRecord<'_>, manifest: &DatasetManifest) -> EncodedPredictors {
    let mut out = EncodedPredictors::default();
    for p in Predictor::ALL {
        let Some(column) = manifest.demographic_columns.get(&p) else {
            continue; // unavailable in this dataset
        };
        let Some(cell) = record.cell(column) else {
            continue;
        };
        let Ok(raw) = cell.trim().parse::<i64>() else {
            continue;
        };
        let code = match p {
            Predictor::Growth => bucket_growth(raw),
            Predictor::Family => bucket_family(raw),
            _ => match manifest.recode_maps.get(&p) {
                Some(map) => recode_category(raw, map),
                // No recode map: the raw coding already matches, pass codes
                // inside range through and drop the rest.
                None => {
                    if raw >= 1 && raw <= p.max_code() as i64 {
                        raw as u8
                    } else {
                        0
                    }
                }
            },
        };
        out.set(p, code);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_buckets() {
        assert_eq!(bucket_growth(30), 2);
        assert_eq!(bucket_growth(61), 4);
        assert_eq!(bucket_growth(8), 0);
        assert_eq!(bucket_growth(12), 1);
        assert_eq!(bucket_growth(24), 1);
        assert_eq!(bucket_growth(25), 2);
        assert_eq!(bucket_growth(41), 3);
        assert_eq!(bucket_growth(60), 3);
        assert_eq!(bucket_growth(100), 4);
        assert_eq!(bucket_growth(101), 0);
        assert_eq!(bucket_growth(123456), 0);
    }

    #[test]
    fn family_buckets() {
        assert_eq!(bucket_family(2), 1);
        assert_eq!(bucket_family(11), 3);
        assert_eq!(bucket_family(0), 0);
        assert_eq!(bucket_family(-4), 0);
        assert_eq!(bucket_family(3), 1);
        assert_eq!(bucket_family(4), 2);
        assert_eq!(bucket_family(10), 2);
    }

    #[test]
    fn bucketing_is_monotone() {
        let mut prev = bucket_growth(AGE_VALID_MIN);
        for age in AGE_VALID_MIN..=AGE_VALID_MAX {
            let b = bucket_growth(age);
            assert!(b >= prev);
            prev = b;
        }
        let mut prev = bucket_family(1);
        for size in 1..=30 {
            let b = bucket_family(size);
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn recode_basics() {
        let mut map = BTreeMap::new();
        // Several raw values collapse to one code.
        map.insert(40, 4);
        map.insert(50, 4);
        map.insert(60, 4);
        map.insert(10, 1);
        assert_eq!(recode_category(40, &map), 4);
        assert_eq!(recode_category(50, &map), 4);
        assert_eq!(recode_category(10, &map), 1);
        assert_eq!(recode_category(99, &map), 0);

        let identity: BTreeMap<i64, u8> = (1..=3).map(|v| (v, v as u8)).collect();
        for v in 1..=3 {
            assert_eq!(recode_category(v, &identity), v as u8);
        }
    }

    #[test]
    fn encodes_record_with_unavailable_predictors() {
        use crate::ingest::{parse_dataset, tests as ingest_tests};
        let m = ingest_tests::tiny_manifest(); // only growth + gender available
        let text = ingest_tests::tiny_text(&[&ingest_tests::row_of(&"3 ".repeat(50), "19", "2")]);
        let t = parse_dataset(&m, &text).unwrap();
        let e = encode_record(&t.record(0), &m);
        assert_eq!(e.growth, 1);
        assert_eq!(e.gender, 2);
        assert_eq!(e.family, 0);
        assert_eq!(e.religion, 0);
        // Totality: everything inside range.
        for p in Predictor::ALL {
            assert!(e.get(p) <= p.max_code());
        }
    }

    #[test]
    fn junk_cells_encode_as_missing() {
        use crate::ingest::{parse_dataset, tests as ingest_tests};
        let m = ingest_tests::tiny_manifest();
        let text =
            ingest_tests::tiny_text(&[&ingest_tests::row_of(&"3 ".repeat(50), "abc", "9")]);
        let t = parse_dataset(&m, &text).unwrap();
        let e = encode_record(&t.record(0), &m);
        assert_eq!(e.growth, 0); // non-numeric age
        assert_eq!(e.gender, 0); // 9 unmapped
    }
}
