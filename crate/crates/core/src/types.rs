//! Shared domain vocabulary: the five traits, the twelve predictors, and the
//! three factor sets they group into.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Trait {
    E,
    N,
    A,
    C,
    O,
}

impl Trait {
    pub const ALL: [Trait; 5] = [Trait::E, Trait::N, Trait::A, Trait::C, Trait::O];

    pub fn as_str(&self) -> &'static str {
        match self {
            Trait::E => "E",
            Trait::N => "N",
            Trait::A => "A",
            Trait::C => "C",
            Trait::O => "O",
        }
    }

    pub fn full_name(&self) -> &'static str {
        match self {
            Trait::E => "Extroversion",
            Trait::N => "Neuroticism",
            Trait::A => "Agreeableness",
            Trait::C => "Conscientiousness",
            Trait::O => "Openness",
        }
    }
}

impl fmt::Display for Trait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Trait {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E" | "e" => Ok(Trait::E),
            "N" | "n" => Ok(Trait::N),
            "A" | "a" => Ok(Trait::A),
            "C" | "c" => Ok(Trait::C),
            "O" | "o" => Ok(Trait::O),
            _ => Err(format!("unknown trait {s:?} (expected one of E N A C O)")),
        }
    }
}

/// Whether a predictor's categories carry a meaningful order. Ordinal
/// categories may only merge with adjacent codes during tree growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredictorKind {
    Ordinal,
    Nominal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    Growth,
    Gender,
    Hand,
    Education,
    Urban,
    Engnat,
    Orientation,
    Married,
    Family,
    Voted,
    Religion,
    Race,
}

impl Predictor {
    pub const ALL: [Predictor; 12] = [
        Predictor::Growth,
        Predictor::Gender,
        Predictor::Hand,
        Predictor::Education,
        Predictor::Urban,
        Predictor::Engnat,
        Predictor::Orientation,
        Predictor::Married,
        Predictor::Family,
        Predictor::Voted,
        Predictor::Religion,
        Predictor::Race,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Predictor::Growth => "growth",
            Predictor::Gender => "gender",
            Predictor::Hand => "hand",
            Predictor::Education => "education",
            Predictor::Urban => "urban",
            Predictor::Engnat => "engnat",
            Predictor::Orientation => "orientation",
            Predictor::Married => "married",
            Predictor::Family => "family",
            Predictor::Voted => "voted",
            Predictor::Religion => "religion",
            Predictor::Race => "race",
        }
    }

    /// Highest valid category code; 0 always means missing.
    pub fn max_code(&self) -> u8 {
        match self {
            Predictor::Growth => 4,
            Predictor::Gender => 3,
            Predictor::Hand => 3,
            Predictor::Education => 4,
            Predictor::Urban => 3,
            Predictor::Engnat => 2,
            Predictor::Orientation => 5,
            Predictor::Married => 3,
            Predictor::Family => 3,
            Predictor::Voted => 2,
            Predictor::Religion => 12,
            Predictor::Race => 5,
        }
    }

    /// Religion and race carry no defensible ordering; everything else keeps
    /// its listed code order.
    pub fn kind(&self) -> PredictorKind {
        match self {
            Predictor::Religion | Predictor::Race => PredictorKind::Nominal,
            _ => PredictorKind::Ordinal,
        }
    }

    pub fn factor_set(&self) -> FactorSet {
        match self {
            Predictor::Growth | Predictor::Gender | Predictor::Hand => FactorSet::Biological,
            Predictor::Education
            | Predictor::Urban
            | Predictor::Engnat
            | Predictor::Orientation
            | Predictor::Married
            | Predictor::Family => FactorSet::Family,
            Predictor::Religion | Predictor::Race | Predictor::Voted => FactorSet::Culture,
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Predictor {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Predictor::ALL
            .iter()
            .find(|p| p.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown predictor {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorSet {
    Biological,
    Family,
    Culture,
}

impl FactorSet {
    pub const ALL: [FactorSet; 3] = [FactorSet::Biological, FactorSet::Family, FactorSet::Culture];

    pub fn as_str(&self) -> &'static str {
        match self {
            FactorSet::Biological => "biological",
            FactorSet::Family => "family",
            FactorSet::Culture => "culture",
        }
    }

    pub fn predictors(&self) -> &'static [Predictor] {
        match self {
            FactorSet::Biological => &[Predictor::Growth, Predictor::Gender, Predictor::Hand],
            FactorSet::Family => &[
                Predictor::Education,
                Predictor::Urban,
                Predictor::Engnat,
                Predictor::Orientation,
                Predictor::Married,
                Predictor::Family,
            ],
            FactorSet::Culture => &[Predictor::Religion, Predictor::Race, Predictor::Voted],
        }
    }
}

impl fmt::Display for FactorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FactorSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FactorSet::ALL
            .iter()
            .find(|f| f.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown factor set {s:?} (expected biological|family|culture)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_sets_partition_predictors() {
        let total: usize = FactorSet::ALL.iter().map(|f| f.predictors().len()).sum();
        assert_eq!(total, 12);
        for p in Predictor::ALL {
            assert!(p.factor_set().predictors().contains(&p));
        }
    }

    #[test]
    fn round_trip_names() {
        for p in Predictor::ALL {
            assert_eq!(p.as_str().parse::<Predictor>().unwrap(), p);
        }
        for t in Trait::ALL {
            assert_eq!(t.as_str().parse::<Trait>().unwrap(), t);
        }
    }
}
