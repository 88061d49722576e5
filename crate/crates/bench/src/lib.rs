//! Synthetic-data generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use traitstat_core::analysis::AnalysisRow;
use traitstat_core::encoding::EncodedPredictors;
use traitstat_core::scoring::TraitScores;
use traitstat_core::types::Trait;

/// Rows with all twelve demographics populated and mild planted effects,
/// enough structure for the tree grower to do real work.
pub fn synthetic_rows(seed: u64, n: usize) -> Vec<AnalysisRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut p = EncodedPredictors::default();
            p.growth = rng.gen_range(0..=4);
            p.gender = rng.gen_range(0..=3);
            p.hand = rng.gen_range(0..=3);
            p.education = rng.gen_range(0..=4);
            p.urban = rng.gen_range(0..=3);
            p.engnat = rng.gen_range(0..=2);
            p.orientation = rng.gen_range(0..=5);
            p.married = rng.gen_range(0..=3);
            p.family = rng.gen_range(0..=3);
            p.religion = rng.gen_range(0..=12);
            p.race = rng.gen_range(0..=5);
            p.voted = rng.gen_range(0..=2);
            let mut scores = TraitScores::default();
            for t in Trait::ALL {
                let base = 22.0
                    + 2.0 * p.gender as f64
                    + 1.0 * p.growth as f64
                    + 0.5 * p.education as f64
                    + rng.gen_range(-5.0..5.0);
                scores.set(t, Some(base.round().clamp(10.0, 50.0) as u8));
            }
            AnalysisRow {
                source: "bench".into(),
                row_index: i as u32,
                scores,
                predictors: p,
                country: None,
            }
        })
        .collect()
}

/// A raw tab-separated response file in the layout of the first dataset.
pub fn synthetic_tsv(seed: u64, n: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut header: Vec<String> = ["race", "age", "engnat", "gender", "hand", "source", "country"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for t in ["E", "N", "A", "C", "O"] {
        for i in 1..=10 {
            header.push(format!("{t}{i}"));
        }
    }
    let mut out = header.join("\t");
    out.push('\n');
    for _ in 0..n {
        let mut row = vec![
            rng.gen_range(1..=5).to_string(),
            rng.gen_range(13..=80).to_string(),
            rng.gen_range(1..=2).to_string(),
            rng.gen_range(1..=2).to_string(),
            rng.gen_range(1..=3).to_string(),
            "1".to_string(),
            "US".to_string(),
        ];
        for _ in 0..50 {
            row.push(rng.gen_range(1..=5).to_string());
        }
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}
