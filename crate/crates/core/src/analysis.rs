//! The scored/encoded view of a raw table: one row per respondent carrying
//! trait scores, predictor codes, and the country cell when present.

use crate::encoding::{encode_record, EncodedPredictors};
use crate::ingest::{DatasetManifest, Table};
use crate::scoring::{score_record, KeyTable, ScoringError, TraitScores};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub source: String,
    pub row_index: u32,
    pub scores: TraitScores,
    pub predictors: EncodedPredictors,
    pub country: Option<String>,
}

/// Score and encode every record, preserving row order. Record-parallel.
pub fn build_analysis_rows(
    table: &Table,
    manifest: &DatasetManifest,
    key_table: &KeyTable,
) -> Result<Vec<AnalysisRow>, ScoringError> {
    let country_col = manifest
        .country_column
        .as_deref()
        .and_then(|c| table.column_index(c));
    (0..table.n_rows())
        .into_par_iter()
        .map(|i| {
            let record = table.record(i);
            let scores = score_record(&record, key_table, manifest)?;
            let predictors = encode_record(&record, manifest);
            Ok(AnalysisRow {
                source: record.source().to_string(),
                row_index: record.row_index(),
                scores,
                predictors,
                country: country_col.map(|ci| record.cell_by_index(ci).trim().to_string()),
            })
        })
        .collect()
}
