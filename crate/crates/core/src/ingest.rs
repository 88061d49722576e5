//! Dataset ingestion: manifest-described TSV files (optionally inside zip
//! archives), range validation, and the sample merge over shared variables.

use crate::manifest::{split_pair, KvDoc, KvError};
use crate::types::{Predictor, Trait};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("manifest error: {0}")]
    Manifest(#[from] KvError),
    #[error("manifest {dataset_id:?}: {message}")]
    BadManifest { dataset_id: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("zip archive {path}: {message}")]
    Zip { path: String, message: String },
    #[error("dataset {dataset_id:?}: header is missing required column {column:?}")]
    MissingHeaderColumn { dataset_id: String, column: String },
    #[error("dataset {dataset_id:?}: line {line} has {found} fields, expected {expected}")]
    WrongFieldCount {
        dataset_id: String,
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error("empty input: no header line")]
    EmptyInput,
    #[error("merge requires at least one shared variable")]
    NoSharedVariables,
    #[error("shared variable {variable:?} is not resolvable in dataset {dataset_id:?}")]
    UnresolvableVariable {
        variable: String,
        dataset_id: String,
    },
    #[error("datasets disagree on {what} for {name:?}; cannot merge")]
    MergeConflict { what: &'static str, name: String },
}

/// Column layout and recode configuration for one dataset, transcribed from
/// its published codebook. Shipped as a data file, not code.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub dataset_id: String,
    pub delimiter: u8,
    /// Exactly 10 ordered item columns per trait.
    pub item_columns: BTreeMap<Trait, Vec<String>>,
    /// Predictor -> raw column name. Absent predictors are unavailable in
    /// this dataset and encode as 0.
    pub demographic_columns: BTreeMap<Predictor, String>,
    /// Predictor -> (raw integer value -> category code). Predictors without
    /// a map are numeric (growth, family) and are bucketed instead.
    pub recode_maps: BTreeMap<Predictor, BTreeMap<i64, u8>>,
    pub key_table_ref: String,
    pub country_column: Option<String>,
    /// Substring selecting the data entry inside a zip archive.
    pub archive_entry: Option<String>,
}

impl DatasetManifest {
    pub fn parse(text: &str) -> Result<DatasetManifest, IngestError> {
        let doc = KvDoc::parse(text)?;
        let dataset_id = doc.require("dataset_id")?.to_string();
        let bad = |message: String| IngestError::BadManifest {
            dataset_id: dataset_id.clone(),
            message,
        };

        let delimiter = match doc.get("delimiter").unwrap_or("tab") {
            "tab" => b'\t',
            "comma" => b',',
            s if s.len() == 1 => s.as_bytes()[0],
            s => return Err(bad(format!("unsupported delimiter {s:?}"))),
        };

        let mut item_columns = BTreeMap::new();
        for t in Trait::ALL {
            let key = format!("items.{t}");
            let cols = doc
                .get_list(&key)
                .ok_or_else(|| bad(format!("missing {key}")))?;
            if cols.len() != 10 {
                return Err(bad(format!("{key} must list exactly 10 columns")));
            }
            item_columns.insert(t, cols.iter().map(|s| s.to_string()).collect());
        }

        let mut demographic_columns = BTreeMap::new();
        for (name, col) in doc.with_prefix("demographic") {
            let p: Predictor = name.parse().map_err(&bad)?;
            demographic_columns.insert(p, col.trim().to_string());
        }

        let mut recode_maps = BTreeMap::new();
        for (name, spec) in doc.with_prefix("recode") {
            let p: Predictor = name.parse().map_err(&bad)?;
            if !demographic_columns.contains_key(&p) {
                return Err(bad(format!(
                    "recode.{p} given but predictor has no demographic column"
                )));
            }
            let mut map = BTreeMap::new();
            for token in spec.split_whitespace() {
                let (raw, code) = split_pair(token, &format!("recode.{p}"))?;
                let raw: i64 = raw
                    .parse()
                    .map_err(|_| bad(format!("recode.{p}: bad raw value {raw:?}")))?;
                let code: u8 = code
                    .parse()
                    .map_err(|_| bad(format!("recode.{p}: bad code {code:?}")))?;
                if code > p.max_code() {
                    return Err(bad(format!(
                        "recode.{p}: code {code} exceeds range 0..{}",
                        p.max_code()
                    )));
                }
                map.insert(raw, code);
            }
            recode_maps.insert(p, map);
        }

        Ok(DatasetManifest {
            dataset_id,
            delimiter,
            item_columns,
            demographic_columns,
            recode_maps,
            key_table_ref: doc.require("key_table")?.to_string(),
            country_column: doc.get("country_column").map(|s| s.to_string()),
            archive_entry: doc.get("archive_entry").map(|s| s.to_string()),
        })
    }

    pub fn from_file(path: &Path) -> Result<DatasetManifest, IngestError> {
        let text = read_lossy(path)?;
        Self::parse(&text)
    }

    /// Every column the manifest requires in the header.
    pub fn required_columns(&self) -> Vec<&str> {
        let mut cols: Vec<&str> = self
            .item_columns
            .values()
            .flatten()
            .map(|s| s.as_str())
            .collect();
        cols.extend(self.demographic_columns.values().map(|s| s.as_str()));
        if let Some(c) = &self.country_column {
            cols.push(c);
        }
        cols
    }
}

/// One parsed data row. The original line is kept verbatim; fields are
/// slices into it.
#[derive(Debug, Clone)]
struct Row {
    line: Box<str>,
    /// Byte offset of each field start within `line`.
    starts: Box<[u32]>,
    source: u16,
    row_index: u32,
}

impl Row {
    fn field<'a>(&'a self, i: usize) -> &'a str {
        let start = self.starts[i] as usize;
        let end = match self.starts.get(i + 1) {
            Some(&next) => next as usize - 1,
            None => self.line.len(),
        };
        &self.line[start..end]
    }
}

/// An ordered, immutable table of raw records sharing one column layout.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    col_index: HashMap<String, usize>,
    /// Dataset ids contributing rows; each row points into this list.
    pub sources: Vec<String>,
    delimiter: u8,
    rows: Vec<Row>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.col_index.get(name).copied()
    }

    pub fn record(&self, row: usize) -> RawRecord<'_> {
        RawRecord { table: self, row }
    }

    pub fn records(&self) -> impl Iterator<Item = RawRecord<'_>> + '_ {
        (0..self.rows.len()).map(move |row| RawRecord { table: self, row })
    }

    /// Rows contributed by each source dataset, in source order.
    pub fn rows_per_source(&self) -> Vec<(String, usize)> {
        let mut counts = vec![0usize; self.sources.len()];
        for r in &self.rows {
            counts[r.source as usize] += 1;
        }
        self.sources
            .iter()
            .cloned()
            .zip(counts)
            .collect()
    }

    /// Header plus every data line, byte-identical to the parsed region for
    /// tables loaded from disk.
    pub fn serialize(&self) -> String {
        let delim = self.delimiter as char;
        let mut out = String::new();
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                out.push(delim);
            }
            out.push_str(c);
        }
        for r in &self.rows {
            out.push('\n');
            out.push_str(&r.line);
        }
        out
    }
}

/// A view over one table row: column-name access, source, and row index.
#[derive(Clone, Copy)]
pub struct RawRecord<'a> {
    table: &'a Table,
    row: usize,
}

impl<'a> RawRecord<'a> {
    pub fn cell(&self, column: &str) -> Option<&'a str> {
        self.table
            .column_index(column)
            .map(|i| self.table.rows[self.row].field(i))
    }

    pub fn cell_by_index(&self, i: usize) -> &'a str {
        self.table.rows[self.row].field(i)
    }

    pub fn source(&self) -> &'a str {
        &self.table.sources[self.table.rows[self.row].source as usize]
    }

    pub fn row_index(&self) -> u32 {
        self.table.rows[self.row].row_index
    }
}

impl fmt::Debug for RawRecord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RawRecord(source={}, row={})", self.source(), self.row)
    }
}

fn read_lossy(path: &Path) -> Result<String, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn split_starts(line: &str, delimiter: u8) -> Vec<u32> {
    let mut starts = vec![0u32];
    for (i, b) in line.bytes().enumerate() {
        if b == delimiter {
            starts.push(i as u32 + 1);
        }
    }
    starts
}

/// Parse TSV text (already decoded) into a table under `manifest`.
pub fn parse_dataset(manifest: &DatasetManifest, text: &str) -> Result<Table, IngestError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(IngestError::EmptyInput)?;
    let delim = manifest.delimiter;
    let columns: Vec<String> = {
        let starts = split_starts(header, delim);
        let row = Row {
            line: header.into(),
            starts: starts.into(),
            source: 0,
            row_index: 0,
        };
        (0..row.starts.len()).map(|i| row.field(i).to_string()).collect()
    };
    let col_index: HashMap<String, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();
    for required in manifest.required_columns() {
        if !col_index.contains_key(required) {
            return Err(IngestError::MissingHeaderColumn {
                dataset_id: manifest.dataset_id.clone(),
                column: required.to_string(),
            });
        }
    }

    let expected = columns.len();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let starts = split_starts(line, delim);
        if starts.len() != expected {
            return Err(IngestError::WrongFieldCount {
                dataset_id: manifest.dataset_id.clone(),
                line: i + 2,
                found: starts.len(),
                expected,
            });
        }
        rows.push(Row {
            line: line.into(),
            starts: starts.into(),
            source: 0,
            row_index: rows.len() as u32,
        });
    }

    Ok(Table {
        columns,
        col_index,
        sources: vec![manifest.dataset_id.clone()],
        delimiter: delim,
        rows,
    })
}

/// Load a dataset from a plain TSV file or a zip archive containing one.
pub fn load_dataset(manifest: &DatasetManifest, path: &Path) -> Result<Table, IngestError> {
    let is_zip = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("zip"));
    let text = if is_zip {
        read_zip_entry(manifest, path)?
    } else {
        read_lossy(path)?
    };
    parse_dataset(manifest, &text)
}

fn read_zip_entry(manifest: &DatasetManifest, path: &Path) -> Result<String, IngestError> {
    let zip_err = |message: String| IngestError::Zip {
        path: path.display().to_string(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut archive = zip::ZipArchive::new(file).map_err(|e| zip_err(e.to_string()))?;
    // Pick the manifest-named entry, else the largest data-looking entry.
    let mut best: Option<(usize, u64)> = None;
    for i in 0..archive.len() {
        let entry = archive.by_index(i).map_err(|e| zip_err(e.to_string()))?;
        if entry.is_dir() {
            continue;
        }
        let name = entry.name().to_string();
        if let Some(pattern) = &manifest.archive_entry {
            if name.contains(pattern.as_str()) {
                best = Some((i, entry.size()));
                break;
            }
            continue;
        }
        let looks_like_data = [".csv", ".tsv", ".txt"]
            .iter()
            .any(|ext| name.to_ascii_lowercase().ends_with(ext));
        if looks_like_data && best.is_none_or(|(_, size)| entry.size() > size) {
            best = Some((i, entry.size()));
        }
    }
    let (index, _) = best.ok_or_else(|| zip_err("no data entry found".to_string()))?;
    let mut entry = archive.by_index(index).map_err(|e| zip_err(e.to_string()))?;
    let mut bytes = Vec::with_capacity(entry.size() as usize);
    entry
        .read_to_end(&mut bytes)
        .map_err(|e| zip_err(e.to_string()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueKind {
    OutOfRange,
    NonNumeric,
    MissingColumn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub row_index: u32,
    pub column: String,
    pub kind: IssueKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub row_count: usize,
    pub issues: Vec<Issue>,
}

/// Flag item cells outside {0..5} and non-numeric demographics. Pure; the
/// table is never mutated and the report is deterministic.
pub fn validate_table(table: &Table, manifest: &DatasetManifest) -> ValidationReport {
    let mut issues = Vec::new();
    let mut item_cols = Vec::new();
    for cols in manifest.item_columns.values() {
        for c in cols {
            match table.column_index(c) {
                Some(i) => item_cols.push(i),
                None => issues.push(Issue {
                    row_index: 0,
                    column: c.clone(),
                    kind: IssueKind::MissingColumn,
                }),
            }
        }
    }
    let mut demo_cols = Vec::new();
    for c in manifest.demographic_columns.values() {
        match table.column_index(c) {
            Some(i) => demo_cols.push(i),
            None => issues.push(Issue {
                row_index: 0,
                column: c.clone(),
                kind: IssueKind::MissingColumn,
            }),
        }
    }

    for (row_i, row) in table.rows.iter().enumerate() {
        for &ci in &item_cols {
            let cell = row.field(ci);
            let ok = matches!(cell.trim(), "0" | "1" | "2" | "3" | "4" | "5");
            if !ok {
                issues.push(Issue {
                    row_index: row_i as u32,
                    column: table.columns[ci].clone(),
                    kind: if cell.trim().parse::<i64>().is_ok() {
                        IssueKind::OutOfRange
                    } else {
                        IssueKind::NonNumeric
                    },
                });
            }
        }
        for &ci in &demo_cols {
            if row.field(ci).trim().parse::<i64>().is_err() {
                issues.push(Issue {
                    row_index: row_i as u32,
                    column: table.columns[ci].clone(),
                    kind: IssueKind::NonNumeric,
                });
            }
        }
    }

    ValidationReport {
        row_count: table.n_rows(),
        issues,
    }
}

/// Row-wise concatenation of tables restricted to shared variables plus all
/// item columns. Shared variables may be named either by raw column name or
/// by predictor name (resolved through each manifest).
pub fn merge_samples(
    inputs: &[(&Table, &DatasetManifest)],
    shared_variables: &[&str],
) -> Result<(Table, DatasetManifest), IngestError> {
    if shared_variables.is_empty() {
        return Err(IngestError::NoSharedVariables);
    }
    assert!(!inputs.is_empty(), "merge_samples needs at least one input");

    // Item columns must agree across inputs (same instrument layout).
    let first_manifest = inputs[0].1;
    for (_, m) in &inputs[1..] {
        if m.item_columns != first_manifest.item_columns {
            return Err(IngestError::MergeConflict {
                what: "item columns",
                name: m.dataset_id.clone(),
            });
        }
    }

    // Resolve each shared variable to a concrete column index per table.
    let resolve = |name: &str, table: &Table, manifest: &DatasetManifest| -> Option<usize> {
        if let Some(i) = table.column_index(name) {
            return Some(i);
        }
        let p: Predictor = name.parse().ok()?;
        let col = manifest.demographic_columns.get(&p)?;
        table.column_index(col)
    };
    let mut resolved: Vec<Vec<usize>> = Vec::with_capacity(inputs.len());
    for (table, manifest) in inputs {
        let mut cols = Vec::with_capacity(shared_variables.len());
        for name in shared_variables {
            let ci = resolve(name, table, manifest).ok_or_else(|| {
                IngestError::UnresolvableVariable {
                    variable: name.to_string(),
                    dataset_id: manifest.dataset_id.clone(),
                }
            })?;
            cols.push(ci);
        }
        resolved.push(cols);
    }

    let item_names: Vec<String> = Trait::ALL
        .iter()
        .flat_map(|t| first_manifest.item_columns[t].iter().cloned())
        .collect();
    let mut columns: Vec<String> = shared_variables.iter().map(|s| s.to_string()).collect();
    for c in &item_names {
        if !columns.contains(c) {
            columns.push(c.clone());
        }
    }

    let delim = first_manifest.delimiter;
    let mut sources = Vec::new();
    let mut rows = Vec::new();
    for (k, (table, _)) in inputs.iter().enumerate() {
        let source_base = sources.len() as u16;
        sources.extend(table.sources.iter().cloned());
        let out_cols: Vec<usize> = columns
            .iter()
            .map(|name| {
                // Shared names resolve through the manifest; items by name.
                resolve(name, table, inputs[k].1)
                    .expect("merge columns resolved above")
            })
            .collect();
        for row in &table.rows {
            let mut line = String::new();
            let mut starts = Vec::with_capacity(out_cols.len());
            for (j, &ci) in out_cols.iter().enumerate() {
                if j > 0 {
                    line.push(delim as char);
                }
                starts.push(line.len() as u32);
                line.push_str(row.field(ci));
            }
            rows.push(Row {
                line: line.into(),
                starts: starts.into(),
                source: source_base + row.source,
                row_index: row.row_index,
            });
        }
    }

    // Synthesize the merged manifest: demographics restricted to predictors
    // whose column survived the restriction, recode maps required to agree.
    let mut demographic_columns = BTreeMap::new();
    let mut recode_maps: BTreeMap<Predictor, BTreeMap<i64, u8>> = BTreeMap::new();
    for name in shared_variables {
        for (_, manifest) in inputs {
            let hit = manifest
                .demographic_columns
                .iter()
                .find(|(p, col)| p.as_str() == *name || col.as_str() == *name);
            if let Some((p, _)) = hit {
                demographic_columns.insert(*p, name.to_string());
                if let Some(map) = manifest.recode_maps.get(p) {
                    if let Some(prev) = recode_maps.get(p) {
                        if prev != map {
                            return Err(IngestError::MergeConflict {
                                what: "recode map",
                                name: p.as_str().to_string(),
                            });
                        }
                    }
                    recode_maps.insert(*p, map.clone());
                }
            }
        }
    }

    let merged_manifest = DatasetManifest {
        dataset_id: inputs
            .iter()
            .map(|(_, m)| m.dataset_id.as_str())
            .collect::<Vec<_>>()
            .join("+"),
        delimiter: delim,
        item_columns: first_manifest.item_columns.clone(),
        demographic_columns,
        recode_maps,
        key_table_ref: first_manifest.key_table_ref.clone(),
        country_column: first_manifest
            .country_column
            .as_ref()
            .filter(|c| columns.contains(c))
            .cloned(),
        archive_entry: None,
    };

    let col_index = columns
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();
    Ok((
        Table {
            columns,
            col_index,
            sources,
            delimiter: delim,
            rows,
        },
        merged_manifest,
    ))
}
