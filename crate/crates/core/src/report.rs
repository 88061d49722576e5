//! Table documents and their deterministic renderings. Numbers print at a
//! fixed precision (3 decimals for B/SE/T/P/F), rounding half away from
//! zero, locale-independent.

use crate::analysis::AnalysisRow;
use crate::regress::RegressionFit;
use crate::statcore::Summary;
use crate::types::{FactorSet, Trait};
use serde::Serialize;
use std::collections::BTreeMap;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("row has {got} cells, table has {expected} columns")]
    NotRectangular { got: usize, expected: usize },
    #[error("fit for {trait_name} does not belong to factor set {factor_set}")]
    MixedFactorSets {
        trait_name: String,
        factor_set: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Text(String),
    Int(i64),
    /// Fixed-point number with explicit print precision.
    Num { value: f64, precision: usize },
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn num3(value: f64) -> Cell {
        Cell::Num {
            value,
            precision: 3,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Num { value, precision } => format_fixed(*value, *precision),
        }
    }
}

/// Format with `precision` decimals, rounding half away from zero.
pub fn format_fixed(value: f64, precision: usize) -> String {
    if !value.is_finite() {
        return if value.is_nan() {
            "nan".to_string()
        } else if value > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let scale = 10f64.powi(precision as i32);
    let scaled = (value.abs() * scale + 0.5).floor() as i128;
    let sign = if value < 0.0 && scaled != 0 { "-" } else { "" };
    if precision == 0 {
        return format!("{sign}{scaled}");
    }
    let divisor = 10i128.pow(precision as u32);
    let whole = scaled / divisor;
    let frac = scaled % divisor;
    format!("{sign}{whole}.{frac:0width$}", width = precision)
}

#[derive(Debug, Clone, Serialize)]
pub struct TableDoc {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl TableDoc {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> TableDoc {
        TableDoc {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<(), ReportError> {
        if row.len() != self.columns.len() {
            return Err(ReportError::NotRectangular {
                got: row.len(),
                expected: self.columns.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    AlignedText,
    Csv,
    Json,
}

impl FromStr for RenderFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" | "aligned-text" | "txt" => Ok(RenderFormat::AlignedText),
            "csv" => Ok(RenderFormat::Csv),
            "json" => Ok(RenderFormat::Json),
            _ => Err(format!("unknown format {s:?} (expected text|csv|json)")),
        }
    }
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Deterministic rendering. CSV quotes text cells; aligned text pads to
/// column widths; JSON carries rendered strings so precision survives.
pub fn render(doc: &TableDoc, format: RenderFormat) -> String {
    match format {
        RenderFormat::Csv => {
            let mut out = String::new();
            out.push_str(
                &doc.columns
                    .iter()
                    .map(|c| csv_quote(c))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            for row in &doc.rows {
                out.push('\n');
                let line: Vec<String> = row
                    .iter()
                    .map(|c| match c {
                        Cell::Text(s) => csv_quote(s),
                        other => other.render(),
                    })
                    .collect();
                out.push_str(&line.join(","));
            }
            out.push('\n');
            out
        }
        RenderFormat::AlignedText => {
            let rendered: Vec<Vec<String>> = doc
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::render).collect())
                .collect();
            let mut widths: Vec<usize> = doc.columns.iter().map(|c| c.len()).collect();
            for row in &rendered {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let mut out = String::new();
            out.push_str(&doc.title);
            out.push('\n');
            let fmt_row = |cells: &[String]| -> String {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            out.push_str(&fmt_row(&doc.columns));
            out.push('\n');
            for row in &rendered {
                out.push_str(&fmt_row(row));
                out.push('\n');
            }
            out
        }
        RenderFormat::Json => {
            #[derive(Serialize)]
            struct JsonDoc<'a> {
                title: &'a str,
                columns: &'a [String],
                rows: Vec<Vec<String>>,
            }
            let rows = doc
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::render).collect())
                .collect();
            let j = JsonDoc {
                title: &doc.title,
                columns: &doc.columns,
                rows,
            };
            let mut s = serde_json::to_string_pretty(&j).expect("table serializes");
            s.push('\n');
            s
        }
    }
}

/// Published equation number for a factor-set x trait model: biological
/// models are (3)-(7), family (8)-(12), culture (13)-(17), in trait order.
pub fn equation_number(factor_set: FactorSet, target: Trait) -> usize {
    let base = match factor_set {
        FactorSet::Biological => 3,
        FactorSet::Family => 8,
        FactorSet::Culture => 13,
    };
    let offset = Trait::ALL.iter().position(|t| *t == target).unwrap();
    base + offset
}

/// One block per trait: the constant row, then one row per predictor, with
/// the model F/P and equation tag on the block's first row.
pub fn regression_table(
    factor_set: FactorSet,
    fits: &[(Trait, RegressionFit)],
) -> Result<TableDoc, ReportError> {
    let expected: Vec<&str> = factor_set
        .predictors()
        .iter()
        .map(|p| p.as_str())
        .collect();
    let mut doc = TableDoc::new(
        format!("Multivariate linear regression models predicted by {factor_set} factors"),
        &["Model", "Term", "B", "SE", "T", "P", "F", "P(model)", "Equation"],
    );
    for (target, fit) in fits {
        let names: Vec<&str> = fit.coefficients().map(|t| t.name.as_str()).collect();
        if names != expected {
            return Err(ReportError::MixedFactorSets {
                trait_name: target.to_string(),
                factor_set: factor_set.to_string(),
            });
        }
        for (i, term) in fit.terms.iter().enumerate() {
            let (model, f_cell, p_cell, eq_cell) = if i == 0 {
                (
                    Cell::text(format!("Y_{target}")),
                    Cell::num3(fit.f),
                    Cell::num3(fit.p_model),
                    Cell::text(format!("({})", equation_number(factor_set, *target))),
                )
            } else {
                (Cell::text(""), Cell::text(""), Cell::text(""), Cell::text(""))
            };
            let term_name = if i == 0 {
                "Constant".to_string()
            } else {
                format!("X_{}", term.name)
            };
            doc.push_row(vec![
                model,
                Cell::text(term_name),
                Cell::num3(term.beta),
                Cell::num3(term.se),
                Cell::num3(term.t),
                Cell::num3(term.p),
                f_cell,
                p_cell,
                eq_cell,
            ])?;
        }
    }
    Ok(doc)
}

/// Per-trait n / mean / sd over non-missing scores.
pub fn descriptives(rows: &[AnalysisRow]) -> TableDoc {
    let mut doc = TableDoc::new(
        "Trait score descriptive statistics",
        &["Trait", "N", "Mean", "SD"],
    );
    for t in Trait::ALL {
        let mut s = Summary::new();
        for row in rows {
            if let Some(v) = row.scores.get(t) {
                s.push(v as f64);
            }
        }
        doc.push_row(vec![
            Cell::text(format!("Y_{t}")),
            Cell::Int(s.n as i64),
            Cell::num3(if s.n > 0 { s.mean } else { 0.0 }),
            Cell::num3(s.sd().unwrap_or(0.0)),
        ])
        .expect("fixed shape");
    }
    doc
}

/// Per-country count and per-trait mean/sd, sorted by count descending then
/// country code.
pub fn country_aggregates(rows: &[AnalysisRow]) -> TableDoc {
    let mut by_country: BTreeMap<&str, [Summary; 5]> = BTreeMap::new();
    for row in rows {
        let Some(country) = row.country.as_deref() else {
            continue;
        };
        let sums = by_country.entry(country).or_default();
        for (i, t) in Trait::ALL.iter().enumerate() {
            if let Some(v) = row.scores.get(*t) {
                sums[i].push(v as f64);
            }
        }
    }

    let mut entries: Vec<(&str, u64, [Summary; 5])> = by_country
        .into_iter()
        .map(|(c, sums)| {
            let count = sums.iter().map(|s| s.n).max().unwrap_or(0);
            (c, count, sums)
        })
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

    let mut columns = vec!["Country".to_string(), "N".to_string()];
    for t in Trait::ALL {
        columns.push(format!("Mean_{t}"));
        columns.push(format!("SD_{t}"));
    }
    let col_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut doc = TableDoc::new("Per-country trait aggregates", &col_refs);
    for (country, count, sums) in entries {
        let mut row = vec![Cell::text(country), Cell::Int(count as i64)];
        for s in sums {
            row.push(Cell::num3(if s.n > 0 { s.mean } else { 0.0 }));
            row.push(Cell::num3(s.sd().unwrap_or(0.0)));
        }
        doc.push_row(row).expect("fixed shape");
    }
    doc
}

/// Quartile/whisker box-plot summary per trait, the data behind score
/// distribution figures.
pub fn boxplot_summary(rows: &[AnalysisRow]) -> TableDoc {
    let mut doc = TableDoc::new(
        "Trait score box-plot summaries",
        &["Trait", "N", "Min", "Q1", "Median", "Q3", "Max"],
    );
    for t in Trait::ALL {
        let mut values: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.scores.get(t).map(|v| v as f64))
            .collect();
        values.sort_by(f64::total_cmp);
        let q = |frac: f64| -> f64 {
            if values.is_empty() {
                return 0.0;
            }
            let idx = frac * (values.len() - 1) as f64;
            let lo = idx.floor() as usize;
            let hi = idx.ceil() as usize;
            let w = idx - lo as f64;
            values[lo] * (1.0 - w) + values[hi] * w
        };
        doc.push_row(vec![
            Cell::text(format!("Y_{t}")),
            Cell::Int(values.len() as i64),
            Cell::num3(q(0.0)),
            Cell::num3(q(0.25)),
            Cell::num3(q(0.5)),
            Cell::num3(q(0.75)),
            Cell::num3(q(1.0)),
        ])
        .expect("fixed shape");
    }
    doc
}
