//! The `reproduce` subcommand: rebuild the whole analysis from whatever
//! datasets are present. Absent data never fails the run — each skipped
//! artifact is listed with its reason in the run summary.

use crate::config::RunConfig;
use crate::datasets;
use crate::error::CliError;
use crate::output::{artifact_name, write_table, write_tree, Metadata};
use crate::reference::comparison_table;
use std::path::PathBuf;
use traitstat_core::analysis::{build_analysis_rows, AnalysisRow};
use traitstat_core::chaid::grow_tree;
use traitstat_core::regress::{fit_factor_model, RegressionFit};
use traitstat_core::report::{country_aggregates, descriptives, regression_table, Cell, TableDoc};
use traitstat_core::statcore::{oneway_anova, Summary};
use traitstat_core::types::{FactorSet, Trait};

struct Bundle<'a> {
    cfg: &'a RunConfig,
    hash: String,
    /// (artifact, DONE path / SKIPPED reason) in emission order.
    summary: Vec<(String, String)>,
}

impl<'a> Bundle<'a> {
    fn done(&mut self, artifact: &str, path: &PathBuf) {
        // Record the bare file name so bundles written to different
        // directories stay byte-identical.
        let name = path.file_name().unwrap_or_default().to_string_lossy();
        self.summary
            .push((artifact.to_string(), format!("DONE {name}")));
        println!("{}", path.display());
    }

    fn skipped(&mut self, artifact: &str, reason: &str) {
        self.summary
            .push((artifact.to_string(), format!("SKIPPED {reason}")));
        eprintln!("{artifact}: skipped: {reason}");
    }

    fn out(&self, kind: &str, qualifiers: &[&str], ext: &str) -> PathBuf {
        self.cfg
            .out_dir
            .join(artifact_name(kind, qualifiers, &self.hash, ext))
    }
}

struct SampleData {
    id: &'static str,
    sha256: String,
    rows: Vec<AnalysisRow>,
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut bundle = Bundle {
        cfg,
        hash: cfg.content_hash(),
        summary: Vec::new(),
    };
    let ext = cfg.format_ext();

    // Load whatever is present.
    let mut samples: Vec<SampleData> = Vec::new();
    for id in ["sample1", "sample2", "sample3"] {
        match datasets::load(cfg, id, None) {
            Ok(loaded) => {
                let rows = build_analysis_rows(&loaded.table, &loaded.manifest, &loaded.key_table)?;
                samples.push(SampleData {
                    id: datasets::spec(id)?.id,
                    sha256: loaded.file_sha256,
                    rows,
                });
            }
            Err(e) => bundle.skipped(&format!("dataset {id}"), &e.to_string()),
        }
    }
    let find = |id: &str| samples.iter().find(|s| s.id == id);

    // Per-sample descriptives.
    for s in &samples {
        let meta = Metadata::new(cfg).with_dataset(s.id, &s.sha256);
        let path = bundle.out("describe", &[s.id], ext);
        write_table(&descriptives(&s.rows), cfg.format, &meta, &path)?;
        bundle.done(&format!("descriptives {}", s.id), &path);
    }

    // Cross-sample ANOVA per trait.
    if samples.len() >= 2 {
        let doc = cross_sample_anova(&samples)?;
        let mut meta = Metadata::new(cfg);
        for s in &samples {
            meta.push("dataset", format!("{} sha256:{}", s.id, s.sha256));
        }
        let path = bundle.out("cross_sample_anova", &[], ext);
        write_table(&doc, cfg.format, &meta, &path)?;
        bundle.done("cross-sample ANOVA", &path);
    } else {
        bundle.skipped("cross-sample ANOVA", "needs at least two datasets");
    }

    // Country aggregates from the large third dataset.
    match find("sample3") {
        Some(s) => {
            let meta = Metadata::new(cfg).with_dataset(s.id, &s.sha256);
            let path = bundle.out("countries", &[s.id], ext);
            write_table(&country_aggregates(&s.rows), cfg.format, &meta, &path)?;
            bundle.done("country aggregates", &path);
        }
        None => bundle.skipped("country aggregates", "sample3 not available"),
    }

    // Regression models and trees per factor set.
    let mut all_fits: Vec<(FactorSet, Trait, RegressionFit)> = Vec::new();
    for factor_set in FactorSet::ALL {
        let (rows, dataset_label, meta) = match model_rows(cfg, factor_set, &samples)? {
            Some(v) => v,
            None => {
                let reason = match factor_set {
                    FactorSet::Biological => "needs sample1 or sample2",
                    _ => "needs sample2",
                };
                bundle.skipped(&format!("{factor_set} models"), reason);
                continue;
            }
        };

        let mut fits = Vec::new();
        for t in Trait::ALL {
            fits.push((t, fit_factor_model(&rows, factor_set, t, cfg.missing)?));
        }
        let doc = regression_table(factor_set, &fits)?;
        let path = bundle.out("regress", &[factor_set.as_str(), &dataset_label], ext);
        write_table(&doc, cfg.format, &meta, &path)?;
        bundle.done(&format!("{factor_set} regressions"), &path);

        for (t, fit) in fits {
            all_fits.push((factor_set, t, fit));
            let tree = grow_tree(&rows, t, factor_set.predictors(), &cfg.chaid)?;
            let stem = bundle.out("tree", &[factor_set.as_str(), t.as_str(), &dataset_label], "json");
            for p in write_tree(&tree, &meta, &stem)? {
                bundle.done(&format!("{factor_set} tree Y_{t}"), &p);
            }
        }
    }

    // Coefficient comparison against the reference values.
    if all_fits.is_empty() {
        bundle.skipped("coefficient comparison", "no models were fit");
    } else {
        let fit_refs: Vec<(FactorSet, Trait, &RegressionFit)> =
            all_fits.iter().map(|(f, t, fit)| (*f, *t, fit)).collect();
        let doc = comparison_table(&fit_refs);
        let meta = Metadata::new(cfg);
        let path = bundle.out("comparison", &[], "csv");
        write_table(&doc, traitstat_core::report::RenderFormat::Csv, &meta, &path)?;
        bundle.done("coefficient comparison", &path);
    }

    // Run summary, always written last.
    let meta = Metadata::new(cfg);
    let summary_path = bundle.out("summary", &[], "txt");
    let mut text = String::new();
    for (artifact, state) in &bundle.summary {
        text.push_str(&format!("{artifact}: {state}\n"));
    }
    let mut body = meta_comment(&meta);
    body.push_str(&text);
    std::fs::write(&summary_path, body)?;
    println!("{}", summary_path.display());
    Ok(())
}

fn meta_comment(meta: &Metadata) -> String {
    // Reuse the table writer's comment layout for the plain-text summary.
    use traitstat_core::report::RenderFormat;
    let empty = TableDoc::new("", &[]);
    let rendered = crate::output::table_bytes(&empty, RenderFormat::Csv, meta);
    rendered
        .lines()
        .filter(|l| l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Rows feeding one factor set's models: biological uses the merge of the
/// first two datasets (or whichever is present); the others need the full
/// demographic battery of the second.
fn model_rows(
    cfg: &RunConfig,
    factor_set: FactorSet,
    samples: &[SampleData],
) -> Result<Option<(Vec<AnalysisRow>, String, Metadata)>, CliError> {
    let have = |id: &str| samples.iter().find(|s| s.id == id);
    match factor_set {
        FactorSet::Biological => match (have("sample1"), have("sample2")) {
            (Some(_), Some(_)) => {
                let merged = datasets::load_merged(cfg, &["sample1", "sample2"])?;
                let mut meta = Metadata::new(cfg);
                for (id, sha) in &merged.parts {
                    meta.push("dataset", format!("{id} sha256:{sha}"));
                }
                let rows = build_analysis_rows(&merged.table, &merged.manifest, &merged.key_table)?;
                Ok(Some((rows, "sample1+sample2".to_string(), meta)))
            }
            (Some(s), None) | (None, Some(s)) => {
                let meta = Metadata::new(cfg).with_dataset(s.id, &s.sha256);
                Ok(Some((s.rows.clone(), s.id.to_string(), meta)))
            }
            (None, None) => Ok(None),
        },
        _ => match have("sample2") {
            Some(s) => {
                let meta = Metadata::new(cfg).with_dataset(s.id, &s.sha256);
                Ok(Some((s.rows.clone(), s.id.to_string(), meta)))
            }
            None => Ok(None),
        },
    }
}

/// Per-trait one-way ANOVA across the samples' score columns.
fn cross_sample_anova(samples: &[SampleData]) -> Result<TableDoc, CliError> {
    let mut columns = vec!["Trait".to_string()];
    for s in samples {
        columns.push(format!("Mean_{}", s.id));
    }
    columns.extend(["F", "P"].iter().map(|s| s.to_string()));
    let col_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut doc = TableDoc::new("Trait score comparison across samples", &col_refs);

    for t in Trait::ALL {
        let groups: Vec<Summary> = samples
            .iter()
            .map(|s| {
                let mut sum = Summary::new();
                for row in &s.rows {
                    if let Some(v) = row.scores.get(t) {
                        sum.push(v as f64);
                    }
                }
                sum
            })
            .collect();
        let result = oneway_anova(&groups)?;
        let mut cells = vec![Cell::text(format!("Y_{t}"))];
        for g in &groups {
            cells.push(Cell::num3(g.mean));
        }
        cells.push(Cell::num3(result.f));
        cells.push(Cell::num3(result.p));
        doc.push_row(cells).expect("fixed shape");
    }
    Ok(doc)
}
