//! Command-line front end: fetch/point at datasets, score, describe, fit,
//! grow trees, and rebuild the full analysis bundle.

pub mod config;
pub mod datasets;
pub mod error;
pub mod output;
pub mod reference;
pub mod reproduce;

use clap::{Parser, Subcommand};
use config::{Overrides, RunConfig};
use error::CliError;
use output::{artifact_name, Metadata};
use std::path::{Path, PathBuf};
use traitstat_core::analysis::{build_analysis_rows, AnalysisRow};
use traitstat_core::chaid::grow_tree;
use traitstat_core::ingest::validate_table;
use traitstat_core::regress::{fit_factor_model, RegressionFit};
use traitstat_core::report::{country_aggregates, descriptives, regression_table, Cell, TableDoc};
use traitstat_core::types::{FactorSet, Trait};

#[derive(Parser)]
#[command(name = "traitstat", version, about = "Big-Five trait scoring, regression, and CHAID tree analysis")]
struct Cli {
    /// Config file (key = value lines); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset cache directory (also via TRAITSTAT_CACHE).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Output file (single-table commands) or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format: text | csv | json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Item keying variant: codebook | eq1.
    #[arg(long, global = true)]
    keying: Option<String>,
    /// Missing-demographic policy in regressions: zero | drop.
    #[arg(long, global = true)]
    missing: Option<String>,
    /// Split significance level for trees.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    #[arg(long, global = true)]
    min_parent: Option<usize>,
    #[arg(long, global = true)]
    min_child: Option<usize>,
    /// Worker threads (0 = automatic).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Download dataset archives into the cache (opt-in network use).
    Fetch {
        /// One dataset id; omit to fetch all three.
        #[arg(long)]
        dataset: Option<String>,
        /// Pin the expected sha256 of the archive.
        #[arg(long)]
        checksum: Option<String>,
    },
    /// Check a dataset file against its manifest and report issues.
    Validate {
        #[arg(long)]
        dataset: String,
        /// Explicit data file (bypasses the cache lookup).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Score every record and write the per-row trait scores.
    Score {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Per-trait descriptive statistics (and per-country aggregates).
    Describe {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Also write per-country aggregates and box-plot summaries.
        #[arg(long)]
        by_country: bool,
    },
    /// Fit the factor-set regression models for one or all traits.
    Regress {
        #[arg(long)]
        factors: String,
        #[arg(long = "trait")]
        target: Option<String>,
        /// sample1 | sample2 | sample1+sample2 (default depends on factors).
        #[arg(long)]
        dataset: Option<String>,
    },
    /// Grow a CHAID tree and export it as DOT + JSON.
    Tree {
        #[arg(long)]
        factors: String,
        #[arg(long = "trait")]
        target: String,
        #[arg(long)]
        dataset: Option<String>,
    },
    /// Rebuild the full analysis bundle from whatever datasets are present.
    Reproduce,
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { 0 } else { 1 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let flags = Overrides {
        cache: cli.cache.clone(),
        out: cli.out.clone(),
        format: cli.format.clone(),
        keying: cli.keying.clone(),
        missing: cli.missing.clone(),
        alpha: cli.alpha,
        max_depth: cli.max_depth,
        min_parent: cli.min_parent,
        min_child: cli.min_child,
        threads: cli.threads,
    };
    let cfg = RunConfig::resolve(cli.config.as_ref(), &flags)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::user(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cfg, &cli))
}

/// Where a single-table command writes: an explicit file path wins, an
/// explicit directory (or the configured one) gets the generated name.
fn resolve_out(cfg: &RunConfig, flag: Option<&Path>, name: &str) -> PathBuf {
    match flag {
        Some(p) if p.extension().is_some() && !p.is_dir() => p.to_path_buf(),
        Some(p) => p.join(name),
        None => cfg.out_dir.join(name),
    }
}

fn dispatch(cfg: &RunConfig, cli: &Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Fetch { dataset, checksum } => {
            let ids: Vec<&str> = match dataset {
                Some(id) => vec![datasets::spec(id)?.id],
                None => datasets::DATASETS.iter().map(|d| d.id).collect(),
            };
            if ids.len() > 1 && checksum.is_some() {
                return Err(CliError::user("--checksum requires --dataset"));
            }
            for id in ids {
                let path = datasets::fetch(cfg, id, checksum.as_deref())?;
                println!("{}", path.display());
            }
            Ok(())
        }
        Cmd::Validate { dataset, data } => {
            let loaded = datasets::load(cfg, dataset, data.as_deref())?;
            let report = validate_table(&loaded.table, &loaded.manifest);
            println!("dataset: {} ({})", dataset, loaded.path.display());
            println!("rows: {}", report.row_count);
            println!("issues: {}", report.issues.len());
            for issue in report.issues.iter().take(20) {
                println!(
                    "  row {} column {}: {:?}",
                    issue.row_index, issue.column, issue.kind
                );
            }
            if report.issues.len() > 20 {
                println!("  ... and {} more", report.issues.len() - 20);
            }
            Ok(())
        }
        Cmd::Score { dataset, data } => {
            let loaded = datasets::load(cfg, dataset, data.as_deref())?;
            let rows = build_analysis_rows(&loaded.table, &loaded.manifest, &loaded.key_table)?;
            let doc = scores_table(&rows);
            let meta = Metadata::new(cfg).with_dataset(dataset, &loaded.file_sha256);
            let name = artifact_name("scores", &[dataset], &cfg.content_hash(), cfg.format_ext());
            let path = resolve_out(cfg, cli.out.as_deref(), &name);
            output::write_table(&doc, cfg.format, &meta, &path)?;
            println!("{}", path.display());
            Ok(())
        }
        Cmd::Describe {
            dataset,
            data,
            by_country,
        } => {
            let loaded = datasets::load(cfg, dataset, data.as_deref())?;
            let rows = build_analysis_rows(&loaded.table, &loaded.manifest, &loaded.key_table)?;
            let meta = Metadata::new(cfg).with_dataset(dataset, &loaded.file_sha256);
            let hash = cfg.content_hash();
            let name = artifact_name("describe", &[dataset], &hash, cfg.format_ext());
            let path = resolve_out(cfg, cli.out.as_deref(), &name);
            output::write_table(&descriptives(&rows), cfg.format, &meta, &path)?;
            println!("{}", path.display());
            if *by_country {
                for (kind, doc) in [
                    ("countries", country_aggregates(&rows)),
                    ("boxplot", traitstat_core::report::boxplot_summary(&rows)),
                ] {
                    let name = artifact_name(kind, &[dataset], &hash, cfg.format_ext());
                    let path = resolve_out(cfg, cli.out.as_deref(), &name);
                    output::write_table(&doc, cfg.format, &meta, &path)?;
                    println!("{}", path.display());
                }
            }
            Ok(())
        }
        Cmd::Regress {
            factors,
            target,
            dataset,
        } => {
            let factor_set = parse_factors(factors)?;
            let targets = parse_targets(target.as_deref())?;
            let ds = dataset
                .clone()
                .unwrap_or_else(|| default_dataset(factor_set).to_string());
            let (rows, meta) = load_rows(cfg, &ds)?;
            let fits = fit_models(&rows, factor_set, &targets, cfg)?;
            let doc = regression_table(factor_set, &fits)?;
            let name = artifact_name(
                "regress",
                &[factor_set.as_str(), &ds],
                &cfg.content_hash(),
                cfg.format_ext(),
            );
            let path = resolve_out(cfg, cli.out.as_deref(), &name);
            output::write_table(&doc, cfg.format, &meta, &path)?;
            println!("{}", path.display());
            Ok(())
        }
        Cmd::Tree {
            factors,
            target,
            dataset,
        } => {
            let factor_set = parse_factors(factors)?;
            let target: Trait = target.parse().map_err(CliError::User)?;
            let ds = dataset
                .clone()
                .unwrap_or_else(|| default_dataset(factor_set).to_string());
            let (rows, meta) = load_rows(cfg, &ds)?;
            let tree = grow_tree(&rows, target, factor_set.predictors(), &cfg.chaid)?;
            let stem_name = artifact_name(
                "tree",
                &[factor_set.as_str(), target.as_str(), &ds],
                &cfg.content_hash(),
                "json",
            );
            let stem = resolve_out(cfg, cli.out.as_deref(), &stem_name);
            for path in output::write_tree(&tree, &meta, &stem)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Cmd::Reproduce => reproduce::run(cfg),
    }
}

fn parse_factors(s: &str) -> Result<FactorSet, CliError> {
    s.parse().map_err(CliError::User)
}

fn parse_targets(s: Option<&str>) -> Result<Vec<Trait>, CliError> {
    match s {
        None | Some("all") => Ok(Trait::ALL.to_vec()),
        Some(one) => Ok(vec![one.parse().map_err(CliError::User)?]),
    }
}

/// The models with full demographics fit on the second dataset alone; the
/// biological ones use the merged first+second.
pub fn default_dataset(factor_set: FactorSet) -> &'static str {
    match factor_set {
        FactorSet::Biological => "sample1+sample2",
        _ => "sample2",
    }
}

/// Load analysis rows for a dataset id, which may be a `+`-joined merge.
fn load_rows(cfg: &RunConfig, ds: &str) -> Result<(Vec<AnalysisRow>, Metadata), CliError> {
    let mut meta = Metadata::new(cfg);
    if ds.contains('+') {
        let ids: Vec<&str> = ds.split('+').collect();
        let merged = datasets::load_merged(cfg, &ids)?;
        for (id, sha) in &merged.parts {
            meta.push("dataset", format!("{id} sha256:{sha}"));
        }
        let rows = build_analysis_rows(&merged.table, &merged.manifest, &merged.key_table)?;
        Ok((rows, meta))
    } else {
        let loaded = datasets::load(cfg, ds, None)?;
        meta.push("dataset", format!("{ds} sha256:{}", loaded.file_sha256));
        let rows = build_analysis_rows(&loaded.table, &loaded.manifest, &loaded.key_table)?;
        Ok((rows, meta))
    }
}

fn fit_models(
    rows: &[AnalysisRow],
    factor_set: FactorSet,
    targets: &[Trait],
    cfg: &RunConfig,
) -> Result<Vec<(Trait, RegressionFit)>, CliError> {
    targets
        .iter()
        .map(|t| {
            fit_factor_model(rows, factor_set, *t, cfg.missing)
                .map(|fit| (*t, fit))
                .map_err(CliError::from)
        })
        .collect()
}

/// One row per record: source, row index, and the five scores (blank when
/// the trait could not be scored).
pub fn scores_table(rows: &[AnalysisRow]) -> TableDoc {
    let mut doc = TableDoc::new(
        "Per-record trait scores",
        &["Source", "Row", "E", "N", "A", "C", "O"],
    );
    for row in rows {
        let mut cells = vec![
            Cell::text(row.source.clone()),
            Cell::Int(row.row_index as i64),
        ];
        for t in Trait::ALL {
            cells.push(match row.scores.get(t) {
                Some(v) => Cell::Int(v as i64),
                None => Cell::text(""),
            });
        }
        doc.push_row(cells).expect("fixed shape");
    }
    doc
}
