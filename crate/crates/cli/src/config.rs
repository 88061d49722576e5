//! Resolved run configuration. Precedence: command-line flags, then the
//! optional config file (same key-value format as the dataset manifests),
//! then built-in defaults.

use crate::error::CliError;
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::str::FromStr;
use traitstat_core::chaid::ChaidParams;
use traitstat_core::manifest::KvDoc;
use traitstat_core::regress::MissingPolicy;
use traitstat_core::report::RenderFormat;

pub const CACHE_ENV: &str = "TRAITSTAT_CACHE";

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Where dataset files live (downloads land here too).
    pub cache_dir: PathBuf,
    /// Directory for generated files when no explicit output path is given.
    pub out_dir: PathBuf,
    pub format: RenderFormat,
    /// Keying variant: "codebook" or "eq1".
    pub keying: String,
    pub missing: MissingPolicy,
    pub chaid: ChaidParams,
    /// 0 = library default.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cache_dir: PathBuf::from("data-cache"),
            out_dir: PathBuf::from("."),
            format: RenderFormat::Csv,
            keying: "codebook".to_string(),
            missing: MissingPolicy::ZeroInclude,
            chaid: ChaidParams::default(),
            threads: 0,
        }
    }
}

/// Flag values as parsed, all optional; `None` defers to the config file or
/// the default.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub cache: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub keying: Option<String>,
    pub missing: Option<String>,
    pub alpha: Option<f64>,
    pub max_depth: Option<usize>,
    pub min_parent: Option<usize>,
    pub min_child: Option<usize>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn resolve(config_file: Option<&PathBuf>, flags: &Overrides) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Ok(dir) = std::env::var(CACHE_ENV) {
            if !dir.is_empty() {
                cfg.cache_dir = PathBuf::from(dir);
            }
        }

        if let Some(path) = config_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::user(format!("cannot read config {}: {e}", path.display())))?;
            let doc = KvDoc::parse(&text)
                .map_err(|e| CliError::user(format!("bad config {}: {e}", path.display())))?;
            apply_kv(&mut cfg, &doc)?;
        }

        if let Some(v) = &flags.cache {
            cfg.cache_dir = v.clone();
        }
        if let Some(v) = &flags.out {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = &flags.format {
            cfg.format = parse_flag("format", v)?;
        }
        if let Some(v) = &flags.keying {
            cfg.keying = parse_keying(v)?;
        }
        if let Some(v) = &flags.missing {
            cfg.missing = parse_flag("missing", v)?;
        }
        if let Some(v) = flags.alpha {
            cfg.chaid.alpha_split = v;
            cfg.chaid.alpha_merge = v;
        }
        if let Some(v) = flags.max_depth {
            cfg.chaid.max_depth = v;
        }
        if let Some(v) = flags.min_parent {
            cfg.chaid.min_parent = v;
        }
        if let Some(v) = flags.min_child {
            cfg.chaid.min_child = v;
        }
        if let Some(v) = flags.threads {
            cfg.threads = v;
        }

        if !(cfg.chaid.alpha_split > 0.0 && cfg.chaid.alpha_split <= 1.0) {
            return Err(CliError::user("--alpha must be in (0, 1]"));
        }
        if cfg.chaid.min_child == 0 || cfg.chaid.min_parent == 0 {
            return Err(CliError::user("--min-parent/--min-child must be positive"));
        }
        Ok(cfg)
    }

    /// Short content hash of everything that shapes results. Thread count
    /// and output locations are deliberately excluded so reruns with
    /// different parallelism produce identically named, identical files.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "format={:?};keying={};missing={:?};alpha_split={};alpha_merge={};max_depth={};min_parent={};min_child={};bonferroni={}",
            self.format,
            self.keying,
            self.missing,
            self.chaid.alpha_split,
            self.chaid.alpha_merge,
            self.chaid.max_depth,
            self.chaid.min_parent,
            self.chaid.min_child,
            self.chaid.bonferroni,
        ));
        let digest = h.finalize();
        digest.iter().take(4).map(|b| format!("{b:02x}")).collect()
    }

    pub fn format_ext(&self) -> &'static str {
        match self.format {
            RenderFormat::AlignedText => "txt",
            RenderFormat::Csv => "csv",
            RenderFormat::Json => "json",
        }
    }
}

fn parse_flag<T: FromStr<Err = String>>(name: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|e: String| CliError::user(format!("--{name}: {e}")))
}

fn parse_keying(v: &str) -> Result<String, CliError> {
    match v {
        "codebook" | "eq1" => Ok(v.to_string()),
        _ => Err(CliError::user(format!(
            "--keying: expected codebook|eq1, got {v:?}"
        ))),
    }
}

fn apply_kv(cfg: &mut RunConfig, doc: &KvDoc) -> Result<(), CliError> {
    if let Some(v) = doc.get("cache") {
        cfg.cache_dir = PathBuf::from(v);
    }
    if let Some(v) = doc.get("out") {
        cfg.out_dir = PathBuf::from(v);
    }
    if let Some(v) = doc.get("format") {
        cfg.format = parse_flag("format", v)?;
    }
    if let Some(v) = doc.get("keying") {
        cfg.keying = parse_keying(v)?;
    }
    if let Some(v) = doc.get("missing") {
        cfg.missing = parse_flag("missing", v)?;
    }
    let num = |key: &str, v: &str| -> Result<f64, CliError> {
        v.parse()
            .map_err(|_| CliError::user(format!("config {key}: bad number {v:?}")))
    };
    if let Some(v) = doc.get("alpha") {
        cfg.chaid.alpha_split = num("alpha", v)?;
        cfg.chaid.alpha_merge = cfg.chaid.alpha_split;
    }
    if let Some(v) = doc.get("max_depth") {
        cfg.chaid.max_depth = num("max_depth", v)? as usize;
    }
    if let Some(v) = doc.get("min_parent") {
        cfg.chaid.min_parent = num("min_parent", v)? as usize;
    }
    if let Some(v) = doc.get("min_child") {
        cfg.chaid.min_child = num("min_child", v)? as usize;
    }
    if let Some(v) = doc.get("threads") {
        cfg.threads = num("threads", v)? as usize;
    }
    Ok(())
}
