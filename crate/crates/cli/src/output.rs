//! Output writing: every generated file embeds the run metadata (dataset
//! hashes, keying id, missing policy, tree parameters) so results are
//! auditable from the file alone. Thread count is deliberately absent.

use crate::config::RunConfig;
use crate::error::CliError;
use std::path::{Path, PathBuf};
use traitstat_core::chaid::ChaidTree;
use traitstat_core::report::{render, RenderFormat, TableDoc};

#[derive(Debug, Clone, Default)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(cfg: &RunConfig) -> Metadata {
        let mut m = Metadata::default();
        m.push("tool", format!("traitstat {}", env!("CARGO_PKG_VERSION")));
        m.push("config_hash", cfg.content_hash());
        m.push("keying", cfg.keying.clone());
        m.push("missing_policy", format!("{:?}", cfg.missing).to_lowercase());
        m.push(
            "tree_params",
            format!(
                "alpha_split={} max_depth={} min_parent={} min_child={} bonferroni={}",
                cfg.chaid.alpha_split,
                cfg.chaid.max_depth,
                cfg.chaid.min_parent,
                cfg.chaid.min_child,
                cfg.chaid.bonferroni
            ),
        );
        m.push("tree_test", "one-way ANOVA F (continuous target)");
        m
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn with_dataset(mut self, id: &str, sha256: &str) -> Metadata {
        self.push("dataset", format!("{id} sha256:{sha256}"));
        self
    }

    fn comment_block(&self, prefix: &str) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{prefix} {k}: {v}\n"))
            .collect()
    }

    fn json_value(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        serde_json::Value::Object(map)
    }
}

/// Render a table with a metadata header. Text/CSV get `#` comment lines;
/// JSON gets a `meta` object.
pub fn table_bytes(doc: &TableDoc, format: RenderFormat, meta: &Metadata) -> String {
    match format {
        RenderFormat::Json => {
            let mut v = serde_json::to_value(doc).expect("table serializes");
            let rows: Vec<Vec<String>> = doc
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.render()).collect())
                .collect();
            v["rows"] = serde_json::to_value(rows).unwrap();
            let out = serde_json::json!({ "meta": meta.json_value(), "table": v });
            let mut s = serde_json::to_string_pretty(&out).unwrap();
            s.push('\n');
            s
        }
        other => {
            let mut s = meta.comment_block("#");
            s.push_str(&render(doc, other));
            s
        }
    }
}

pub fn write_table(
    doc: &TableDoc,
    format: RenderFormat,
    meta: &Metadata,
    path: &Path,
) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, table_bytes(doc, format, meta))?;
    Ok(())
}

/// A tree exports to two files: `<stem>.json` and `<stem>.dot`.
pub fn write_tree(tree: &ChaidTree, meta: &Metadata, stem: &Path) -> Result<Vec<PathBuf>, CliError> {
    if let Some(parent) = stem.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let json_path = stem.with_extension("json");
    let dot_path = stem.with_extension("dot");

    let out = serde_json::json!({
        "meta": meta.json_value(),
        "tree": serde_json::to_value(tree).expect("tree serializes"),
    });
    let mut json = serde_json::to_string_pretty(&out).unwrap();
    json.push('\n');
    std::fs::write(&json_path, json)?;

    let mut dot = meta.comment_block("//");
    dot.push_str(&tree.to_dot());
    std::fs::write(&dot_path, dot)?;
    Ok(vec![json_path, dot_path])
}

/// Generated file name: kind, qualifiers (factor set / trait / dataset ids),
/// config hash, extension.
pub fn artifact_name(kind: &str, qualifiers: &[&str], hash: &str, ext: &str) -> String {
    let mut parts = vec![kind.to_string()];
    parts.extend(qualifiers.iter().map(|q| q.to_string()));
    parts.push(hash.to_string());
    format!("{}.{ext}", parts.join("_"))
}
