//! Dataset resolution: bundled manifests and key tables, cache-directory
//! lookup, merging, and the opt-in downloader.

use crate::config::RunConfig;
use crate::error::CliError;
use sha2::{Digest, Sha256};
use std::io::Read;
use std::path::{Path, PathBuf};
use traitstat_core::ingest::{load_dataset, merge_samples, DatasetManifest, Table};
use traitstat_core::scoring::KeyTable;
use traitstat_core::types::Predictor;

#[derive(Debug)]
pub struct DatasetSpec {
    pub id: &'static str,
    pub manifest_text: &'static str,
    pub url: &'static str,
    /// Archive file name as published.
    pub archive: &'static str,
}

pub const DATASETS: [DatasetSpec; 3] = [
    DatasetSpec {
        id: "sample1",
        manifest_text: include_str!("../data/manifests/sample1.kv"),
        url: "https://openpsychometrics.org/_rawdata/BIG5.zip",
        archive: "BIG5.zip",
    },
    DatasetSpec {
        id: "sample2",
        manifest_text: include_str!("../data/manifests/sample2.kv"),
        url: "https://openpsychometrics.org/_rawdata/duckworth-grit-scale-data.zip",
        archive: "duckworth-grit-scale-data.zip",
    },
    DatasetSpec {
        id: "sample3",
        manifest_text: include_str!("../data/manifests/sample3.kv"),
        url: "https://openpsychometrics.org/_rawdata/IPIP-FFM-data-8Nov2018.zip",
        archive: "IPIP-FFM-data-8Nov2018.zip",
    },
];

const KEY_TABLES: [(&str, &str); 4] = [
    ("markers.codebook", include_str!("../data/keys/markers.codebook.kv")),
    ("markers.eq1", include_str!("../data/keys/markers.eq1.kv")),
    ("ffm.codebook", include_str!("../data/keys/ffm.codebook.kv")),
    ("ffm.eq1", include_str!("../data/keys/ffm.eq1.kv")),
];

pub fn spec(id: &str) -> Result<&'static DatasetSpec, CliError> {
    DATASETS
        .iter()
        .find(|d| d.id == id)
        .ok_or_else(|| CliError::user(format!("unknown dataset {id:?} (expected sample1|sample2|sample3)")))
}

pub fn bundled_manifest(id: &str) -> Result<DatasetManifest, CliError> {
    let spec = spec(id)?;
    DatasetManifest::parse(spec.manifest_text)
        .map_err(|e| CliError::data(format!("bundled manifest {id}: {e}")))
}

/// The keying flag swaps the variant suffix of the manifest's key-table
/// reference: `markers.codebook` + `eq1` -> `markers.eq1`.
pub fn key_table_for(manifest: &DatasetManifest, keying: &str) -> Result<KeyTable, CliError> {
    let base = manifest
        .key_table_ref
        .rsplit_once('.')
        .map(|(b, _)| b)
        .unwrap_or(&manifest.key_table_ref);
    let wanted = format!("{base}.{keying}");
    let text = KEY_TABLES
        .iter()
        .find(|(id, _)| *id == wanted)
        .map(|(_, t)| *t)
        .ok_or_else(|| CliError::user(format!("no bundled key table {wanted:?}")))?;
    KeyTable::parse(text).map_err(|e| CliError::data(format!("key table {wanted}: {e}")))
}

/// Locate a dataset file in the cache: extracted text first, then the
/// published archive name.
pub fn find_data_file(cfg: &RunConfig, id: &str) -> Result<Option<PathBuf>, CliError> {
    let spec = spec(id)?;
    let candidates = [
        format!("{id}.tsv"),
        format!("{id}.csv"),
        format!("{id}.zip"),
        spec.archive.to_string(),
    ];
    for name in candidates {
        let path = cfg.cache_dir.join(name);
        if path.is_file() {
            return Ok(Some(path));
        }
    }
    Ok(None)
}

pub struct LoadedDataset {
    pub manifest: DatasetManifest,
    pub table: Table,
    pub key_table: KeyTable,
    pub path: PathBuf,
    pub file_sha256: String,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut file = std::fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Load one dataset, either from an explicit file or from the cache.
pub fn load(cfg: &RunConfig, id: &str, data_path: Option<&Path>) -> Result<LoadedDataset, CliError> {
    let manifest = bundled_manifest(id)?;
    let path = match data_path {
        Some(p) => p.to_path_buf(),
        None => find_data_file(cfg, id)?.ok_or_else(|| {
            CliError::data(format!(
                "dataset {id} not found in cache {} (run `traitstat fetch --dataset {id}` or pass --data)",
                cfg.cache_dir.display()
            ))
        })?,
    };
    let key_table = key_table_for(&manifest, &cfg.keying)?;
    let file_sha256 = sha256_file(&path)?;
    let table = load_dataset(&manifest, &path)?;
    Ok(LoadedDataset {
        manifest,
        table,
        key_table,
        path,
        file_sha256,
    })
}

/// Variables shared by samples 1 and 2, in declared predictor order.
pub fn shared_predictors(a: &DatasetManifest, b: &DatasetManifest) -> Vec<&'static str> {
    Predictor::ALL
        .iter()
        .filter(|p| a.demographic_columns.contains_key(p) && b.demographic_columns.contains_key(p))
        .map(|p| p.as_str())
        .collect()
}

pub struct MergedDataset {
    pub manifest: DatasetManifest,
    pub table: Table,
    pub key_table: KeyTable,
    /// One (dataset id, file hash) per input, in merge order.
    pub parts: Vec<(String, String)>,
}

pub fn load_merged(cfg: &RunConfig, ids: &[&str]) -> Result<MergedDataset, CliError> {
    let loaded: Vec<LoadedDataset> = ids
        .iter()
        .map(|id| load(cfg, id, None))
        .collect::<Result<_, _>>()?;
    let shared: Vec<&'static str> = Predictor::ALL
        .iter()
        .filter(|p| {
            loaded
                .iter()
                .all(|d| d.manifest.demographic_columns.contains_key(p))
        })
        .map(|p| p.as_str())
        .collect();
    if shared.is_empty() {
        return Err(CliError::data("datasets share no demographic variables"));
    }
    let inputs: Vec<(&Table, &DatasetManifest)> =
        loaded.iter().map(|d| (&d.table, &d.manifest)).collect();
    let (table, manifest) = merge_samples(&inputs, &shared)?;
    let key_table = key_table_for(&manifest, &cfg.keying)?;
    Ok(MergedDataset {
        manifest,
        table,
        key_table,
        parts: loaded
            .into_iter()
            .map(|d| (d.manifest.dataset_id, d.file_sha256))
            .collect(),
    })
}

/// Download one archive into the cache. Checksums are trust-on-first-use: a
/// `<name>.sha256` file is written on first download and verified on later
/// ones; `pin` overrides both.
pub fn fetch(cfg: &RunConfig, id: &str, pin: Option<&str>) -> Result<PathBuf, CliError> {
    let spec = spec(id)?;
    std::fs::create_dir_all(&cfg.cache_dir)?;
    let target = cfg.cache_dir.join(spec.archive);
    let checksum_file = cfg.cache_dir.join(format!("{}.sha256", spec.archive));

    if !target.is_file() {
        eprintln!("downloading {} -> {}", spec.url, target.display());
        let response = reqwest::blocking::get(spec.url)
            .and_then(|r| r.error_for_status())
            .map_err(|e| CliError::data(format!("download {}: {e}", spec.url)))?;
        let bytes = response
            .bytes()
            .map_err(|e| CliError::data(format!("download {}: {e}", spec.url)))?;
        std::fs::write(&target, &bytes)?;
    }

    let actual = sha256_file(&target)?;
    let expected = match pin {
        Some(p) => Some(p.to_ascii_lowercase()),
        None => std::fs::read_to_string(&checksum_file)
            .ok()
            .map(|s| s.trim().to_ascii_lowercase()),
    };
    match expected {
        Some(e) if e != actual => {
            return Err(CliError::data(format!(
                "checksum mismatch for {}: expected {e}, got {actual}",
                target.display()
            )))
        }
        Some(_) => {}
        None => std::fs::write(&checksum_file, format!("{actual}\n"))?,
    }
    eprintln!("{id}: {} sha256 {actual}", target.display());
    Ok(target)
}
