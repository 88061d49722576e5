//! End-to-end runs of the command-line interface against the bundled
//! fixture datasets in a temporary cache.

use std::path::{Path, PathBuf};
use traitstat_cli::run;

fn fixture_cache() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for name in ["sample1.tsv", "sample2.tsv", "sample3.tsv"] {
        std::fs::copy(fixtures.join(name), dir.path().join(name)).unwrap();
    }
    dir
}

fn run_in(cache: &Path, out: &Path, tail: &[&str]) -> i32 {
    let mut argv = vec![
        "traitstat".to_string(),
        "--cache".into(),
        cache.to_string_lossy().into_owned(),
        "--out".into(),
        out.to_string_lossy().into_owned(),
    ];
    argv.extend(tail.iter().map(|s| s.to_string()));
    run(argv)
}

fn files_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

#[test]
fn score_writes_one_row_per_record() {
    let cache = fixture_cache();
    let out = tempfile::tempdir().unwrap();
    let code = run_in(
        cache.path(),
        out.path(),
        &["--format", "csv", "score", "--dataset", "sample1"],
    );
    assert_eq!(code, 0);
    let files = files_in(out.path());
    assert_eq!(files.len(), 1);
    let text = std::fs::read_to_string(&files[0]).unwrap();
    // Metadata header, then header row, then 400 data rows.
    let data_lines = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data_lines, 401);
    assert!(text.lines().any(|l| l.starts_with("# dataset: sample1 sha256:")));
    assert!(text.contains("\"Source\",\"Row\",\"E\",\"N\",\"A\",\"C\",\"O\""));
}

#[test]
fn validate_reports_and_exits_clean() {
    let cache = fixture_cache();
    let out = tempfile::tempdir().unwrap();
    assert_eq!(
        run_in(cache.path(), out.path(), &["validate", "--dataset", "sample2"]),
        0
    );
}

#[test]
fn describe_by_country_emits_extra_tables() {
    let cache = fixture_cache();
    let out = tempfile::tempdir().unwrap();
    let code = run_in(
        cache.path(),
        out.path(),
        &["describe", "--dataset", "sample3", "--by-country"],
    );
    assert_eq!(code, 0);
    // Descriptives + country aggregates + box-plot summary.
    assert_eq!(files_in(out.path()).len(), 3);
}

#[test]
fn regress_all_traits_writes_fifteen_term_rows() {
    let cache = fixture_cache();
    let out = tempfile::tempdir().unwrap();
    let code = run_in(
        cache.path(),
        out.path(),
        &["--format", "csv", "regress", "--factors", "family", "--dataset", "sample2"],
    );
    assert_eq!(code, 0);
    let files = files_in(out.path());
    assert_eq!(files.len(), 1);
    let text = std::fs::read_to_string(&files[0]).unwrap();
    // 5 models x (constant + 6 predictors) data rows.
    let data_lines = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("\"Model\"")).count();
    assert_eq!(data_lines, 35);
    for eq in ["\"(8)\"", "\"(9)\"", "\"(10)\"", "\"(11)\"", "\"(12)\""] {
        assert!(text.contains(eq), "missing equation tag {eq}");
    }
}

#[test]
fn tree_exports_dot_and_json() {
    let cache = fixture_cache();
    let out = tempfile::tempdir().unwrap();
    let code = run_in(
        cache.path(),
        out.path(),
        &["tree", "--factors", "biological", "--trait", "E", "--dataset", "sample1"],
    );
    assert_eq!(code, 0);
    let files = files_in(out.path());
    let exts: Vec<_> = files
        .iter()
        .map(|p| p.extension().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(exts, ["dot", "json"]);
    let dot = std::fs::read_to_string(&files[0]).unwrap();
    assert!(dot.contains("digraph"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&files[1]).unwrap()).unwrap();
    assert!(json["meta"].is_object());
    assert!(json["tree"]["nodes"].is_array());
    // The fixture plants a gender effect on E, so the root must split.
    assert!(json["tree"]["nodes"][0]["split"].is_object());
}

#[test]
fn unknown_dataset_is_a_user_error() {
    let cache = fixture_cache();
    let out = tempfile::tempdir().unwrap();
    assert_eq!(
        run_in(cache.path(), out.path(), &["score", "--dataset", "sample9"]),
        1
    );
}

#[test]
fn missing_data_file_is_a_data_error() {
    let cache = tempfile::tempdir().unwrap(); // empty cache
    let out = tempfile::tempdir().unwrap();
    assert_eq!(
        run_in(cache.path(), out.path(), &["score", "--dataset", "sample1"]),
        2
    );
}

#[test]
fn bad_flag_value_is_a_user_error() {
    let cache = fixture_cache();
    let out = tempfile::tempdir().unwrap();
    assert_eq!(
        run_in(
            cache.path(),
            out.path(),
            &["--format", "yaml", "score", "--dataset", "sample1"]
        ),
        1
    );
    assert_eq!(
        run_in(
            cache.path(),
            out.path(),
            &["--alpha", "2.0", "tree", "--factors", "biological", "--trait", "E", "--dataset", "sample1"]
        ),
        1
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cache = fixture_cache();
    let out = tempfile::tempdir().unwrap();
    let cfg_path = out.path().join("run.conf");
    std::fs::write(&cfg_path, "format = json\nkeying = eq1\n").unwrap();

    // Config file alone: JSON output.
    let out1 = tempfile::tempdir().unwrap();
    let code = run(vec![
        "traitstat".to_string(),
        "--config".into(),
        cfg_path.to_string_lossy().into_owned(),
        "--cache".into(),
        cache.path().to_string_lossy().into_owned(),
        "--out".into(),
        out1.path().to_string_lossy().into_owned(),
        "describe".into(),
        "--dataset".into(),
        "sample1".into(),
    ]);
    assert_eq!(code, 0);
    assert!(files_in(out1.path())[0].to_string_lossy().ends_with(".json"));

    // Flag wins over the file.
    let out2 = tempfile::tempdir().unwrap();
    let code = run(vec![
        "traitstat".to_string(),
        "--config".into(),
        cfg_path.to_string_lossy().into_owned(),
        "--format".into(),
        "csv".into(),
        "--cache".into(),
        cache.path().to_string_lossy().into_owned(),
        "--out".into(),
        out2.path().to_string_lossy().into_owned(),
        "describe".into(),
        "--dataset".into(),
        "sample1".into(),
    ]);
    assert_eq!(code, 0);
    assert!(files_in(out2.path())[0].to_string_lossy().ends_with(".csv"));
}

#[test]
fn keying_changes_scores_and_metadata() {
    let cache = fixture_cache();
    let mut outputs = Vec::new();
    for keying in ["codebook", "eq1"] {
        let out = tempfile::tempdir().unwrap();
        let code = run_in(
            cache.path(),
            out.path(),
            &["--format", "csv", "--keying", keying, "score", "--dataset", "sample1"],
        );
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&files_in(out.path())[0]).unwrap();
        assert!(text.contains(&format!("# keying: {keying}")));
        outputs.push(text);
    }
    let body = |t: &str| -> String {
        t.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
    };
    assert_ne!(body(&outputs[0]), body(&outputs[1]));
}

#[test]
fn reproduce_with_one_dataset_skips_the_rest() {
    let cache = tempfile::tempdir().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::copy(fixtures.join("sample1.tsv"), cache.path().join("sample1.tsv")).unwrap();
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run_in(cache.path(), out.path(), &["reproduce"]), 0);

    let summary = files_in(out.path())
        .into_iter()
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("summary_"))
        .expect("summary written");
    let text = std::fs::read_to_string(summary).unwrap();
    assert!(text.contains("descriptives sample1: DONE"));
    assert!(text.contains("dataset sample2: SKIPPED"));
    assert!(text.contains("dataset sample3: SKIPPED"));
    assert!(text.contains("family models: SKIPPED"));
    assert!(text.contains("culture models: SKIPPED"));
    assert!(text.contains("country aggregates: SKIPPED"));
    // Biological models still run off the one present dataset.
    assert!(text.contains("biological regressions: DONE"));
}

#[test]
fn explicit_data_path_bypasses_the_cache() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let cache = tempfile::tempdir().unwrap(); // empty
    let out = tempfile::tempdir().unwrap();
    let data = fixtures.join("sample1.tsv");
    let code = run_in(
        cache.path(),
        out.path(),
        &["score", "--dataset", "sample1", "--data", data.to_str().unwrap()],
    );
    assert_eq!(code, 0);
}
