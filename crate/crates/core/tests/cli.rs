use std::path::Path;
use std::process::{Command, Output};

use rrm_core::harness::CSV_HEADER;

fn rrm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.join(","), CSV_HEADER);
    reader.records().map(|r| r.unwrap()).collect()
}

#[test]
fn unknown_preset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = rrm(&["preset", "fig99", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig99"));
}

#[test]
fn bad_config_value_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"surface": {"M": 0}}"#).unwrap();
    let out = rrm(&["mi-sweep", "--config", cfg.to_str().unwrap(), "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surface.M"));
}

#[test]
fn syntax_error_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    std::fs::write(&cfg, "{\n  \"seed\": 3,\n  oops\n}").unwrap();
    let out = rrm(&["mi-sweep", "--config", cfg.to_str().unwrap(), "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn missing_config_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rrm(&["mi-sweep", "--config", "nope.json", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn fig8_rows_cover_sizes_snrs_and_both_beamformers() {
    let dir = tempfile::tempdir().unwrap();
    let out = rrm(&["preset", "fig8_size_sweep", "--out", "o", "--quiet"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(&dir.path().join("o/results.csv"));
    assert_eq!(rows.len(), 3 * 5 * 2);
    assert!(rows.iter().all(|r| &r[0] == "fig8_size_sweep" && &r[1] == "snr_db"));
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("o/results.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"], 30);
    assert!(meta["snr_normalization"].as_str().unwrap().starts_with("absolute"));
    assert_eq!(meta["fingerprint"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_flag_changes_fingerprint_and_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.json");
    std::fs::write(&small, r#"{"surface": {"M": 4, "N": 4}, "link": {"K": 8}}"#).unwrap();
    let meta = |sub: &str| -> serde_json::Value {
        serde_json::from_slice(&std::fs::read(dir.path().join(sub).join("results.meta.json")).unwrap()).unwrap()
    };
    for (seed, sub) in [("5", "a"), ("6", "b")] {
        let out = rrm(
            &["mi-sweep", "--config", small.to_str().unwrap(), "--seed", seed, "--out", sub, "--quiet"],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (meta("a"), meta("b"));
    assert_eq!(a["seed"], 5);
    assert_ne!(a["fingerprint"], b["fingerprint"]);
    let rows = read_rows(&dir.path().join("a/results.csv"));
    assert!(rows.iter().all(|r| &r[6] == "5"));
}

#[test]
fn record_writes_hologram_and_weights() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.json");
    std::fs::write(&small, r#"{"surface": {"M": 6, "N": 5}}"#).unwrap();
    let out = rrm(&["record", "--config", small.to_str().unwrap(), "--out", "r", "--quiet"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["hologram.csv", "hologram_reindexed.csv", "weights.csv"] {
        let text = std::fs::read_to_string(dir.path().join("r").join(name)).unwrap();
        let grid = rrm_core::Grid::<f64>::read_csv(&text).unwrap();
        assert_eq!(grid.shape(), (6, 5), "{name}");
    }
    let w = rrm_core::Grid::<f64>::read_csv(&std::fs::read_to_string(dir.path().join("r/weights.csv")).unwrap()).unwrap();
    assert!(w.iter().all(|v| (0.0..=1.0).contains(v)));
    assert_eq!(w.max_value(), 1.0);
}

#[test]
fn validate_exits_zero_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = rrm(&["validate", "--out", "v"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("link.alpha_split_equivalence.pass"));
    let report = std::fs::read_to_string(dir.path().join("v/validate_report.txt")).unwrap();
    assert_eq!(report.lines().filter(|l| l.starts_with("PASS")).count(), rrm_core::harness::REQUIRED_INVARIANTS.len());
}
