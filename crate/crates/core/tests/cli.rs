//! End-to-end tests of the command-line surface: exit codes, file outputs,
//! and the eval report on stdout.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_motifforge"))
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

const CONFIG: &str = r#"{"kappa":1,"rho":0.6,"nu":0.25,"l_min":20,"l_max":80,"warping":false,"constraints":[]}"#;

fn synth_files(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let spec_path = dir.join("spec.json");
    write(
        &spec_path,
        r#"{"n":500,"patterns":[{"template_length":50,"occurrences":3,"amplitude":3.0}],"noise_sigma":0.05,"seed":42}"#,
    );
    let series = dir.join("series.csv");
    let gt = dir.join("gt.json");
    let status = bin()
        .args(["synth", "-s"])
        .arg(&spec_path)
        .arg("-o")
        .arg(&series)
        .arg("-g")
        .arg(&gt)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    (series, gt)
}

#[test]
fn full_pipeline_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let (series, gt) = synth_files(dir.path());
    let config = dir.path().join("config.json");
    write(&config, CONFIG);
    let result = dir.path().join("result.json");
    let spans = dir.path().join("spans.tsv");

    let status = bin()
        .arg("discover")
        .arg("-i")
        .arg(&series)
        .arg("-c")
        .arg(&config)
        .arg("-o")
        .arg(&result)
        .arg("--spans")
        .arg(&spans)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert!(doc["motif_sets"].is_array());
    assert_eq!(doc["meta"]["kappa"], 1);
    let rec = &doc["motif_sets"][0];
    assert!(!rec.is_null(), "planted repeats should be discovered");
    let wq = rec["weighted_quality"].as_f64().unwrap();
    let prod = rec["fitness"].as_f64().unwrap() * rec["desirability"].as_f64().unwrap();
    assert!((wq - prod).abs() < 1e-9);

    let spans_text = std::fs::read_to_string(&spans).unwrap();
    assert!(spans_text.lines().count() >= 2);
    for line in spans_text.lines() {
        assert_eq!(line.split('\t').count(), 4);
    }

    let out = bin()
        .arg("eval")
        .arg("-r")
        .arg(&result)
        .arg("-g")
        .arg(&gt)
        .arg("--threshold")
        .arg("0.5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let f1 = report["f1"].as_f64().unwrap();
    assert!(f1 > 0.9, "pipeline F1 {f1} too low");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (series, _) = synth_files(dir.path());
    let result = dir.path().join("result.json");

    // malformed JSON
    let config = dir.path().join("bad.json");
    write(&config, "{not json");
    let status = bin()
        .arg("discover")
        .arg("-i")
        .arg(&series)
        .arg("-c")
        .arg(&config)
        .arg("-o")
        .arg(&result)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // out-of-range constraint index
    let config = dir.path().join("bad_index.json");
    write(
        &config,
        r#"{"kappa":1,"rho":0.6,"nu":0.25,"l_min":20,"l_max":80,"warping":false,
            "constraints":[{"kind":"min_cardinality","applies_to":5,"params":{"k_min":2}}]}"#,
    );
    let status = bin()
        .arg("discover")
        .arg("-i")
        .arg(&series)
        .arg("-c")
        .arg(&config)
        .arg("-o")
        .arg(&result)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // infeasible synth spec is a config error
    let spec = dir.path().join("infeasible.json");
    write(
        &spec,
        r#"{"n":50,"patterns":[{"template_length":40,"occurrences":3}],"seed":1}"#,
    );
    let status = bin()
        .args(["synth", "-s"])
        .arg(&spec)
        .arg("-o")
        .arg(dir.path().join("s.csv"))
        .arg("-g")
        .arg(dir.path().join("g.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    write(&config, CONFIG);
    let result = dir.path().join("result.json");

    // missing series file
    let status = bin()
        .arg("discover")
        .arg("-i")
        .arg(dir.path().join("missing.csv"))
        .arg("-c")
        .arg(&config)
        .arg("-o")
        .arg(&result)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    // NaN cell
    let series = dir.path().join("nan.csv");
    write(&series, "1.0\nnan\n2.0\n");
    let out = bin()
        .arg("discover")
        .arg("-i")
        .arg(&series)
        .arg("-c")
        .arg(&config)
        .arg("-o")
        .arg(&result)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 2"), "diagnostic should name the row: {stderr}");
}

#[test]
fn series_cap_respects_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let (series, _) = synth_files(dir.path());
    let config = dir.path().join("config.json");
    write(&config, CONFIG);
    let result = dir.path().join("result.json");

    let out = bin()
        .arg("discover")
        .arg("-i")
        .arg(&series)
        .arg("-c")
        .arg(&config)
        .arg("-o")
        .arg(&result)
        .env("MOTIF_FORGE_MAX_N", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("exceeds the cap"), "{stderr}");
}

#[test]
fn eval_rejects_bad_threshold_and_missing_gt() {
    let dir = tempfile::tempdir().unwrap();
    let result = dir.path().join("result.json");
    write(&result, r#"{"motif_sets":[],"meta":{"kappa":1,"rho":0.5,"nu":0.25,"version":"0"}}"#);
    let gt = dir.path().join("gt.json");
    write(&gt, r#"{"motif_sets":[{"label":"a","motifs":[{"start":0,"end":9}]}]}"#);

    let status = bin()
        .arg("eval")
        .arg("-r")
        .arg(&result)
        .arg("-g")
        .arg(&gt)
        .arg("--threshold")
        .arg("1.5")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let status = bin()
        .arg("eval")
        .arg("-r")
        .arg(&result)
        .arg("-g")
        .arg(dir.path().join("missing.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn selfcheck_passes() {
    let out = bin().arg("selfcheck").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 5, "{stdout}");
}
