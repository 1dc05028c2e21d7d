//! Exit-code and artifact checks for the command-line interface.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_leakywire")
}

fn tmpdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("leakywire-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create temp dir");
    dir
}

#[test]
fn unknown_subcommand_exits_2() {
    let status = Command::new(bin()).arg("frobnicate").status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn malformed_json_exits_2_and_names_the_problem() {
    let dir = tmpdir("badjson");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{oops").unwrap();
    let out = Command::new(bin())
        .args(["bands", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid JSON"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn schema_errors_name_offending_fields_exhaustively() {
    let dir = tmpdir("schema");
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"model":"grating","coupling":{"type":"constant","value":0.1},
            "k_spec":{"type":"grid","count":11},"lambda_tol":-2}"#,
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["fiber", "--config"])
        .arg(&path)
        .args(["--k1", "0.1", "--k2", "0.2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("k_spec"), "stderr: {err}");
    assert!(err.contains("lambda_tol"), "stderr: {err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn tvalues_anchor_row_has_zero_discrepancy() {
    let out = Command::new(bin())
        .args(["tvalues", "--z", "-1", "--k2", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let row = stdout.lines().nth(1).expect("data row");
    assert!(row.ends_with(",0.0000000000000000e0"), "row: {row}");
}

#[test]
fn tvalues_positive_z_leaves_image_cells_empty() {
    let out = Command::new(bin())
        .args(["tvalues", "--z", "0.01", "--k2", "0.25"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let row = stdout.lines().nth(1).expect("data row");
    assert!(row.ends_with(",,"), "row: {row}");
}

#[test]
fn bands_pipeline_writes_artifacts() {
    let dir = tmpdir("bands");
    let cfg = dir.join("cfg.json");
    let csv = dir.join("out.csv");
    let json = dir.join("out.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"model":"line","coupling":{{"type":"constant","value":0.0}},
                "truncation":16,"k_spec":{{"type":"grid","count":21}},
                "outputs":{{"bands_csv":"{}","gaps_json":"{}"}}}}"#,
            csv.display(),
            json.display()
        ),
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["bands", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(status.success());
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("k,band_index,lambda,threshold,flag\n"));
    assert!(csv_text.lines().count() > 21);
    // curve 0 equals xi(0) + k^2 for the constant coupling
    let xi0 = -4.0 * (-2.0 * 0.577_215_664_901_532_9_f64).exp();
    for line in csv_text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells[1] == "0" {
            let k: f64 = cells[0].parse().unwrap();
            let lambda: f64 = cells[2].parse().unwrap();
            let kc = k - k.round();
            assert!((lambda - (xi0 + kc * kc)).abs() < 1e-8, "k={k}");
        }
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["model"], "line");
    assert_eq!(report["converged"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn modes_rejects_grating_model() {
    let dir = tmpdir("modes");
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model":"grating","coupling":{"type":"constant","value":0.0}}"#,
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["modes", "--config"])
        .arg(&cfg)
        .args(["--k", "0.1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn modes_writes_field_samples() {
    let dir = tmpdir("modes-ok");
    let cfg = dir.join("cfg.json");
    let csv = dir.join("field.csv");
    std::fs::write(
        &cfg,
        r#"{"model":"line","coupling":{"type":"constant","value":0.0},"truncation":16}"#,
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["modes", "--config"])
        .arg(&cfg)
        .args([
            "--k",
            "0",
            "--band",
            "0",
            "--x-count",
            "8",
            "--y",
            "0.5,1.0",
        ])
        .arg("--out")
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 17); // header + 8 x 2
    std::fs::remove_dir_all(&dir).ok();
}
