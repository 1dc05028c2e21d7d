//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Criteria 1-10 are the numerical battery shared with the `verify`
//! subcommand; 11 checks gap-report stability across resolutions, 12 checks
//! byte-identical output across thread caps, 13 drives the `verify`
//! subcommand end to end. Run with `cargo test --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::process::Command;
use std::time::Instant;

use leakywire::band_sweep::{detect_gaps, line_grid, sweep, KSet, SweepConfig};
use leakywire::coupling::CouplingFunction;
use leakywire::verify::{self, CriterionResult};

use num_complex::Complex64;

fn report(r: &CriterionResult) {
    let status = if r.passed { "PASS" } else { "FAIL" };
    println!(
        "[{status}] criterion {:>2}: {:<42} ({:>7.2} s)  {}",
        r.index, r.name, r.seconds, r.detail
    );
}

fn assert_criterion(r: CriterionResult) {
    report(&r);
    assert!(r.passed, "criterion {} failed: {}", r.index, r.detail);
}

#[test]
fn criterion_01_constant_coupling_exactness_line() {
    assert_criterion(verify::criterion_1());
}

#[test]
fn criterion_02_multiplicity_flags() {
    assert_criterion(verify::criterion_2());
}

#[test]
fn criterion_03_dual_representation_of_t() {
    assert_criterion(verify::criterion_3());
}

#[test]
fn criterion_04_constant_coupling_exactness_grating() {
    assert_criterion(verify::criterion_4());
}

#[test]
fn criterion_05_inequality_suite() {
    assert_criterion(verify::criterion_5());
}

#[test]
fn criterion_06_psi_dual_representation() {
    assert_criterion(verify::criterion_6());
}

#[test]
fn criterion_07_hs_norm_identity() {
    assert_criterion(verify::criterion_7());
}

#[test]
fn criterion_08_tunneling_decay() {
    assert_criterion(verify::criterion_8());
}

#[test]
fn criterion_09_complexified_bound() {
    assert_criterion(verify::criterion_9());
}

#[test]
fn criterion_10_embedded_kernel() {
    assert_criterion(verify::criterion_10());
}

fn modulated_sigma() -> CouplingFunction {
    // σ(x) = 0.25 + 0.2 cos x
    let amp = Complex64::new(0.2 * (std::f64::consts::PI / 2.0).sqrt(), 0.0);
    CouplingFunction::from_fourier([
        (
            0,
            Complex64::new(0.25 * (2.0 * std::f64::consts::PI).sqrt(), 0.0),
        ),
        (1, amp),
        (-1, amp),
    ])
    .expect("symmetric coefficients")
}

#[test]
fn criterion_11_gap_report_stability() {
    let t0 = Instant::now();
    let sigma = modulated_sigma();

    let cfg_a = SweepConfig::line(sigma.clone(), 128);
    let b_a = sweep(&cfg_a, &KSet::Line(line_grid(201)))
        .expect("coarse sweep")
        .into_converged();
    let r_a = detect_gaps(&b_a).expect("coarse gaps");

    let cfg_b = SweepConfig::line(sigma, 256);
    let b_b = sweep(&cfg_b, &KSet::Line(line_grid(401)))
        .expect("fine sweep")
        .into_converged();
    let r_b = detect_gaps(&b_b).expect("fine gaps");

    let mut passed = !r_a.union.is_empty() && r_a.gaps.len() == r_b.gaps.len();
    let mut worst: f64 = 0.0;
    if passed {
        for (ga, gb) in r_a.gaps.iter().zip(r_b.gaps.iter()) {
            worst = worst.max((ga.0 - gb.0).abs()).max((ga.1 - gb.1).abs());
        }
        for (ua, ub) in r_a.union.iter().zip(r_b.union.iter()) {
            worst = worst.max((ua.0 - ub.0).abs()).max((ua.1 - ub.1).abs());
        }
        passed = worst <= 1e-5 && r_a.union.len() == r_b.union.len();
    }
    let seconds = t0.elapsed().as_secs_f64();
    if seconds > 120.0 {
        passed = false;
    }
    let r = CriterionResult {
        index: 11,
        name: "gap-report stability",
        passed,
        detail: format!(
            "{} gaps / {} gaps, max endpoint shift {worst:.2e}, union[0] = ({:.6}, {:.6})",
            r_a.gaps.len(),
            r_b.gaps.len(),
            r_a.union.first().map(|u| u.0).unwrap_or(f64::NAN),
            r_a.union.first().map(|u| u.1).unwrap_or(f64::NAN),
        ),
        seconds,
    };
    report(&r);
    assert!(r.passed, "criterion 11 failed: {}", r.detail);
}

#[test]
fn criterion_12_byte_identical_csv_across_threads() {
    let t0 = Instant::now();
    let dir = std::env::temp_dir().join(format!("leakywire-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create temp dir");
    let config_path = dir.join("determinism.json");
    let csv1 = dir.join("bands-t1.csv");
    let csv8 = dir.join("bands-t8.csv");
    let json1 = dir.join("gaps-t1.json");
    let json8 = dir.join("gaps-t8.json");
    let config = format!(
        r#"{{
  "model": "line",
  "coupling": {{"type": "fourier", "coeffs": {{
      "0": [0.6266570686577501, 0.0],
      "1": [0.2506628274631, 0.0],
      "-1": [0.2506628274631, 0.0]}}}},
  "truncation": 64,
  "k_spec": {{"type": "grid", "count": 101}},
  "outputs": {{"bands_csv": "{}", "gaps_json": "{}"}}
}}"#,
        csv1.display(),
        json1.display()
    );
    std::fs::write(&config_path, &config).expect("write config");
    let bin = env!("CARGO_BIN_EXE_leakywire");
    let run = |threads: &str| {
        Command::new(bin)
            .args(["bands", "--config"])
            .arg(&config_path)
            .args(["--threads", threads])
            .status()
            .expect("spawn bands")
    };
    let s1 = run("1");
    assert!(s1.success(), "single-thread run failed");
    std::fs::rename(&csv1, dir.join("keep1.csv")).ok();
    std::fs::rename(&json1, dir.join("keep1.json")).ok();
    let s8 = run("8");
    assert!(s8.success(), "eight-thread run failed");
    std::fs::rename(&csv1, &csv8).ok();
    std::fs::rename(&json1, &json8).ok();
    let a = std::fs::read(dir.join("keep1.csv")).expect("read csv 1");
    let b = std::fs::read(&csv8).expect("read csv 8");
    let aj = std::fs::read(dir.join("keep1.json")).expect("read json 1");
    let bj = std::fs::read(&json8).expect("read json 8");
    let passed = a == b && aj == bj;
    let r = CriterionResult {
        index: 12,
        name: "byte-identical output across threads",
        passed,
        detail: format!("{} CSV bytes, {} JSON bytes", a.len(), aj.len()),
        seconds: t0.elapsed().as_secs_f64(),
    };
    report(&r);
    std::fs::remove_dir_all(&dir).ok();
    assert!(r.passed, "criterion 12 failed");
}

#[test]
fn criterion_13_verify_subcommand() {
    let t0 = Instant::now();
    let bin = env!("CARGO_BIN_EXE_leakywire");
    let output = Command::new(bin)
        .arg("verify")
        .output()
        .expect("spawn verify");
    let seconds = t0.elapsed().as_secs_f64();
    let stdout = String::from_utf8_lossy(&output.stdout);
    let passed = output.status.success() && seconds <= 300.0;
    let r = CriterionResult {
        index: 13,
        name: "verify subcommand",
        passed,
        detail: format!(
            "exit {:?} in {seconds:.1} s; {} PASS lines",
            output.status.code(),
            stdout.matches("[PASS]").count()
        ),
        seconds,
    };
    report(&r);
    assert!(r.passed, "criterion 13 failed:\n{stdout}");
}
