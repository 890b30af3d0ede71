//! End-to-end behavior of the `eigopt` binary: output formats, exit codes,
//! trace/JSON artifacts, and warning surfacing.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eigopt::CMatrix;
use eigopt_cli::mtx;
use eigopt_cli::record::RunRecord;
use num_complex::Complex64;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eigopt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_mtx(dir: &Path, name: &str, m: &CMatrix) -> PathBuf {
    let path = dir.join(name);
    let mut buf = Vec::new();
    mtx::write_array_complex(&mut buf, m).unwrap();
    std::fs::write(&path, buf).unwrap();
    path
}

fn diag_example() -> CMatrix {
    let mut a = CMatrix::zeros(2, 2);
    a[(0, 0)] = Complex64::from(-1.0);
    a[(1, 1)] = Complex64::new(0.3, 0.4);
    a
}

fn stdout_value(out: &Output) -> f64 {
    String::from_utf8_lossy(&out.stdout).trim().parse().expect("numeric stdout")
}

#[test]
fn psa_zero_matrix_prints_unit_abscissa() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "zero.mtx", &CMatrix::zeros(1, 1));
    let out = run(&["psa", path.to_str().unwrap(), "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1.000000000000000");
}

#[test]
fn psa_normal_matrix_and_leftmost() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "diag.mtx", &diag_example());
    let out = run(&["psa", path.to_str().unwrap(), "--epsilon", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((stdout_value(&out) - 0.8).abs() <= 1e-8);

    let out = run(&["psa", path.to_str().unwrap(), "--epsilon", "0.5", "--leftmost"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((stdout_value(&out) + 1.5).abs() <= 1e-8);
}

#[test]
fn psr_normal_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "diag.mtx", &diag_example());
    let out = run(&["psr", path.to_str().unwrap(), "--epsilon", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((stdout_value(&out) - 1.5).abs() <= 1e-8);
}

#[test]
fn psr_zero_matrix_prints_unit_radius() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "zero.mtx", &CMatrix::zeros(1, 1));
    let out = run(&["psr", path.to_str().unwrap(), "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1.000000000000000");
}

#[test]
fn check_handles_the_one_by_one_edge() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "zero.mtx", &CMatrix::zeros(1, 1));
    let out = run(&["check", path.to_str().unwrap(), "--epsilon", "1", "--samples", "30"]);
    assert_eq!(out.status.code(), Some(0), "stdout: {}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn malformed_file_exits_one_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.mtx");
    std::fs::write(&path, "%%MatrixMarket matrix array real general\n2 2\n1.0\nbogus\n4.0\n").unwrap();
    let out = run(&["psa", path.to_str().unwrap(), "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 4"), "stderr: {stderr}");
}

#[test]
fn missing_file_exits_one() {
    let out = run(&["psa", "/nonexistent/m.mtx", "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_square_matrix_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rect.mtx");
    std::fs::write(&path, "%%MatrixMarket matrix array real general\n1 2\n1.0\n2.0\n").unwrap();
    let out = run(&["psa", path.to_str().unwrap(), "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("square"));
}

#[test]
fn max_iterations_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "diag.mtx", &diag_example());
    let out = run(&["psa", path.to_str().unwrap(), "--epsilon", "0.5", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_eigenvalue_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "eye.mtx", &CMatrix::identity(2, 2));
    let out = run(&["psa", path.to_str().unwrap(), "--epsilon", "0.5"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn trace_csv_has_fixed_header_and_full_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "diag.mtx", &diag_example());
    let trace_path = dir.path().join("trace.csv");
    let json_path = dir.path().join("run.json");
    let out = run(&[
        "psa",
        path.to_str().unwrap(),
        "--epsilon",
        "0.5",
        "--trace",
        trace_path.to_str().unwrap(),
        "--json",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let csv = std::fs::read_to_string(&trace_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,omega1,omega2,lambda,grad1,grad2,objective,gap");
    let record = RunRecord::from_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), record.result.iterations + 1);
    for row in rows {
        assert_eq!(row.split(',').count(), 8);
        for field in row.split(',') {
            field.parse::<f64>().expect("numeric CSV field");
        }
    }
}

#[test]
fn json_record_reloads_and_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "diag.mtx", &diag_example());
    let json_path = dir.path().join("run.json");
    let out = run(&[
        "psr",
        path.to_str().unwrap(),
        "--epsilon",
        "0.5",
        "--json",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let record = RunRecord::from_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(record.config.command, "psr");
    assert_eq!(record.config.target, "outermost");
    assert_eq!(record.config.gamma_source, "gershgorin");
    assert_eq!(record.result.status, "converged");
    assert_eq!(record.result.value.to_bits(), stdout_value(&out).to_bits());
    assert!(record.input_digest.starts_with("sha256:"));
}

#[test]
fn undersized_gamma_warns_but_proceeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "diag.mtx", &diag_example());
    let json_path = dir.path().join("run.json");
    let out = run(&[
        "psr",
        path.to_str().unwrap(),
        "--epsilon",
        "0.5",
        "--gamma",
        "0.05",
        "--json",
        json_path.to_str().unwrap(),
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("curvature bound"), "stderr: {stderr}");
    let record = RunRecord::from_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(record.config.gamma_source, "user");
    assert!(record.result.gamma_violations > 0);
}

#[test]
fn boundary_writes_circle_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "zero.mtx", &CMatrix::zeros(1, 1));
    let out_path = dir.path().join("boundary.csv");
    let out = run(&[
        "boundary",
        path.to_str().unwrap(),
        "--epsilon",
        "1",
        "--angles",
        "8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "re,im");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let (re, im) = row.split_once(',').unwrap();
        let (re, im): (f64, f64) = (re.parse().unwrap(), im.parse().unwrap());
        assert!((re.hypot(im) - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn boundary_rejects_too_few_angles() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "zero.mtx", &CMatrix::zeros(1, 1));
    let out = run(&[
        "boundary",
        path.to_str().unwrap(),
        "--epsilon",
        "1",
        "--angles",
        "7",
        "--out",
        dir.path().join("b.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_rejects_tiny_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "zero.mtx", &CMatrix::zeros(1, 1));
    let out = run(&[
        "oracle",
        path.to_str().unwrap(),
        "--epsilon",
        "1",
        "--target",
        "abscissa",
        "--resolution",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_matches_analytic_value_across_resolutions() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "diag.mtx", &diag_example());
    let mut values = Vec::new();
    for resolution in ["51", "201"] {
        let out = run(&[
            "oracle",
            path.to_str().unwrap(),
            "--epsilon",
            "0.5",
            "--target",
            "abscissa",
            "--resolution",
            resolution,
        ]);
        assert_eq!(out.status.code(), Some(0));
        values.push(stdout_value(&out));
    }
    assert!((values[0] - values[1]).abs() <= 1e-8);
    assert!((values[0] - 0.8).abs() <= 1e-8);
}

#[test]
fn check_passes_on_good_instance_and_fails_on_bad_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mtx(dir.path(), "diag.mtx", &diag_example());
    let out = run(&["check", path.to_str().unwrap(), "--epsilon", "0.5", "--samples", "40"]);
    assert_eq!(out.status.code(), Some(0), "stdout: {}", String::from_utf8_lossy(&out.stdout));

    let out = run(&[
        "check",
        path.to_str().unwrap(),
        "--epsilon",
        "0.5",
        "--samples",
        "40",
        "--gamma",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
