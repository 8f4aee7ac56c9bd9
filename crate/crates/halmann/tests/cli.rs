use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use halmann::config::ExperimentConfig;
use halmann::io::load_trace;
use halmann_core::iterate::run_variant;
use halmann_core::rates::sigma1_rate;
use halmann_core::verify::{check_rate, Quantity, RateClaim, RATE_TOL};
use serde_json::{json, Value};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn halmann(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halmann"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_config(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(configs().join(name)).unwrap()).unwrap()
}

/// Writes `value` to `dir/name` and returns the path as a string.
fn write_config(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_trace_and_constants() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = read_config("real_line.json");
    cfg["n_max"] = json!(100);
    let path = write_config(tmp.path(), "rl.json", &cfg);
    let out = tmp.path().join("out");
    let o = halmann(&["run", &path, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,d_xx,d_yy,d_xy,d_Tx,d_Ux,d_Ty,d_Uy,d_xp,d_yp"
    );
    lines.next();
    let row1: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row1[0], 1.0);
    assert!((row1[1] - 2.0 / 3.0).abs() < 1e-15);
    let constants: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("constants.json")).unwrap())
            .unwrap();
    assert_eq!(constants["K"], json!(1));
    assert_eq!(constants["M_p"], json!(1.0));
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn out_of_range_beta_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = read_config("real_line.json");
    cfg["schedule"]["beta"] = json!(1.5);
    let path = write_config(tmp.path(), "bad.json", &cfg);
    let o = halmann(&["verify", &path, "--out", s(tmp.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("(0, 1)"));
}

#[test]
fn unknown_fields_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = read_config("real_line.json");
    cfg["space"]["rays"] = json!(3);
    let path = write_config(tmp.path(), "bad.json", &cfg);
    assert_eq!(code(&halmann(&["run", &path, "--out", s(tmp.path())])), 2);
    assert_eq!(code(&halmann(&["run", "/nonexistent/config.json"])), 2);
}

#[test]
fn mann_variant_has_no_gap_between_x_and_y() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = read_config("real_line_mann.json");
    cfg["n_max"] = json!(200);
    let path = write_config(tmp.path(), "mann.json", &cfg);
    let out = tmp.path().join("out");
    assert_eq!(code(&halmann(&["run", &path, "--out", s(&out)])), 0);
    let series = load_trace(&out).unwrap();
    assert!(series.d_xy.iter().all(|&v| v == 0.0));
}

#[test]
fn rates_table_has_the_closed_forms() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = read_config("real_line.json");
    cfg["k_max"] = json!(3);
    let path = write_config(tmp.path(), "rl.json", &cfg);
    let out = tmp.path().join("out");
    assert_eq!(code(&halmann(&["rates", &path, "--out", s(&out)])), 0);
    let table: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("rates.json")).unwrap()).unwrap();
    let row0 = &table["0"];
    assert_eq!(row0["Σ1"], json!(2));
    assert_eq!(row0["Σ2"], json!(1));
    assert_eq!(row0["Σ3"], json!(254));
    assert_eq!(row0["Θ"], json!(1022));
    assert_eq!(row0["Σ4"], json!(4094));
    assert_eq!(row0["Σ5"], json!(16382));
    assert_eq!(row0["Γ1"], json!(22025));
    assert_eq!(table["3"]["Σ1"], json!(14));
    // Γ2(k) = Γ1(2k+1)
    assert_eq!(row0["Γ2"], table["1"]["Γ1"]);
}

#[test]
fn cat0_rates_on_a_non_cat0_space_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = read_config("lp4.json");
    cfg["rates"] = json!(["Sigma3"]);
    let path = write_config(tmp.path(), "lp.json", &cfg);
    let o = halmann(&["rates", &path, "--out", s(tmp.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("CAT(0)"));
}

#[test]
fn verify_passes_on_every_benchmark() {
    let tmp = tempfile::tempdir().unwrap();
    let o = halmann(&[
        "suite",
        s(&configs()),
        "--budget",
        "20000",
        "--out",
        s(tmp.path()),
    ]);
    let text = stdout(&o);
    assert_eq!(code(&o), 0, "{text}");
    assert!(text.contains("suite: 9 configs, exit 0"), "{text}");
    let report: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("spider5/report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["passed"], json!(true));
}

#[test]
fn zero_rate_override_fails_with_a_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let path = configs().join("negative/zero_rate.json");
    let o = halmann(&[
        "verify",
        s(&path),
        "--budget",
        "1000",
        "--out",
        s(tmp.path()),
    ]);
    let text = stdout(&o);
    assert_eq!(code(&o), 1, "{text}");
    assert!(text.contains("FAIL d_xx by Σ1"), "{text}");
    assert!(text.contains("first violation at k=1 n=Some(1)"), "{text}");
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap())
            .unwrap();
    let claim = report["claims"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["claim"] == "d_xx by Σ1")
        .unwrap();
    assert_eq!(claim["entries"][1]["status"], json!("violated"));
    assert_eq!(claim["entries"][1]["n"], json!(1));
}

#[test]
fn every_negative_control_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = halmann(&[
        "suite",
        s(&configs().join("negative")),
        "--budget",
        "2000",
        "--out",
        s(tmp.path()),
    ]);
    let text = stdout(&o);
    assert_eq!(code(&o), 1, "{text}");
    assert_eq!(text.matches("(exit 1)").count(), 5, "{text}");
}

#[test]
fn small_budget_skips_instead_of_failing() {
    let tmp = tempfile::tempdir().unwrap();
    let o = halmann(&[
        "verify",
        s(&configs().join("real_line.json")),
        "--budget",
        "10",
        "--out",
        s(tmp.path()),
    ]);
    let text = stdout(&o);
    assert_eq!(code(&o), 0, "{text}");
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap())
            .unwrap();
    let skipped: u64 = report["claims"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["summary"]["skipped_budget"].as_u64().unwrap())
        .sum();
    assert!(skipped > 0);
}

#[test]
fn csv_round_trip_gives_the_same_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = read_config("plane_rotations.json");
    cfg["n_max"] = json!(3000);
    let path = write_config(tmp.path(), "pr.json", &cfg);
    let out = tmp.path().join("out");
    assert_eq!(code(&halmann(&["run", &path, "--out", s(&out)])), 0);
    let from_disk = load_trace(&out).unwrap();

    let parsed = ExperimentConfig::load(Path::new(&path)).unwrap();
    let in_process = run_variant(parsed.variant, &parsed.problem().unwrap(), 3000)
        .unwrap()
        .series;
    assert_eq!(from_disk, in_process);
    for q in [Quantity::DXx, Quantity::DYy] {
        let claim = RateClaim::new(q, sigma1_rate(1));
        let a = check_rate(&from_disk, &claim, 200, RATE_TOL).unwrap();
        let b = check_rate(&in_process, &claim, 200, RATE_TOL).unwrap();
        assert_eq!(a.entries, b.entries);
    }
}

#[test]
fn runs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let path = configs().join("spider5.json");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        assert_eq!(code(&halmann(&["run", s(&path), "--out", s(dir)])), 0);
        assert_eq!(
            code(&halmann(&[
                "verify",
                s(&path),
                "--budget",
                "5000",
                "--seed",
                "7",
                "--out",
                s(dir)
            ])),
            0
        );
    }
    for file in ["trace.csv", "constants.json", "report.json"] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
}
