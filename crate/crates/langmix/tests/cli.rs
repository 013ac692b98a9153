//! End-to-end tests of the `langmix` binary: exit codes, file
//! formats, and the determinism contract, all through the real CLI.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_langmix"))
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).expect("write fixture");
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn langmix")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const UNIT_COUPLE: &str = r#"{
  "version": 1,
  "seed": 7,
  "oracle": {"kind": "quadratic", "s_diag": [1.0]},
  "stream": {"kind": "linear", "coeffs": [1.0]},
  "sampler": {"lambda": 0.25, "steps": 24, "replicas": 200, "record_every": 8}
}"#;

#[test]
fn unknown_config_key_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "bad.json",
        r#"{"version": 1, "seed": 1, "oracle": {"kind": "quadratic", "s_diag": [1.0], "nope": 3}}"#,
    );
    let out = run(bin().args(["couple", "--config"]).arg(&cfg).args(["--out"]).arg(dir.path().join("o.csv")));
    assert_exit(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn step_size_outside_admissible_range_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "couple.json", UNIT_COUPLE);
    let out = run(bin()
        .args(["couple", "--config"])
        .arg(&cfg)
        .args(["--lambda", "1.5", "--out"])
        .arg(dir.path().join("o.csv")));
    assert_exit(&out, 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis violated"));
}

#[test]
fn couple_writes_csv_and_complete_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "couple.json", UNIT_COUPLE);
    let out_csv = dir.path().join("run.csv");
    let out = run(bin().args(["couple", "--config"]).arg(&cfg).arg("--out").arg(&out_csv));
    assert_exit(&out, 0);

    let body = fs::read_to_string(&out_csv).unwrap();
    let header = body.lines().next().unwrap();
    assert!(header.starts_with("n,mean_sq_dist,se,sup_so_far"), "header: {header}");
    // 24 steps recorded every 8, plus n=0 and the header line.
    assert_eq!(body.lines().count(), 5);

    let manifest = fs::read_to_string(dir.path().join("run.csv.manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"complete\""));
    assert!(manifest.contains("\"seed\": 7"));
}

#[test]
fn sample_csv_has_extra_moment_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "sample.json",
        r#"{
  "version": 1,
  "seed": 3,
  "oracle": {"kind": "quadratic", "s_diag": [1.0]},
  "stream": {"kind": "linear", "coeffs": [1.0, 0.5]},
  "sampler": {"lambda": 0.2, "steps": 16, "replicas": 150, "record_every": 4,
              "moment_orders": [1, 2],
              "initial": {"kind": "point", "point": [1.0]}}
}"#,
    );
    let out_csv = dir.path().join("s.csv");
    let out = run(bin().args(["sample", "--config"]).arg(&cfg).arg("--out").arg(&out_csv));
    assert_exit(&out, 0);
    let body = fs::read_to_string(&out_csv).unwrap();
    assert_eq!(body.lines().next().unwrap(), "n,mean_sq_dist,se,sup_so_far,moment_p2");
}

#[test]
fn verify_quick_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let v1 = dir.path().join("v1.json");
    let v2 = dir.path().join("v2.json");
    for v in [&v1, &v2] {
        let out = run(bin()
            .args(["verify", "--level", "quick", "--seed", "42", "--out"])
            .arg(v));
        assert_exit(&out, 0);
    }
    let b1 = fs::read(&v1).unwrap();
    let b2 = fs::read(&v2).unwrap();
    assert_eq!(b1, b2, "same-seed verdicts differ");

    let verdict = String::from_utf8(b1).unwrap();
    assert!(verdict.contains("\"all_pass\": true"));
    assert!(verdict.contains("\"level\": \"quick\""));
    // Wall-clock data lives in the manifest, never in the verdict.
    let manifest = fs::read_to_string(dir.path().join("v1.json.manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"complete\""));
    assert!(!verdict.contains("duration"));
}

#[test]
fn w2_reads_headers_and_picks_method_by_dim() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "0.1\n0.9\n0.4\n");
    let b = write(&dir, "b.csv", "x\n0.2\n1.0\n0.5\n");
    let report = dir.path().join("w2.json");
    let out = run(bin()
        .args(["w2", "--a"])
        .arg(&a)
        .arg("--b")
        .arg(&b)
        .arg("--out")
        .arg(&report));
    assert_exit(&out, 0);
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["method"], "1d");
    assert!((parsed["w2"].as_f64().unwrap() - 0.1).abs() < 1e-12);

    // Two dimensions: every point shifted by 0.1 per coordinate.
    let a2 = write(&dir, "a2.csv", "0.0,0.0\n1.0,1.0\n");
    let b2 = write(&dir, "b2.csv", "0.1,0.1\n1.1,1.1\n");
    let report2 = dir.path().join("w2_2d.json");
    let out = run(bin()
        .args(["w2", "--a"])
        .arg(&a2)
        .arg("--b")
        .arg(&b2)
        .arg("--out")
        .arg(&report2));
    assert_exit(&out, 0);
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report2).unwrap()).unwrap();
    assert_eq!(parsed["method"], "assign");
    assert!((parsed["w2"].as_f64().unwrap() - 0.1_f64 * 2.0_f64.sqrt()).abs() < 1e-12);
}

#[test]
fn constants_report_exposes_every_named_constant() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("constants.json");
    let out = run(bin()
        .args([
            "constants", "--a", "1", "--l1", "1", "--l2", "1", "--d", "1", "--p", "4",
            "--kappa", "1", "--epsilon", "0.3", "--out",
        ])
        .arg(&report));
    assert_exit(&out, 0);
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    for key in [
        "Cprime", "cprime", "Cdprime", "cdprime", "Cunder", "Cflat_stmt", "Cflat_proof",
        "Cstar", "C0", "C0_proof", "c_hat", "c", "c1_kappa", "c2_kappa", "lambda0",
        "iid_C", "c0", "cbar", "Cbar", "c1", "c2",
    ] {
        assert!(parsed.get(key).is_some(), "missing key {key}");
    }
    assert!(parsed["dependent_plan"]["lambda"].as_f64().unwrap() > 0.0);
    assert_eq!(parsed["iid_plan"]["n_min"].as_u64(), Some(6019));
}

#[test]
fn mixing_profile_feeds_constants() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "stream.json",
        r#"{
  "version": 1,
  "seed": 9,
  "oracle": {"kind": "quadratic", "s_diag": [1.0]},
  "stream": {"kind": "linear", "coeffs": [1.0, 0.5]}
}"#,
    );
    let profile = dir.path().join("profile.json");
    let out = run(bin()
        .args(["mixing", "--config"])
        .arg(&cfg)
        .args(["--tau-max", "12", "--out"])
        .arg(&profile));
    assert_exit(&out, 0);

    let report = dir.path().join("constants.json");
    let out = run(bin()
        .args(["constants", "--a", "1", "--l1", "1", "--l2", "1", "--p", "4", "--mixing"])
        .arg(&profile)
        .arg("--out")
        .arg(&report));
    assert_exit(&out, 0);
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    // The two-tap stream carries more long-run noise than the default
    // unit-variance i.i.d. data, so the order-4 envelope grows.
    let c0_dependent = parsed["C0"].as_f64().unwrap();
    assert!(c0_dependent.is_finite() && c0_dependent > 0.0);
}

#[test]
fn executed_plan_pass_and_fail_exit_codes() {
    let dir = TempDir::new().unwrap();
    let plan = dir.path().join("plan.json");
    let out = run(bin()
        .args(["plan", "--epsilon", "0.3", "--iid", "--execute", "--replicas", "300", "--out"])
        .arg(&plan));
    assert_exit(&out, 0);
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&plan).unwrap()).unwrap();
    assert_eq!(parsed["execution"]["pass"], true);

    // A data matrix forty times the planner's assumption inflates the
    // stationary spread well past the target: the executed check must
    // fail and the process must say so in its exit code.
    let cfg = write(
        &dir,
        "mismatch.json",
        r#"{
  "version": 1,
  "seed": 5,
  "oracle": {"kind": "quadratic", "s_diag": [1.0], "b_scale": 60.0},
  "stream": {"kind": "linear", "coeffs": [1.0]}
}"#,
    );
    let plan_fail = dir.path().join("plan_fail.json");
    let out = run(bin()
        .args(["plan", "--epsilon", "0.3", "--iid", "--execute", "--replicas", "200", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&plan_fail));
    assert_exit(&out, 4);
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&plan_fail).unwrap()).unwrap();
    assert_eq!(parsed["execution"]["pass"], false);
}

#[test]
fn plan_requires_exactly_one_mode() {
    let dir = TempDir::new().unwrap();
    let out = run(bin()
        .args(["plan", "--epsilon", "0.3", "--out"])
        .arg(dir.path().join("p.json")));
    assert_exit(&out, 2);
    let out = run(bin()
        .args(["plan", "--epsilon", "0.3", "--iid", "--kappa", "1", "--out"])
        .arg(dir.path().join("p.json")));
    assert_exit(&out, 2);
}

#[test]
fn rate_sweep_writes_report_and_plot_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "couple.json", UNIT_COUPLE);
    let report = dir.path().join("sweep.json");
    let out = run(bin()
        .args(["rate-sweep", "--config"])
        .arg(&cfg)
        .args(["--lambdas", "0.25,0.125", "--steps", "120", "--replicas", "300", "--out"])
        .arg(&report));
    assert_exit(&out, 0);
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["lambdas"].as_array().unwrap().len(), 2);
    assert!(parsed["fitted_slope"].as_f64().unwrap() > 0.0);

    let plot = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(plot
        .lines()
        .next()
        .unwrap()
        .starts_with("lambda,steps,window_start,distance"));
}

fn manifest_for(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

#[test]
fn every_report_gets_a_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "couple.json", UNIT_COUPLE);
    let report = dir.path().join("bias.json");
    let out = run(bin()
        .args(["ula-bias", "--config"])
        .arg(&cfg)
        .args(["--lambdas", "0.1", "--closed-only", "--out"])
        .arg(&report));
    assert_exit(&out, 0);
    assert!(manifest_for(&report).exists());
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["all_pass"], true);
    assert!(parsed["rows"][0]["w2_empirical"].is_null());
}
