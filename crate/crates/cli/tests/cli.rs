use fracfueter_cli::checks::CheckName;
use fracfueter_cli::config::RunConfig;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fracfueter"));
    c.env_remove("FRACFUETER_WORKERS");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const FAST: &str = r#"{"checks": ["quaternion-laws", "stokes", "cauchy-type"], "seed": 11}"#;

#[test]
fn list_checks_names_every_check() {
    let o = bin().arg("list-checks").output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for c in CheckName::ALL {
        assert!(text.lines().any(|l| l.starts_with(c.as_str())), "{c} missing from\n{text}");
    }
}

#[test]
fn validate_accepts_the_shipped_configs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let o = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
        assert_eq!(code(&o), 0, "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
        seen += 1;
    }
    assert!(seen >= 3);
}

#[test]
fn config_errors_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, text, needle) in [
        ("order.json", r#"{"alpha": 1.2}"#, "alpha"),
        ("unknown.json", r#"{"alpah": 0.5}"#, "unknown field"),
        ("nested.json", r#"{"resolution": {"n_volume": 8, "grading": 2}}"#, "unknown field"),
        ("check.json", r#"{"checks": ["stoke"]}"#, "unknown variant"),
        ("weight.json", r#"{"box": {"a": [-1, 0, 0, 0], "b": [1, 1, 1, 1]}, "weights_g": {"kind": "log"}}"#, "weights_g"),
        ("syntax.json", "{", "malformed"),
    ] {
        let p = write_config(tmp.path(), name, text);
        for cmd in ["validate", "run"] {
            let mut c = bin();
            c.args([cmd, "--config"]).arg(&p);
            if cmd == "run" {
                c.arg("--out").arg(tmp.path());
            }
            let o = c.output().unwrap();
            assert_eq!(code(&o), 2, "{name} {cmd}");
            let err = String::from_utf8_lossy(&o.stderr);
            assert!(err.contains(needle), "{name}: {err}");
        }
    }
    let o = bin().args(["validate", "--config", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn run_writes_json_and_csv_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "fast.json", FAST);
    let out = tmp.path().join("out");
    let o = bin().args(["run", "--workers", "2", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["workers"], 2);
    assert!(report["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(report["conventions"]["exponent_resolution"], "I^(1-alpha_j)");
    assert_eq!(report["conventions"]["laplacian"], "R4");
    assert_eq!(report["config"]["seed"], 11);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert_eq!(checks[1]["name"], "stokes");
    assert!(checks[1]["resolution"]["n_face"].as_u64().is_some());

    let mut csv = csv::Reader::from_path(out.join("report.csv")).unwrap();
    let headers = csv.headers().unwrap().clone();
    assert_eq!(&headers, vec!["check", "case", "metric", "value", "tolerance", "pass", "note"]);
    let rows: Vec<_> = csv.records().map(|r| r.unwrap()).collect();
    let json_rows: usize = checks.iter().map(|c| c["residuals"].as_array().unwrap().len()).sum();
    assert_eq!(rows.len(), json_rows);
    assert!(rows.iter().all(|r| &r[5] == "true"));
}

#[test]
fn failing_checks_exit_with_code_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "strict.json",
        r#"{"checks": ["quaternion-laws"], "tolerances": {"quaternion-laws": 1e-300}}"#,
    );
    let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn check_errors_are_reported_not_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    // the Hadamard operators need a box in the positive orthant
    let cfg = write_config(
        tmp.path(),
        "hadamard.json",
        r#"{"box": {"a": [0, 0, 0, 0], "b": [1, 1, 1, 1]}, "checks": ["hadamard", "quaternion-laws"]}"#,
    );
    let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert!(report["checks"][0]["error"].as_str().unwrap().contains("a > 0"));
    assert_eq!(report["checks"][1]["pass"], true);
    let csv = std::fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("hadamard,-,error")));
}

#[test]
fn worker_count_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "fast.json", r#"{"checks": ["quaternion-laws"]}"#);
    let o = bin()
        .env("FRACFUETER_WORKERS", "3")
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["workers"], 3);

    let o = bin()
        .env("FRACFUETER_WORKERS", "3")
        .args(["run", "--workers", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["workers"], 1);

    let o = bin().env("FRACFUETER_WORKERS", "zero").args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_reports_trends() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sweep.json", r#"{"checks": ["frac-stokes"]}"#);
    let out = tmp.path().join("sweep");
    let o = bin()
        .args(["sweep", "--param", "N_volume", "--values", "6,8,10", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let sweep: Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(sweep["param"], "N_volume");
    assert_eq!(sweep["runs"].as_array().unwrap().len(), 3);
    assert_eq!(sweep["runs"][2]["checks"][0]["resolution"]["n_volume"], 10);
    assert_eq!(sweep["trends"][0]["verdict"], "decreasing");
    assert!(out.join("sweep.csv").exists());
}

#[test]
fn sweep_rejects_unknown_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "fast.json", FAST);
    for (param, values) in [("grading", "1,2"), ("n_volume", "8,x")] {
        let o = bin()
            .args(["sweep", "--param", param, "--values", values, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path())
            .output()
            .unwrap();
        assert_eq!(code(&o), 2, "{param}");
    }
}

/// Property names in the published schema match what the config parser
/// accepts.
#[test]
fn schema_matches_the_config_types() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/config.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let keys = |v: &Value| -> Vec<String> {
        let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    };

    let full = serde_json::to_value(RunConfig::default()).unwrap();
    assert_eq!(keys(&schema["properties"]), keys(&full));

    let mut resolution = RunConfig::default();
    for p in ["n_volume", "n_face", "node_count_1d", "fd_h", "epsilon"] {
        resolution.set_param(p, "0.05").or_else(|_| resolution.set_param(p, "8")).unwrap();
    }
    resolution.resolution.node_count_outer = Some(8);
    resolution.resolution.fd_order = Some(2);
    resolution.resolution.volume_mode = Some(fracfueter_cli::config::VolumeModeName::Subtraction);
    let r = serde_json::to_value(&resolution.resolution).unwrap();
    assert_eq!(keys(&schema["$defs"]["resolution"]["properties"]), keys(&r));

    let names: Vec<&str> = schema["$defs"]["check"]["enum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(names, CheckName::ALL.map(|c| c.as_str()).to_vec());

    // every documented example parses
    for example in [r#"{"structural_set": [[1,0,0,0],[0,0,1,0],[0,1,0,0],[0,0,0,1]]}"#, r#"{"base_point": [1.2, 1.5, 1.5, 1.7]}"#] {
        RunConfig::from_json(example).unwrap();
    }
}
