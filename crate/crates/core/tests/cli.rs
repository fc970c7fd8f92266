//! End-to-end tests of the `zerovar` binary.

use std::process::Command;

use serde_json::Value;

fn zerovar(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_zerovar")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn scratch_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("zerovar-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn variance_exact_report_schema_and_value() {
    let (code, stdout, _) = zerovar(&["variance-exact", "--k", "100"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    for key in ["command", "params", "results", "checks", "provenance"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "variance-exact");
    let value = v["results"][0]["variance"]["value"].as_f64().unwrap();
    assert!((value - 0.015_603_97).abs() < 1e-8, "{value}");
    let check = &v["checks"][0];
    for key in ["name", "expected", "got", "tol", "pass", "basis"] {
        assert!(check.get(key).is_some(), "check missing {key}");
    }
    assert_eq!(v["provenance"]["version"], zerovar::VERSION);
}

#[test]
fn csv_has_fixed_header() {
    let (code, stdout, _) = zerovar(&["asymptotics", "--k", "50,100", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "k,route,value,error_estimate,seed");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("50,asymptotic,"));
}

#[test]
fn reports_are_reproducible_up_to_timing() {
    let strip = |s: &str| {
        let mut v: Value = serde_json::from_str(s).unwrap();
        let prov = v["provenance"].as_object_mut().unwrap();
        prov.remove("wall_clock_seconds");
        prov.remove("timestamp_unix");
        v
    };
    let args = ["variance-mc", "--k", "8", "--samples", "300", "--seed", "11"];
    let (_, a, _) = zerovar(&args);
    let (_, b, _) = zerovar(&args);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(zerovar(&["variance-exact", "--k", "abc"]).0, 2);
    assert_eq!(zerovar(&["no-such-command"]).0, 2);
    assert_eq!(zerovar(&["variance-exact", "--testform", "nope"]).0, 2);
    assert_eq!(zerovar(&["variance-exact", "--cutoff-b", "0.5"]).0, 2);
    assert_eq!(zerovar(&["fit", "--k", "100"]).0, 2);
}

#[test]
fn failed_check_exits_one_with_diagnostics() {
    // far too coarse a quadrature: the oracle check fails
    let (code, stdout, stderr) = zerovar(&["variance-exact", "--k", "5", "--outer-nodes", "2", "--inner-nodes", "2"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["checks"][0]["pass"], false);
    assert!(stderr.contains("FAIL"));
}

#[test]
fn numerical_error_emits_diagnostic_json() {
    // an unreachable self-consistency tolerance makes the exact route refuse
    let dir = scratch_dir("numerical");
    let cfg = dir.join("strict.cfg");
    std::fs::write(&cfg, "rel_tol = 1e-30\n").unwrap();
    let (code, stdout, _) = zerovar(&["variance-exact", "--k", "10", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["error"]["kind"], "numerical");
    assert_eq!(v["params"]["k_list"][0], 10);
}

#[test]
fn kernel_probe_at_degree_one() {
    let (code, stdout, _) = zerovar(&["kernel-probe", "--k", "1"]);
    assert_eq!(code, 0, "{stdout}");
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["results"][0]["decay_p1"].is_null());
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch_dir("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# asymptotic sweep\nk = 10, 20\nformat = csv\n").unwrap();
    let (code, stdout, _) = zerovar(&["asymptotics", "--config", cfg.to_str().unwrap(), "--k", "30"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.lines().nth(1).unwrap().starts_with("30,"));

    std::fs::write(&cfg, "k = 10\nsamples = lots\n").unwrap();
    let (code, _, stderr) = zerovar(&["asymptotics", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("run.cfg:2"), "{stderr}");
}

#[test]
fn fit_writes_report_and_k_var_table() {
    let dir = scratch_dir("fit");
    let out = dir.join("fit.json");
    let (code, _, _) = zerovar(&["fit", "--k", "50,100,200,400", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    let table = std::fs::read_to_string(dir.join("fit_kvar.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "k,k_var");
    assert_eq!(lines.len(), 5);
    let kvar100: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((kvar100 - 1.560_397).abs() < 1e-6);
}

#[test]
fn verify_suite_passes() {
    let (code, stdout, _) = zerovar(&["verify", "--suite", "specfun"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert!(!v["checks"].as_array().unwrap().is_empty());
}
