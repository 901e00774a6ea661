use std::path::Path;
use std::process::{Command, Output};

fn jspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jspec"))
        .args(args)
        .env_remove("JS_THREADS")
        .output()
        .expect("failed to launch jspec")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by signal")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn equal_shifts_match_exact_eigenvalues() {
    let o = jspec(&["spectrum", "--g", "0.6", "--c1", "0.3", "--c2", "0.3", "--n", "0:10", "--tol", "1e-8"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    assert_eq!(h, ["n", "lambda", "truncation_N", "est_error", "converged"]);
    assert_eq!(rows.len(), 11);
    for (n, lam) in column(&h, &rows, "lambda").into_iter().enumerate() {
        assert!((lam - (n as f64 - 0.36 + 0.3)).abs() < 1e-7, "n={n}: {lam}");
    }
}

#[test]
fn uncoupled_spectrum_is_integers() {
    let o = jspec(&["spectrum", "--g", "0", "--c1", "0", "--c2", "0", "--n", "0:6"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    let lam = column(&h, &rows, "lambda");
    assert_eq!(lam, (0..=6).map(|n| n as f64).collect::<Vec<_>>());
}

#[test]
fn invalid_flags_exit_one() {
    let o = jspec(&["spectrum", "--n", "5:3"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&jspec(&["spectrum", "--tol", "1e-14"])), 1);
    assert_eq!(code(&jspec(&["spectrum", "--bogus"])), 1);
    assert_eq!(code(&jspec(&["verify", "--xgrid", "0:1:3"])), 1);
    assert_eq!(code(&jspec(&[])), 1);
    assert_eq!(code(&jspec(&["--help"])), 0);
}

#[test]
fn bad_thread_env_exits_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_jspec"))
        .args(["spectrum", "--n", "0:1"])
        .env("JS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, format: &str| {
        let path = dir.path().join(name);
        let o = jspec(&[
            "asymptotics",
            "--n",
            "8:64",
            "--format",
            format,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(&path).unwrap()
    };
    assert_eq!(run("a.csv", "csv"), run("b.csv", "csv"));
    assert_eq!(run("a.json", "json"), run("b.json", "json"));
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_jspec"))
            .args(["spectrum", "--n", "0:40"])
            .env("JS_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("0"));
}

#[test]
fn asymptotics_json_schema_and_fits() {
    let o = jspec(&["asymptotics", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["config", "rows", "fits", "checks"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 505);
    assert_eq!(v["config"]["n"], "8:512");
    let alpha = v["fits"]["r1"]["alpha"].as_f64().unwrap();
    assert!(alpha >= 1.0 / 16.0, "alpha(|r1|) = {alpha}");
    let row = &v["rows"][0];
    for key in ["n", "lambda", "first_order", "diag_corr", "r1", "r2", "s_n", "s_n_tail_bound"] {
        assert!(row.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn asymptotics_csv_footer_goes_to_stderr() {
    let o = jspec(&["asymptotics", "--n", "8:40"]);
    assert_eq!(code(&o), 0);
    let err = String::from_utf8(o.stderr).unwrap();
    let footer = err.lines().find_map(|l| l.strip_prefix("fits: ")).unwrap();
    let fits: serde_json::Value = serde_json::from_str(footer).unwrap();
    assert!(fits["s_n"]["alpha"].is_number());
    let (h, rows) = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    assert_eq!(rows.len(), 33);
    assert_eq!(h.len(), 8);
}

#[test]
fn equal_shifts_collapse_residual_column() {
    let o = jspec(&["asymptotics", "--c1", "0.4", "--c2", "0.4", "--n", "8:60"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    assert!(column(&h, &rows, "r1").iter().all(|r| r.abs() < 1e-9));
}

#[test]
fn injected_power_law_is_recovered() {
    let o = jspec(&["asymptotics", "--n", "8:100", "--format", "json", "--inject-power-law", "2:0.375"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["r1", "r2", "s_n"] {
        let fit = &v["fits"][key];
        assert!((fit["alpha"].as_f64().unwrap() - 0.375).abs() < 1e-10);
        assert!((fit["c"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    }
}

#[test]
fn zero_coupling_asymptotics_warns() {
    let o = jspec(&["asymptotics", "--g", "0", "--n", "8:20"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn verify_passes_on_default_grid() {
    let o = jspec(&["verify"]);
    assert_eq!(code(&o), 0);
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().filter(|l| l.starts_with("PASS ")).count(), 7);
}

#[test]
fn verify_skips_offset_decay_at_zero_coupling() {
    let o = jspec(&["verify", "--g", "0"]);
    assert_eq!(code(&o), 0);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.lines().any(|l| l.starts_with("SKIPPED(g=0) offset_decay")));
}

#[test]
fn verify_reports_injected_fault() {
    let o = jspec(&["verify", "--inject-fault", "--smax", "3", "--xgrid", "1:10:5", "--format", "json"]);
    assert_eq!(code(&o), 3);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let bessel = &v["checks"][0];
    assert_eq!(bessel["check"], "bessel_bound");
    assert_eq!(bessel["status"], "FAIL");
    assert_eq!(bessel["violations"], 20);
}

#[test]
fn oracle_agrees_and_is_exact_at_zero_coupling() {
    let o = jspec(&["oracle", "--g", "0.7"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    assert!(column(&h, &rows, "max_deviation").iter().all(|d| *d < 1e-10));

    let o = jspec(&["oracle", "--g", "0"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    assert!(column(&h, &rows, "max_deviation").iter().all(|d| *d == 0.0));
}

#[test]
fn oracle_cap_is_enforced() {
    let o = jspec(&["oracle", "--cap", "40"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
    assert_eq!(code(&jspec(&["oracle", "--points", "16"])), 1);
}

#[test]
fn defaults_dump() {
    let o = jspec(&["--defaults"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["g"], 0.5);
    assert_eq!(v["asymptotics"]["n"], "8:512");
    assert_eq!(v["verify"]["xgrid"], "0.1:100:200");
}

#[test]
fn writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let o = jspec(&["spectrum", "--n", "0:2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert!(Path::new(&path).exists());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().contains('e'));
}
