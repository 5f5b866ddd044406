use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sobstab::RunConfig;

fn sobstab<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sobstab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_of(args: &[&str]) -> Value {
    let o = sobstab(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn constants_report() {
    let v = json_of(&["constants", "--geometry", "circle", "--q", "4"]);
    assert!((v["result"]["S"].as_f64().unwrap() - 19.7392088021787).abs() < 1e-9);
    assert!((v["result"]["sharp_constant"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(v["version"], sobstab_core::VERSION);
    assert_eq!(v["config"]["subcommand"], "constants");

    let v = json_of(&["constants", "--geometry", "sphere", "--d", "2", "--q", "3"]);
    assert!(v["result"]["Y"].as_f64().unwrap() > 0.0);
    assert!(v["result"].get("S").is_none());
}

#[test]
fn product_scan_csv() {
    let o = sobstab(&[
        "scan", "--geometry", "product", "--d", "3", "--eps-start", "0.08", "--eps-factor", "0.5",
        "--eps-count", "5", "--output", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,norm_sq,lq_norm,deficit,dist_sq,quotient");
    assert_eq!(lines.len(), 7);
    for row in &lines[1..6] {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 6);
        // 17 significant digits in scientific form
        assert!(row.split(',').all(|c| c.contains('e') && c.trim_start_matches('-').len() >= 20));
    }
    let trailer: Vec<&str> = lines[6].split(',').collect();
    assert_eq!(trailer[0], "fitted_exponent");
    assert_eq!(trailer[2], "extrapolated_constant");
    let alpha: f64 = trailer[1].parse().unwrap();
    let c: f64 = trailer[3].parse().unwrap();
    assert!((alpha - 4.0).abs() < 0.05);
    assert!((c / (8.0 / 15.0) - 1.0).abs() < 0.01);
}

#[test]
fn sphere_spectrum_has_one_zero_row() {
    let o = sobstab(&[
        "spectrum", "--geometry", "sphere", "--d", "2", "--q", "5", "--cutoff", "6", "--output", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let zero_rows: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap() == 0.0)
        .collect();
    assert_eq!(zero_rows.len(), 1);
    assert!(zero_rows[0].starts_with("0,1,"));
    assert!(zero_rows[0].ends_with(",3"));
}

#[test]
fn usage_errors_exit_2() {
    let o = sobstab(&["constants", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert!(o.stdout.is_empty());

    let o = sobstab(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        vec!["constants", "--geometry", "sphere", "--d", "3", "--q", "7"],
        vec!["scan", "--eps-start", "0.5"],
        vec!["scan", "--eps-count", "2"],
        vec!["optimize", "--modes", "17"],
        vec!["radius-sweep", "--d", "2"],
        vec!["eval"],
        vec!["spectrum", "--cutoff", "100"],
    ] {
        let o = sobstab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn quadrature_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // sign-changing with |u|³ kinks: the trapezoid rule cannot settle on 512 points
    let input = write(
        dir.path(),
        "kinked.json",
        r#"{"geometry": {"kind": "circle", "q": 3}, "coefficients": {"a0": 0.1, "cos": [1.0, 0.0, 0.4]}}"#,
    );
    let o = sobstab(&["eval", "--input", &input, "--quad-cap", "512"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let o = sobstab(&["eval", "--input", &input]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn eval_input_formats() {
    let dir = tempfile::tempdir().unwrap();
    let circle = write(
        dir.path(),
        "circle.json",
        r#"{"geometry": {"kind": "circle", "q": 4}, "coefficients": {"a0": 1.0, "cos": [0.1], "sin": []}}"#,
    );
    let v = json_of(&["eval", "--input", &circle]);
    let q = v["result"]["quotient"].as_f64().unwrap();
    assert!((q - 0.416686).abs() < 1e-5);

    let sphere = write(
        dir.path(),
        "sphere.json",
        r#"{"geometry": {"kind": "sphere", "d": 2, "q": 3}, "coefficients": {"zonal": [3.5449077018110318, 0.1]}}"#,
    );
    let v = json_of(&["eval", "--input", &sphere]);
    assert_eq!(v["config"]["geometry"], "sphere");
    assert_eq!(v["config"]["d"], 2);
    assert!((v["result"]["mean"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let product = write(
        dir.path(),
        "product.json",
        r#"{"geometry": {"kind": "product", "d": 3}, "coefficients": {"tensor": [[1.0, 0.02], [0.05]]}}"#,
    );
    let v = json_of(&["eval", "--input", &product]);
    assert!(v["result"]["deficit"].as_f64().unwrap() > 0.0);
    assert_eq!(v["config"]["q"], 6.0);

    let bad = write(dir.path(), "bad.json", r#"{"geometry": {"kind": "circle", "q": 4}, "coefficients": {"zonal": [1.0]}}"#);
    assert_eq!(sobstab(&["eval", "--input", &bad]).status.code(), Some(2));
    let broken = write(dir.path(), "broken.json", "{");
    assert_eq!(sobstab(&["eval", "--input", &broken]).status.code(), Some(2));
}

#[test]
fn embedded_config_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "u.json",
        r#"{"geometry": {"kind": "sphere", "d": 3, "q": 2.5}, "coefficients": {"zonal": [0.5, 1.0, -0.3]}}"#,
    );
    let runs: Vec<Vec<&str>> = vec![
        vec!["constants", "--geometry", "product", "--d", "5"],
        vec!["scan", "--geometry", "sphere", "--d", "2", "--q", "3"],
        vec!["spectrum", "--geometry", "product", "--d", "4", "--cutoff", "5"],
        vec!["radius-sweep", "--d", "4", "--cutoff", "4"],
        vec!["optimize", "--geometry", "circle", "--q", "3", "--modes", "3", "--restarts", "4", "--seed", "11"],
        vec!["budget", "--geometry", "sphere", "--d", "3", "--q", "3.3"],
        vec!["eval", "--input", &input],
    ];
    for args in runs {
        let first = sobstab(&args);
        assert_eq!(first.status.code(), Some(0), "{args:?}");
        let v: Value = serde_json::from_slice(&first.stdout).unwrap();
        let config: RunConfig = serde_json::from_value(v["config"].clone()).unwrap();
        let argv = config.to_argv();
        let second = sobstab(&argv[1..]);
        assert_eq!(second.status.code(), Some(0));
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn output_path_is_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("budget.json");
    let printed = sobstab(&["budget", "--q", "3"]);
    let o = sobstab(&["budget", "--q", "3", "--output-path", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written: Value = serde_json::from_slice(&std::fs::read(&target).unwrap()).unwrap();
    let shown: Value = serde_json::from_slice(&printed.stdout).unwrap();
    assert_eq!(written["result"], shown["result"]);
    assert_eq!(written["config"]["output_path"], target.to_str().unwrap());
    // no temporary files left behind
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);

    let missing = dir.path().join("no/such/dir/out.json");
    let o = sobstab(&["budget", "--output-path", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn optimize_is_reproducible_and_positive() {
    let args = ["optimize", "--geometry", "circle", "--q", "4", "--modes", "4", "--restarts", "4", "--seed", "5"];
    let a = sobstab(&args);
    let b = sobstab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let best = v["result"]["best_quotient"].as_f64().unwrap();
    assert!(best > 0.0 && best <= 1.0 / 3.0 + 0.02);
    assert_eq!(v["result"]["seed"], 5);
}

#[test]
fn help_exits_0() {
    let o = sobstab(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for sub in ["constants", "eval", "scan", "spectrum", "radius-sweep", "optimize", "budget"] {
        assert!(text.contains(sub), "{sub}");
    }
}
