use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ifdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifdist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ifdist(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn read_json(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn field(v: &Value, name: &str) -> f64 {
    match &v[name] {
        Value::String(s) if s == "inf" => f64::INFINITY,
        other => other.as_f64().unwrap_or_else(|| panic!("{name}: {other}")),
    }
}

const WEIBULL: &str = r#"{"model": "Weibull", "alpha": 1.5, "sigma": 2.0}"#;

#[test]
fn simulate_then_fit_recovers_the_law() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "weibull.json", WEIBULL);
    let sample = path(&dir, "sample.csv");
    ok(&[
        "simulate", "--params", &params, "--n", "3000", "--seed", "17", "--out", &sample,
    ]);
    let report = path(&dir, "fit.json");
    ok(&[
        "fit",
        "--model",
        "weibull",
        "--data",
        &sample,
        "--restarts",
        "6",
        "--out",
        &report,
    ]);
    let fit = read_json(&report);
    assert_eq!(fit["model"], "Weibull");
    assert_eq!(fit["n"], 3000);
    assert_eq!(fit["k"], 2);
    assert_eq!(fit["n_by_status"]["exact"], 3000);
    assert!(fit["converged"].as_bool().unwrap());
    let p = &fit["params"];
    assert_eq!(p["p"], "inf");
    assert_eq!(field(p, "b"), -1.0);
    assert!((field(p, "q") - 1.5).abs() < 0.15 * 1.5);
    assert!((field(p, "c") - 2.0).abs() < 0.15 * 2.0);
    let (mll, aic) = (field(&fit, "mll"), field(&fit, "aic"));
    assert!((aic - (4.0 - 2.0 * mll)).abs() < 1e-9);

    // the report doubles as a parameter file
    let cdf = ok(&["eval", "--params", &report, "--at", "2", "--what", "cdf"]);
    assert!(cdf.trim().parse::<f64>().unwrap() > 0.5);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let params = write(
        &dir,
        "p.json",
        r#"{"p": 2, "b": -0.8, "c": 1.5, "q": 2.5, "x0": 1}"#,
    );
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    ok(&[
        "simulate", "--params", &params, "--n", "400", "--seed", "5", "--out", &a,
    ]);
    ok(&[
        "simulate", "--params", &params, "--n", "400", "--seed", "5", "--out", &b,
    ]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = ok(&["simulate", "--params", &params, "--n", "400", "--seed", "6"]);
    assert_ne!(std::fs::read_to_string(&a).unwrap(), c);

    let (fa, fb) = (path(&dir, "fa.json"), path(&dir, "fb.json"));
    for out in [&fa, &fb] {
        ok(&[
            "fit",
            "--model",
            "IF3",
            "--data",
            &a,
            "--restarts",
            "4",
            "--seed",
            "9",
            "--out",
            out,
        ]);
    }
    assert_eq!(std::fs::read(&fa).unwrap(), std::fs::read(&fb).unwrap());
}

#[test]
fn simulated_values_keep_full_precision() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "p.json", WEIBULL);
    let text = ok(&["simulate", "--params", &params, "--n", "5", "--seed", "1"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("value"));
    for line in lines {
        let mantissa = line.split('e').next().unwrap();
        assert_eq!(
            mantissa.chars().filter(char::is_ascii_digit).count(),
            17,
            "{line}"
        );
    }
}

#[test]
fn eval_prints_one_value_per_point() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "exp.json", r#"{"model": "Exponential", "sigma": 1}"#);
    let text = ok(&[
        "eval", "--params", &params, "--at", "0,1,2", "--what", "survival",
    ]);
    assert_eq!(text, "1\n0.367879441171\n0.135335283237\n");
    let text = ok(&[
        "eval", "--params", &params, "--at", "0.5", "--what", "quantile",
    ]);
    assert_eq!(text, "0.69314718056\n");
    let text = ok(&["eval", "--params", &params, "--at", "3", "--what", "hazard"]);
    assert_eq!(text, "1\n");
    let out = ifdist(&[
        "eval", "--params", &params, "--at", "2", "--what", "quantile",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mode_and_moments_reports() {
    let dir = TempDir::new().unwrap();
    let lomax = write(
        &dir,
        "lomax.json",
        r#"{"model": "Lomax", "alpha": 1.5, "sigma": 2}"#,
    );
    let m: Value = serde_json::from_str(&ok(&["moments", "--params", &lomax])).unwrap();
    assert_eq!(m["mean_exists"], true);
    assert_eq!(m["variance_exists"], false);
    assert!(m["variance"].is_null());
    assert!((field(&m, "mean") - 4.0).abs() < 1e-12);
    let mode: Value = serde_json::from_str(&ok(&["mode", "--params", &lomax])).unwrap();
    assert_eq!(mode["kind"], "boundary");
    assert_eq!(mode["method"], "closed_form");

    let general = write(
        &dir,
        "g.json",
        r#"{"p": 3, "b": 2, "c": 1, "q": 1.5, "x0": 0}"#,
    );
    let mode: Value = serde_json::from_str(&ok(&["mode", "--params", &general])).unwrap();
    assert_eq!(mode["kind"], "interior");
    assert_eq!(mode["method"], "numeric");
    let m: Value = serde_json::from_str(&ok(&["moments", "--params", &general])).unwrap();
    assert_eq!(m["method"], "numeric");
    assert_eq!(m["mean_exists"], true);
}

#[test]
fn survival_tables() {
    let dir = TempDir::new().unwrap();
    // Weibull with S(1) = 0.4330 and S(2) = 0.1243
    let alpha = (0.1243f64.ln() / 0.4330f64.ln()).log2();
    let sigma = (-0.4330f64.ln()).powf(-1.0 / alpha);
    let params = write(
        &dir,
        "w.json",
        &format!(r#"{{"model": "Weibull", "alpha": {alpha}, "sigma": {sigma}}}"#),
    );
    let plain = ok(&["survprob", "--params", &params, "--times", "1,2"]);
    let rows: Vec<&str> = plain.lines().collect();
    assert_eq!(rows[0], "time,survival");
    assert!(rows[1].starts_with("1,0.433"));
    assert!(rows[2].starts_with("2,0.1243"));

    let cond = ok(&[
        "survprob",
        "--params",
        &params,
        "--times",
        "1,2",
        "--conditional",
    ]);
    let rows: Vec<Vec<f64>> = cond
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!((rows[0][0], rows[0][1]), (0.0, 1.0));
    assert!((rows[0][2] - 0.5670).abs() < 1e-4);
    assert!((rows[1][2] - 0.7130).abs() < 1e-4);

    let out = ifdist(&["survprob", "--params", &params, "--times", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lrt_reports_statistic_df_and_p_value() {
    let dir = TempDir::new().unwrap();
    let params = write(
        &dir,
        "if1.json",
        r#"{"model": "IF1", "b": 2, "c": 1, "q": 1.5, "x0": 0}"#,
    );
    let sample = path(&dir, "s.csv");
    ok(&[
        "simulate", "--params", &params, "--n", "800", "--seed", "3", "--out", &sample,
    ]);
    let text = ok(&[
        "lrt",
        "--restricted",
        "Lomax",
        "--full",
        "IF1",
        "--data",
        &sample,
        "--restarts",
        "4",
    ]);
    let get = |key: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key}\t")))
            .unwrap_or_else(|| panic!("{key} missing in {text}"))
            .to_string()
    };
    assert_eq!(get("df"), "2");
    assert!(get("T").parse::<f64>().unwrap() > 10.0);
    assert!(get("p_value").parse::<f64>().unwrap() < 0.01);

    let out = ifdist(&[
        "lrt",
        "--restricted",
        "IF",
        "--full",
        "Weibull",
        "--data",
        &sample,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn censored_csv_input() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("value,status\n");
    let exp = write(&dir, "e.json", r#"{"model": "Exponential", "sigma": 2}"#);
    let sample = ok(&["simulate", "--params", &exp, "--n", "600", "--seed", "8"]);
    // type I censoring at 3
    let mut censored = 0;
    for line in sample.lines().skip(1) {
        let x: f64 = line.parse().unwrap();
        if x > 3.0 {
            censored += 1;
            text.push_str("3,right\n");
        } else {
            text.push_str(&format!("{x},obs\n"));
        }
    }
    let data = write(&dir, "c.csv", &text);
    let report = path(&dir, "r.json");
    ok(&[
        "fit",
        "--model",
        "Exponential",
        "--data",
        &data,
        "--out",
        &report,
        "--se",
    ]);
    let fit = read_json(&report);
    assert!(censored > 100);
    assert_eq!(fit["n_by_status"]["right"], censored);
    assert_eq!(fit["n_by_status"]["exact"], 600 - censored);
    assert!((field(&fit["params"], "c") - 2.0).abs() < 0.2);
    assert!(fit["standard_errors"].is_array());
}

#[test]
fn bad_input_exits_with_code_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.csv", "value\n1\nx\n");
    let out = ifdist(&["fit", "--model", "Weibull", "--data", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let good = write(&dir, "good.csv", "value\n1\n2\n3\n");
    let out = ifdist(&["fit", "--model", "Gompertz", "--data", &good]);
    assert_eq!(out.status.code(), Some(2));
    let out = ifdist(&["fit", "--model", "Weibull", "--data", "/nonexistent.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ifdist(&["eval", "--params", &good, "--at", "1", "--what", "pdf"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ifdist(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(Path::new(&good).exists());
}
