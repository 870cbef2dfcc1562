mod common;

use common::*;
use serde_json::Value;

#[test]
fn fit_summary_matches_hand_ols() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "h.csv", HAND_OLS);
    let doc = stdout_json(&leakage(&["fit", "--data", &data, "--response", "y", "--covariates", "x"]));
    assert_valid("fit", &doc);
    assert_eq!(doc["n"], 3);
    assert_eq!(doc["p"], 2);
    // β̂ = (−1/6, 3/2), SSE = 1/6
    let beta: Vec<f64> = serde_json::from_value(doc["beta_hat"].clone()).unwrap();
    assert!((beta[0] + 1.0 / 6.0).abs() < 1e-12);
    assert!((beta[1] - 1.5).abs() < 1e-12);
    assert!((doc["s2"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn leak_examples() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "h.csv", HAND_OLS);
    let base = ["leak", "--data", &data, "--response", "y", "--covariates", "x"];
    let run = |support: &str, at: &str| {
        let mut args = base.to_vec();
        args.extend(["--support", support, "--at", at]);
        let doc = stdout_json(&leakage(&args));
        assert_valid("leak", &doc);
        doc
    };
    let doc = run("[0,inf)", r#"{"x":1}"#);
    assert!((doc["reports"][0]["leakage"].as_f64().unwrap() - 0.10817).abs() < 1e-4);
    let doc = run("(-inf,inf)", r#"{"x":1}"#);
    assert_eq!(doc["reports"][0]["leakage"].as_f64().unwrap(), 0.0);
    let doc = run("lattice(0,inf,1)", "medians");
    assert_eq!(doc["reports"][0]["leakage"].as_f64().unwrap(), 1.0);
    assert_eq!(doc["reports"][0]["complete"], Value::Bool(true));
    let doc = run("[0,inf)", r#"[{"x":0},{"x":2}]"#);
    assert_eq!(doc["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn medians_split_by_location() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("cc.csv");
    assert!(leakage(&["simulate", "callcenter", "--out", data.to_str().unwrap()]).status.success());
    let doc = stdout_json(&leakage(&[
        "leak", "--data", data.to_str().unwrap(), "--response", "abandonment",
        "--covariates", "calls,absentees,location", "--support", "[0,inf)", "--at", "medians",
    ]));
    assert_valid("leak", &doc);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["x_star"]["location"], "A");
    assert_eq!(reports[1]["x_star"]["location"], "B");
    assert!(reports[0]["leakage"].as_f64().unwrap() > reports[1]["leakage"].as_f64().unwrap());
}

#[test]
fn leak_profile_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "h.csv", HAND_OLS);
    let out = leakage(&[
        "leak-profile", "--data", &data, "--response", "y", "--covariates", "x",
        "--support", "[0,inf)", "--grid", "x=-1:3:0.5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,leakage,below_mass,above_mass");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0] && w[1][1] <= w[0][1]));
    let at_one = rows.iter().find(|r| r[0] == 1.0).unwrap();
    assert!((at_one[1] - 0.10817).abs() < 1e-4);
}

#[test]
fn falsify_modes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "h.csv", HAND_OLS);
    let base = ["falsify", "--data", &data, "--response", "y", "--covariates", "x"];
    let doc = stdout_json(&leakage(&base));
    assert_valid("falsify", &doc);
    assert_eq!(doc["falsified"], true);
    assert_eq!(doc["witness_row"], 0);

    let mut args = base.to_vec();
    args.extend(["--mode", "interval", "--resolution", "0.1"]);
    let doc = stdout_json(&leakage(&args));
    assert_valid("falsify", &doc);
    assert_eq!(doc["falsified"], false);

    let mut args = base.to_vec();
    args.extend(["--mode", "interval"]);
    assert_eq!(leakage(&args).status.code(), Some(1));
}

#[test]
fn calibrate_writes_report_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"n": 400, "coefficients": [1.0, 0.5], "noise_sd": 1.0, "support_lower": "-inf",
            "covariate_ranges": [[0, 4]], "seed": 3}"#,
    );
    assert!(leakage(&["simulate", "truncated", "--config", &cfg, "--out", data.to_str().unwrap()]).status.success());
    let out_dir = dir.path().join("cal");
    let args = [
        "calibrate", "--data", data.to_str().unwrap(), "--response", "y", "--covariates", "x1",
        "--holdout", "0.25", "--seed", "9", "--out-dir", out_dir.to_str().unwrap(),
    ];
    let doc = stdout_json(&leakage(&args));
    assert_valid("calibration", &doc);
    assert_eq!(doc["n"], 100);
    assert_eq!(doc["seed"], 9);
    for f in ["calibration.json", "probability.csv", "exceedance.csv", "marginal.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let written: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("calibration.json")).unwrap()).unwrap();
    assert_eq!(written, doc);
    let (a, b) = (leakage(&args).stdout, leakage(&args).stdout);
    assert_eq!(a, b);
    let marginal = std::fs::read_to_string(out_dir.join("marginal.csv")).unwrap();
    assert!(marginal.starts_with("abscissa,value,value2\n"));
}

#[test]
fn report_document_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("cc.csv");
    let curves = dir.path().join("curves.csv");
    assert!(leakage(&["simulate", "callcenter", "--out", data.to_str().unwrap()]).status.success());
    let doc = stdout_json(&leakage(&[
        "report", "--data", data.to_str().unwrap(), "--response", "abandonment",
        "--covariates", "calls,absentees,location", "--support", "[0,inf)",
        "--out-curves", curves.to_str().unwrap(),
    ]));
    assert_valid("report", &doc);
    assert_eq!(doc["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["seeds"]["calibration"], 1729);
    assert_eq!(doc["leakage"]["medians"].as_array().unwrap().len(), 2);

    let (header, cols, markers) = read_curves(&std::fs::read_to_string(&curves).unwrap());
    assert_eq!(header, ["y", "density_null", "density_A", "density_B", "marker"]);
    assert!(cols[0].windows(2).all(|w| w[0] < w[1]));
    let marked: Vec<usize> = (0..markers.len()).filter(|&i| markers[i] == "support_bound").collect();
    assert_eq!(marked.len(), 1);
    assert_eq!(cols[0][marked[0]], 0.0);
}

#[test]
fn exit_codes_and_json_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "h.csv", HAND_OLS);

    assert_eq!(leakage(&["--help"]).status.code(), Some(0));
    assert_eq!(leakage(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(leakage(&["fit", "--data", &data]).status.code(), Some(1));

    let bad_support = leakage(&["leak", "--data", &data, "--response", "y", "--support", "[0", "--json-errors"]);
    assert_eq!(bad_support.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&bad_support.stderr).unwrap();
    assert_valid("error", &err);
    assert_eq!(err["kind"], "usage");

    // n = p: posterior improper
    let tiny = write(dir.path(), "tiny.csv", "x,y\n0,1\n1,2\n");
    let out = leakage(&["fit", "--data", &tiny, "--response", "y", "--covariates", "x", "--json-errors"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_valid("error", &err);
    assert!(err["error"].as_str().unwrap().contains("improper"));

    let collinear = write(dir.path(), "col.csv", "a,b,y\n1,2,1\n2,4,2\n3,6,2\n4,8,5\n");
    let out = leakage(&["fit", "--data", &collinear, "--response", "y", "--covariates", "a,b"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank deficient"));

    let ragged = write(dir.path(), "rag.csv", "x,y\n1,2\n3\n");
    assert_eq!(leakage(&["fit", "--data", &ragged, "--response", "y"]).status.code(), Some(2));
    assert_eq!(leakage(&["fit", "--data", "/no/such.csv", "--response", "y"]).status.code(), Some(2));
}

#[test]
fn pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let data = dir.path().join(format!("{tag}.csv"));
        let d = data.to_str().unwrap();
        assert!(leakage(&["simulate", "callcenter", "--seed", "11", "--out", d]).status.success());
        let fit = leakage(&["fit", "--data", d, "--response", "abandonment", "--covariates", "calls,absentees,location"]);
        let leak = leakage(&[
            "leak", "--data", d, "--response", "abandonment", "--covariates", "calls,absentees,location",
            "--support", "[0,inf)", "--at", "minima",
        ]);
        (std::fs::read(&data).unwrap(), fit.stdout, leak.stdout)
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn shipped_configs_match_defaults() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    for (kind, file) in [("truncated", "truncated.json"), ("callcenter", "callcenter.json")] {
        let cfg = root.join(file);
        let from_file = dir.path().join(format!("{kind}-file.csv"));
        let default = dir.path().join(format!("{kind}-default.csv"));
        assert!(leakage(&["simulate", kind, "--config", cfg.to_str().unwrap(), "--out", from_file.to_str().unwrap()])
            .status
            .success());
        assert!(leakage(&["simulate", kind, "--out", default.to_str().unwrap()]).status.success());
        assert_eq!(std::fs::read(&from_file).unwrap(), std::fs::read(&default).unwrap(), "{file}");
    }
    let control: leakage_core::simulation::SimConfig =
        serde_json::from_str(&std::fs::read_to_string(root.join("control.json")).unwrap()).unwrap();
    assert_eq!(control, leakage_core::simulation::SimConfig::default_control());
}
