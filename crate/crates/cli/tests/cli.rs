use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use aggmo_cli::config::{EquivConfig, FunnelConfig, OptimizeConfig, RegretConfig, SweepConfig};
use aggmo_cli::output::hex_digest;
use aggmo_cli::RunConfig;
use serde_json::Value;
use tempfile::TempDir;

fn aggmo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aggmo"))
        .args(args)
        .env_remove("AGGMO_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Value {
    let out = aggmo(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("summary is JSON")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].parse().unwrap())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_method_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let res = aggmo(&["optimize", "--method", "adamw", "--out", path_str(&out)]);
    assert_eq!(res.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(!out.exists());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"beta": 0.9, "gamma": 0.5, "stpes": 10}"#).unwrap();
    let out = tmp.path().join("o");
    let res = aggmo(&[
        "equiv-check",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("stpes"));
    assert!(!out.exists());
}

#[test]
fn inapplicable_and_invalid_values_exit_with_config_errors() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    for args in [
        vec!["regret-check", "--lr-grid", "0.1,0.2"],
        vec!["optimize", "--betas", "0.5,1.2"],
        vec!["optimize", "--lr", "-1"],
        vec!["sweep-rates", "--method", "beta-avg"],
        vec!["equiv-check", "--mode", "sloppy"],
        vec!["optimize", "--format", "xml"],
    ] {
        let mut a = args.clone();
        a.extend(["--out", path_str(&out)]);
        assert_eq!(aggmo(&a).status.code(), Some(2), "{args:?}");
        assert!(!out.exists(), "{args:?}");
    }
}

#[test]
fn config_files_round_trip() {
    for config in [
        RunConfig::Optimize(OptimizeConfig::default()),
        RunConfig::FunnelRegression(FunnelConfig::default()),
        RunConfig::SweepRates(SweepConfig::default()),
        RunConfig::EquivCheck(EquivConfig::default()),
        RunConfig::RegretCheck(RegretConfig::default()),
    ] {
        let tagged = serde_json::to_string(&config).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&tagged).unwrap(), config);
        let mut body: Value = serde_json::from_str(&tagged).unwrap();
        body.as_object_mut().unwrap().remove("command");
        let parsed = RunConfig::from_json(config.command(), &body.to_string()).unwrap();
        assert_eq!(parsed, config);
    }
}

#[test]
fn zero_damping_methods_produce_identical_traces() {
    let tmp = TempDir::new().unwrap();
    let mut traces = Vec::new();
    for method in ["cm", "nesterov", "aggmo"] {
        let out = tmp.path().join(method);
        run_ok(&[
            "optimize",
            "--method",
            method,
            "--betas",
            "0",
            "--lr",
            "0.3",
            "--steps",
            "200",
            "--out",
            path_str(&out),
        ]);
        let m = manifest(&out);
        let file = m["files"][0]["path"].as_str().unwrap().to_owned();
        traces.push(fs::read(out.join(file)).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    assert_eq!(traces[0], traces[2]);
}

#[test]
fn aggmo_outpaces_heavy_momentum_on_an_ill_conditioned_quadratic() {
    let tmp = TempDir::new().unwrap();
    let agg = tmp.path().join("agg");
    let cm = tmp.path().join("cm");
    run_ok(&["optimize", "--out", path_str(&agg)]);
    run_ok(&[
        "optimize",
        "--method",
        "cm",
        "--betas",
        "0.999",
        "--out",
        path_str(&cm),
    ]);
    let losses = |dir: &Path| {
        let m = manifest(dir);
        column(&dir.join(m["files"][0]["path"].as_str().unwrap()), "loss")
    };
    let (a, c) = (losses(&agg), losses(&cm));
    assert_eq!(a.len(), 1001);
    let first = a
        .iter()
        .position(|&l| l < 1e-6)
        .expect("aggmo reaches 1e-6");
    assert!(first < 1000, "{first}");
    assert!(c.iter().all(|&l| l >= 1e-6));
    assert!(c[1000] > 1e-3, "cm final {}", c[1000]);
}

#[test]
fn equivalence_check_matches_and_handles_zero_steps() {
    let tmp = TempDir::new().unwrap();
    let s = run_ok(&["equiv-check", "--out", path_str(&tmp.path().join("a"))]);
    assert!(s["max_abs_deviation"].as_f64().unwrap() <= 1e-8);
    let devs = column(&tmp.path().join("a/equivalence.csv"), "value");
    assert_eq!(devs.len(), 1001);

    let s = run_ok(&[
        "equiv-check",
        "--steps",
        "0",
        "--out",
        path_str(&tmp.path().join("b")),
    ]);
    assert_eq!(s["max_abs_deviation"].as_f64(), Some(0.0));

    let s = run_ok(&[
        "equiv-check",
        "--mode",
        "approximate",
        "--out",
        path_str(&tmp.path().join("c")),
    ]);
    assert!(s["max_abs_deviation"].as_f64().unwrap() > 1e-8);
}

#[test]
fn rosenbrock_approximate_mode_emits_a_deviation_curve() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"problem": {"kind": "rosenbrock"}, "gamma": 0.001, "mode": "approximate"}"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    run_ok(&[
        "equiv-check",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
    ]);
    let devs = column(&out.join("equivalence.csv"), "value");
    assert_eq!(devs.len(), 1001);
    assert!(devs.iter().all(|d| d.is_finite()));
}

#[test]
fn single_kappa_sweep_has_one_row() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"kappas": [100.0], "methods": [{"name": "cm", "betas": [0.81]}]}"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    run_ok(&[
        "sweep-rates",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
    ]);
    let rates = column(&out.join("rates-cm-0.81.csv"), "rate");
    assert_eq!(rates.len(), 1);
    // Under-damped at κ = 100 < 361: the rate is 1 − √0.81.
    assert!((rates[0] - 0.1).abs() < 1e-6, "{}", rates[0]);
    let env = column(&out.join("envelope.csv"), "beta_star");
    assert!((env[0] - 81.0 / 121.0).abs() < 1e-12);
    assert!(out.join("rates-cm-0.81.meta.json").exists());
}

#[test]
fn regret_check_with_no_trials_succeeds() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let s = run_ok(&["regret-check", "--trials", "0", "--out", path_str(&out)]);
    assert_eq!(s["trials"], 0);
    assert!(s["within_bound_fraction"].is_null());
    assert!(out.join("regret-summary.csv").exists());
}

#[test]
fn damping_bound_term_grows_as_lambda_approaches_one() {
    let tmp = TempDir::new().unwrap();
    let term = |lambda: &str| {
        let out = tmp.path().join(lambda);
        run_ok(&[
            "regret-check",
            "--trials",
            "1",
            "--lambda",
            lambda,
            "--out",
            path_str(&out),
        ]);
        let b: Value = serde_json::from_str(
            &fs::read_to_string(out.join("regret-trial0000-bound.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(b["within_bound"], true);
        b["bound"]["damping"].as_f64().unwrap()
    };
    let (a, b) = (term("0.8"), term("0.9"));
    // D²/(2Kγ(1 − λ)²): halving 1 − λ multiplies the term by 4.
    assert!((b / a - 4.0).abs() < 1e-9, "{a} {b}");
}

#[test]
fn reruns_are_byte_identical_and_digests_match() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        run_ok(&[
            "regret-check",
            "--trials",
            "3",
            "--steps",
            "50",
            "--out",
            path_str(dir),
        ]);
    }
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["files"], mb["files"]);
    for f in ma["files"].as_array().unwrap() {
        let bytes = fs::read(a.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(hex_digest(&bytes), f["sha256"].as_str().unwrap());
        assert_eq!(bytes.len() as u64, f["bytes"].as_u64().unwrap());
    }
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("env-out");
    let res = Command::new(env!("CARGO_BIN_EXE_aggmo"))
        .args(["equiv-check", "--steps", "3"])
        .env("AGGMO_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert_eq!(manifest(&out)["status"], "ok");
}

#[test]
fn json_output_holds_records() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    run_ok(&[
        "optimize",
        "--steps",
        "3",
        "--format",
        "json",
        "--out",
        path_str(&out),
    ]);
    let m = manifest(&out);
    let file = m["files"][0]["path"].as_str().unwrap();
    assert!(file.ends_with(".json"));
    let rows: Value = serde_json::from_str(&fs::read_to_string(out.join(file)).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 4);
    assert_eq!(rows[3]["t"], 3);
}

#[test]
fn divergence_exits_three_and_still_writes_the_manifest() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let res = aggmo(&[
        "optimize",
        "--lr",
        "5",
        "--steps",
        "500",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(res.status.code(), Some(3));
    let m = manifest(&out);
    assert_eq!(m["status"], "diverged");
    assert_eq!(m["runs"][0]["diverged"], true);
    assert_eq!(m["files"].as_array().unwrap().len(), 1);
}

#[test]
fn funnel_regression_short_runs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let s = run_ok(&[
        "funnel-regression",
        "--steps",
        "0",
        "--seed",
        "3",
        "--out",
        path_str(&out),
    ]);
    let methods = s["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 3);
    let first = methods[0]["median_final_loss"].as_f64().unwrap();
    for m in methods {
        assert_eq!(m["median_final_loss"].as_f64().unwrap(), first);
        assert_eq!(m["median_increase_count"].as_f64(), Some(0.0));
    }
    let text = fs::read_to_string(out.join("dataset-seed3.csv")).unwrap();
    let d = aggmo_cli::dataset::dataset_from_csv(&text).unwrap();
    assert_eq!(d.seed, 3);
    assert_eq!(d.len(), 1000);
    assert_eq!(column(&out.join("funnel-runs.csv"), "lr").len(), 9);

    let out = tmp.path().join("p");
    run_ok(&[
        "funnel-regression",
        "--steps",
        "20",
        "--seed",
        "0,1",
        "--lr",
        "1e-6",
        "--out",
        path_str(&out),
    ]);
    let m = manifest(&out);
    assert_eq!(m["runs"].as_array().unwrap().len(), 6);
    assert!(out.join("funnel-nesterov-0.999-seed1.csv").exists());
}
