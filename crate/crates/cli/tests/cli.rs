use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use specabc::summaries::SummaryConfig;
use specabc::{ModelId, ParameterVector, ReferenceSet, Scheme, SimGrid};

const SMALL: &str = r#"
seed = 11
workers = 1

[model]
id = "mp2"

[simulation]
scheme = "exact"
dt = 0.01
t_end = 20.0

[prior]
lambda = [18.0, 22.0]
gamma = [0.5, 1.5]
sigma = [1.0, 3.0]

[reference]
source = "simulate"
m = 3
theta = { lambda = 20.0, gamma = 1.0, sigma = 2.0 }

[abc]
n_total = 200
percentile = 5.0
weight = "zero"
"#;

fn specabc(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_specabc"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_reference_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("out");
    ok(&specabc(&["simulate", "--config", s(&cfg), "--out", s(&out)], &[]));
    let traj = out.join("trajectories");
    let mut files: Vec<_> = fs::read_dir(&traj).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), 3);
    for f in &files {
        let text = fs::read_to_string(f).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,y"));
        assert_eq!(lines.count(), 2000);
    }
    assert!(out.join("simulate_manifest.json").is_file());
}

#[test]
fn zero_reference_paths_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &SMALL.replace("m = 3", "m = 0"));
    let out = specabc(&["simulate", "--config", s(&cfg)], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_then_ingest_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("out");
    ok(&specabc(&["simulate", "--config", s(&cfg), "--out", s(&out)], &[]));
    let mut files: Vec<_> = fs::read_dir(out.join("trajectories")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let ing = dir.path().join("ing");
    let mut args = vec!["ingest", "--out", s(&ing), "--sample-rate", "100", "--files"];
    args.extend(files.iter().map(|f| s(f)));
    ok(&specabc(&args, &[]));
    let ingested: ReferenceSet = serde_json::from_str(&fs::read_to_string(ing.join("reference.json")).unwrap()).unwrap();

    let theta = ParameterVector::from_pairs([("lambda", 20.0), ("gamma", 1.0), ("sigma", 2.0)]).unwrap();
    let model = ModelId::Mp2.build(&theta).unwrap();
    let grid = SimGrid::new(0.01, 20.0).unwrap();
    let direct = ReferenceSet::simulate(&model, &grid, Scheme::Exact, 3, 11, &SummaryConfig::default()).unwrap();
    assert_eq!(ingested.m_count(), 3);
    let close = |a: &[f64], b: &[f64]| {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300), "{x} vs {y}");
        }
    };
    for (a, b) in ingested.summaries.iter().zip(&direct.summaries) {
        close(&a.spec.frequencies, &b.spec.frequencies);
        close(&a.spec.values, &b.spec.values);
        close(&a.dens.grid, &b.dens.grid);
        close(&a.dens.values, &b.dens.values);
    }
}

#[test]
fn ingest_handles_rates_cuts_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let series: String = (0..4000).map(|i| format!("{}\n", ((i as f64) * 0.37).sin() * 100.0 + (i % 7) as f64)).collect();
    let files: Vec<PathBuf> = (0..3)
        .map(|k| {
            let p = dir.path().join(format!("O00{k}.txt"));
            fs::write(&p, &series).unwrap();
            p
        })
        .collect();
    let out = dir.path().join("a");
    let stdout = ok(&specabc(
        &["ingest", "--out", s(&out), "--sample-rate", "173.61", "--scale", "0.01", "--files", s(&files[0]), s(&files[1]), s(&files[2])],
        &[],
    ));
    assert!(stdout.contains("ingested 3 series"), "{stdout}");
    assert!(stdout.contains("dt = 5.76"), "{stdout}");

    let out = dir.path().join("b");
    let stdout = ok(&specabc(&["ingest", "--out", s(&out), "--sample-rate", "173.61", "--cut", "4", "--files", s(&files[0])], &[]));
    assert!(stdout.contains("ingested 4 series of 1000 samples"), "{stdout}");

    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let res = specabc(&["ingest", "--out", s(&out), "--sample-rate", "173.61", "--files", s(&empty)], &[]);
    assert_eq!(res.status.code(), Some(3));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1\n2\nthree\n").unwrap();
    let res = specabc(&["ingest", "--out", s(&out), "--sample-rate", "173.61", "--files", s(&bad)], &[]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));
}

#[test]
fn run_writes_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let stdout = ok(&specabc(&["run", "--config", s(&cfg), "--out", s(&out)], &[]));
    assert!(stdout.contains("kept 10 of 200"), "{stdout}");
    for f in ["accepted.csv", "manifest.json", "posterior_stats.csv", "histograms.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let accepted = fs::read(out.join("accepted.csv")).unwrap();
    assert!(String::from_utf8_lossy(&accepted).starts_with("lambda,gamma,sigma,distance\n"));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    for key in ["seed", "n_total", "percentile", "epsilon", "scheme", "model", "prior", "weight", "aggregator", "timings"] {
        assert!(!manifest[key].is_null(), "manifest lacks {key}");
    }
    let hist = fs::read_to_string(out.join("histograms.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1 + 3 * 30);

    // Resuming leaves the results untouched.
    let stdout = ok(&specabc(&["run", "--config", s(&cfg), "--out", s(&out), "--resume"], &[]));
    assert!(stdout.contains("nothing to do"), "{stdout}");
    assert_eq!(fs::read(out.join("accepted.csv")).unwrap(), accepted);

    // The manifest alone reproduces the run, whatever the worker count.
    let again = dir.path().join("again");
    ok(&specabc(&["run", "--config", s(&out.join("manifest.json")), "--out", s(&again), "--workers", "3"], &[]));
    assert_eq!(fs::read(again.join("accepted.csv")).unwrap(), accepted);

    // A changed configuration is not mistaken for a finished run.
    let stdout = ok(&specabc(&["run", "--config", s(&cfg), "--out", s(&out), "--resume", "--seed", "12"], &[]));
    assert!(stdout.contains("kept 10 of 200"), "{stdout}");
    assert_ne!(fs::read(out.join("accepted.csv")).unwrap(), accepted);
}

#[test]
fn environment_overrides_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let stdout = ok(&specabc(
        &["run", "--config", s(&cfg), "--out", s(&out)],
        &[("SPECABC_ABC__N_TOTAL", "100"), ("SPECABC_ABC__PERCENTILE", "10")],
    ));
    assert!(stdout.contains("kept 10 of 100"), "{stdout}");
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["n_total"], 100);
}

#[test]
fn bad_percentile_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &SMALL.replace("percentile = 5.0", "percentile = 150.0"));
    assert_eq!(specabc(&["run", "--config", s(&cfg)], &[]).status.code(), Some(2));
    assert_eq!(specabc(&["run"], &[]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(specabc(&["run", "--config", s(&missing)], &[]).status.code(), Some(2));
}

#[test]
fn pilot_reports_weight_and_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{SMALL}pilot_size = 5\n"));
    let out = dir.path().join("pilot");
    let stdout = ok(&specabc(&["pilot", "--config", s(&cfg), "--out", s(&out)], &[]));
    assert!(stdout.contains("from 5 ratios"), "{stdout}");
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("pilot.json")).unwrap()).unwrap();
    assert_eq!(report["ratios"].as_array().unwrap().len(), 5);
    let w = report["weight"].as_f64().unwrap();
    assert!(w > 0.0 && w.is_finite());
}

fn read_series_csv(path: &Path) -> Vec<(f64, f64, String)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,value,series"));
    lines
        .map(|l| {
            let mut parts = l.splitn(3, ',');
            let x = parts.next().unwrap().parse().unwrap();
            let v = parts.next().unwrap().parse().unwrap();
            (x, v, parts.next().unwrap().to_string())
        })
        .collect()
}

#[test]
fn plot_data_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("run");

    // Posterior plots need a finished run.
    assert_eq!(specabc(&["plot-data", "posterior", "--config", s(&cfg), "--out", s(&out)], &[]).status.code(), Some(3));
    assert_eq!(specabc(&["stats", "--out", s(&out)], &[]).status.code(), Some(3));

    ok(&specabc(&["run", "--config", s(&cfg), "--out", s(&out)], &[]));
    ok(&specabc(&["plot-data", "overlay", "--config", s(&cfg), "--out", s(&out)], &[]));
    let spectra = read_series_csv(&out.join("plot/overlay_spectra.csv"));
    let names: std::collections::BTreeSet<_> = spectra.iter().map(|r| r.2.clone()).collect();
    assert_eq!(names.len(), 3);

    ok(&specabc(&["plot-data", "posterior", "--config", s(&cfg), "--out", s(&out)], &[]));
    let curves = read_series_csv(&out.join("plot/posterior_curves.csv"));
    let prior_lambda: Vec<_> = curves.iter().filter(|r| r.2 == "lambda_prior").collect();
    assert_eq!(prior_lambda.len(), 2);
    assert!((prior_lambda[0].1 - 0.25).abs() < 1e-12);
    assert_eq!(curves.iter().filter(|r| r.2 == "gamma_posterior").count(), 1000);
    let pairs = read_series_csv(&out.join("plot/posterior_pairs.csv"));
    assert_eq!(pairs.len(), 3 * 10);

    ok(&specabc(&["plot-data", "schemes", "--config", s(&cfg), "--out", s(&out), "--dts", "0.001,0.004"], &[]));
    let dens = read_series_csv(&out.join("plot/scheme_densities.csv"));
    let names: std::collections::BTreeSet<_> = dens.iter().map(|r| r.2.clone()).collect();
    assert!(names.contains("invariant") && names.contains("euler dt=0.001") && names.contains("strang_sde_outer dt=0.004"));

    ok(&specabc(&["plot-data", "fit", "--config", s(&cfg), "--out", s(&out)], &[]));
    assert!(out.join("plot/fit_path.csv").is_file());

    let stdout = ok(&specabc(&["stats", "--out", s(&out)], &[]));
    assert!(stdout.contains("lambda") && stdout.contains("kept draws: 10"), "{stdout}");
}
