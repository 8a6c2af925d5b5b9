use std::path::Path;
use std::process::{Command, Output};

fn sharpfid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sharpfid"))
        .args(args)
        .env_remove("SHARPFID_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json record on stdout")
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn sharp_null_record() {
    let o = sharpfid(&["normal-known", "--xbar", "1.96", "--se", "1", "--eps", "0", "--prior", "0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert!((r["p_in"].as_f64().unwrap() - 0.1716).abs() < 5e-5);
    assert_eq!(r["model"], "normal-known");
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema\": 1, \"model\": ").unwrap();
    assert_eq!(code(&sharpfid(&["run", "--spec", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&sharpfid(&["normal-known", "--xbar", "1", "--se", "1", "--eps", "0", "--prior", "1.5"])), 2);
    assert_eq!(code(&sharpfid(&["normal-known", "--xbar", "1", "--eps", "0", "--prior", "0.5"])), 2);
    assert_eq!(code(&sharpfid(&["binomial", "--x", "5", "--n", "16", "--bogus"])), 2);
    assert_eq!(code(&sharpfid(&["figure", "10"])), 2);
}

#[test]
fn numerical_failure_exits_3() {
    // Data well inside a wide interval: no smoothing constant makes the
    // mixture continuous.
    let o = sharpfid(&["normal-known", "--xbar", "0.05", "--se", "0.1", "--eps", "0.3", "--prior", "0.5", "--smoothed"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("continuity"));
}

#[test]
fn spec_file_writes_record_and_density() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let out = dir.path().join("result.csv");
    std::fs::write(
        &spec,
        format!(
            r#"{{"schema": 1, "model": "normal-direct", "data": {{"xbar": 2.1, "sd": 3, "n": 9}},
                "hypothesis": {{"eps": 0.2, "prior": 0.33}}, "gpd": {{"type": "smoothed", "bump": [4, 4]}},
                "output": {{"path": {:?}, "format": "csv"}}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = sharpfid(&["run", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(&out).unwrap();
    let header = rd.headers().unwrap().clone();
    let row = rd.records().next().unwrap().unwrap();
    let p_in: f64 = row[header.iter().position(|h| h == "p_in").unwrap()].parse().unwrap();
    assert!((p_in - 0.092).abs() < 0.005, "{p_in}");
    let density = std::fs::read_to_string(dir.path().join("result_density.csv")).unwrap();
    assert!(density.starts_with("x,density\n"));
    assert_eq!(density.lines().count(), 802);
}

#[test]
fn monte_carlo_runs_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = sharpfid(&[
            "binomial", "--x", "5", "--n", "16", "--eps", "0.01", "--prior", "0.3", "--samples", "20000", "--seed", seed,
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("a.json", "7");
    assert_eq!(a, run("b.json", "7"));
    assert_ne!(a, run("c.json", "8"));
    assert_eq!(
        std::fs::read(dir.path().join("a_density.csv")).unwrap(),
        std::fs::read(dir.path().join("b_density.csv")).unwrap()
    );
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |seed: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_sharpfid"))
            .args(["binomial", "--x", "5", "--n", "16", "--eps", "0.01", "--prior", "0.3", "--samples", "5000"])
            .env("SHARPFID_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        json(&o)
    };
    let r = run("99");
    assert_eq!(r["seed"], 99);
    assert_eq!(r["p_in"], run("99")["p_in"]);
}

#[test]
fn figure_one_writes_six_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = sharpfid(&["figure", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let files = csv_files(dir.path());
    assert_eq!(files.len(), 6, "{files:?}");
    let text = std::fs::read_to_string(dir.path().join("fig1_eps0_prior0.5.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,x,y"));
    assert_eq!(lines.count(), 201);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig1_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["settings"]["xbar_grid"]["step"], 0.025);
}

#[test]
fn figure_five_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(code(&sharpfid(&["figure", "5", "--out", d.path().to_str().unwrap()])), 0);
    }
    let files = csv_files(a.path());
    assert_eq!(files.len(), 3);
    for f in files.iter().chain(std::iter::once(&"fig5_meta.json".to_string())) {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
