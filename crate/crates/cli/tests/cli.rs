use std::path::Path;
use std::process::{Command, Output};

fn stopgrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stopgrid"))
        .args(args)
        .env_remove("STOPGRID_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn number(out: &Output) -> f64 {
    stdout(out).trim().parse().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

#[test]
fn eval_alpha() {
    let a = number(&stopgrid(&["eval", "alpha"]));
    assert!((a - 0.839923675692373).abs() < 1e-13);
    let j = json(&stopgrid(&["eval", "alpha", "--json"]));
    assert_eq!(j["alpha"].as_f64().unwrap(), a);
}

#[test]
fn eval_functions() {
    let vw = number(&stopgrid(&["eval", "vw", "--t", "9", "--x", "1"]));
    assert!((vw - 0.1642).abs() < 5e-4);
    assert_eq!(number(&stopgrid(&["eval", "vw", "--t", "9", "--x", "3"])), 1.0 / 3.0);

    let hc = number(&stopgrid(&["eval", "hc", "--horizon", "1000", "--t", "1000", "--x", "0"]));
    let top = number(&stopgrid(&["eval", "vw", "--t", "1000", "--x", "0"]));
    assert!(hc > 0.0 && hc < top);

    let d = number(&stopgrid(&["eval", "defect", "--t", "100", "--x", "-50"]));
    assert!(d >= 0.0);
    let d = number(&stopgrid(&["eval", "defect", "--t", "2000", "--x", "-10", "--horizon", "1000"]));
    assert!(d >= -1e-13);
}

#[test]
fn calibrate_prints_the_constants() {
    let j = json(&stopgrid(&["calibrate", "--horizon", "1000"]));
    for key in ["T", "c1", "c2", "c", "a0", "K", "valid"] {
        assert!(j.get(key).is_some(), "{key}");
    }
    assert_eq!(format!("{:.6}", j["c"].as_f64().unwrap()), "0.499602");
    assert_eq!(j["valid"], true);
}

#[test]
fn classify_worked_example() {
    let text = stdout(&stopgrid(&["classify", "--n", "8", "--x", "2"]));
    assert!(text.starts_with("(8, 2): stop"), "{text}");
    assert!(text.contains("0.24868"));

    let hw = stdout(&stopgrid(&["classify", "--point", "5-3", "--notation", "hw"]));
    assert!(hw.starts_with("(8, 5-3): stop"), "{hw}");

    let j = json(&stopgrid(&["classify", "--n", "2", "--x", "0", "--json"]));
    assert_eq!(j["verdict"], "continue");

    let j = json(&stopgrid(&["classify", "--n", "8", "--x", "2", "--notation", "heads", "--json"]));
    assert_eq!(j["x"], "5");
    assert_eq!(j["gain"].as_f64().unwrap(), 0.625);
}

#[test]
fn exit_codes() {
    assert_eq!(stopgrid(&["classify", "--n", "0", "--x", "0"]).status.code(), Some(2));
    assert_eq!(stopgrid(&["classify", "--point", "five-three"]).status.code(), Some(2));
    assert_eq!(stopgrid(&["eval", "vw", "--t", "-1", "--x", "0"]).status.code(), Some(2));
    assert_eq!(stopgrid(&["run", "--horizon", "10"]).status.code(), Some(2));
    assert_eq!(
        stopgrid(&["eval", "hc", "--horizon", "0.5", "--t", "1", "--x", "0"]).status.code(),
        Some(3)
    );
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["run", "--horizon", "100000", "--depth", "10", "--memory-limit", "1000", "--out", out];
    assert_eq!(stopgrid(&args).status.code(), Some(4));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn run_writes_artefacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = out.to_str().unwrap();
    stdout(&stopgrid(&["run", "--horizon", "1000", "--depth", "10", "--out", o]));

    let boundary = read(&out, "boundary.csv");
    let mut lines = boundary.lines();
    assert_eq!(lines.next(), Some("n,b_n,alpha_sqrt_n,predicted_b_n"));
    let b10: i64 = lines.find(|l| l.starts_with("10,")).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(b10 <= 3);
    assert!(read(&out, "classification.csv").starts_with("n,x,v_lower,v_upper,gain,verdict\n"));
    assert!(read(&out, "boundary_compare.csv").starts_with("n,predicted_b,engine_b,match\n"));

    let manifest: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    for key in ["config", "alpha", "calibration", "v00_bracket", "runtime_seconds", "unknown_count", "hash"] {
        assert!(manifest.get(key).is_some(), "{key}");
    }
    assert!(manifest["calibration"]["K"].as_f64().unwrap() > 0.0);

    let again = dir.path().join("b");
    stopgrid(&["run", "--horizon", "1000", "--depth", "10", "--out", again.to_str().unwrap()]);
    let other: serde_json::Value = serde_json::from_str(&read(&again, "manifest.json")).unwrap();
    assert_eq!(manifest["hash"], other["hash"]);
    assert_eq!(boundary, read(&again, "boundary.csv"));
}

#[test]
fn run_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&stopgrid(&[
        "run", "--horizon", "200", "--depth", "50", "--oracle", "--out", dir.path().to_str().unwrap(),
    ]));
    let line = text.lines().find(|l| l.starts_with("oracle:")).unwrap();
    let diff: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(diff < 1e-15);
}

#[test]
fn checkpoint_and_thread_count_leave_results_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["run", "--horizon", "3000", "--depth", "40", "--precision", "ext"];
    let plain = dir.path().join("plain");
    stdout(&stopgrid(&[&base[..], &["--out", plain.to_str().unwrap(), "--threads", "1"]].concat()));

    let ckpt = dir.path().join("state.ckpt");
    let first = dir.path().join("first");
    let c = ckpt.to_str().unwrap();
    stdout(&stopgrid(
        &[&base[..], &["--out", first.to_str().unwrap(), "--checkpoint", c, "--checkpoint-every", "500"]].concat(),
    ));
    assert!(ckpt.exists());
    let resumed = dir.path().join("resumed");
    stdout(&stopgrid(&[&base[..], &["--out", resumed.to_str().unwrap(), "--checkpoint", c, "--resume"]].concat()));

    let threaded = dir.path().join("threaded");
    let out = Command::new(env!("CARGO_BIN_EXE_stopgrid"))
        .args(base)
        .args(["--out", threaded.to_str().unwrap()])
        .env("STOPGRID_THREADS", "3")
        .output()
        .unwrap();
    stdout(&out);

    for name in ["boundary.csv", "classification.csv"] {
        let want = read(&plain, name);
        assert_eq!(read(&first, name), want, "{name}");
        assert_eq!(read(&resumed, name), want, "{name}");
        assert_eq!(read(&threaded, name), want, "{name}");
    }
}

#[test]
fn heads_notation_in_run_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    stdout(&stopgrid(&["run", "--horizon", "1000", "--depth", "100", "--notation", "heads", "--out", o]));
    let boundary = read(dir.path(), "boundary.csv");
    let row = boundary.lines().find(|l| l.starts_with("100,")).unwrap();
    assert_eq!(row.split(',').nth(1), Some("54"));
}

#[test]
fn predict_lists_exceptions() {
    let text = stdout(&stopgrid(&["predict", "--n", "12922", "--to", "12923"]));
    assert_eq!(text, "n,b_n,exception,validated\n12922,95,false,true\n12923,96,true,true\n");
    let text = stdout(&stopgrid(&["predict", "--n", "100", "--notation", "heads"]));
    assert!(text.ends_with("100,54,false,true\n"));
}

#[test]
fn plot_data_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let args = ["plot-data", "--out", o, "--horizon", "200", "--depth", "10", "--refine", "3", "--t-max", "5"];
    stdout(&stopgrid(&args));
    assert!(read(dir.path(), "continuous.csv").starts_with("t,x,gain,v_w,h_c\n"));
    assert!(read(dir.path(), "bounds.csv").starts_with("n,x,v_lower,v_upper,gain,verdict\n"));
    let refined = read(dir.path(), "refined_boundary.csv");
    assert!(refined.starts_with("t,b_t,alpha_sqrt_t\n"));
    assert!(refined.lines().count() > 20);
}
