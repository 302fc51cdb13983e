use std::path::PathBuf;
use std::process::{Command, Output};

fn spikedet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikedet")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

#[test]
fn envelope_five_equal_spikes() {
    let o = spikedet(&["envelope", "--c", "1", "--r", "5", "--h", "0.5", "--size", "0.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    let k = header.iter().position(|h| *h == "beta_lambda").unwrap();
    assert!((row[k] - 0.85).abs() < 0.005, "beta_lambda {}", row[k]);
}

#[test]
fn envelope_at_zero_is_the_size() {
    let o = spikedet(&["envelope", "--c", "0.5", "--h", "0", "--size", "0.1", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["schema"], "v1");
    let row = &v["rows"][0];
    assert!((row["beta_lambda"].as_f64().unwrap() - 0.1).abs() < 1e-9);
    assert!((row["beta_mu"].as_f64().unwrap() - 0.1).abs() < 1e-9);
}

#[test]
fn envelope_grid_is_deterministic() {
    let args = ["envelope", "--c", "1", "--r", "2", "--grid-max", "0.9", "--grid-points", "4"];
    let a = spikedet(&args);
    let b = spikedet(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 17);
}

#[test]
fn supercritical_spike_is_an_input_error() {
    let o = spikedet(&["envelope", "--c", "1", "--h", "1.2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("super-critical"));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(spikedet(&["envelope", "--c", "abc"]).status.code(), Some(3));
    assert_eq!(spikedet(&["no-such-command"]).status.code(), Some(3));
    assert_eq!(spikedet(&["--help"]).status.code(), Some(0));
}

#[test]
fn detect_reports_the_bad_line() {
    let dir = std::env::temp_dir().join(format!("spikedet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.txt");
    std::fs::write(&path, "# header\n1.5\n0.8\nnot-a-number\n").unwrap();
    let o = spikedet(&["detect", "--eigenvalues", path.to_str().unwrap(), "--n", "10", "--p", "3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn detect_count_mismatch_is_rejected() {
    let f = fixture("null_n60_p40.txt");
    let o = spikedet(&["detect", "--eigenvalues", &f, "--n", "60", "--p", "41", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn detect_null_sample() {
    let f = fixture("null_n60_p40.txt");
    let args = ["detect", "--eigenvalues", &f, "--n", "60", "--p", "40", "--h", "0.3", "--seed", "7", "--field-draws", "20000"];
    let o = spikedet(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema"], "v1");
    assert_eq!(v["inputs"]["eigenvalues"], 40);
    let exact = v["point"]["exact"]["log_lr"].as_f64().unwrap();
    let laplace = v["point"]["laplace"]["log_lr"].as_f64().unwrap();
    assert!((exact - laplace).abs() < 0.05, "{exact} vs {laplace}");
    let sup = &v["sup_lr"];
    assert!(sup["statistic"].as_f64().unwrap() >= 0.0);
    let pv = sup["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&pv));
    assert_eq!(sup["reject"].as_bool().unwrap(), pv < 0.05);
    assert_eq!(spikedet(&args).stdout, o.stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let f = fixture("null_n60_p40.txt");
    let base = ["detect", "--eigenvalues", &f, "--n", "60", "--p", "40", "--seed", "11", "--field-draws", "10000"];
    let one = spikedet(&[&["--threads", "1"][..], &base[..]].concat());
    let three = spikedet(&[&["--threads", "3"][..], &base[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn simulate_power_small() {
    let o = spikedet(&[
        "simulate-power", "--n", "40", "--p", "40", "--alt", "0", "--alt", "0.5", "--test", "point-optimal-lambda",
        "--reps", "200", "--seed", "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!((0.0..=1.0).contains(&r[1]));
        assert_eq!(r[3], 200.0);
    }
    assert!(rows[0][1] < 0.05 + 4.0 * rows[0][2].max(0.015));
}

#[test]
fn validate_quick_suites() {
    for suite in ["jack", "mp", "hciz"] {
        let o = spikedet(&["validate", "--suite", suite, "--draws", "20000"]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
        let v = json(&o);
        assert_eq!(v["pass"], true);
        assert!(!v["checks"].as_array().unwrap().is_empty());
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("spikedet-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("env.csv");
    let o = spikedet(&["envelope", "--c", "1", "--h", "0.4", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    let direct = spikedet(&["envelope", "--c", "1", "--h", "0.4"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}
