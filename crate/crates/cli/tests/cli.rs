use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chaoszeta"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chaoszeta-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL_M1M2: &str = r#"{"experiment":"m1m2-equivalence","m1":[1,8],"m2":[1,2],"samples":400,"seed":9}"#;

#[test]
fn zeta_at_two() {
    let out = run(&["zeta", "--re", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().find(|l| l.contains("zeta_re")).unwrap();
    let value: f64 = line.split(',').nth(8).unwrap().parse().unwrap();
    assert!((value - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
}

#[test]
fn moments_agree_with_enumeration() {
    let text = stdout(&run(&["moments", "--q", "13", "--tuples", "2:2:0,4:0:1"]));
    let value = |stat: &str| -> f64 {
        let line = text.lines().find(|l| l.split(',').nth(7) == Some(stat)).unwrap();
        line.split(',').nth(8).unwrap().parse().unwrap()
    };
    assert_eq!(value("chi_oracle"), 1.0);
    assert!((value("chi_enumerated_re") - 1.0).abs() < 1e-12);
}

#[test]
fn kernel_oracle_routes_agree() {
    let text = stdout(&run(&["oracle", "--which", "kernel", "--q", "31", "--m", "7"]));
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(8).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 2);
    assert!((values[0] - values[1]).abs() < 1e-12 * values[1].abs());
}

#[test]
fn exit_codes() {
    let cfg = scratch("ok.json");
    std::fs::write(&cfg, SMALL_M1M2).unwrap();
    let out = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));

    // The uncorrected prime sum misses log ζ(1+iu) by more than 1e-3.
    let failing = scratch("fail.json");
    std::fs::write(
        &failing,
        r#"{"experiment":"covariance-check","n":[20],"t":[0.0,1.0],"u":[1.0],"kernel_cutoff":1000,"samples":200}"#,
    )
    .unwrap();
    assert_eq!(run(&["run", "--config", failing.to_str().unwrap()]).status.code(), Some(2));

    let out = run(&["run", "--config", "/definitely/missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/missing.json"));

    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"experiment":"qm-convergence","q":[],"m":[5]}"#).unwrap();
    assert_eq!(run(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let cfg = scratch("threads.json");
    std::fs::write(&cfg, SMALL_M1M2).unwrap();
    let outputs: Vec<Vec<u8>> = ["1", "4", "8"]
        .iter()
        .map(|t| run(&["--threads", t, "run", "--config", cfg.to_str().unwrap()]).stdout)
        .collect();
    assert!(!outputs[0].is_empty());
    assert!(outputs.iter().all(|o| o == &outputs[0]));
}

#[test]
fn json_report_reloads_as_config() {
    let cfg = scratch("json.json");
    std::fs::write(&cfg, SMALL_M1M2).unwrap();
    let report = scratch("report.json");
    let out = run(&[
        "--format",
        "json",
        "--out",
        report.to_str().unwrap(),
        "run",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let first = std::fs::read(&report).unwrap();
    let again = scratch("again.json");
    let out = run(&[
        "--format",
        "json",
        "--out",
        again.to_str().unwrap(),
        "run",
        "--config",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(first, std::fs::read(&again).unwrap());
}

#[test]
fn seed_flag_overrides_config() {
    let cfg = scratch("seed.json");
    std::fs::write(&cfg, SMALL_M1M2).unwrap();
    let a = run(&["--seed", "1", "run", "--config", cfg.to_str().unwrap()]).stdout;
    let b = run(&["--seed", "2", "run", "--config", cfg.to_str().unwrap()]).stdout;
    assert_ne!(a, b);
    assert!(String::from_utf8(a).unwrap().lines().nth(1).unwrap().ends_with(",1"));
}
