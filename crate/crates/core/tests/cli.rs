use std::path::Path;
use std::process::{Command, Output};

use hcpp_energy::experiment::ExperimentConfig;

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcpp-sim"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn default_config() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs/default.toml")
        .display()
        .to_string()
}

#[test]
fn shipped_config_is_the_default() {
    let cfg = ExperimentConfig::load(Path::new(&default_config())).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
    let o = sim(&["validate", "--config", &default_config()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains(": ok"));
}

#[test]
fn figure_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let o = sim(&[
        "figure",
        "2",
        "--seed",
        "3",
        "--reps",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("series,x_off [m],analytic [W],mc_mean [W],mc_std_error [W],replications"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig2.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["figure"], 2);
    assert_eq!(meta["rows"].as_u64().unwrap() as usize, csv.lines().count() - 1);
}

#[test]
fn same_seed_same_bytes() {
    let args = ["figure", "7", "--seed", "9", "--reps", "500"];
    let a = sim(&args);
    let b = sim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = sim(&["figure", "7", "--seed", "10", "--reps", "500"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_hcpp-sim"))
            .args(["figure", "4", "--seed", "5", "--reps", "200"])
            .env("HCPP_SIM_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert!(one.status.success());
    assert_eq!(one.stdout, run("3").stdout);
}

#[test]
fn single_point_commands() {
    let o = sim(&["interference", "--x-off", "100", "--reps", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(line.starts_with("hcpp,100,"), "{line}");

    let o = sim(&["interference", "--ppp", "--x-off", "100", "--reps", "200"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("ppp,100,"));

    let o = sim(&["se", "--n-t", "4", "--s", "2", "--xi", "10", "--reps", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("N_T=4 S=2,10,"));

    let o = sim(&["ee", "--n-t", "4", "--s", "4", "--reps", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("bit/Hz/J"));
}

#[test]
fn exit_codes() {
    // usage errors
    assert_eq!(sim(&["figure", "5"]).status.code(), Some(2));
    assert_eq!(sim(&["bogus"]).status.code(), Some(2));
    // parameter and config errors
    assert_eq!(
        sim(&["se", "--n-t", "2", "--s", "3", "--xi", "1"]).status.code(),
        Some(3)
    );
    assert_eq!(sim(&["interference", "--reps", "0"]).status.code(), Some(3));
    assert_eq!(
        sim(&["validate", "--config", "/nonexistent/cfg.toml"]).status.code(),
        Some(3)
    );
    // divergent or out-of-domain operating points
    assert_eq!(sim(&["interference", "--alpha", "1.9"]).status.code(), Some(4));
    assert_eq!(sim(&["interference", "--x-off", "600"]).status.code(), Some(4));
    assert_eq!(sim(&["interference", "--ppp", "--x-off", "0"]).status.code(), Some(4));
}

#[test]
fn validate_reports_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[traffic]\ntheta = 0.5\n[link]\nx_off = 900.0\n").unwrap();
    let o = sim(&["validate", "--config", path.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("theta"), "{text}");
    assert!(text.contains("x_off"), "{text}");

    std::fs::write(&path, "[link]\nbogus = 1\n").unwrap();
    let o = sim(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}
