use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wptn::cli::{self, RunManifest, SolveMode, METRICS_FILE};
use wptn::engine::Scenario;
use wptn::metrics::REPORT_HEADER;
use wptn::par::Exec;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wptn"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn wptn")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fixtures_match_builtin_scenarios() {
    assert_eq!(Scenario::load(&fixture("default_scenario.toml")).unwrap(), Scenario::default_los());
    assert_eq!(Scenario::load(&fixture("non_los_scenario.toml")).unwrap(), Scenario::default_non_los());
    let o = run(&["template", "--name", "los"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), std::fs::read_to_string(fixture("default_scenario.toml")).unwrap());
}

#[test]
fn binary_matches_library_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bin");
    let o = run(&[
        "run",
        "--scenario",
        fixture("default_scenario.toml").to_str().unwrap(),
        "--protocol",
        "beaconing,probing",
        "--seeds",
        "3",
        "--thresholds-dbm=-60",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let lib = dir.path().join("lib");
    let mut m = RunManifest::single(Scenario::default_los(), lib.clone());
    m.protocols = vec![wptn::protocols::Protocol::Beaconing, wptn::protocols::Protocol::Probing];
    m.seeds = vec![3];
    m.thresholds_dbm = vec![-60.0];
    cli::cmd_run(&m, Exec::Sequential).unwrap();

    for name in [METRICS_FILE, "beaconing_-60_3.csv", "probing_-60_3.csv"] {
        let a = std::fs::read(out.join(name)).unwrap();
        let b = std::fs::read(lib.join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
}

#[test]
fn full_sweep_has_one_row_per_cell_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixture("default_scenario.toml");
    let go = |sub: &str, extra: &[&str]| {
        let out = dir.path().join(sub);
        let mut args = vec![
            "run",
            "--scenario",
            scenario.to_str().unwrap(),
            "--protocol",
            "all",
            "--seeds",
            "1,2,3,4,5",
            "--thresholds-dbm=-70,-65,-60,-55,-50",
            "--metrics-only",
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(out.join(METRICS_FILE)).unwrap()
    };
    let a = go("a", &[]);
    let b = go("b", &["--sequential"]);
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], REPORT_HEADER);
    assert_eq!(lines.len(), 76);
    // metrics only: no trace files
    assert_eq!(std::fs::read_dir(dir.path().join("a")).unwrap().count(), 1);
}

#[test]
fn invalid_scenario_exits_2_and_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let mut sc = Scenario::default_los();
    sc.erx_waypoints[3].dwell_min_s = 50.0;
    // bypass validation by writing the TOML directly
    std::fs::write(&bad, sc.to_toml_string()).unwrap();
    let o = run(&["validate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("waypoint[3].dwell_min_s"), "{}", stderr(&o));

    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, Scenario::default_los().to_toml_string().replace("t_ping = 4.0", "t_ping = 4.0\nt_pong = 1.0"))
        .unwrap();
    let o = run(&["run", "--scenario", unknown.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t_pong"));
}

#[test]
fn validate_reports_experiment_length() {
    let o = run(&["validate", "--scenario", fixture("default_scenario.toml").to_str().unwrap()]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("4 chargers, 10 waypoints x 5 rounds"), "{s}");
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "not a directory").unwrap();
    let o = run(&["run", "--scenario", fixture("default_scenario.toml").to_str().unwrap(), "--out", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn ttc_rejects_impossible_k() {
    for (n, k) in [("4", "0"), ("4", "5")] {
        let o = run(&["ttc", "--protocol", "probing", "--n", n, "--k", k, "--trials", "5"]);
        assert_eq!(o.status.code(), Some(2));
    }
}

#[test]
fn ttc_writes_cdf_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cdf.csv");
    let o = run(&["ttc", "--protocol", "beaconing", "--n", "3", "--k", "2", "--trials", "50", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("t_s,cdf_empirical,cdf_analytic\n"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn partition_fixture_is_solved_with_certificate() {
    let path = fixture("partition.txt");
    let o = run(&["solve", path.to_str().unwrap()]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.starts_with("optimal\n"), "{s}");
    assert!(s.contains("value = 3\n"));
    assert!(s.contains("slack = 0\n"));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(cli::cmd_solve(&text, SolveMode::Pi).unwrap().starts_with("yes"));
}

#[test]
fn oversized_exact_instance_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.txt");
    let n = 30;
    let row = vec!["1"; n].join(" ");
    std::fs::write(&path, format!("1 {n}\n{row}\n{row}\n10\n5\n")).unwrap();
    let o = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("30"), "{}", stderr(&o));
    // greedy has no size limit
    let o = run(&["solve", "--mode", "pii-greedy", path.to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn malformed_instance_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1 2\n1 2\n1 x\n3\n1\n").unwrap();
    let o = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn reference_has_one_column_per_charger() {
    let o = run(&["reference", "--scenario", fixture("default_scenario.toml").to_str().unwrap()]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    let mut lines = s.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 5);
    assert!(lines.all(|l| l.split(',').skip(1).all(|v| v == "0" || v == "1")));
}
