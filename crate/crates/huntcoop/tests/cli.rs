//! End-to-end tests of the `huntcoop` binary: exit codes, file outputs,
//! determinism, config precedence.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_huntcoop"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn equilibria_lists_five_points_at_defaults() {
    let out = run(&["equilibria"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("origin"));
    assert!(text.contains("prey-only (1,0)"));
    assert!(text.contains("interior"));
    assert!(text.contains("stable spiral"));
    assert!(text.contains("saddle"));
}

#[test]
fn invalid_parameter_exits_2() {
    let out = run(&["equilibria", "--b", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b must lie in (-1, 1)"));
}

#[test]
fn numeric_failure_exits_3() {
    // both bracket ends stable: no sign change
    let out = run(&["critical", "--lo", "0.5", "--hi", "0.6"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no sign change"));
}

#[test]
fn unwritable_output_exits_4_before_compute() {
    let out = run(&["sweep", "--param", "alpha", "--lo", "0.8", "--hi", "1.0",
                    "--csv", "/nonexistent-dir/out.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn critical_alpha_value() {
    let out = run(&["critical", "--lo", "0.9", "--hi", "1.0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let value: f64 = text
        .trim()
        .strip_prefix("critical alpha = ")
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 0.9649499710).abs() < 1e-5, "got {value}");
}

#[test]
fn simulate_writes_round_trippable_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    let json = dir.path().join("orbit.json");
    let out = run(&["simulate", "--u0", "0.5", "--v0", "0.5", "--t-end", "30",
                    "--csv", csv.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("fate:"));

    let csv_text = String::from_utf8(read(&csv)).unwrap();
    assert!(csv_text.starts_with("t,u,v\n"));
    assert!(!csv_text.contains('\r'));
    let rows = huntcoop::io::trajectory_from_csv(&csv_text).unwrap();
    assert!(rows.len() > 2);
    assert_eq!(huntcoop::io::trajectory_rows_to_csv(&rows), csv_text);

    let traj = huntcoop::io::trajectory_from_json(&String::from_utf8(read(&json)).unwrap()).unwrap();
    assert_eq!(traj.times.len(), rows.len());
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args_for = |n: u32| {
        let csv = dir.path().join(format!("s{n}.csv"));
        let json = dir.path().join(format!("s{n}.json"));
        let svg = dir.path().join(format!("s{n}.svg"));
        (csv, json, svg)
    };
    for n in [1, 2] {
        let (csv, json, svg) = args_for(n);
        let out = run(&["sweep", "--param", "alpha", "--lo", "0.8", "--hi", "1.0",
                        "--steps", "21",
                        "--csv", csv.to_str().unwrap(),
                        "--json", json.to_str().unwrap(),
                        "--svg", svg.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(stdout(&out).contains("stability-switch"));
    }
    let (c1, j1, v1) = args_for(1);
    let (c2, j2, v2) = args_for(2);
    assert_eq!(read(&c1), read(&c2));
    assert_eq!(read(&j1), read(&j2));
    assert_eq!(read(&v1), read(&v2));
}

#[test]
fn fate_map_over_initial_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fates.csv");
    let out = run(&["fate-map", "--x", "u0", "--x-lo", "0.1", "--x-hi", "0.9", "--x-steps", "4",
                    "--y", "v0", "--y-lo", "0.1", "--y-hi", "2.0", "--y-steps", "4",
                    "--t-end", "120", "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(read(&csv)).unwrap();
    assert!(text.starts_with("u0,v0,fate\n"));
    let rows = huntcoop::io::fate_map_from_csv(&text).unwrap();
    assert_eq!(rows.len(), 16);
}

#[test]
fn phase_portrait_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("portrait.svg");
    let out = run(&["phase", "--seed", "0.5,0.5", "--t-end", "30",
                    "--out", svg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(read(&svg)).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.contains("<polyline")); // the seeded trajectory
    assert!(text.ends_with("</svg>\n"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("model.conf");
    std::fs::write(&conf, "alpha = 0.5 # overridden below\nb = 0.3\n").unwrap();
    let out = run(&["equilibria", "--config", conf.to_str().unwrap(), "--alpha", "0.92"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("alpha=0.92"), "flag must win: {text}");
    assert!(text.contains("b=0.3"), "file must win over default: {text}");

    // invalid value in the file is a config error
    std::fs::write(&conf, "d = -1\n").unwrap();
    let out = run(&["equilibria", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // missing config file is an i/o error
    let out = run(&["equilibria", "--config", dir.path().join("gone.conf").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn stability_report_mentions_origin_probe() {
    let out = run(&["stability"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("(0,0): attracting (empirical)"));
    assert!(text.contains("agree=true"));
}
