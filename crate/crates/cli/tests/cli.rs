//! End-to-end tests of the `epsense` binary: exit codes, output formats,
//! configuration precedence, and determinism.

use std::process::{Command, Output};

fn epsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsense")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn print_defaults_is_valid_json() {
    let out = epsense(&["--print-defaults"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["omega"], 1.2325);
    assert_eq!(v["seed"], 42);
}

#[test]
fn spectrum_csv_has_header_and_12_digit_numbers() {
    let out = epsense(&["spectrum", "--n-omega", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega,delta_omega,re_E,im_E,S_theory");
    // second row: omega = 1.2325 exactly at grid midpoint, empty S at EP
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("1.23250000000e0,"));
    assert!(rows[1].ends_with(','), "S column must be empty at the EP: {}", rows[1]);
}

#[test]
fn invalid_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"omega": 1.0, "bogus": 2}"#).unwrap();
    let out = epsense(&["--config", path.to_str().unwrap(), "spectrum"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn negative_rate_exits_2() {
    let out = epsense(&["evolve", "--kappa-q", "-1.0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unwritable_output_exits_3() {
    let out = epsense(&["spectrum", "--n-omega", "2", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn too_few_offsets_per_side_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = epsense(&[
        "sense",
        "--rel-offsets",
        "0.1,0.3",
        "--shots",
        "200",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    // the report is still written
    assert!(path.exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n_omega": 4, "omega_max": 1.0}"#).unwrap();
    let out = epsense(&["--config", cfg.to_str().unwrap(), "spectrum", "--n-omega", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    // header plus two rows: the flag wins over the file
    assert_eq!(text.lines().count(), 3);
    // omega_max from the file is honored
    assert!(text.lines().last().unwrap().starts_with("1.00000000000e0,"));
}

#[test]
fn evolve_json_round_trips() {
    let out = epsense(&["evolve", "--n-points", "4", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert_eq!(v[0]["p_e0"], 1.0);
}

#[test]
fn trajectories_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = epsense(&[
        "trajectories",
        "--n-traj",
        "500",
        "--n-points",
        "6",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 7);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("traj.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["n_traj"], 500);
    assert!(summary["max_abs_z"].as_f64().unwrap() < 6.0);
}

#[test]
fn sense_is_deterministic_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| -> (Vec<u8>, std::path::PathBuf) {
        let out_path = dir.path().join(name);
        let out = epsense(&[
            "sense",
            "--rel-offsets",
            "0.05,0.1,0.2",
            "--shots",
            "300",
            "--seed",
            "9",
            "--plot",
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        (std::fs::read(&out_path).unwrap(), out_path)
    };
    let (a, path_a) = run("a.json");
    let (b, _) = run("b.json");
    assert_eq!(a, b);
    let svg = std::fs::read_to_string(path_a.with_extension("svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("circle"));
}

#[test]
fn plot_renders_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    std::fs::write(&csv, "t,a,b\n0,1,2\n1,2,4\n2,3,8\n").unwrap();
    let svg_path = dir.path().join("out.svg");
    let out = epsense(&[
        "plot",
        csv.to_str().unwrap(),
        "--y",
        "a,b",
        "--logy",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn plot_missing_column_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    std::fs::write(&csv, "t,a\n0,1\n").unwrap();
    let out = epsense(&["plot", csv.to_str().unwrap(), "--y", "nope"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn plot_empty_csv_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "t,a\n").unwrap();
    let out = epsense(&["plot", csv.to_str().unwrap(), "--y", "a"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn svg_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    std::fs::write(&csv, "t,a\n0,1\n1,3\n").unwrap();
    let render = |name: &str| {
        let p = dir.path().join(name);
        let out = epsense(&["plot", csv.to_str().unwrap(), "--y", "a", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        p
    };
    let a = render("a.svg");
    let b = render("b.svg");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
