//! Black-box tests of the `oldroyd` binary: exit codes, config echo,
//! artifact layout, and overrides.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oldroyd_harness::config::{emit_config, parse_config, ExperimentKind};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_oldroyd")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

const SIM: &str = r#"
[grid]
dim = 2
size = 32

[params]
variant = "generalized-no-damping"

[stepper]
dt = 0.01
t_end = 0.1
output_every = 5

[initial]
seed = 7
amplitude = 0.01
"#;

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["simulate", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(run(&["simulate"]).status.code(), Some(3));
    assert_eq!(
        run(&["no-such-command", "--config", "x"]).status.code(),
        Some(3)
    );
    assert_eq!(run(&[]).status.code(), Some(3));
}

#[test]
fn config_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", "garbage = [");
    let out = run(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));

    let unknown = write_config(
        dir.path(),
        "unknown.toml",
        "[grid]\ndim = 2\nsize = 32\nshape = \"round\"\n\n[params]\nvariant = \"viscous-diffusive\"\n",
    );
    let out = run(&["simulate", "--config", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape"));

    // the experiment key must agree with the subcommand
    let sim = write_config(dir.path(), "sim.toml", SIM);
    let mismatched = format!("experiment = \"simulate\"\n{SIM}");
    let mis = write_config(dir.path(), "mis.toml", &mismatched);
    assert_eq!(
        run(&["simulate", "--config", sim.to_str().unwrap(), "--out"])
            .status
            .code(),
        Some(3),
        "dangling --out is a usage error"
    );
    let out = run(&["energy-audit", "--config", mis.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn runtime_rejection_exits_two_and_keeps_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    // amplitude large enough that the first step fails the step-size guard
    let cfg = write_config(
        dir.path(),
        "hot.toml",
        &SIM.replace("amplitude = 0.01", "amplitude = 1000000.0"),
    );
    let out_dir = dir.path().join("runs");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let summary = std::fs::read_to_string(out_dir.join("summary.toml")).unwrap();
    assert!(summary.contains("status = \"cfl-violation\""));
    assert!(out_dir.join("energy.csv").exists());
    assert!(
        !out_dir.join("final-u.oldb").exists(),
        "a failed run must not leave a final checkpoint"
    );
}

#[test]
fn threshold_failure_exits_four_after_writing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.toml",
        r#"
[grid]
dim = 2
size = 16

[params]
variant = "viscous-diffusive"

[stepper]
dt = 0.02
t_end = 0.1
output_every = 1

[initial]
seed = 3
amplitude = 0.05
band = [1.0, 4.0]

[sweep]
nu_list = [0.1, 0.03, 0.01]
s_diff = 1.0
expect_slope = [3.5, 4.0]
"#,
    );
    let out_dir = dir.path().join("runs");
    let out = run(&[
        "nu-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("slope"));
    assert!(out_dir.join("rate.csv").exists());
    assert!(out_dir.join("summary.toml").exists());
}

#[test]
fn echo_reparses_to_the_same_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sim.toml", SIM);
    let out_dir = dir.path().join("runs");
    assert!(run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ])
    .status
    .success());

    let echoed = parse_config(&out_dir.join("config_echo.toml"), ExperimentKind::Simulate).unwrap();
    assert_eq!(
        emit_config(&echoed).unwrap(),
        std::fs::read_to_string(out_dir.join("config_echo.toml")).unwrap(),
        "materialization must be idempotent"
    );
}

#[test]
fn cli_overrides_land_in_the_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sim.toml", SIM);
    let out_dir = dir.path().join("elsewhere");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(out.status.success());
    let echo = std::fs::read_to_string(out_dir.join("config_echo.toml")).unwrap();
    assert!(echo.contains("seed = 99"));
    assert!(out_dir.join("energy.csv").exists());
}

#[test]
fn besov_norm_streams_the_block_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = write_config(dir.path(), "sim.toml", SIM);
    let sim_out = dir.path().join("sim");
    assert!(run(&[
        "simulate",
        "--config",
        sim_cfg.to_str().unwrap(),
        "--out",
        sim_out.to_str().unwrap(),
    ])
    .status
    .success());

    let besov_cfg = write_config(
        dir.path(),
        "besov.toml",
        &format!(
            "[grid]\ndim = 2\nsize = 32\n\n[params]\nvariant = \"generalized-no-damping\"\n\n[besov]\ninput = \"{}\"\ns = 0.5\n",
            sim_out.join("final-u.oldb").display()
        ),
    );
    let besov_out = dir.path().join("besov");
    let out = run(&[
        "besov-norm",
        "--config",
        besov_cfg.to_str().unwrap(),
        "--out",
        besov_out.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("j,weighted_l2"));
    assert!(stdout.contains("total,"));
    assert!(besov_out.join("blocks.csv").exists());
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.toml",
        r#"
[grid]
dim = 2
size = 16

[params]
variant = "viscous-diffusive"

[stepper]
dt = 0.02
t_end = 0.1
output_every = 1

[initial]
seed = 3
amplitude = 0.05
band = [1.0, 4.0]

[sweep]
nu_list = [0.1, 0.03, 0.01]
s_diff = 1.0
"#,
    );
    let run_sweep = |out: &Path, workers: &str| {
        assert!(run(&[
            "nu-sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ])
        .status
        .success());
    };
    let one = dir.path().join("one");
    let many = dir.path().join("many");
    run_sweep(&one, "1");
    run_sweep(&many, "8");
    for file in ["rate.csv", "g_curves.csv", "reference.csv", "summary.toml"] {
        assert_eq!(
            std::fs::read(one.join(file)).unwrap(),
            std::fs::read(many.join(file)).unwrap(),
            "{file} depends on the worker count"
        );
    }
}

#[test]
fn snapshot_stream_matches_its_index() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.toml",
        &format!("{SIM}\n[output]\nsave_snapshots = true\n"),
    );
    let out_dir = dir.path().join("runs");
    assert!(run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ])
    .status
    .success());

    let index = std::fs::read_to_string(out_dir.join("snapshots/index.csv")).unwrap();
    let records = index.lines().count() - 1;
    // t = 0, two interior records, and the final time
    assert_eq!(records, 3);
    let files = std::fs::read_dir(out_dir.join("snapshots"))
        .unwrap()
        .count();
    assert_eq!(
        files,
        2 * records + 1,
        "one u and one tau file per record plus the index"
    );
}
