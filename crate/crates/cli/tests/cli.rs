//! End-to-end checks of the `cssr` binary: exit-code contract, flag/config
//! precedence, seed files, and output shapes.

use std::path::Path;
use std::process::Command;

fn cssr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cssr"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const SMALL_GRID: &str = "grid.n_x = 64\ngrid.l_x = 10.0\ngrid.m_y = 16\nflow.tau = 2e-3\n";

#[test]
fn unknown_subcommand_exits_one_with_usage() {
    let out = cssr().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "{stderr}");
}

#[test]
fn invalid_config_value_names_the_key_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    write(&cfg, "physics.epsilon = -1.0\n");
    let out = cssr().args(["ground2d", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("physics.epsilon"), "{stderr}");
}

#[test]
fn missing_config_file_exits_one() {
    let out = cssr()
        .args(["ground1d", "--config", "/nonexistent/nope.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_keys_warn_but_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    write(
        &cfg,
        &format!(
            "{SMALL_GRID}physics.beta = 0.0\nmystery.knob = 3\noutput.dir = \"{}\"\n",
            dir.path().join("out").display()
        ),
    );
    let out = cssr().args(["ground1d", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mystery.knob"));
}

#[test]
fn ground1d_json_matches_harmonic_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    let outdir = dir.path().join("out");
    write(
        &cfg,
        &format!(
            "{SMALL_GRID}physics.beta = 0.0\noutput.dir = \"{}\"\n",
            outdir.display()
        ),
    );
    let out = cssr().args(["ground1d", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("summary.json")).unwrap())
            .unwrap();
    let energy = summary["results"]["energy"].as_f64().unwrap();
    assert!((energy - 1.0).abs() < 1e-6, "E = {energy}");
    assert_eq!(summary["command"], "ground1d");
    assert_eq!(summary["config"]["grid"]["n_x"], 64);
    assert!(summary["wall_time"].as_f64().unwrap() >= 0.0);
}

#[test]
fn env_var_overrides_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    let env_out = dir.path().join("env_out");
    write(&cfg, &format!("{SMALL_GRID}physics.beta = 0.0\noutput.dir = \"ignored\"\n"));
    let out = cssr()
        .args(["ground1d", "--config"])
        .arg(&cfg)
        .current_dir(dir.path())
        .env("CSSR_OUTPUT_DIR", &env_out)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_out.join("ground1d.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn snapshot_seed_round_trips_through_evolve() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("out");
    let cfg = dir.path().join("c.cfg");
    write(
        &cfg,
        &format!(
            "{SMALL_GRID}physics.beta = 0.3\noutput.dir = \"{}\"\noutput.write_fields = true\n",
            outdir.display()
        ),
    );
    let out = cssr().args(["ground1d", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let snap = outdir.join("ground1d.snap");
    assert!(snap.exists());

    let cfg2 = dir.path().join("c2.cfg");
    write(
        &cfg2,
        &format!(
            "{SMALL_GRID}physics.beta = 0.3\ntime.dt = 1e-3\ntime.t_final = 0.02\n\
             time.snapshot_stride = 10\nflow.seed_profile = \"file:{}\"\noutput.dir = \"{}\"\n",
            snap.display(),
            outdir.display()
        ),
    );
    let out = cssr().args(["evolve1d", "--config"]).arg(&cfg2).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // Evolving the β = 0.3 minimizer leaves mass and energy flat.
    let csv = std::fs::read_to_string(outdir.join("trajectory1d.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    let mass: f64 = cells[1].parse().unwrap();
    assert!((mass - 1.0).abs() < 1e-9, "{last}");
}

#[test]
fn non_convergence_exits_two_but_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("out");
    let cfg = dir.path().join("c.cfg");
    write(
        &cfg,
        &format!(
            "{SMALL_GRID}physics.beta = 1.0\nflow.max_iters = 3\n\
             flow.seed_profile = \"noisy-gaussian\"\noutput.dir = \"{}\"\n",
            outdir.display()
        ),
    );
    let out = cssr().args(["ground1d", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(outdir.join("ground1d.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with("false"), "{csv}");
}

#[test]
fn instability_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("out");
    let cfg = dir.path().join("c.cfg");
    // A wildly oversized step makes the explicit nonlinear stage blow up and
    // trip the mass guard.
    write(
        &cfg,
        &format!(
            "{SMALL_GRID}physics.beta = 3.0\nphysics.epsilon = 0.1\ntime.dt = 0.2\n\
             time.t_final = 4.0\ntime.snapshot_stride = 1\noutput.dir = \"{}\"\n",
            outdir.display()
        ),
    );
    let out = cssr().args(["evolve2d", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("instability"));
}

#[test]
fn beta_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("out");
    let cfg = dir.path().join("c.cfg");
    write(
        &cfg,
        &format!(
            "{SMALL_GRID}physics.beta = 2.0\noutput.dir = \"{}\"\n",
            outdir.display()
        ),
    );
    let out = cssr()
        .args(["ground1d", "--beta", "0", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["config"]["physics"]["beta"], 0.0);
    let energy = summary["results"]["energy"].as_f64().unwrap();
    assert!((energy - 1.0).abs() < 1e-6);
}
