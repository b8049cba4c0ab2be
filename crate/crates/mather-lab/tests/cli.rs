//! End-to-end tests of the `mather` binary: real process, real files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mather_lab::report::project_out_column;

const BIN: &str = env!("CARGO_BIN_EXE_mather");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

const FLAT_8: &str = "\
[grid]
n = 8

[stencil]
radius = 1

[classes]
list = [[1.0, 0.0]]
";

#[test]
fn alpha_on_flat_config_reports_one_half() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FLAT_8);
    let out = tmp.path().join("out");
    let res = run(&["alpha", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let csv = read(&out, "results.csv");
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    let row = lines.next().unwrap();
    assert!(lines.next().is_none(), "exactly one row expected");
    let idx = header.split(',').position(|h| h == "alpha").unwrap();
    let alpha: f64 = row.split(',').nth(idx).unwrap().parse().unwrap();
    assert!((alpha - 0.5).abs() < 1e-6, "alpha = {alpha}");

    // alpha runs write no details, but always a manifest
    assert!(!out.join("details.json").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(manifest["command"], "alpha");
    assert_eq!(manifest["row_count"], 1);

    // every row echoes the hash the manifest declares
    let hash = manifest["config_hash"].as_str().unwrap();
    assert!(row.contains(hash));
}

#[test]
fn sweep_reruns_are_byte_identical_up_to_runtime() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[grid]\nn = 8\n\n[stencil]\nradius = 1\n\n[[metrics]]\nkind = \"flat\"\n\n\
         [[metrics]]\nkind = \"fourier\"\n[[metrics.modes]]\nmx = 0\nmy = 1\namplitude = 0.05\n\n\
         [classes]\nlist = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]\n\n\
         [experiment]\nepsilon = 0.0\ntrials = 0\nbumps = 3\nseed = 42\n",
    );
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    for out in [&out1, &out2] {
        let res = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let a = read(&out1, "results.csv");
    let b = read(&out2, "results.csv");
    assert_eq!(
        project_out_column(&a, "runtime_ms").unwrap(),
        project_out_column(&b, "runtime_ms").unwrap(),
        "science columns must be byte-identical across reruns"
    );
    // the detail JSON carries no wall-clock at all: identical bytes
    assert_eq!(read(&out1, "details.json"), read(&out2, "details.json"));
    assert_eq!(a.lines().count(), 1 + 6, "2 metrics × 3 classes + header");
}

#[test]
fn aubry_writes_the_sin_bump_node_list_for_the_bottom_row() {
    let tmp = tempfile::tempdir().unwrap();
    // f = 0.05 sin(2π x₂): minimal conformal factor on the row x₂ = 3/4,
    // which at n = 8 is iy = 6.
    let cfg = write_config(
        tmp.path(),
        "[grid]\nn = 8\n\n[stencil]\nradius = 1\n\n\
         [[metrics]]\nid = \"sin\"\nkind = \"fourier\"\n[[metrics.modes]]\nmx = 0\nmy = 1\namplitude = 0.05\n\n\
         [classes]\nlist = [[1.0, 0.0]]\n",
    );
    let out = tmp.path().join("out");
    let res = run(&["aubry", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let nodes = read(&out, "aubry_nodes.txt");
    let mut lines = nodes.lines();
    assert_eq!(lines.next(), Some("instance_id,c1,c2,ix,iy"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8, "exactly the 8 nodes of one row:\n{nodes}");
    for (ix, row) in rows.iter().enumerate() {
        assert_eq!(*row, format!("sin,1,0,{ix},6"));
    }
}

#[test]
fn perturb_produces_one_row_per_trial_and_class() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[grid]\nn = 8\n\n[stencil]\nradius = 1\n\n[classes]\nlist = [[1.0, 0.0], [1.0, 1.0]]\n\n\
         [experiment]\nepsilon = 0.05\ntrials = 3\nseed = 7\n",
    );
    let out = tmp.path().join("out");
    let res = run(&["perturb", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = read(&out, "results.csv");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("t000,7,"));
    assert!(rows[5].starts_with("t002,7,"));
    assert!(rows.iter().all(|r| r.contains(",ok,")), "{csv}");
}

#[test]
fn config_errors_exit_2_with_a_machine_readable_record() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[grid]\nn = 16\n\n[stencil]\nradius = 2\n\n[tolerances]\nbisection = -1.0\n",
    );
    let res = run(&["sweep", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    let record: serde_json::Value =
        serde_json::from_slice(&res.stderr).expect("stderr must be one JSON record");
    assert_eq!(record["error"], "config");
    assert_eq!(record["exit_code"], 2);
    assert!(
        record["message"].as_str().unwrap().contains("tolerances.bisection"),
        "{record}"
    );
}

#[test]
fn missing_config_file_exits_4() {
    let res = run(&["alpha", "--config", "/nonexistent/run.toml"]);
    assert_eq!(res.status.code(), Some(4));
    let record: serde_json::Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(record["error"], "io");
    assert_eq!(record["exit_code"], 4);
}

#[test]
fn perturb_without_experiment_block_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FLAT_8);
    let res = run(&["perturb", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(&res.stderr).unwrap();
    assert!(record["message"].as_str().unwrap().contains("experiment"));
}

#[test]
fn cli_overrides_change_the_effective_config_and_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FLAT_8);
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    let r1 = run(&["alpha", "--config", &cfg, "--out", out1.to_str().unwrap()]);
    let r2 = run(&[
        "alpha", "--config", &cfg, "--out", out2.to_str().unwrap(), "--grid-n", "12",
    ]);
    assert!(r1.status.success() && r2.status.success());
    let m1: serde_json::Value = serde_json::from_str(&read(&out1, "manifest.json")).unwrap();
    let m2: serde_json::Value = serde_json::from_str(&read(&out2, "manifest.json")).unwrap();
    assert_ne!(m1["config_hash"], m2["config_hash"]);
    assert_eq!(m2["config"]["grid"]["n"], 12);
}
