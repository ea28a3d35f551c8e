use std::path::Path;
use std::process::{Command, Output};

fn cem2d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cem2d")).args(args).output().unwrap()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

#[test]
fn zero_length_run_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cem2d(&["run", &config("neumann.toml"), "--t-end", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let series = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(series, "t_us,Ud_J_per_m,Ek,Es,Wext,fragments\n");
    let cracks = std::fs::read_to_string(out.join("cracks.csv")).unwrap();
    assert_eq!(cracks, "segment_id,x0,y0,x1,y1,t_split_us,Ud_cumulative\n");
}

#[test]
fn short_run_then_fragment_count_of_the_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cem2d(&["run", &config("neumann.toml"), "--t-end", "40", "--mode", "sct", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let series = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(series.lines().count(), 1 + 40);

    let o = cem2d(&["fragments", out.join("final.vtk").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("fragments 1 major 1"));
}

#[test]
fn mesh_generation_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("k.mesh");
    let o = cem2d(&["mesh", "gen", &config("kalthoff.toml"), "-o", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cem2d(&["mesh", "info", file.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("elements 4608"), "{text}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cem2d(&["run", dir.path().join("missing.toml").to_str().unwrap()]).status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[scenario.neumann]\n[time]\nt_end_us = -1\n").unwrap();
    assert_eq!(cem2d(&["run", bad.to_str().unwrap()]).status.code(), Some(2));

    let o = cem2d(&["run", &config("neumann.toml"), "--dt-safety", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    assert_eq!(cem2d(&["run"]).status.code(), Some(2));
}
