//! Binary-level dispatch contract: exit codes, manifest pairing, and
//! byte-identical reruns from a manifest.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cheaptalk"))
}

fn work_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cheaptalk-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_baseline(dir: &std::path::Path) -> PathBuf {
    let path = dir.join("game.json");
    std::fs::write(
        &path,
        r#"{
  "states": [1.0, 2.0, 3.0],
  "u_receiver": [-1.0, 1.0, 2.0],
  "u_senders": [-1.0, -1.0, 1.0],
  "prior": [0.45, 0.10, 0.45],
  "rho": [0.2, 0.5, 0.8]
}"#,
    )
    .unwrap();
    path
}

#[test]
fn solve_writes_csv_and_manifest_and_rerun_reproduces_bytes() {
    let dir = work_dir("solve");
    let config = write_baseline(&dir);
    let out = dir.join("eq.csv");
    let status = bin()
        .args(["solve", "--config"])
        .arg(&config)
        .args(["--n", "50", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let first = std::fs::read(&out).unwrap();
    let header = String::from_utf8_lossy(&first);
    assert!(header.starts_with("N,x,cutoff,ls_h,ls_l,v_sender,v_receiver\n"));
    let manifest = dir.join("eq.csv.manifest.json");
    assert!(manifest.exists(), "manifest must pair with the output");

    let out2 = dir.join("eq2.csv");
    let status = bin()
        .args(["rerun", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert!(status.success());
    let second = std::fs::read(&out2).unwrap();
    assert_eq!(first, second, "rerun must reproduce the file byte-for-byte");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_config_exits_with_code_two_and_names_the_assumption() {
    let dir = work_dir("badcfg");
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{
  "states": [1.0, 2.0, 3.0],
  "u_receiver": [-1.0, 1.0, 2.0],
  "u_senders": [-1.0, -1.0, 1.0],
  "prior": [0.45, 0.10, 0.45],
  "rho": [0.8, 0.5, 0.2]
}"#,
    )
    .unwrap();
    let output = bin()
        .args(["solve", "--config"])
        .arg(&path)
        .args(["--n", "10", "--out"])
        .arg(dir.join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("signal accuracy ordering"),
        "stderr must name the violated assumption: {stderr}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_is_reproducible_across_processes() {
    let dir = work_dir("sim");
    let config = write_baseline(&dir);
    let run = |out: &std::path::Path| {
        let status = bin()
            .args(["simulate", "--config"])
            .arg(&config)
            .args([
                "--scenario",
                "cutoff",
                "--n",
                "20",
                "--trials",
                "30000",
                "--seed",
                "7",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let a = run(&dir.join("a.csv"));
    let b = run(&dir.join("b.csv"));
    assert_eq!(a, b);
    std::fs::remove_dir_all(&dir).ok();
}
