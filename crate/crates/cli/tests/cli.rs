use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ppfilter(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppfilter"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

/// Data rows of a CSV written by the CLI, metadata and header skipped.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn error_kind(out: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"]["kind"].as_str().unwrap().to_owned()
}

#[test]
fn transmit_delta_limits() {
    let dir = TempDir::new().unwrap();
    let out = ppfilter(
        &[
            "transmit",
            "--dist",
            "delta",
            "--p",
            "0,1",
            "--omega-grid",
            "0.3:2.9:0.2",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = rows(&dir.path().join("transmit.csv"));
    let slab = rows(&{
        let d = dir.path().join("slab");
        assert!(ppfilter(&["slab", "--omega-grid", "0.3:2.9:0.2"], &d).status.success());
        d.join("slab.csv")
    });
    for (pair, s) in data.chunks(2).zip(&slab) {
        assert_eq!(pair[0][1], 0.0);
        assert_eq!(pair[0][2], 1.0);
        assert_eq!(pair[1][2], s[5]);
        assert_eq!(pair[1][3], 1.0);
    }
}

#[test]
fn catalysis_wide_format() {
    let dir = TempDir::new().unwrap();
    let out = ppfilter(
        &["catalysis", "--p-grid", "0.05:1.0:0.05", "--eta", "0.8,0.85,0.9,0.95"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("catalysis.csv")).unwrap();
    assert!(text.contains("p,K_eta=0.8,K_eta=0.85,K_eta=0.9,K_eta=0.95"));
    let data = rows(&dir.path().join("catalysis.csv"));
    assert_eq!(data.len(), 20);
    // p = 0.5 is row 9, p = 0.7 is row 13
    for (hi, lo) in data[13][1..].iter().zip(&data[9][1..]) {
        assert!(*hi > 3.0 * lo);
    }
}

#[test]
fn oracle_check_passes_and_reports() {
    let dir = TempDir::new().unwrap();
    let out = ppfilter(&["oracle-check"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["summary"]["max_deviation"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["summary"]["points"], 200);
    let out = ppfilter(
        &["oracle-check", "--polarization", "tm", "--tolerance", "1e-30"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "runtime");
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["transmit", "--p", "1.5"],
        vec!["catalysis", "--eta", "0"],
        vec!["mc", "--omega-grid", "3:1:0.1"],
        vec!["image", "--width", "10"],
        vec!["nonsense"],
        vec!["mse", "--sigma", "-1"],
    ] {
        let out = ppfilter(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_kind(&out), "usage");
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"trials": 100, "bogus": 1}"#).unwrap();
    let out = ppfilter(&["mc", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    fs::write(&cfg, r#"{"slab": {"scale": 2, "thickness": 1}}"#).unwrap();
    let out = ppfilter(&["slab", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"p": [0.3], "omega": [1.0, 2.0], "dist": "delta"}"#).unwrap();
    let out = ppfilter(
        &["transmit", "--config", cfg.to_str().unwrap(), "--p", "0.6"],
        dir.path(),
    );
    assert!(out.status.success());
    let data = rows(&dir.path().join("transmit.csv"));
    assert_eq!(data.len(), 2);
    assert!(data.iter().all(|r| r[1] == 0.6));
}

#[test]
fn manifest_regenerates_outputs() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = [
        "image", "--width", "38", "--height", "18", "--p", "0.5,1", "--trials", "200", "--seed", "17",
    ];
    assert!(ppfilter(&args, &a).status.success());
    let manifest = a.join("manifest.json");
    let out = ppfilter(&["image", "--config", manifest.to_str().unwrap()], &b);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
    // a manifest cannot drive a different subcommand
    let out = ppfilter(&["mc", "--config", manifest.to_str().unwrap()], &b);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str, sub: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_ppfilter"))
            .args(["mc", "--omega-grid", "1,2", "--samples", "300", "--seed", "5", "--out"])
            .arg(&out)
            .env("PPFILTER_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out.join("mc.csv")).unwrap()
    };
    assert_eq!(run("1", "one"), run("4", "four"));
    let bad = Command::new(env!("CARGO_BIN_EXE_ppfilter"))
        .args(["slab", "--out"])
        .arg(dir.path().join("bad"))
        .env("PPFILTER_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn reflect_rises_as_p_falls() {
    let dir = TempDir::new().unwrap();
    let out = ppfilter(&["reflect", "--omega-grid", "0.5:2.5:0.5"], dir.path());
    assert!(out.status.success());
    let data = rows(&dir.path().join("reflect.csv"));
    // default p order is 0.1, 0.3, 0.5, 0.7, 1
    for chunk in data.chunks(5) {
        assert!(chunk.windows(2).all(|w| w[0][2] >= w[1][2]));
    }
    let out = ppfilter(
        &[
            "reflect",
            "--dist",
            "delta",
            "--reflectance",
            "0.04",
            "--p",
            "0.5",
            "--omega-grid",
            "1",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let data = rows(&dir.path().join("reflect.csv"));
    assert!((data[0][2] - 1.0 / 7.0).abs() < 1e-15);
}
