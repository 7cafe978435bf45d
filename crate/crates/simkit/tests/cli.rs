use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn simkit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_simkit"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn writes_csv_meta_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out");
    let cfg = fixture("small.conf");
    let res = simkit(&[
        "mse",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--svg",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = std::fs::read_to_string(out.join("mse_vs_power.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 6);
    let meta = std::fs::read_to_string(out.join("mse_vs_power.meta")).unwrap();
    assert!(meta.contains("normalization_power = "));
    assert!(meta.contains("[config]\nn = 64\n"));
    let svg = std::fs::read_to_string(out.join("mse_vs_power.svg")).unwrap();
    assert!(svg.contains("normalized MSE (dB)"));
}

#[test]
fn overrides_reach_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("small.conf");
    let res = simkit(&[
        "rate-distance",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "99",
        "--realizations",
        "3",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("rate_vs_distance.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",3,99")));
    assert!(!dir.path().join("rate_vs_distance.svg").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["bad_value.conf", "unknown_key.conf", "missing.conf"] {
        let cfg = fixture(name);
        let res = simkit(&[
            "mse",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(2), "{name}");
    }
    let cfg = fixture("bad_value.conf");
    let res = simkit(&[
        "mse",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("pt_dbm") && err.contains("line 4"), "{err}");
}

#[test]
fn invalid_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("small.conf");
    let res = simkit(&[
        "mse",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--realizations",
        "0",
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let cfg = fixture("small.conf");
    let res = simkit(&[
        "mse",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        blocker.join("sub").to_str().unwrap(),
        "--realizations",
        "1",
    ]);
    assert_eq!(res.status.code(), Some(3));
}
