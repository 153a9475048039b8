//! End-to-end checks of the binary surface.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdspectra"))
}

#[test]
fn gram_stdout_matches_known_matrix() {
    let out = bin().args(["gram", "--n", "7", "--r", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("6,-4,1,0,0,0,0\n"));
    assert!(text.contains("0,0,0,0,1,-2,1\n"));
}

#[test]
fn gram_rejects_bad_order() {
    let out = bin().args(["gram", "--n", "5", "--r", "3"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn verify_vandermonde_suite_passes() {
    let dir = tempdir("verify");
    let report = dir.join("report.json");
    let out = bin()
        .args(["verify", "--suite", "vandermonde", "--out"])
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"passed\": true"));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[PASS] vandermonde::inverse_residual"));
}

#[test]
fn verify_unknown_suite_fails() {
    let out = bin().args(["verify", "--suite", "bogus"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn experiment_reruns_are_byte_identical() {
    let dir1 = tempdir("rd1");
    let dir2 = tempdir("rd2");
    for dir in [&dir1, &dir2] {
        let out = bin()
            .args([
                "experiment",
                "--kind",
                "rate-distortion",
                "--n",
                "64,128",
                "--r",
                "1",
                "--trials",
                "6",
                "--seed",
                "99",
                "--out",
            ])
            .arg(dir)
            .env("SD_SPECTRA_THREADS", "3")
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir1.join("rate_distortion.csv")).unwrap();
    let b = std::fs::read(dir2.join("rate_distortion.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# config_hash="));
    assert!(text.contains("N,r,d,m,trial,bits,err_l2,bound_rhs"));
}

#[test]
fn config_file_drives_experiment() {
    let dir = tempdir("cfg");
    let cfg = dir.join("config.toml");
    std::fs::write(
        &cfg,
        "[sigma_decay]\nn = 128\nr_list = [1]\n",
    )
    .unwrap();
    let out = bin()
        .args(["experiment", "--kind", "sigma-decay", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("sigma_decay.csv")).unwrap();
    // n = 128 from the file: 128 sigma rows + hash + header lines.
    assert_eq!(csv.lines().count(), 130);
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("sdspectra-{tag}"));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
