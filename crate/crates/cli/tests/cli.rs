use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kplane(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kplane"))
        .args(args)
        .current_dir(dir)
        .env("KPLANE_OUT_DIR", dir.join("out"))
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sinogram_follows_forward_law() {
    let dir = tempfile::tempdir().unwrap();
    let out = kplane(dir.path(), &["radon", "--field", "gaussian", "--dim", "2,1", "--sinogram", "64x64"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let data = rows(&dir.path().join("out/radon_gaussian.csv"));
    assert_eq!(data.len(), 4096);
    for r in &data {
        let d2 = r[1] * r[1] + r[2] * r[2];
        assert!((r[3] - std::f64::consts::PI.sqrt() * (-d2).exp()).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn saved_config_reproduces_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let out = kplane(dir.path(), &["riesz", "--dim", "2", "--alpha", "0.5+0.25i", "--points", "0,0;0.3,-0.2", "--out", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let cfg = dir.path().join("a.csv.cfg");
    let b = dir.path().join("b.csv");
    let out = kplane(dir.path(), &["riesz", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(rows(&a).len(), 2);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# potential of the Gaussian\ndim = 2\nalpha = 0.5\npoints = origin\n").unwrap();
    let out = kplane(dir.path(), &["riesz", "--config", cfg.to_str().unwrap(), "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let data = rows(&dir.path().join("out/riesz_gaussian.csv"));
    // alpha = 1 wins: sqrt(pi)/2
    assert!((data[0][4] - 0.886_226_925_452_758).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = kplane(dir.path(), &["invert", "--dim", "2,1", "--rho", "half"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("rho"));
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "dim = 2,1\nfield = nosuch\n").unwrap();
    let bad = kplane(dir.path(), &["riesz", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("bad.cfg:2"));
    assert_eq!(kplane(dir.path(), &["nosuch"]).status.code(), Some(2));
    let pole = kplane(dir.path(), &["riesz", "--dim", "2", "--alpha", "2"]);
    assert_eq!(pole.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&pole.stderr).contains("riesz-pole"));
    let usage = kplane(dir.path(), &["radon", "--dim", "3,1"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn hoelder_inversion_on_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let out = kplane(dir.path(), &["invert", "--route", "hoelder", "--field", "gaussian", "--dim", "2,1", "--points", "lattice3"]);
    assert_eq!(out.status.code(), Some(0));
    let data = rows(&dir.path().join("out/invert_hoelder_gaussian.csv"));
    assert_eq!(data.len(), 9);
    assert!(data.iter().all(|r| r[4] < 1e-3));
}

#[test]
fn verify_subset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kplane(dir.path(), &["verify", "--dim", "3,1"]);
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert!(table.contains("dual proportionality"));
    assert!(table.contains("gaussian (3,1) at 5 points: max defect"));
    assert!(!table.contains("hoelder inversion"));
}
