use std::path::Path;
use std::process::Command;

use pinwheel::formats::read_patch_file;
use pinwheel::generate_patch;

fn pinwheel(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pinwheel"))
        .args(args)
        .env_remove("PINWHEEL_WORKERS")
        .output()
        .expect("binary runs")
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

#[test]
fn generate_writes_one_line_per_tile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.pw");
    let res = pinwheel(&["generate", "--depth", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let lines = data_lines(&out);
    assert_eq!(lines[0], "pinwheel-patch v1 depth=3");
    assert_eq!(lines.len(), 1 + 125);
    assert_eq!(read_patch_file(&out).unwrap(), generate_patch(3).unwrap());
}

#[test]
fn patch_file_feeds_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let patch = dir.path().join("p.pw");
    let pts = dir.path().join("pts.csv");
    pinwheel(&["generate", "--depth", "2", "--out", patch.to_str().unwrap()]);
    let res = pinwheel(&["points", "--patch", patch.to_str().unwrap(), "--out", pts.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let text = std::fs::read_to_string(&pts).unwrap();
    assert!(text.contains("# input p.pw sha256="));
    assert_eq!(data_lines(&pts).len(), 25);
    assert!(data_lines(&pts).contains(&"0:0:0;0:0:0".to_string()));
}

#[test]
fn eta_reports_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eta.csv");
    let res = pinwheel(&["eta", "--depth", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let lines = data_lines(&out);
    assert_eq!(lines[0], "r_sq,pair_count,eta_hat,eta_exact,starred,relative_deviation");
    let row = lines.iter().find(|l| l.starts_with("8/5,")).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[3], "1/2");
    assert!(cols[5].parse::<f64>().unwrap().abs() < 0.02);
}

#[test]
fn check_passes() {
    let res = pinwheel(&["check", "--depth", "5"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(!err.contains("FAIL"));
    assert_eq!(err.matches("PASS").count(), 5);
}

#[test]
fn exit_codes() {
    assert_eq!(pinwheel(&[]).status.code(), Some(1));
    assert_eq!(pinwheel(&["generate", "--depth", "x", "--out", "a"]).status.code(), Some(1));
    assert_eq!(pinwheel(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pinwheel(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = out.to_str().unwrap();
    // depth above the cap trips the guard
    assert_eq!(pinwheel(&["generate", "--depth", "30", "--out", o]).status.code(), Some(3));
    // margin larger than the inradius of a small patch
    assert_eq!(pinwheel(&["hist", "--depth", "1", "--margin", "5", "--out", o]).status.code(), Some(2));
    assert_eq!(pinwheel(&["hist", "--depth", "1", "--r-max-sq", "1/3", "--out", o]).status.code(), Some(2));
    std::fs::write(&out, "not a patch\n").unwrap();
    assert_eq!(pinwheel(&["points", "--patch", o, "--out", o]).status.code(), Some(2));
    assert!(!data_lines(&out).is_empty());
    let env = Command::new(env!("CARGO_BIN_EXE_pinwheel"))
        .args(["powder", "--out", o])
        .env("PINWHEEL_WORKERS", "lots")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(1));
}

#[test]
fn seed_info_goes_to_stderr() {
    let res = pinwheel(&["--seed-info"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(res.stdout.is_empty());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("seed triangle: r=-1:1:0;-1:1:0"));
    assert!(err.contains("control point"));
}

#[test]
fn compare_emits_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let res = pinwheel(&["compare", "--depth", "4", "--r-max", "15", "--k-max", "2.5", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let script = std::fs::read_to_string(dir.path().join("plot_compare.py")).unwrap();
    assert!(script.contains("open(\"cmp.csv\")"));
    let lines = data_lines(&out);
    assert_eq!(lines[0], "k,intensity_scaled");
    assert!(lines.contains(&"r,bar_height".to_string()));
    assert!(lines.contains(&"1,4".to_string()));
}
