use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_cs-recovery");

const SEVEN: &str = "\
n=512
component=32,3.5,0
component=38,3,0
component=130,1.75,0
component=148,2.5,0
component=272,3.75,0
component=415,2.3,0
component=435,3.3,0
";

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, format!("{SEVEN}{extra}")).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

/// Drops the wall-time column so reruns can be compared byte for byte.
fn without_column(rows: &[Vec<String>], col: usize) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| r.iter().enumerate().filter(|(i, _)| *i != col).map(|(_, v)| v.clone()).collect())
        .collect()
}

#[test]
fn generate_writes_signal_and_spectrum() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = run(&["generate"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let (header, rows) = read_rows(&dir.path().join("signal_time.csv"));
    assert_eq!(header, "n,re,im");
    assert_eq!(rows.len(), 512);

    let (header, rows) = read_rows(&dir.path().join("signal_dft.csv"));
    assert_eq!(header, "bin,magnitude");
    assert_eq!(rows.len(), 512);
    let peaks: Vec<usize> = rows
        .iter()
        .filter(|r| r[1].parse::<f64>().unwrap() > 1.0)
        .map(|r| r[0].parse().unwrap())
        .collect();
    assert_eq!(peaks, vec![32, 38, 130, 148, 272, 415, 435]);
    // Raw forward-DFT scale: bin 32 carries N·A.
    let m32: f64 = rows[32][1].parse().unwrap();
    assert!((m32 - 512.0 * 3.5).abs() < 1e-9);
}

#[test]
fn generate_with_no_components_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("empty.conf");
    fs::write(&cfg, "n=64\n").unwrap();
    let out = run(&["generate"], &cfg, dir.path());
    assert!(out.status.success());
    let (_, rows) = read_rows(&dir.path().join("signal_time.csv"));
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0 && r[2].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn recover_reports_summary_and_reconstruction() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = run(&["recover", "--algorithm", "sira", "--m", "250", "--seed", "3"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = stdout.trim().split(',').collect();
    assert_eq!(&fields[..3], &["sira", "250", "3"]);
    assert!(fields[3].parse::<f64>().unwrap() <= 1e-8);
    assert_eq!(fields[5], "true");

    let (header, rows) = read_rows(&dir.path().join("recon_sira_M250_s3.csv"));
    assert_eq!(header, "bin,true_magnitude,recovered_magnitude");
    assert_eq!(rows.len(), 512);
}

#[test]
fn recover_with_underestimated_k_degrades() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "iht.k=3\n");
    let out = run(&["recover", "--algorithm", "iht", "--m", "200", "--seed", "0"], &cfg, dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let error: f64 = stdout.trim().split(',').nth(3).unwrap().parse().unwrap();
    assert!(error > 0.1, "error {error}");
}

#[test]
fn sweep_is_deterministic_apart_from_time() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "m_values=200,250\nseeds=0..3\nalgorithms=sira,omp,iht\n");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&["sweep"], &cfg, &a).status.success());
    assert!(run(&["sweep", "--jobs", "3"], &cfg, &b).status.success());

    let (header, rows_a) = read_rows(&a.join("sweep.csv"));
    assert_eq!(header, "algorithm,m,seed,n,k,error,time_s,support_exact,iterations,failed");
    assert_eq!(rows_a.len(), 3 * 2 * 3);
    let (_, rows_b) = read_rows(&b.join("sweep.csv"));
    assert_eq!(without_column(&rows_a, 6), without_column(&rows_b, 6));

    let (header, summary) = read_rows(&a.join("sweep_summary.csv"));
    assert_eq!(header, "algorithm,m,error_median,error_q1,error_q3,time_median_s,success_rate");
    assert_eq!(summary.len(), 3 * 2);
}

#[test]
fn minm_finds_sira_threshold_point() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "seeds=0..20\nminm.range=140..=220:10\n");
    let out = run(&["minm", "--algorithm", "sira"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let m: usize = stdout.trim().strip_prefix("sira,min_m=").unwrap().parse().unwrap();
    assert!((140..=200).contains(&m), "min_m {m}");
    let (header, rows) = read_rows(&dir.path().join("minm_sira.csv"));
    assert_eq!(header, "m,success_rate,error_median");
    assert_eq!(rows.last().unwrap()[0].parse::<usize>().unwrap(), m);
}

#[test]
fn config_errors_exit_3_with_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bogus=1\n");
    let out = run(&["generate"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("error,config,line=9,"), "{stdout}");

    let cfg = write_config(dir.path(), "");
    let out = run(&["recover", "--algorithm", "omp", "--m", "600"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn recovery_failure_exits_4() {
    let dir = TempDir::new().unwrap();
    // Only three samples cannot support a seven-column least-squares fit.
    let cfg = write_config(dir.path(), "sira.p=0.5\n");
    let out = run(&["recover", "--algorithm", "sira", "--m", "3", "--seed", "0"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("error,recovery,sira,3,0,"), "{stdout}");
}

#[test]
fn missing_config_exits_5() {
    let dir = TempDir::new().unwrap();
    let out = run(&["generate"], &dir.path().join("absent.conf"), dir.path());
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = run(&["recover", "--algorithm", "lasso"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
}
