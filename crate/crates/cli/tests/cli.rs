use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bergquant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergquant")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn out(dir: &TempDir, sub: &str) -> String {
    dir.path().join(sub).to_str().unwrap().to_string()
}

fn summary(dir: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(Path::new(dir).join("summary.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn identical_runs_give_identical_csv() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "k_list = [10, 20]\ncount = 8\n");
    let (a, b) = (out(&tmp, "a"), out(&tmp, "b"));
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let o = bergquant(&["lemma-sphere", "--config", &cfg, "--out-dir", dir, "--seed", "7", "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let o = bergquant(&["doubling", "--config", &cfg, "--out-dir", dir, "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["lemma-sphere.csv", "doubling.csv"] {
        let x = std::fs::read(Path::new(&a).join(f)).unwrap();
        let y = std::fs::read(Path::new(&b).join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
    // a different seed changes the sampled polynomials
    let c = out(&tmp, "c");
    assert!(bergquant(&["lemma-sphere", "--config", &cfg, "--out-dir", &c, "--seed", "8"]).status.success());
    assert_ne!(
        std::fs::read(Path::new(&a).join("lemma-sphere.csv")).unwrap(),
        std::fs::read(Path::new(&c).join("lemma-sphere.csv")).unwrap()
    );
}

#[test]
fn ot_check_defaults_pass() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "ot");
    let o = bergquant(&["ot-check", "--out-dir", &dir]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&Path::new(&dir).join("ot-check.csv"));
    assert_eq!(rows[0], ["a", "m", "ot_constant", "derivative_kernel", "product"]);
    assert_eq!(rows.len(), 21);
    for r in &rows[1..] {
        let product: f64 = r[4].parse().unwrap();
        assert!((product - 1.0).abs() <= 1e-8, "{r:?}");
        // 17 significant digits
        assert_eq!(r[4].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    }
    let s = summary(&dir);
    assert_eq!(s["pass"], true);
    assert_eq!(s["checks"].as_array().unwrap().len(), 20);
}

#[test]
fn cp1_c11_with_fubini_study_has_unit_ratios() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "subcommand = \"cp1-c11\"\nk_list = [5, 25]\npotential = { kind = \"fubini_study\" }\n");
    let dir = out(&tmp, "c11");
    let o = bergquant(&["cp1-c11", "--config", &cfg, "--out-dir", &dir]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&Path::new(&dir).join("cp1-c11.csv"));
    assert_eq!(rows.len(), 3);
    for r in &rows[1..] {
        let (lo, hi): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn mass_deficient_measure_is_rejected() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "cdf.txt", "# t F\n-5 0\n0 2.0\n5 5.0\n");
    let cfg = write(tmp.path(), "c.toml", "measure_file = \"cdf.txt\"\nk_list = [10]\n");
    let dir = out(&tmp, "mq");
    let o = bergquant(&["measure-quantize", "--config", &cfg, "--out-dir", &dir]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("total mass"), "{err}");
    assert!(!Path::new(&dir).join("measure-quantize.csv").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "x");
    let bad = write(tmp.path(), "bad.toml", "k_lsit = [1]\n");
    assert_eq!(bergquant(&["doubling", "--config", &bad, "--out-dir", &dir]).status.code(), Some(2));
    let other = write(tmp.path(), "other.toml", "subcommand = \"energy\"\n");
    assert_eq!(bergquant(&["doubling", "--config", &other, "--out-dir", &dir]).status.code(), Some(2));
    let zero = write(tmp.path(), "zero.toml", "k_list = [0]\n");
    assert_eq!(bergquant(&["doubling", "--config", &zero, "--out-dir", &dir]).status.code(), Some(2));
    let uncertified = write(tmp.path(), "a.toml", "a = 5.0\nk_list = [10]\n");
    let o = bergquant(&["lower-bound", "--config", &uncertified, "--out-dir", &dir]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k=10"));
}

#[test]
fn strict_turns_trend_warnings_into_failures() {
    let tmp = TempDir::new().unwrap();
    // ε_k of the lower bound rises towards 0 from below for the test potential
    let cfg = write(tmp.path(), "c.toml", "k_list = [10, 20]\n");
    let dir = out(&tmp, "lb");
    let o = bergquant(&["lower-bound", "--config", &cfg, "--out-dir", &dir]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(summary(&dir)["trends_pass"], false);
    let o = bergquant(&["lower-bound", "--config", &cfg, "--out-dir", &dir, "--strict"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(&dir)["pass"], false);
}

#[test]
fn spline_file_potential_is_loaded() {
    let tmp = TempDir::new().unwrap();
    // samples of φ_FS = log(1 + e^t)
    let mut text = String::new();
    for i in 0..=200 {
        let t = -20.0 + 0.2 * i as f64;
        text.push_str(&format!("{t} {}\n", (t as f64).exp().ln_1p()));
    }
    write(tmp.path(), "phi.txt", &text);
    let cfg = write(tmp.path(), "c.toml", "k_list = [10]\npotential = { kind = \"spline_file\", path = \"phi.txt\" }\n");
    let dir = out(&tmp, "sp");
    let o = bergquant(&["berndtsson", "--config", &cfg, "--out-dir", &dir]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(summary(&dir)["info"]["phi"].as_str().unwrap().starts_with("spline_file"));
}
