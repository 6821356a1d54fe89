use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_morse-shrink");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("morse-shrink-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn benchmark_writes_five_files() {
    let out = scratch("bench");
    let cfg = configs().join("interval_c10.conf");
    let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--grid", "400", "--rgrid", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trace.csv", "conjugate_points.csv", "bifurcation.csv", "report.txt", "run_meta.txt"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    assert_eq!(data_rows(&out.join("conjugate_points.csv")), 6);
    assert_eq!(data_rows(&out.join("bifurcation.csv")), 6);
    assert_eq!(data_rows(&out.join("trace.csv")), 100);
    let header = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(header.starts_with("r,mu_1,mu_2,mu_3,mu_4,mu_5,mu_6,mu_7,mu_8,morse_index\n"));
    let meta = fs::read_to_string(out.join("run_meta.txt")).unwrap();
    assert!(meta.contains("n = 400\n") && meta.contains("exit_code = 0\n"));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert_eq!(report.matches("[PASS]").count(), 4, "{report}");
}

#[test]
fn csv_output_is_deterministic() {
    let cfg = configs().join("interval_c10.conf");
    let dirs = [scratch("det-a"), scratch("det-b")];
    for d in &dirs {
        let o = run(&["run", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--grid", "300", "--rgrid", "80"]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["trace.csv", "conjugate_points.csv", "bifurcation.csv"] {
        assert_eq!(fs::read(dirs[0].join(f)).unwrap(), fs::read(dirs[1].join(f)).unwrap(), "{f}");
    }
}

#[test]
fn no_crossings_gives_header_only_tables() {
    let out = scratch("empty");
    let cfg = configs().join("no_crossing.conf");
    let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(data_rows(&out.join("conjugate_points.csv")), 0);
    assert_eq!(data_rows(&out.join("bifurcation.csv")), 0);
    assert!(fs::read_to_string(out.join("report.txt")).unwrap().contains("M = 0"));
}

#[test]
fn degenerate_endpoint_exits_with_2() {
    let out = scratch("degenerate");
    let cfg = configs().join("degenerate.conf");
    let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("r_max"), "{err}");
    // partial results are still written
    assert!(fs::read_to_string(out.join("run_meta.txt")).unwrap().contains("failed_stage = sweep"));
}

#[test]
fn config_errors_exit_with_1() {
    let dir = scratch("badcfg");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.conf");
    fs::write(&cfg, "[domain]\nkind = interval\n[potential]\nf = -100\n[sweep]\nr_min = 0\n").unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 6: r_min must be positive"));
    let o = run(&["run", dir.join("missing.conf").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn non_star_shaped_domain_exits_with_2() {
    let dir = scratch("star");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("shifted.conf");
    fs::write(&cfg, "[domain]\nkind = interval\na = 0.5\nb = 2\n[potential]\nf = -100\n").unwrap();
    let o = run(&["run", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unwritable_output_exits_with_3() {
    let dir = scratch("unwritable");
    fs::create_dir_all(&dir).unwrap();
    let blocker = dir.join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let cfg = configs().join("no_crossing.conf");
    let o = run(&["run", cfg.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("file"));
}
