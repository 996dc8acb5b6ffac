use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gls-obstacle")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn converge_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv");
    let o = run(&["converge", "--levels", "2", "--n0", "2", "--no-timing", "--vtk", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.txt", "results.csv", "convergence.svg", "level_00.vtk", "level_01.vtk"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(stdout(&o).contains("slopes"));
}

#[test]
fn adapt_reads_config_file_and_flags_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("adapt");
    fs::write(&cfg, "# small run\ncase = smooth\nlevels = 9\nmax_dofs = 1500\ntheta = 0.6\n").unwrap();
    let o = run(&["adapt", "--config", cfg.to_str().unwrap(), "--levels", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let echo = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(echo.contains("levels = 3"));
    assert!(echo.contains("theta = 0.6"));
    assert!(echo.contains("mode = adaptive"));
    assert!(fs::read_to_string(out.join("results.csv")).unwrap().lines().count() <= 4);
}

#[test]
fn solve_exports_a_vtk_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    let o = run(&["solve", "--case", "nonsmooth", "--n0", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("solution.vtk").exists());
    assert!(stdout(&o).contains("admissible"));
}

#[test]
fn selftest_passes_with_few_pairs() {
    let o = run(&["selftest", "--pairs", "10000", "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("[PASS]")).count(), 5);
}

#[test]
fn bad_input_fails_with_nonzero_status() {
    for args in [
        vec!["converge", "--case", "circle"],
        vec!["converge", "--mode", "adaptive"],
        vec!["adapt", "--theta", "1.5"],
        vec!["converge", "--config", "/nonexistent/file.cfg"],
    ] {
        let o = run(&args);
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"), "{args:?}");
    }
}
