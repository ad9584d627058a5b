use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_quadprop");

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("QUADPROP_THREADS").output().unwrap()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "diagnostic is one line: {text:?}");
    serde_json::from_str(text.trim()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

const TRAP: &str = "[system]\nomega = 1\n[potential]\nfamily = paul-trap\na = 1\nq = 0.25\nr = 10\n\
                    [integration]\nu_max = 20\nstep = 0.05\n[output]\npath = trap.csv\n";

#[test]
fn trap_run_writes_squeezing_data_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "trap.ini", TRAP);
    let out = run(&["simulate", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("trap.csv")).unwrap();
    assert!(csv.starts_with("u,zeta,energy_norm\n0,1,0.75\n"));
    assert!(!csv.contains('\r'));
    let zeta = column(&csv, "zeta");
    assert_eq!(zeta.len(), 401);
    assert!(zeta.iter().all(|&z| z > 0.0));
    assert!(zeta.iter().any(|&z| z < 1.0) && zeta.iter().any(|&z| z > 1.0));

    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("trap.csv.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rows"], 401);
    assert_eq!(summary["family"], "paul-trap");
    let zmin = summary["zeta_min"].as_f64().unwrap();
    // serde_json's default float parser may be off by one ulp.
    assert!((zmin - zeta.iter().cloned().fold(f64::INFINITY, f64::min)).abs() < 1e-15);

    // Identical inputs give identical bytes.
    let again = dir.path().join("again.csv");
    let out = run(&["simulate", cfg.to_str().unwrap(), "--output", again.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read(&again).unwrap(), csv.as_bytes());
}

#[test]
fn json_to_stdout_and_tolerance_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[system]\nomega = 1\n[potential]\nfamily = harmonic\n[integration]\nt_max = 3\nstep = 1\n";
    let cfg = write_config(dir.path(), "h.ini", text);
    let out = run(&["simulate", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["data"].as_array().unwrap().len(), 4);
    assert_eq!(v["columns"][0], "t");

    let dest = dir.path().join("h.csv");
    let out = run(&["simulate", cfg.to_str().unwrap(), "--output", dest.to_str().unwrap(), "--rtol", "1e-8", "--atol", "1e-9"]);
    assert!(out.status.success());
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("h.csv.summary.json")).unwrap()).unwrap();
    assert_eq!((summary["rtol"].as_f64(), summary["atol"].as_f64()), (Some(1e-8), Some(1e-9)));
}

#[test]
fn config_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.ini", "[potential]\nfamily = custom\n\nc = sin(\n");
    let out = run(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config");
    assert_eq!(err["line"], 4);

    let out = run(&["simulate", dir.path().join("missing.ini").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    stderr_json(&out);

    let out = run(&["simulate", cfg.to_str().unwrap(), "--rtol", "-1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    stderr_json(&out);
}

#[test]
fn kernel_grid_and_caustic() {
    let dir = tempfile::tempdir().unwrap();
    let grid = "x_min = -1\nx_max = 1\nx_count = 5\nx_prime_min = -1\nx_prime_max = 1\nx_prime_count = 4\n";
    let head = "[system]\nomega = 1\n[potential]\nfamily = harmonic\n[kernel]\n";
    let cfg = write_config(dir.path(), "k.ini", &format!("{head}t = 1\n{grid}"));
    let out = run(&["kernel", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("x,x_prime,re,im,abs\n"));
    let abs = column(&csv, "abs");
    assert_eq!(abs.len(), 20);
    let want = (1.0 / (2.0 * std::f64::consts::PI * 1f64.sin())).sqrt();
    assert!(abs.iter().all(|a| (a - want).abs() < 1e-9));

    let cfg = write_config(dir.path(), "c.ini", &format!("{head}t = 3.141592653589793\n{grid}"));
    let out = run(&["kernel", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert!(err["message"].as_str().unwrap().contains("caustic"), "{err}");
}

#[test]
fn scan_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[system]\nomega = 1\n[potential]\nfamily = paul-trap\na = 1\nq = 0.25\nr = 10\n\
                [scan]\na_min = -1\na_max = 1\na_count = 3\nq_min = 0\nq_max = 0.5\nq_count = 4\n";
    let cfg = write_config(dir.path(), "s.ini", text);
    let go = |threads: &str| {
        Command::new(BIN)
            .args(["scan", cfg.to_str().unwrap()])
            .env("QUADPROP_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = go("1");
    let three = go("3");
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
    let csv = String::from_utf8(one.stdout).unwrap();
    assert!(csv.starts_with("a,q,abs_trace,determinant,stability,error\n"));
    assert_eq!(csv.lines().nth(1).unwrap().split(',').nth(4), Some("0"));
    assert_eq!(csv.lines().nth(3).unwrap().split(',').nth(4), Some("1"));
    assert_eq!(go("many").status.code(), Some(2));

    let cfg = write_config(dir.path(), "e.ini", &text.replace("a_max = 1", "a_max = -3"));
    assert_eq!(run(&["scan", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn numeric_failure_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[potential]\nfamily = custom\nc = sqrt(1 - t)\n[initial]\nwidth = 1\n\
                [integration]\nt_max = 2\nstep = 0.1\n[output]\npath = out.csv\n";
    let cfg = write_config(dir.path(), "n.ini", text);
    let out = run(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "numeric");
    assert!(!dir.path().join("out.csv").exists());
    assert!(!dir.path().join("out.csv.summary.json").exists());
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "t.ini", TRAP);
    let bad = dir.path().join("no/such/dir/out.csv");
    let out = run(&["simulate", cfg.to_str().unwrap(), "--output", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"], "io");
}
