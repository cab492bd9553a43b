use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddephase"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn ratios(line: &str) -> (f64, f64) {
    let tail = line.split("ratios").nth(1).unwrap();
    let nums: Vec<f64> = tail
        .split_whitespace()
        .filter_map(|w| w.parse().ok())
        .collect();
    (nums[0], nums[1])
}

#[test]
fn reduce_reports_agreement_with_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["reduce"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("f1 (generic solver)") && out.contains("f2 (generic solver)"));
    for key in ["max |f1 - closed form| = ", "max |f2 - closed form| = "] {
        let v: f64 = out.split(key).nth(1).unwrap().lines().next().unwrap().parse().unwrap();
        assert!(v <= 1e-9);
    }
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "expansion.json")).unwrap();
    assert_eq!(json["expansion"]["orders"].as_array().unwrap().len(), 3);
    assert_eq!(json["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn unsupported_order_exits_with_solver_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["reduce", "--order", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported order"));
}

#[test]
fn io_failures_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["reduce", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(3));
    let file = dir.path().join("plain-file");
    fs::write(&file, "x").unwrap();
    let o = run(&file, &["curves"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn invalid_parameters_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate-dde", "--gamma", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["reduce", "--set", "model.zeta=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn uncoupled_simulation_has_constant_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate-dde", "--eps", "0", "--set", "simulate.t_end=20"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("constant frequency 1.000000000"));
    let csv = read(dir.path(), "trajectory.csv");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_sha256="));
    assert_eq!(lines.next().unwrap(), "t,re_z1,im_z1,re_z2,im_z2,psi");
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 20.0).abs() < 1e-9 && (last[5] - 1.0).abs() < 1e-8);
}

#[test]
fn phase_simulation_lists_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate-phase", "--rho", "0", "--tau", "0"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("psi = 0.000000000") && out.contains("Stable") && out.contains("Unstable"));
    assert!(read(dir.path(), "phase.csv").lines().nth(1).unwrap() == "t,psi");
}

#[test]
fn curves_start_at_the_taylor_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["curves", "--eps", "0.1", "--set", "curves.tau_n=5"]);
    assert!(o.status.success());
    let csv = read(dir.path(), "curves.csv");
    let header: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let row: Vec<f64> = csv.lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    let col = header.iter().position(|h| *h == "rho_sync_pi2_taylor").unwrap();
    assert_eq!(row[0], 0.0);
    assert!((row[col] - (FRAC_PI_2 + 0.1)).abs() < 1e-15);
    assert!((row[col - 1] - row[col]).abs() < 1e-2);
    assert_eq!(csv.lines().count(), 2 + 5);
}

#[test]
fn residual_ratios_match_expansion_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["residual", "--set", "residual.lattice=16"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let line1 = out.lines().find(|l| l.starts_with("order 1")).unwrap();
    let line2 = out.lines().find(|l| l.starts_with("order 2")).unwrap();
    let (a, b) = ratios(line1);
    assert!((3.2..=4.8).contains(&a) && (3.2..=4.8).contains(&b), "{line1}");
    let (a, b) = ratios(line2);
    assert!((6.4..=9.6).contains(&a) && (6.4..=9.6).contains(&b), "{line2}");
}

#[test]
fn sweep_is_reproducible_from_emitted_config() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--seed",
        "5",
        "--set",
        "sweep.rho_n=12",
        "--set",
        "sweep.tau_n=4",
        "--set",
        "sweep.tau_max=1.5",
        "--set",
        "sweep.t_end=300",
    ];
    let o = run(a.path(), &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = a.path().join("config.txt");
    let o = run(b.path(), &["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    for name in ["sweep.csv", "sweep.svg", "config.txt"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let svg = read(a.path(), "sweep.svg");
    assert!(svg.starts_with("<!-- config_sha256=") && svg.contains("<svg") && svg.contains("<rect"));
    let csv = read(a.path(), "sweep.csv");
    assert_eq!(csv.lines().count(), 2 + 48);
}
