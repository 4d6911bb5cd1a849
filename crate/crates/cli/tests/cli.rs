//! End-to-end command tests: exit codes, report format contracts, and
//! bit-identical reruns for a fixed seed.

use pde_series_cli::{run_command, Command};
use std::path::{Path, PathBuf};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/example1.problem")
}

fn temp_out(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pdeseries-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn solve_passes_on_fixture() {
    let out = temp_out("solve");
    let code = run_command(Command::Solve, &fixture(), &out, 42);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("solve_residual.csv")).unwrap();
    assert!(csv.contains("# problem_hash="));
    assert!(csv.contains("# seed=42"));
    assert!(csv.lines().any(|l| l == "t,z,w,residual,abs_y"));
}

#[test]
fn majorant_and_oracle_pass() {
    let out = temp_out("mo");
    assert_eq!(run_command(Command::Majorant, &fixture(), &out, 7), 0);
    assert_eq!(run_command(Command::Oracle, &fixture(), &out, 7), 0);
    let dom = std::fs::read_to_string(out.join("majorant_domination.csv")).unwrap();
    assert!(dom.lines().any(|l| l == "alpha,index,lhs,rhs,ratio"));
    let cmp = std::fs::read_to_string(out.join("oracle_compare.csv")).unwrap();
    assert!(cmp.lines().any(|l| l == "order,max_rel_dev,max_strict_dev"));
}

#[test]
fn profile_emits_contracted_header() {
    let out = temp_out("profile");
    let code = run_command(Command::Profile, &fixture(), &out, 42);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("growth_profile.csv")).unwrap();
    assert!(
        csv.lines().any(|l| l == "rho,sup_abs_Y,bound,pass"),
        "header contract violated:\n{csv}"
    );
    // one row per bundled compact, rho strictly increasing
    let rhos: Vec<f64> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("rho"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rhos.len(), 5);
    assert!(rhos.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn reports_are_bit_identical_for_fixed_seed() {
    let out_a = temp_out("det-a");
    let out_b = temp_out("det-b");
    assert_eq!(run_command(Command::FixedPoint, &fixture(), &out_a, 11), 0);
    assert_eq!(run_command(Command::FixedPoint, &fixture(), &out_b, 11), 0);
    let a = std::fs::read(out_a.join("fixed_point.csv")).unwrap();
    let b = std::fs::read(out_b.join("fixed_point.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exponential_family_file_passes_solve_and_oracle() {
    let problem = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/example2.problem");
    let out = temp_out("exp");
    assert_eq!(run_command(Command::Solve, &problem, &out, 42), 0);
    assert_eq!(run_command(Command::Oracle, &problem, &out, 42), 0);
}

#[test]
fn zero_problem_solves_cleanly() {
    // no equation coefficients: the solution is the data polynomial and
    // every residual vanishes
    // drop every [[pde.b]] block and declare an empty coefficient list
    let source = std::fs::read_to_string(fixture()).unwrap();
    let b_blocks = source.find("[[pde.b]]").unwrap();
    let after_blocks = source.find("[x]").unwrap();
    let zeroed = format!(
        "{}b = []\n\n{}",
        &source[..b_blocks],
        &source[after_blocks..]
    );
    let path = std::env::temp_dir().join(format!("pdeseries-zero-{}.problem", std::process::id()));
    std::fs::write(&path, &zeroed).unwrap();
    let out = temp_out("zero");
    assert_eq!(run_command(Command::Solve, &path, &out, 42), 0);
    let csv = std::fs::read_to_string(out.join("solve_residual.csv")).unwrap();
    for line in csv.lines().filter(|l| !l.starts_with('#') && !l.starts_with('t')) {
        let residual: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(residual < 1e-14, "nonzero residual {residual}");
    }
}

#[test]
fn all_command_passes_end_to_end() {
    let out = temp_out("all");
    assert_eq!(run_command(Command::All, &fixture(), &out, 42), 0);
    for name in [
        "solve_residual",
        "majorant_domination",
        "varphi_inequality",
        "norm_properties",
        "fixed_point",
        "growth_profile",
        "oracle_compare",
    ] {
        assert!(out.join(format!("{name}.csv")).exists(), "missing {name}");
    }
}

#[test]
fn inadmissible_order_is_a_config_error() {
    let source = std::fs::read_to_string(fixture()).unwrap();
    let broken = source.replace("s_order = 10", "s_order = 9");
    let path = std::env::temp_dir().join(format!("pdeseries-bad-{}.problem", std::process::id()));
    std::fs::write(&path, broken).unwrap();
    let code = run_command(Command::Solve, &path, &temp_out("bad"), 42);
    assert_eq!(code, 2);
}

#[test]
fn runtime_failure_exits_one() {
    // a degree budget too small for the requested order is a runtime
    // failure of the oracle command, not a configuration error
    let source = std::fs::read_to_string(fixture()).unwrap();
    let starved = source.replace("d_tz = 26", "d_tz = 1");
    let path = std::env::temp_dir().join(format!("pdeseries-starved-{}.problem", std::process::id()));
    std::fs::write(&path, starved).unwrap();
    let code = run_command(Command::Oracle, &path, &temp_out("starved"), 42);
    assert_eq!(code, 1);
}

#[test]
fn order_and_degree_overrides_apply() {
    let out = temp_out("override");
    let code = pde_series_cli::run(&pde_series_cli::RunConfig {
        command: Command::Solve,
        problem: fixture(),
        a_order: Some(8),
        degree: Some(10),
        out: out.clone(),
        seed: 42,
        rho: None,
        compacts: None,
    });
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("solve_residual.csv")).unwrap();
    assert!(csv.contains("# a_order=8"));
    assert!(csv.contains("# degree_cap=10"));
}

#[test]
fn binary_runs_norms_command() {
    let out = temp_out("bin");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_pdeseries"))
        .args([
            "norms",
            "--problem",
            fixture().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "5",
        ])
        .status()
        .expect("binary runs");
    assert!(status.success());
    assert!(out.join("norm_properties.csv").exists());
}
