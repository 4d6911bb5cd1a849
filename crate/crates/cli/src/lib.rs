//! Command dispatch for the solver and its verification reports.
//!
//! Every command loads the problem document, runs one slice of the pipeline,
//! writes its CSV report(s) under the output directory, and prints one
//! pass/fail line per check. Exit status: 0 all checks pass, 1 an assertion
//! failed (reports are still written), 2 configuration error.

use pde_series::assembly::{growth_profile, residual_pde};
use pde_series::config::{load_problem_with, LoadedProblem};
use pde_series::error::Error;
use pde_series::fixed_point::{contraction_factor, picard_solve, search_w_bar, OperatorBundle};
use pde_series::majorant::{
    check_domination, check_varphi_recursion, compute_psi, IndexCaps, SampleCfg, SupSequence,
};
use pde_series::norms::{
    check_factorial_inequality, check_product_bound, check_series_product_bound,
    check_shift_bounds, g_norm, kappa_lower_bound, NormConfig,
};
use pde_series::oracle::{compare, direct_solve, farthest_base};
use pde_series::recursion::{compute_phi, PhiFamily};
use pde_series::report::{fmt_c64, fmt_f64, Report};
use pde_series::xflow::{calibrate, CompactRegion};
use pde_series::Complex64;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Majorant,
    Norms,
    FixedPoint,
    Profile,
    Oracle,
    All,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub problem: PathBuf,
    pub a_order: Option<usize>,
    pub degree: Option<usize>,
    pub out: PathBuf,
    pub seed: u64,
    pub rho: Option<f64>,
    pub compacts: Option<usize>,
}

/// Tolerances pinned by the verification contract.
mod tol {
    /// Residual of the equation relative to `max(1, sup |Y|)`.
    pub const RESIDUAL_REL: f64 = 1e-6;
    /// Domination slack on coefficient ratios.
    pub const DOMINATION_SLACK: f64 = 1e-9;
    /// Sampling slack for the derivative-sup inequality.
    pub const VARPHI_SLACK: f64 = 1.1;
    /// Agreement between the fixed-point solution and the level recursion.
    pub const PICARD_REL: f64 = 1e-12;
    /// Contraction factor certified by the radius search.
    pub const CONTRACTION: f64 = 0.5;
    /// Oracle agreement on `w`-coefficients.
    pub const ORACLE_REL: f64 = 1e-6;
}

/// Damping weight for the `rho`-independence sweep: strong enough that the
/// exponential level shift beats the polynomial radius growth over the swept
/// range (the peak of `(rho+delta)^m1 e^{-m2 rho}` must sit left of the
/// smallest swept value).
const SWEEP_SIGMA: f64 = 20.0;
const SWEEP_RHOS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

struct Ctx {
    loaded: LoadedProblem,
    a_order: usize,
    region: CompactRegion,
    seed: u64,
    out: PathBuf,
    compacts_override: Option<usize>,
}

impl Ctx {
    fn new(cfg: &RunConfig) -> Result<Self, Error> {
        let loaded = load_problem_with(&cfg.problem, cfg.degree)?;
        let a_order = cfg.a_order.unwrap_or(loaded.orders.a_order);
        let problem = &loaded.problem;
        // auto rho unless overridden: twice the measured sup with headroom
        let rho = match cfg.rho {
            Some(r) => r,
            None => {
                let sup_x = loaded
                    .base_grid
                    .iter()
                    .map(|&(t, z)| problem.x.eval_x(t, z).map(|v| v.norm()))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                (2.1 * sup_x).max(1.5)
            }
        };
        let region = calibrate(&problem.x, &loaded.base_grid, problem.radius, rho, a_order + 1)?;
        Ok(Ctx {
            loaded,
            a_order,
            region,
            seed: cfg.seed,
            out: cfg.out.clone(),
            compacts_override: cfg.compacts,
        })
    }

    fn norm_cfg(&self) -> NormConfig {
        self.loaded.norm.with_rho(self.region.rho)
    }

    fn base_report(&self, name: &str, header: &[&str]) -> Report {
        let mut r = Report::new(name, header);
        r.meta("problem_hash", format!("{:016x}", self.loaded.source_hash));
        r.meta("a_order", self.a_order);
        r.meta("degree_cap", self.loaded.orders.degree_cap);
        r.meta("seed", self.seed);
        r.meta("rho", fmt_f64(self.region.rho));
        r.meta("nu", fmt_f64(self.region.nu));
        r
    }

    fn phi(&self) -> Result<PhiFamily, Error> {
        compute_phi(&self.loaded.problem, self.region.nu, self.a_order)
    }

    fn sup(&self) -> Result<SupSequence, Error> {
        SupSequence::from_problem(
            &self.loaded.problem,
            self.loaded.problem.radius,
            self.region.rho,
            self.region.nu,
            self.a_order,
        )
    }

    fn bundle(&self, sup: &SupSequence) -> Result<OperatorBundle, Error> {
        OperatorBundle::from_sup(
            sup,
            self.loaded.problem.s_order,
            &self.loaded.problem.ks,
            self.a_order,
            self.loaded.orders.degree_cap,
        )
    }

    fn compacts_limit(&self) -> usize {
        self.compacts_override
            .unwrap_or(self.loaded.profile_grids.len())
            .max(1)
    }
}

fn check_line(name: &str, pass: bool, detail: &str) -> bool {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn cmd_solve(ctx: &Ctx) -> Result<bool, Error> {
    let phi = ctx.phi()?;
    let w_radius = ctx.loaded.norm.w_bar / 4.0;
    let mut points = Vec::new();
    for &(t, z) in &ctx.loaded.base_grid {
        for q in 0..5 {
            let w = Complex64::from_polar(
                w_radius * (0.2 + 0.8 * (q as f64 + 1.0) / 5.0),
                q as f64 * 1.256637,
            );
            points.push((t, z, w));
        }
    }
    let report = residual_pde(&ctx.loaded.problem, &phi, &points)?;
    let mut csv = ctx.base_report("solve_residual", &["t", "z", "w", "residual", "abs_y"]);
    for row in &report.rows {
        csv.row(vec![
            fmt_c64(row.t),
            fmt_c64(row.z),
            fmt_c64(row.w),
            fmt_f64(row.residual),
            fmt_f64(row.y_abs),
        ]);
    }
    csv.write(&ctx.out)?;
    let threshold = tol::RESIDUAL_REL * report.sup_y.max(1.0);
    Ok(check_line(
        "solve",
        report.max_residual < threshold,
        &format!(
            "max residual {:.3e} against threshold {:.3e} over {} samples",
            report.max_residual,
            threshold,
            report.rows.len()
        ),
    ))
}

fn cmd_majorant(ctx: &Ctx) -> Result<bool, Error> {
    let phi = ctx.phi()?;
    let sup = ctx.sup()?;
    let problem = &ctx.loaded.problem;
    let psi = compute_psi(problem.s_order, &problem.ks, &sup, ctx.a_order, IndexCaps::default())?;
    let dom = check_domination(&phi, &psi, tol::DOMINATION_SLACK);
    let mut csv = ctx.base_report("majorant_domination", &["alpha", "index", "lhs", "rhs", "ratio"]);
    for row in &dom.rows {
        csv.row(vec![
            row.alpha.to_string(),
            row.index.to_string(),
            fmt_f64(row.lhs),
            fmt_f64(row.rhs),
            fmt_f64(row.ratio),
        ]);
    }
    csv.write(&ctx.out)?;
    let pass_dom = check_line(
        "majorant domination",
        dom.pass,
        &format!("max ratio {:.12} over {} indices", dom.max_ratio, dom.rows.len()),
    );
    let sample = SampleCfg {
        per_dim: 24,
        cap_total: 1 << 14,
        seed: ctx.seed,
    };
    let ineq = check_varphi_recursion(
        &phi,
        &sup,
        problem.s_order,
        &problem.ks,
        ctx.a_order,
        &IndexCaps::default(),
        &sample,
        tol::VARPHI_SLACK,
    )?;
    let mut csv = ctx.base_report("varphi_inequality", &["alpha", "index", "lhs", "rhs"]);
    for row in &ineq.rows {
        csv.row(vec![
            row.alpha.to_string(),
            row.index.to_string(),
            fmt_f64(row.lhs),
            fmt_f64(row.rhs),
        ]);
    }
    csv.write(&ctx.out)?;
    let pass_ineq = check_line(
        "derivative-sup inequality",
        ineq.pass,
        &format!(
            "{} failures of {} rows at slack {}",
            ineq.failures,
            ineq.rows.len(),
            ineq.slack
        ),
    );
    Ok(pass_dom && pass_ineq)
}

fn cmd_norms(ctx: &Ctx) -> Result<bool, Error> {
    let cfg = ctx.norm_cfg();
    cfg.validate()?;
    let mut outcomes = vec![check_product_bound(&cfg, 200, ctx.seed)];
    outcomes.extend(check_shift_bounds(&cfg, 200, ctx.seed.wrapping_add(1)));
    outcomes.push(check_series_product_bound(&cfg, 200, ctx.seed.wrapping_add(2)));
    outcomes.push(check_factorial_inequality(5));
    outcomes.push(pde_series::norms::check_zeta_cap(cfg.b, 400));
    let kappa = kappa_lower_bound(&cfg, 200)?;
    let mut csv = ctx.base_report("norm_properties", &["property", "cases", "worst", "pass"]);
    let mut all_pass = true;
    for o in &outcomes {
        csv.row(vec![
            o.name.clone(),
            o.cases.to_string(),
            fmt_f64(o.worst),
            o.pass.to_string(),
        ]);
        all_pass &= check_line(
            &format!("norms {}", o.name),
            o.pass,
            &format!("worst ratio {:.15} over {} cases", o.worst, o.cases),
        );
    }
    csv.row(vec![
        "kappa-positive".into(),
        "201".into(),
        fmt_f64(kappa.min_over_range),
        (kappa.min_over_range > 0.0).to_string(),
    ]);
    all_pass &= check_line(
        "norms kappa-positive",
        kappa.min_over_range > 0.0,
        &format!(
            "min partial product {:.6}, limit estimate {:.6}",
            kappa.min_over_range, kappa.limit_estimate
        ),
    );
    csv.write(&ctx.out)?;
    Ok(all_pass)
}

fn cmd_fixed_point(ctx: &Ctx) -> Result<bool, Error> {
    let problem = &ctx.loaded.problem;
    let sup = ctx.sup()?;
    let bundle = ctx.bundle(&sup)?;
    let caps = IndexCaps::default();
    let mut csv = ctx.base_report("fixed_point", &["quantity", "value", "pass"]);
    let mut all_pass = true;

    // fixed point vs the level recursion, coefficient by coefficient
    let psi = compute_psi(problem.s_order, &problem.ks, &sup, ctx.a_order, caps)?;
    let (solution, iterations) = picard_solve(&bundle, &bundle.forcing)?;
    let mut max_dev = 0.0f64;
    for alpha in 0..=ctx.a_order {
        let divided = solution.level(alpha).divided_coeffs();
        for (idx, v) in &divided {
            let want = psi.scaled_entry(alpha, idx);
            max_dev = max_dev.max((v.re - want).abs() / want.abs().max(1e-300));
        }
        for (idx, want) in psi.level_table(alpha) {
            let got = divided.get(idx).map(|c| c.re).unwrap_or(0.0);
            max_dev = max_dev.max((got - want).abs() / want.abs().max(1e-300));
        }
    }
    let pass_eq = max_dev <= tol::PICARD_REL;
    csv.row(vec![
        "picard_vs_recursion_dev".into(),
        fmt_f64(max_dev),
        pass_eq.to_string(),
    ]);
    csv.row(vec![
        "picard_iterations".into(),
        iterations.to_string(),
        "true".into(),
    ]);
    all_pass &= check_line(
        "fixed-point equivalence",
        pass_eq,
        &format!("max coefficient deviation {max_dev:.3e} after {iterations} iterations"),
    );

    // contraction radius search at the calibrated rho
    let cfg = ctx.norm_cfg();
    let search = search_w_bar(&bundle, &cfg, &caps, 50, ctx.seed, 0.45)?;
    let mut cfg_found = cfg;
    cfg_found.w_bar = search.w_bar;
    let factor = contraction_factor(&bundle, &cfg_found, &caps, 50, ctx.seed)?;
    let pass_contraction = factor <= tol::CONTRACTION;
    csv.row(vec!["w_bar".into(), fmt_f64(search.w_bar), "true".into()]);
    csv.row(vec![
        "contraction_factor".into(),
        fmt_f64(factor),
        pass_contraction.to_string(),
    ]);
    all_pass &= check_line(
        "contraction",
        pass_contraction,
        &format!("factor {factor:.6} at w_bar {:.6} over 50 trials", search.w_bar),
    );

    // solution norm bound
    let sol_norm = g_norm(&solution, &cfg_found);
    let forcing_norm = g_norm(&bundle.forcing, &cfg_found);
    let pass_bound = sol_norm <= 2.0 * forcing_norm * (1.0 + 1e-12);
    csv.row(vec![
        "solution_norm".into(),
        fmt_f64(sol_norm),
        pass_bound.to_string(),
    ]);
    csv.row(vec!["forcing_norm".into(), fmt_f64(forcing_norm), "true".into()]);
    all_pass &= check_line(
        "solution bound",
        pass_bound,
        &format!(
            "||solution|| {sol_norm:.6e} <= 2 ||forcing|| {:.6e}",
            2.0 * forcing_norm
        ),
    );

    // rho-independence sweep at the heavy damping weight
    let mut sweep_factors = Vec::new();
    for rho in SWEEP_RHOS {
        let sweep_sup =
            SupSequence::from_problem(problem, problem.radius, rho, ctx.region.nu, ctx.a_order)?;
        let sweep_bundle = ctx.bundle(&sweep_sup)?;
        let mut sweep_cfg = ctx.loaded.norm.with_rho(rho);
        sweep_cfg.sigma = SWEEP_SIGMA;
        sweep_cfg.w_bar = search.w_bar;
        let f = contraction_factor(&sweep_bundle, &sweep_cfg, &caps, 20, ctx.seed)?;
        csv.row(vec![format!("sweep_factor_rho_{rho}"), fmt_f64(f), "true".into()]);
        sweep_factors.push(f);
    }
    let pass_sweep = sweep_factors
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    csv.row(vec![
        "sweep_non_increasing".into(),
        format!("{sweep_factors:?}").replace(',', ";"),
        pass_sweep.to_string(),
    ]);
    all_pass &= check_line(
        "rho-independence sweep",
        pass_sweep,
        &format!("factors across rho {SWEEP_RHOS:?}: {sweep_factors:?}"),
    );
    csv.write(&ctx.out)?;
    Ok(all_pass)
}

fn cmd_profile(ctx: &Ctx) -> Result<bool, Error> {
    let problem = &ctx.loaded.problem;
    let count = ctx.compacts_limit();
    let grids: Vec<_> = ctx
        .loaded
        .profile_grids
        .iter()
        .take(count)
        .cloned()
        .collect();
    if grids.len() < 2 {
        return Err(Error::Config(
            "the growth profile needs at least two compacts (see the [[profile]] sections)".into(),
        ));
    }
    // certify a contraction radius first
    let sup = ctx.sup()?;
    let bundle = ctx.bundle(&sup)?;
    let cfg = ctx.norm_cfg();
    let search = search_w_bar(&bundle, &cfg, &IndexCaps::default(), 20, ctx.seed, 0.45)?;
    let profile = growth_profile(problem, &grids, &cfg, search.w_bar, ctx.a_order, 8)?;
    let mut csv = ctx.base_report("growth_profile", &["rho", "sup_abs_Y", "bound", "pass"]);
    csv.meta("c11", fmt_f64(profile.c11));
    csv.meta("c12", fmt_f64(profile.c12));
    csv.meta("w_bar", fmt_f64(profile.w_bar));
    csv.meta("slope", fmt_f64(profile.slope));
    csv.meta("sigma_zeta", fmt_f64(profile.sigma_zeta));
    for row in &profile.rows {
        csv.row(vec![
            fmt_f64(row.rho),
            fmt_f64(row.sup_y),
            fmt_f64(row.bound),
            row.pass.to_string(),
        ]);
    }
    csv.write(&ctx.out)?;
    for (label, reason) in &profile.skipped {
        println!("SKIP profile {label}: {reason}");
    }
    Ok(check_line(
        "growth profile",
        profile.pass,
        &format!(
            "{} rows, slope {:.4} (cap {:.4}), c12 {:.3e}",
            profile.rows.len(),
            profile.slope,
            1.1 * profile.sigma_zeta,
            profile.c12
        ),
    ))
}

fn cmd_oracle(ctx: &Ctx) -> Result<bool, Error> {
    let problem = &ctx.loaded.problem;
    let phi = ctx.phi()?;
    let (bt, bz) = farthest_base(problem, &ctx.loaded.base_grid)?;
    let direct = direct_solve(problem, bt, bz, ctx.a_order, ctx.loaded.orders.d_tz)?;
    let offsets: Vec<(Complex64, Complex64)> = (0..10)
        .map(|i| {
            let angle = i as f64 * 0.628318;
            (
                Complex64::from_polar(0.02 * (1.0 + (i % 3) as f64) / 3.0, angle),
                Complex64::from_polar(0.02 * (1.0 + ((i + 1) % 3) as f64) / 3.0, -angle * 1.3),
            )
        })
        .collect();
    let report = compare(&direct, problem, &phi, &offsets, ctx.a_order)?;
    let mut csv = ctx.base_report("oracle_compare", &["order", "max_rel_dev", "max_strict_dev"]);
    csv.meta("base_t", fmt_c64(bt));
    csv.meta("base_z", fmt_c64(bz));
    csv.meta("min_valid_degree", direct.min_valid);
    for row in &report.rows {
        csv.row(vec![
            row.order.to_string(),
            fmt_f64(row.max_rel_dev),
            fmt_f64(row.max_strict_dev),
        ]);
    }
    csv.write(&ctx.out)?;
    Ok(check_line(
        "oracle equivalence",
        report.max_rel_dev < tol::ORACLE_REL && report.max_strict_dev < tol::ORACLE_REL,
        &format!(
            "deviation {:.3e} (strict {:.3e}) through order {} at 10 points",
            report.max_rel_dev, report.max_strict_dev, ctx.a_order
        ),
    ))
}

pub fn run(cfg: &RunConfig) -> i32 {
    let ctx = match Ctx::new(cfg) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return 2;
        }
    };
    let commands: Vec<Command> = match cfg.command {
        Command::All => vec![
            Command::Solve,
            Command::Majorant,
            Command::Norms,
            Command::FixedPoint,
            Command::Profile,
            Command::Oracle,
        ],
        single => vec![single],
    };
    let mut all_pass = true;
    for command in commands {
        let outcome = match command {
            Command::Solve => cmd_solve(&ctx),
            Command::Majorant => cmd_majorant(&ctx),
            Command::Norms => cmd_norms(&ctx),
            Command::FixedPoint => cmd_fixed_point(&ctx),
            Command::Profile => cmd_profile(&ctx),
            Command::Oracle => cmd_oracle(&ctx),
            Command::All => unreachable!(),
        };
        match outcome {
            Ok(pass) => all_pass &= pass,
            Err(e @ (Error::Config(_) | Error::Schema { .. } | Error::Constraint(_))) => {
                eprintln!("configuration error: {e}");
                return 2;
            }
            Err(e) => {
                eprintln!("FAIL {command:?}: {e}");
                all_pass = false;
            }
        }
    }
    if all_pass {
        0
    } else {
        1
    }
}

/// Convenience for tests: run one command against a problem file.
pub fn run_command(command: Command, problem: &Path, out: &Path, seed: u64) -> i32 {
    run(&RunConfig {
        command,
        problem: problem.to_path_buf(),
        a_order: None,
        degree: None,
        out: out.to_path_buf(),
        seed,
        rho: None,
        compacts: None,
    })
}
