use clap::{Parser, Subcommand};
use pde_series_cli::{run, Command, RunConfig};
use std::path::PathBuf;

/// Series solutions of linear PDEs with coefficients singular along an
/// analytic variety, plus the verification suite for their convergence and
/// growth certificates.
#[derive(Parser)]
#[command(name = "pdeseries", version, about)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,

    /// Problem document (structured-text file).
    #[arg(long, global = true, default_value = "crates/core/fixtures/example1.problem")]
    problem: PathBuf,

    /// Truncation order in the series variable (overrides the document).
    #[arg(long = "order-A", global = true)]
    order_a: Option<usize>,

    /// Total space-degree cap (overrides the document).
    #[arg(long, global = true)]
    degree: Option<usize>,

    /// Output directory for CSV reports.
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,

    /// Seed for every randomized trial (recorded in the reports).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Override the calibrated radius bound.
    #[arg(long, global = true)]
    rho: Option<f64>,

    /// Number of nested compacts used by the growth profile.
    #[arg(long, global = true)]
    compacts: Option<usize>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Build the series solution and check the equation residual.
    Solve,
    /// Run the dominating recursion and the coefficient domination checks.
    Majorant,
    /// Verify the weighted-norm operator estimates.
    Norms,
    /// Picard solver, contraction radius search and the rho sweep.
    FixedPoint,
    /// Exponential growth profile over nested compacts.
    Profile,
    /// Cross-validate against the direct power-series solver.
    Oracle,
    /// Everything above, in order.
    All,
}

fn main() {
    let cli = Cli::parse();
    let command = match cli.command {
        CliCommand::Solve => Command::Solve,
        CliCommand::Majorant => Command::Majorant,
        CliCommand::Norms => Command::Norms,
        CliCommand::FixedPoint => Command::FixedPoint,
        CliCommand::Profile => Command::Profile,
        CliCommand::Oracle => Command::Oracle,
        CliCommand::All => Command::All,
    };
    let code = run(&RunConfig {
        command,
        problem: cli.problem,
        a_order: cli.order_a,
        degree: cli.degree,
        out: cli.out,
        seed: cli.seed,
        rho: cli.rho,
        compacts: cli.compacts,
    });
    std::process::exit(code);
}
