//! `forge` binary: scenario-driven residual verification.
//!
//! ```text
//! forge run <scenario.json> [--grid-scale F] [--fd-order 2|4]
//!                           [--tol suite=value ...] [--out-dir DIR]
//! forge horizon <scenario.json> [--out-dir DIR]
//! forge catalog
//! ```
//!
//! `FORGE_THREADS=N` caps the worker pool (default: all cores).  Exit
//! codes: 0 pass, 1 suite failure, 2 configuration/infrastructure error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use forge_cli::runner::{self, Overrides};
use forge_cli::{catalog, scenario, CliError, Outcome, ERROR_EXIT_CODE};

#[derive(Parser)]
#[command(name = "forge", version, about = "Residual verification for nonholonomic metric families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the residual suites of a scenario and write reports.
    Run {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Multiply every grid axis point count by this factor.
        #[arg(long)]
        grid_scale: Option<f64>,
        /// Override the finite-difference order (2 or 4).
        #[arg(long)]
        fd_order: Option<usize>,
        /// Override a suite tolerance, e.g. --tol reduced=1e-6 (repeatable).
        #[arg(long = "tol", value_name = "SUITE=VALUE")]
        tol: Vec<String>,
        /// Directory for report files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Sweep the deformed-horizon radius over the full angle range.
    Horizon {
        /// Scenario JSON file (must contain a `rotoid` block).
        scenario: PathBuf,
        /// Directory for table files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// List the builder catalog.
    Catalog,
}

fn init_threads() {
    if let Ok(spec) = std::env::var("FORGE_THREADS") {
        if let Ok(n) = spec.trim().parse::<usize>() {
            if n >= 1 {
                // Ignore "already built": tests may initialise the pool first.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Run { scenario: path, grid_scale, fd_order, tol, out_dir } => {
            let mut scenario = scenario::load(&path)?;
            let mut overrides = Overrides { grid_scale, fd_order, tolerances: Vec::new() };
            for spec in &tol {
                overrides.tolerances.push(Overrides::parse_tol(spec)?);
            }
            runner::apply_overrides(&mut scenario, &overrides)?;
            let products = runner::execute_run(&scenario)?;
            let paths = runner::write_run_products(&scenario, &products, &out_dir)?;
            print!("{}", products.summary);
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(products.outcome)
        }
        Command::Horizon { scenario: path, out_dir } => {
            let scenario = scenario::load(&path)?;
            let products = runner::execute_horizon(&scenario)?;
            let paths = runner::write_horizon_products(&scenario, &products, &out_dir)?;
            let lines = products.table.lines().count().saturating_sub(1);
            println!("horizon sweep: {lines} angles, {} gap rows", products.gaps);
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(Outcome::Pass)
        }
        Command::Catalog => {
            for e in catalog::ENTRIES {
                println!("{:<24} {:<9} {}", e.id, e.kind, e.summary);
                println!("{:<24} {:<9}   params: {}", "", "", e.params);
            }
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("forge: {e}");
            ExitCode::from(ERROR_EXIT_CODE)
        }
    }
}
