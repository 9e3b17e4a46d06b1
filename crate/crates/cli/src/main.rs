//! `np3`: spin coefficients, identity checks and flow theorems on the
//! built-in model manifolds or a custom metric file.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CatalogArgs, RunArgs};

#[derive(Parser, Debug)]
#[command(name = "np3", version, about = "Newman-Penrose toolkit for Riemannian 3-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List or inspect the built-in manifolds.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Triad, spin coefficients, triad Ricci components and flow class at one point.
    Analyze(RunArgs),
    /// Residuals of every structural identity over seeded sample points.
    Verify(RunArgs),
    /// Geodesic flow trace with transported and direct kinematics.
    Flow(RunArgs),
    /// 2-principal checks and the Killing biconditional over sample points.
    Principal(RunArgs),
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    /// One line per built-in manifold.
    List(CatalogArgs),
    /// Chart, fields and expected values of one manifold.
    Show {
        id: String,
        #[command(flatten)]
        args: CatalogArgs,
    },
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    CheckFailed = 1,
    Usage = 2,
    Numeric = 3,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Catalog { action } => match action {
            CatalogAction::List(args) => commands::catalog_list(&args),
            CatalogAction::Show { id, args } => commands::catalog_show(&id, &args),
        },
        Command::Analyze(args) => commands::analyze(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Flow(args) => commands::flow(&args),
        Command::Principal(args) => commands::principal(&args),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.status() as u8)
        }
    }
}
