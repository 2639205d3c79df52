use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dirac_darboux::app::{self, AppError, ModelConfig, ScatterRow};

/// Build, verify and scatter Darboux-transformed Dirac models.
///
/// DIRAC_DARBOUX_SEED_TOL overrides the seed residual tolerance (default 1e-8).
#[derive(Parser)]
#[command(name = "dirac-darboux", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write potentials.csv, bound_states.csv and model.json.
    Build {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the verification suite; exit 1 when a check fails.
    Verify {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Reflection and transmission at the given energies.
    Scatter {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        energies: Vec<f64>,
        #[arg(long, default_value = "scattering.csv")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<u8, AppError> {
    match cli.command {
        Command::Build { config, out } => {
            let built = app::build_model(&ModelConfig::load(&config)?)?;
            for w in &built.warnings {
                eprintln!("warning: {w}");
            }
            for p in app::cmd_build(&built, &out)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Verify { config, json } => {
            let built = app::build_model(&ModelConfig::load(&config)?)?;
            for w in &built.warnings {
                eprintln!("warning: {w}");
            }
            let report = app::cmd_verify(&built)?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Scatter { config, energies, out } => {
            let built = app::build_model(&ModelConfig::load(&config)?)?;
            let rows = app::cmd_scatter(&built, &energies)?;
            app::write_atomic(&out, &app::scatter_csv(&rows))?;
            println!("{}", out.display());
            if let Some(ScatterRow::Fail { energy, reason }) = rows.iter().find(|r| matches!(r, ScatterRow::Fail { .. })) {
                return Err(AppError::Numerical(format!("E = {energy}: {reason}")));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
