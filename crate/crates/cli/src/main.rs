// SPDX-License-Identifier: Apache-2.0

//! `simulate`: run scenarios, sweeps and figure recipes.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pulsed_qubit_cli::recipes;
use pulsed_qubit_cli::scenario::Scenario;
use pulsed_qubit_cli::sweep::SweepSpec;
use pulsed_qubit_cli::{export_recipes, run_recipe, run_scenario, run_sweep, CliError, CliResult, Context};

#[derive(Debug, Parser)]
#[command(name = "simulate", version, about = "Pulsed-qubit scenarios, sweeps and figure recipes")]
struct Cli {
    /// Directory that receives CSV and sidecar files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Worker threads for sweeps and recipes (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Multiplies every quadrature and ODE tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file or a shipped recipe by name.
    Run { scenario: String },
    /// Run a sweep file.
    Sweep { sweep: PathBuf },
    /// List the shipped recipes.
    Recipes {
        /// Also write each recipe job as a JSON file into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "output".into(), |s| s.to_string_lossy().into_owned())
}

fn execute(cli: Cli) -> CliResult<()> {
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let ctx = Context::new(&cli.output_dir, jobs, cli.tolerance_scale)?;
    match cli.command {
        Command::Run { scenario } => {
            let path = Path::new(&scenario);
            if !path.exists() {
                if let Some(recipe) = recipes::find(&scenario) {
                    for p in run_recipe(&ctx, &recipe)? {
                        println!("{}", p.display());
                    }
                    return Ok(());
                }
            }
            let s = Scenario::from_path(path)?;
            println!("{}", run_scenario(&ctx, &s, &stem(path), None)?.display());
        }
        Command::Sweep { sweep } => {
            let spec = SweepSpec::from_path(&sweep)?;
            let (path, points) = run_sweep(&ctx, &spec, &stem(&sweep), None)?;
            for p in points.iter().filter(|p| p.error.is_some()) {
                log::warn!("point {} ({}): {}", p.index, p.value, p.error.as_deref().unwrap_or(""));
            }
            println!("{}", path.display());
        }
        Command::Recipes { export } => {
            print!("{}", recipes::listing());
            if let Some(dir) = export {
                for p in export_recipes(&dir)? {
                    println!("{}", p.display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    e.exit_code() as u8
}
