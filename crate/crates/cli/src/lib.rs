// SPDX-License-Identifier: Apache-2.0

//! Scenario files, parameter sweeps and figure recipes for `pulsed-qubit`.
//!
//! Everything written depends only on the inputs: no timestamps, host names
//! or thread counts reach the output files.

pub mod error;
pub mod output;
pub mod recipes;
pub mod scenario;
pub mod sweep;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use error::{CliError, CliResult};
use output::{write_sidecar, write_table, write_trace_csv, TOOL, VERSION};
use recipes::{JobKind, Recipe};
use scenario::{Mode, Scenario};
use sweep::{PointResult, Reduction, SweepSpec};

/// Settings shared by every command.
pub struct Context {
    pub output_dir: PathBuf,
    pub tolerance_scale: f64,
    pub pool: rayon::ThreadPool,
}

impl Context {
    pub fn new(output_dir: impl Into<PathBuf>, jobs: usize, tolerance_scale: f64) -> CliResult<Self> {
        if jobs == 0 {
            return Err(CliError::invalid("jobs", "must be at least 1"));
        }
        if !(tolerance_scale > 0.0 && tolerance_scale.is_finite()) {
            return Err(CliError::invalid("tolerance-scale", "must be finite and positive"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::invalid("jobs", e.to_string()))?;
        Ok(Self {
            output_dir: output_dir.into(),
            tolerance_scale,
            pool,
        })
    }

    fn target(&self, output: Option<&scenario::Output>, fallback: &str) -> PathBuf {
        let rel = output.map_or_else(|| format!("{fallback}.csv"), |o| o.path.clone());
        self.output_dir.join(rel)
    }
}

#[derive(Serialize)]
struct ScenarioSidecar<'a> {
    tool: &'a str,
    version: &'a str,
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    recipe: Option<&'a str>,
    tolerance_scale: f64,
    columns: &'a [&'a str],
    amplitudes: &'a str,
    scenario: &'a Scenario,
    summary: &'a BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    tool: &'a str,
    version: &'a str,
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    recipe: Option<&'a str>,
    tolerance_scale: f64,
    columns: &'a [&'a str],
    points: usize,
    failed_points: usize,
    sweep: &'a SweepSpec,
}

fn amplitude_convention(mode: Mode) -> &'static str {
    match mode {
        Mode::Oracle => "lab frame, direct integration of the Schrodinger equation",
        Mode::Magnus => "lab frame; gz and rho_z describe the interaction-frame rotation vector (effective vector when segmented)",
        Mode::RwaSingle | Mode::RwaTwoPulse | Mode::RwaTrain | Mode::Floquet => {
            "lab frame, diag(e^{i Lambda}, e^{-i Lambda}) exp(-i G.sigma) |1> with the resonant rotation vector G and adiabatic Lambda"
        }
        Mode::TwoQubit => "lab frame, basis |11>,|12>,|21>,|22>; p2 is qubit 1, p2_second is qubit 2",
    }
}

/// Resolves, runs and writes one scenario. Nothing is written on failure.
pub fn run_scenario(ctx: &Context, scenario: &Scenario, stem: &str, recipe: Option<&str>) -> CliResult<PathBuf> {
    let resolved = scenario.resolved(ctx.tolerance_scale)?;
    let trace = resolved.execute()?;
    let path = ctx.target(resolved.output.as_ref(), stem);
    write_trace_csv(&path, &trace)?;
    write_sidecar(
        &path,
        &ScenarioSidecar {
            tool: TOOL,
            version: VERSION,
            kind: "scenario",
            recipe,
            tolerance_scale: ctx.tolerance_scale,
            columns: &trace.columns,
            amplitudes: amplitude_convention(resolved.mode),
            scenario: &resolved,
            summary: &trace.summary,
        },
    )?;
    Ok(path)
}

/// Runs every point of a sweep on the context pool. Point failures are recorded, not raised.
pub fn run_sweep(ctx: &Context, spec: &SweepSpec, stem: &str, recipe: Option<&str>) -> CliResult<(PathBuf, Vec<PointResult>)> {
    spec.validate()?;
    let path = ctx.target(spec.output.as_ref(), stem);
    let trace_stem = path.file_stem().unwrap().to_string_lossy().into_owned();
    let values = spec.values.values();
    let results: Vec<PointResult> = ctx.pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(index, &value)| {
                let trace_path = (spec.reduction == Reduction::FullTrace)
                    .then(|| path.with_file_name(format!("{trace_stem}_{index:04}.csv")));
                match spec.evaluate(value, ctx.tolerance_scale, trace_path.as_deref()) {
                    Ok(r) => PointResult {
                        index,
                        value,
                        result: Some(r),
                        error: None,
                    },
                    Err(e) => PointResult {
                        index,
                        value,
                        result: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    let columns = ["index", "value", spec.reduction.column(), "error"];
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|p| {
            vec![
                p.index.to_string(),
                output::format_real(p.value),
                p.result.clone().unwrap_or_default(),
                p.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_table(&path, &columns, &rows)?;
    let mut resolved = spec.clone();
    resolved.base = spec.base.resolved(ctx.tolerance_scale).unwrap_or_else(|_| spec.base.clone());
    write_sidecar(
        &path,
        &SweepSidecar {
            tool: TOOL,
            version: VERSION,
            kind: "sweep",
            recipe,
            tolerance_scale: ctx.tolerance_scale,
            columns: &columns,
            points: results.len(),
            failed_points: results.iter().filter(|p| p.error.is_some()).count(),
            sweep: &resolved,
        },
    )?;
    Ok((path, results))
}

/// Runs every job of a recipe; jobs run concurrently, files are written per job.
pub fn run_recipe(ctx: &Context, recipe: &Recipe) -> CliResult<Vec<PathBuf>> {
    let outcomes: Vec<CliResult<PathBuf>> = ctx.pool.install(|| {
        recipe
            .jobs
            .par_iter()
            .map(|job| match &job.kind {
                JobKind::Scenario(s) => run_scenario(ctx, s, &job.stem, Some(recipe.name)),
                JobKind::Sweep(sw) => run_sweep(ctx, sw, &job.stem, Some(recipe.name)).map(|(p, _)| p),
            })
            .collect()
    });
    outcomes.into_iter().collect()
}

/// Writes each recipe job as a standalone scenario or sweep file.
pub fn export_recipes(dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for r in recipes::all() {
        for j in &r.jobs {
            let text = match &j.kind {
                JobKind::Scenario(s) => serde_json::to_string_pretty(s),
                JobKind::Sweep(sw) => serde_json::to_string_pretty(sw),
            }
            .expect("recipes serialize");
            let path = dir.join(format!("{}.json", j.stem));
            std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
