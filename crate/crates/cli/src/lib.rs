//! Scenario handling and file output for the `fracplast` command-line tool.
//!
//! [`scenario`] parses and validates TOML scenario files and provides the
//! built-in presets, [`meshio`] reads and writes the plain-text mesh format,
//! and [`output`] writes the CSV and VTK results. [`run_scenario`] ties them
//! to the solver in `fracplast-core`.

pub mod meshio;
pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};

use fracplast_core::solver::{run_simulation, RunError, RunRecord, SetupError, SolverError};
use fracplast_core::sweep::{flow_vector_sweep, FlowSample};
use fracplast_core::MaterialError;
use thiserror::Error;

pub use scenario::{load_scenario, Overrides, Scenario, ScenarioError, ScenarioFile};

pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid setup: {0}")]
    Setup(SetupError),
    #[error("solver failed at {0}")]
    Solver(SolverError),
    #[error("flow sweep failed: {0}")]
    Sweep(MaterialError),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
}

impl AppError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Scenario(ScenarioError::Read { .. }) => EXIT_IO,
            AppError::Scenario(_) | AppError::Setup(_) | AppError::Sweep(_) => EXIT_VALIDATION,
            AppError::Solver(_) => EXIT_SOLVER,
            AppError::Output { .. } => EXIT_IO,
        }
    }
}

impl From<RunError> for AppError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Setup(e) => AppError::Setup(e),
            RunError::Solver(e) => AppError::Solver(e),
        }
    }
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> AppError + '_ {
    move |source| AppError::Output { path: path.to_path_buf(), source }
}

#[derive(Debug)]
pub struct RunOutput {
    pub record: RunRecord,
    pub files: Vec<PathBuf>,
}

/// Runs the load history of `scenario` and writes the selected outputs into `out_dir`.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunOutput, AppError> {
    let record = run_simulation(&scenario.problem())?;
    std::fs::create_dir_all(out_dir).map_err(io_at(out_dir))?;
    let mut files = Vec::new();
    let o = &scenario.output;

    if o.timeseries {
        let path = out_dir.join("timeseries.csv");
        let peak = output::peak_load_magnitude(&scenario.loads);
        output::write_timeseries(&path, &record, peak).map_err(io_at(&path))?;
        files.push(path);
    }
    if o.newton {
        let path = out_dir.join("newton.csv");
        output::write_newton(&path, &record).map_err(io_at(&path))?;
        files.push(path);
    }
    if o.probes && !record.probes.is_empty() {
        let path = out_dir.join("probes.csv");
        output::write_probes(&path, &record, &scenario.mesh).map_err(io_at(&path))?;
        files.push(path);
    }
    for snap in &record.snapshots {
        let path = out_dir.join(output::snapshot_file_name(snap.step));
        let title = format!("{} step {} t={}", scenario.name, snap.step, snap.t);
        output::write_vtk_file(&path, &scenario.mesh, snap, &title).map_err(io_at(&path))?;
        files.push(path);
    }
    if o.sweep_samples > 0 {
        let path = out_dir.join("sweep.csv");
        let samples = sweep(scenario, o.sweep_samples)?;
        output::write_sweep(&path, &samples).map_err(io_at(&path))?;
        files.push(path);
    }
    Ok(RunOutput { record, files })
}

/// Classical and fractional flow directions around the yield surface of the scenario's material.
pub fn sweep(scenario: &Scenario, n_samples: usize) -> Result<Vec<FlowSample>, AppError> {
    flow_vector_sweep(&scenario.params, &scenario.frac, n_samples).map_err(AppError::Sweep)
}
