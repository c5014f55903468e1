use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracplast::scenario::{Overrides, ScenarioFile, DELTA_PRESETS};
use fracplast::{load_scenario, output, run_scenario, AppError, Scenario};

/// Elasto-plasticity with a fractional flow rule.
#[derive(Parser)]
#[command(name = "fracplast", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the load history of a scenario file or preset and write CSV/VTK output.
    Run {
        /// Scenario TOML file or preset name (notched2d, box3d, box2d).
        scenario: String,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Replace the geometry with a plain-text mesh file.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Number of uniform time steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Write VTK snapshots.
        #[arg(long)]
        vtk: bool,
        /// Use the implicit material update instead of the explicit one.
        #[arg(long)]
        implicit: bool,
        /// Print one line per time step.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Write classical and fractional flow directions around the yield surface.
    Sweep {
        scenario: String,
        #[command(flatten)]
        overrides: OverrideArgs,
        #[arg(long, default_value_t = 72)]
        samples: usize,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Print a preset as a scenario file.
    Preset {
        name: String,
    },
    /// Validate a scenario and print its diagnostics without running it.
    Check {
        scenario: String,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Export the mesh of a scenario in the plain-text mesh format.
    Mesh {
        scenario: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List presets and named interval matrices.
    List,
}

#[derive(Args, Default)]
struct OverrideArgs {
    /// Fractional order in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Multiply every interval entry by this factor.
    #[arg(long)]
    delta_scale: Option<f64>,
    /// Named 2D interval matrix: default, stretched, uniform, swapped.
    #[arg(long)]
    delta_preset: Option<String>,
    /// Accept interval entries above Y0/2.
    #[arg(long)]
    allow_large_delta: bool,
}

impl OverrideArgs {
    fn to_overrides(&self) -> Overrides {
        Overrides {
            alpha: self.alpha,
            delta_scale: self.delta_scale,
            delta_preset: self.delta_preset.clone(),
            allow_large_delta: self.allow_large_delta,
            ..Overrides::default()
        }
    }
}

fn load(arg: &str, o: &Overrides) -> Result<Scenario, AppError> {
    let s = load_scenario(arg, o)?;
    for note in &s.notes {
        eprintln!("{note}");
    }
    Ok(s)
}

fn execute(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Run { scenario, overrides, out, mesh, steps, vtk, implicit, verbose } => {
            let o = Overrides { mesh, steps, vtk, implicit, ..overrides.to_overrides() };
            let s = load(&scenario, &o)?;
            eprintln!(
                "{}: {} vertices, {} cells, {} steps, alpha = {}",
                s.name,
                s.mesh.n_vertices(),
                s.mesh.n_cells(),
                s.grid.n_steps(),
                s.frac.alpha
            );
            let result = run_scenario(&s, &out)?;
            if verbose {
                for st in result.record.steps.iter().skip(1) {
                    eprintln!(
                        "step {:4} t = {:8.3} iterations {:2} plastic cells {:6} residual {:.3e}",
                        st.step,
                        st.t,
                        st.iterations,
                        st.plastic_cells,
                        st.residuals.last().copied().unwrap_or(0.0)
                    );
                }
            }
            let rec = &result.record;
            let worst = rec.steps.iter().map(|s| s.iterations).max().unwrap_or(0);
            println!("completed {} steps, at most {} Newton iterations per step", rec.steps.len() - 1, worst);
            for (p, v) in rec.probes.iter().zip(rec.final_measurements()) {
                println!("final {} = {:.6e}", p.probe.name, v);
            }
            for f in &result.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep { scenario, overrides, samples, out } => {
            let s = load(&scenario, &overrides.to_overrides())?;
            let samples = fracplast::sweep(&s, samples)?;
            output::write_sweep(&out, &samples).map_err(|source| AppError::Output { path: out.clone(), source })?;
            let max_angle = samples.iter().map(|s| s.angle).fold(0.0, f64::max);
            println!("{} samples, largest angle {:.6e} rad, wrote {}", samples.len(), max_angle, out.display());
        }
        Command::Preset { name } => {
            print!("{}", ScenarioFile::preset(&name)?.to_toml_string());
        }
        Command::Check { scenario, overrides } => {
            let s = load(&scenario, &overrides.to_overrides())?;
            println!(
                "{}: valid ({}D, {} vertices, {} cells, {} steps)",
                s.name,
                s.mesh.dim(),
                s.mesh.n_vertices(),
                s.mesh.n_cells(),
                s.grid.n_steps()
            );
        }
        Command::Mesh { scenario, out } => {
            let s = load(&scenario, &Overrides::default())?;
            std::fs::write(&out, fracplast::meshio::format_mesh(&s.mesh))
                .map_err(|source| AppError::Output { path: out.clone(), source })?;
            println!("wrote {}", out.display());
        }
        Command::List => {
            println!("presets: {}", fracplast::scenario::PRESET_NAMES.join(", "));
            for (name, m) in DELTA_PRESETS {
                println!("interval matrix {name}: {m:?}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
