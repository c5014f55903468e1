//! Scenario files: TOML schema, built-in presets, overrides and validation.
//!
//! A scenario file has the sections `[geometry]`, `[boundary]`, `[material]`,
//! `[frac]`, `[load]`, `[time]`, `[solver]`, `[[probes]]` and `[output]`.
//! `README.md` documents every key. Parsing reports the dotted path of the
//! offending key; validation reports the field it rejects.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fracplast_core::fem::{Loads, Scheme};
use fracplast_core::mesh::{box2d, box3d, notched_bar, Mesh};
use fracplast_core::solver::{LinearSolverKind, LoadRamp, NewtonConfig, Probe, Problem, TimeGrid};
use fracplast_core::{FracConfig, MaterialParams, PerturbationMode, SymTensor};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::meshio::{read_mesh_file, MeshIoError};

pub const PRESET_NAMES: [&str; 3] = ["notched2d", "box3d", "box2d"];

/// The four interval matrices compared in the 2D Δ sweep.
pub const DELTA_PRESETS: [(&str, [[f64; 2]; 2]); 4] = [
    ("default", [[100.0, 100.0], [100.0, 200.0]]),
    ("stretched", [[1.0, 100.0], [100.0, 1000.0]]),
    ("uniform", [[5000.0, 5000.0], [5000.0, 5000.0]]),
    ("swapped", [[200.0, 100.0], [100.0, 100.0]]),
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown preset '{0}' (available: notched2d, box3d, box2d)")]
    UnknownPreset(String),
    #[error("unknown interval preset '{0}' (available: default, stretched, uniform, swapped)")]
    UnknownDeltaPreset(String),
    #[error(transparent)]
    MeshFile(#[from] MeshIoError),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_name")]
    pub name: String,
    pub geometry: Geometry,
    pub boundary: Boundary,
    pub material: MaterialSection,
    pub frac: FracSection,
    pub load: LoadSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub probes: Vec<ProbeSection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_name() -> String {
    "scenario".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Geometry {
    /// Notched bar `[0, 10] x [0, 2]`; `nx` a multiple of 10, `ny` even.
    NotchedBar { nx: usize, ny: usize },
    Box2d { extent: [f64; 2], cells: [usize; 2] },
    Box3d { extent: [f64; 3], cells: [usize; 3] },
    /// Plain-text mesh; relative paths resolve against the scenario file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Boundary {
    /// Labels whose vertices are clamped (zero displacement).
    pub clamped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub mu: f64,
    pub kappa: f64,
    pub y0: f64,
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    #[default]
    SingleEntry,
    SymmetricPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracSection {
    pub alpha: f64,
    /// Full symmetric `d x d` interval matrix.
    pub delta: Vec<Vec<f64>>,
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
    #[serde(default)]
    pub perturbation: Perturbation,
    /// Accept entries above `Y0 / 2`.
    #[serde(default)]
    pub allow_large_delta: bool,
}

fn default_nodes() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractionSection {
    pub label: String,
    /// Traction at the peak of the ramp.
    pub peak: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSection {
    /// Body force at the peak of the ramp; zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<Vec<f64>>,
    #[serde(default)]
    pub traction: Vec<TractionSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// End of the load cycle; the load peaks at `t_end / 2`.
    #[serde(default = "default_t_end")]
    pub t_end: f64,
}

fn default_steps() -> usize {
    200
}

fn default_t_end() -> f64 {
    200.0
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { steps: default_steps(), t_end: default_t_end() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearName {
    #[default]
    Direct,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: SchemeName,
    /// Local residual tolerance of the implicit scheme, relative to `Y0`.
    pub implicit_tol: f64,
    pub linear: LinearName,
    pub gmres_restart: usize,
    pub gmres_tol: f64,
    pub gmres_max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tol: 1e-8,
            max_iter: 30,
            scheme: SchemeName::Explicit,
            implicit_tol: 1e-10,
            linear: LinearName::Direct,
            gmres_restart: 50,
            gmres_tol: 1e-12,
            gmres_max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub name: String,
    pub point: Vec<f64>,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub timeseries: bool,
    pub newton: bool,
    pub probes: bool,
    pub vtk: bool,
    /// Steps written as VTK snapshots; empty means every `vtk_every`-th step and the last one.
    pub vtk_steps: Vec<usize>,
    pub vtk_every: usize,
    /// Number of polar samples written to `sweep.csv`; 0 disables the sweep.
    pub sweep_samples: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            timeseries: true,
            newton: true,
            probes: true,
            vtk: false,
            vtk_steps: Vec::new(),
            vtk_every: 10,
            sweep_samples: 0,
        }
    }
}

/// Command-line adjustments applied on top of a scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub delta_scale: Option<f64>,
    pub delta_preset: Option<String>,
    pub mesh: Option<PathBuf>,
    pub steps: Option<usize>,
    pub vtk: bool,
    pub allow_large_delta: bool,
    pub implicit: bool,
}

impl ScenarioFile {
    /// Parses TOML text. Errors carry the dotted path of the offending key.
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let message = e.inner().message().to_string();
            let message = match e.inner().span() {
                Some(span) => format!("{message} (line {})", line_of(text, span.start)),
                None => message,
            };
            ScenarioError::Schema { field, message }
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    /// Built-in scenario by name.
    pub fn preset(name: &str) -> Result<Self, ScenarioError> {
        match name {
            "notched2d" => Ok(notched2d()),
            "box3d" => Ok(box3d_preset()),
            "box2d" => Ok(box2d_preset()),
            _ => Err(ScenarioError::UnknownPreset(name.to_string())),
        }
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ScenarioError> {
        if let Some(a) = o.alpha {
            self.frac.alpha = a;
        }
        if let Some(name) = &o.delta_preset {
            let (_, m) = DELTA_PRESETS
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| ScenarioError::UnknownDeltaPreset(name.clone()))?;
            self.frac.delta = m.iter().map(|r| r.to_vec()).collect();
        }
        if let Some(s) = o.delta_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid("--delta-scale", format!("scale {s} must be positive")));
            }
            for row in &mut self.frac.delta {
                for x in row {
                    *x *= s;
                }
            }
        }
        if let Some(path) = &o.mesh {
            self.geometry = Geometry::File { path: path.clone() };
        }
        if let Some(n) = o.steps {
            self.time.steps = n;
        }
        if o.vtk {
            self.output.vtk = true;
        }
        if o.allow_large_delta {
            self.frac.allow_large_delta = true;
        }
        if o.implicit {
            self.solver.scheme = SchemeName::Implicit;
        }
        Ok(())
    }

    /// Builds the mesh and checks every section. Relative mesh paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Scenario, ScenarioError> {
        let mut notes = Vec::new();
        let mesh = self.build_mesh(base_dir)?;
        let dim = mesh.dim();

        let m = &self.material;
        let params = MaterialParams::new(m.mu, m.kappa, m.y0, m.k1, m.k2).map_err(|e| invalid("material", e))?;
        let diag = params.diagnostics(dim);
        if !diag.tangent_definite {
            notes.push(Diagnostic::warning(format!(
                "hardening ratio max(2 mu, d kappa) / (k1 + k2) = {:.4} is not below 0.618; \
                 plastic tangents may lose definiteness and Newton may fail",
                diag.hardening_ratio
            )));
        }
        if diag.bulk_boundary_case(&params) {
            notes.push(Diagnostic::info(format!(
                "kappa = 2 mu / d = {} is the boundary case of the S C definiteness condition",
                params.kappa
            )));
        } else if !diag.sc_definite() {
            notes.push(Diagnostic::warning(format!(
                "kappa = {} is below 2 mu / d = {}; S C is not guaranteed positive definite",
                params.kappa,
                2.0 * params.mu / dim as f64
            )));
        }

        let delta = self.delta_tensor(dim, &params, &mut notes)?;
        let mut frac = FracConfig::new(self.frac.alpha, delta, self.frac.n_nodes).map_err(|e| invalid("frac", e.to_string()))?;
        frac = frac.with_mode(match self.frac.perturbation {
            Perturbation::SingleEntry => PerturbationMode::SingleEntry,
            Perturbation::SymmetricPair => PerturbationMode::SymmetricPair,
        });

        for (k, label) in self.boundary.clamped.iter().enumerate() {
            check_label(&mesh, label, &format!("boundary.clamped[{k}]"))?;
        }
        if self.boundary.clamped.is_empty() {
            notes.push(Diagnostic::warning("no clamped boundary: the stiffness matrix is singular".to_string()));
        }
        let body = match &self.load.body {
            Some(b) => vector(b, dim, "load.body")?,
            None => [0.0; 3],
        };
        let mut tractions = Vec::with_capacity(self.load.traction.len());
        for (k, t) in self.load.traction.iter().enumerate() {
            check_label(&mesh, &t.label, &format!("load.traction[{k}].label"))?;
            tractions.push((t.label.clone(), vector(&t.peak, dim, &format!("load.traction[{k}].peak"))?));
        }

        let grid = TimeGrid::uniform(self.time.steps, self.time.t_end).map_err(|e| invalid("time", e.to_string()))?;
        let ramp = LoadRamp { t_end: self.time.t_end };

        let s = &self.solver;
        if !(s.tol.is_finite() && s.tol > 0.0) {
            return Err(invalid("solver.tol", "must be positive"));
        }
        if s.max_iter == 0 {
            return Err(invalid("solver.max_iter", "must be at least 1"));
        }
        let scheme = match s.scheme {
            SchemeName::Explicit => Scheme::Explicit,
            SchemeName::Implicit => {
                if !(s.implicit_tol.is_finite() && s.implicit_tol > 0.0) {
                    return Err(invalid("solver.implicit_tol", "must be positive"));
                }
                Scheme::Implicit { tol: s.implicit_tol }
            }
        };
        let linear_solver = match s.linear {
            LinearName::Direct => LinearSolverKind::Direct,
            LinearName::Iterative => LinearSolverKind::Iterative {
                restart: s.gmres_restart.max(1),
                rel_tol: s.gmres_tol,
                max_iter: s.gmres_max_iter.max(1),
            },
        };
        let newton = NewtonConfig { tol_residual: s.tol, max_iter: s.max_iter, linear_solver };

        let mut probes = Vec::with_capacity(self.probes.len());
        for (k, p) in self.probes.iter().enumerate() {
            let point = vector(&p.point, dim, &format!("probes[{k}].point"))?;
            if p.component >= dim {
                return Err(invalid(format!("probes[{k}].component"), format!("must be below the dimension {dim}")));
            }
            if self.probes[..k].iter().any(|q| q.name == p.name) {
                return Err(invalid(format!("probes[{k}].name"), format!("duplicate probe name '{}'", p.name)));
            }
            probes.push(Probe { name: p.name.clone(), point, component: p.component });
        }
        // Snapping is checked here so that a bad probe is a validation error.
        fracplast_core::solver::resolve_probes(&mesh, &probes).map_err(|e| invalid("probes", e.to_string()))?;

        let o = &self.output;
        let snapshot_steps = if !o.vtk {
            Vec::new()
        } else if !o.vtk_steps.is_empty() {
            for (k, &st) in o.vtk_steps.iter().enumerate() {
                if st > self.time.steps {
                    return Err(invalid(format!("output.vtk_steps[{k}]"), format!("step {st} beyond {}", self.time.steps)));
                }
            }
            let mut v = o.vtk_steps.clone();
            v.sort_unstable();
            v.dedup();
            v
        } else {
            let every = o.vtk_every.max(1);
            let mut v: Vec<usize> = (0..=self.time.steps).step_by(every).collect();
            if v.last() != Some(&self.time.steps) {
                v.push(self.time.steps);
            }
            v
        };
        if o.sweep_samples > 0 && dim != 2 && dim != 3 {
            return Err(invalid("output.sweep_samples", "sweep needs a 2D or 3D scenario"));
        }

        Ok(Scenario {
            name: self.name.clone(),
            mesh,
            dirichlet: self.boundary.clamped.clone(),
            loads: Loads { body, tractions },
            ramp,
            grid,
            params,
            frac,
            scheme,
            newton,
            probes,
            snapshot_steps,
            output: o.clone(),
            notes,
        })
    }

    fn build_mesh(&self, base_dir: &Path) -> Result<Mesh, ScenarioError> {
        let mesh_err = |e: fracplast_core::MeshError| invalid("geometry", e.to_string());
        match &self.geometry {
            Geometry::NotchedBar { nx, ny } => notched_bar(*nx, *ny).map_err(mesh_err),
            Geometry::Box2d { extent, cells } => {
                check_extent(extent)?;
                box2d(extent[0], extent[1], cells[0], cells[1]).map_err(mesh_err)
            }
            Geometry::Box3d { extent, cells } => {
                check_extent(extent)?;
                box3d(*extent, *cells).map_err(mesh_err)
            }
            Geometry::File { path } => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                Ok(read_mesh_file(&full)?)
            }
        }
    }

    fn delta_tensor(&self, dim: usize, params: &MaterialParams, notes: &mut Vec<Diagnostic>) -> Result<SymTensor, ScenarioError> {
        let rows = &self.frac.delta;
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("frac.delta", format!("must be a {dim} x {dim} matrix to match the mesh")));
        }
        let mut upper = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                let x = rows[i][j];
                let field = format!("frac.delta[{i}][{j}]");
                if !(x.is_finite() && x > 0.0) {
                    return Err(invalid(field, format!("entry {x} must be positive")));
                }
                if rows[j][i] != x {
                    return Err(invalid(field, format!("matrix is not symmetric ({x} vs {})", rows[j][i])));
                }
                if x > 0.5 * params.y0 {
                    if self.frac.allow_large_delta {
                        if i <= j {
                            notes.push(Diagnostic::warning(format!(
                                "{field} = {x} exceeds Y0/2 = {}; sign agreement with the classical flow is not guaranteed",
                                0.5 * params.y0
                            )));
                        }
                    } else {
                        return Err(invalid(
                            field,
                            format!(
                                "entry {x} exceeds the Y0/2 guard ({}); set frac.allow_large_delta = true \
                                 or pass --allow-large-delta to accept it",
                                0.5 * params.y0
                            ),
                        ));
                    }
                }
                upper[i][j] = x;
            }
        }
        Ok(SymTensor::from_upper(dim, &upper))
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn check_extent(extent: &[f64]) -> Result<(), ScenarioError> {
    if extent.iter().all(|x| x.is_finite() && *x > 0.0) {
        Ok(())
    } else {
        Err(invalid("geometry.extent", "every length must be positive"))
    }
}

fn check_label(mesh: &Mesh, label: &str, field: &str) -> Result<(), ScenarioError> {
    if mesh.label_index(label).is_some() {
        Ok(())
    } else {
        let mut known = String::new();
        for (k, l) in mesh.labels().iter().enumerate() {
            let _ = write!(known, "{}{l}", if k > 0 { ", " } else { "" });
        }
        Err(invalid(field, format!("mesh has no boundary label '{label}' (labels: {known})")))
    }
}

fn vector(v: &[f64], dim: usize, field: &str) -> Result<[f64; 3], ScenarioError> {
    if v.len() != dim {
        return Err(invalid(field, format!("expected {dim} components, got {}", v.len())));
    }
    if !v.iter().all(|x| x.is_finite()) {
        return Err(invalid(field, "components must be finite"));
    }
    let mut out = [0.0; 3];
    out[..dim].copy_from_slice(v);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Info,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn info(message: String) -> Self {
        Diagnostic { severity: Severity::Info, message }
    }

    fn warning(message: String) -> Self {
        Diagnostic { severity: Severity::Warning, message }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Info => "note",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// A validated scenario that owns its mesh.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub mesh: Mesh,
    pub dirichlet: Vec<String>,
    pub loads: Loads,
    pub ramp: LoadRamp,
    pub grid: TimeGrid,
    pub params: MaterialParams,
    pub frac: FracConfig,
    pub scheme: Scheme,
    pub newton: NewtonConfig,
    pub probes: Vec<Probe>,
    pub snapshot_steps: Vec<usize>,
    pub output: OutputSection,
    pub notes: Vec<Diagnostic>,
}

impl Scenario {
    pub fn problem(&self) -> Problem<'_> {
        Problem {
            mesh: &self.mesh,
            dirichlet: self.dirichlet.clone(),
            peak_loads: self.loads.clone(),
            ramp: self.ramp,
            grid: self.grid.clone(),
            params: self.params,
            frac: self.frac,
            scheme: self.scheme,
            newton: self.newton,
            probes: self.probes.clone(),
            snapshot_steps: self.snapshot_steps.clone(),
        }
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.notes.iter().filter(|d| d.severity == Severity::Warning)
    }
}

/// Resolves a `run` argument: an existing file is parsed, anything else must be a preset name.
pub fn load_scenario(arg: &str, overrides: &Overrides) -> Result<Scenario, ScenarioError> {
    let path = Path::new(arg);
    let (mut file, base) = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Read { path: path.to_path_buf(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (ScenarioFile::from_toml_str(&text)?, base)
    } else if PRESET_NAMES.contains(&arg) {
        (ScenarioFile::preset(arg)?, PathBuf::from("."))
    } else if arg.ends_with(".toml") || arg.contains(std::path::MAIN_SEPARATOR) {
        return Err(ScenarioError::Read {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        });
    } else {
        return Err(ScenarioError::UnknownPreset(arg.to_string()));
    };
    file.apply(overrides)?;
    file.build(&base)
}

fn notched2d() -> ScenarioFile {
    ScenarioFile {
        name: "notched2d".into(),
        geometry: Geometry::NotchedBar { nx: 100, ny: 24 },
        boundary: Boundary { clamped: vec!["left".into()] },
        material: MaterialSection { mu: 55000.0, kappa: 55000.0, y0: 10000.0, k1: 110000.0, k2: 110000.0 },
        frac: FracSection {
            alpha: 0.5,
            delta: vec![vec![100.0, 100.0], vec![100.0, 200.0]],
            n_nodes: default_nodes(),
            perturbation: Perturbation::SingleEntry,
            allow_large_delta: false,
        },
        load: LoadSection { body: None, traction: vec![TractionSection { label: "right".into(), peak: vec![15000.0, 0.0] }] },
        time: TimeSection::default(),
        solver: SolverSection::default(),
        probes: vec![
            ProbeSection { name: "d_x".into(), point: vec![10.0, 1.0], component: 0 },
            ProbeSection { name: "d_y".into(), point: vec![5.0, 0.5], component: 1 },
        ],
        output: OutputSection::default(),
    }
}

fn box3d_preset() -> ScenarioFile {
    ScenarioFile {
        name: "box3d".into(),
        geometry: Geometry::Box3d { extent: [6.0, 2.0, 2.0], cells: [12, 4, 4] },
        boundary: Boundary { clamped: vec!["left".into()] },
        material: MaterialSection { mu: 120000.0, kappa: 80000.0, y0: 50000.0, k1: 200000.0, k2: 200000.0 },
        frac: FracSection {
            alpha: 0.5,
            delta: vec![vec![100.0, 100.0, 100.0], vec![100.0, 500.0, 100.0], vec![100.0, 100.0, 900.0]],
            n_nodes: default_nodes(),
            perturbation: Perturbation::SingleEntry,
            allow_large_delta: false,
        },
        load: LoadSection {
            body: None,
            traction: vec![TractionSection { label: "right".into(), peak: vec![0.0, 5000.0, 0.0] }],
        },
        time: TimeSection::default(),
        solver: SolverSection::default(),
        probes: vec![ProbeSection { name: "d_y".into(), point: vec![6.0, 1.0, 1.0], component: 1 }],
        output: OutputSection::default(),
    }
}

fn box2d_preset() -> ScenarioFile {
    let mut s = notched2d();
    s.name = "box2d".into();
    s.geometry = Geometry::Box2d { extent: [10.0, 2.0], cells: [40, 8] };
    s.probes = vec![
        ProbeSection { name: "d_x".into(), point: vec![10.0, 1.0], component: 0 },
        ProbeSection { name: "d_y".into(), point: vec![5.0, 1.0], component: 1 },
    ];
    s
}
