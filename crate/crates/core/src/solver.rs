//! Semismooth Newton load stepping.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fem::{Assembler, FemError, Loads, QuadHistory, Scheme, StepContext};
use crate::fracdiff::FracConfig;
use crate::linalg::{gmres, norm2, BandLu, CsrMatrix, Ilu0, LinalgError};
use crate::material::UpdateResult;
use crate::mesh::{Mesh, MeshError};
use crate::tensors::MaterialParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolverKind {
    /// Banded LU on a bandwidth-reducing ordering.
    Direct,
    /// Restarted GMRES preconditioned by ILU(0).
    Iterative { restart: usize, rel_tol: f64, max_iter: usize },
}

impl Default for LinearSolverKind {
    fn default() -> Self {
        LinearSolverKind::Direct
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Converged once `|r| <= tol_residual * max(1, |F_peak|)`.
    pub tol_residual: f64,
    /// Maximum number of linear solves per time step.
    pub max_iter: usize,
    pub linear_solver: LinearSolverKind,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tol_residual: 1e-8, max_iter: 30, linear_solver: LinearSolverKind::Direct }
    }
}

/// Strictly increasing time instants starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t: Vec<f64>) -> Result<Self, SetupError> {
        if t.len() < 2 || t[0] != 0.0 {
            return Err(SetupError::TimeGrid("needs at least two instants starting at 0"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(SetupError::TimeGrid("instants must be finite and strictly increasing"));
        }
        Ok(TimeGrid { t })
    }

    /// `n` equal steps over `[0, t_end]`.
    pub fn uniform(n: usize, t_end: f64) -> Result<Self, SetupError> {
        if n == 0 || !(t_end > 0.0) {
            return Err(SetupError::TimeGrid("step count and end time must be positive"));
        }
        Self::new((0..=n).map(|k| t_end * k as f64 / n as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.t
    }

    pub fn n_steps(&self) -> usize {
        self.t.len() - 1
    }

    pub fn end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }
}

/// Triangular load history: 0 at `t = 0`, full load at `t_end / 2`, 0 at `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadRamp {
    pub t_end: f64,
}

impl LoadRamp {
    pub fn factor(&self, t: f64) -> f64 {
        let half = 0.5 * self.t_end;
        if t <= 0.0 || t >= self.t_end {
            0.0
        } else if t <= half {
            t / half
        } else {
            (self.t_end - t) / half
        }
    }
}

/// Displacement component `component` sampled at the mesh vertex nearest to `point`.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: String,
    pub point: [f64; 3],
    pub component: usize,
}

/// A probe after snapping to a vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedProbe {
    pub probe: Probe,
    pub vertex: usize,
    /// Distance between the requested point and the vertex.
    pub snap_distance: f64,
}

/// Snaps every probe to the nearest vertex. The snap must stay within half the
/// longest edge incident to that vertex.
pub fn resolve_probes(mesh: &Mesh, probes: &[Probe]) -> Result<Vec<ResolvedProbe>, SetupError> {
    probes
        .iter()
        .map(|p| {
            if p.component >= mesh.dim() {
                return Err(SetupError::ProbeComponent { name: p.name.clone(), component: p.component });
            }
            let v = mesh.nearest_vertex(&p.point);
            let dist = mesh.distance(v, &p.point);
            if dist > 0.5 * mesh.longest_incident_edge(v) {
                return Err(SetupError::ProbeOutsideMesh { name: p.name.clone(), distance: dist });
            }
            Ok(ResolvedProbe { probe: p.clone(), vertex: v, snap_distance: dist })
        })
        .collect()
}

/// Probe values of a full nodal displacement vector.
pub fn measure(u_full: &[f64], dim: usize, probes: &[ResolvedProbe]) -> Vec<f64> {
    probes.iter().map(|p| u_full[p.vertex * dim + p.probe.component]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetupError {
    Mesh(MeshError),
    TimeGrid(&'static str),
    Material(&'static str),
    Frac(crate::fracdiff::FracError),
    ProbeOutsideMesh { name: String, distance: f64 },
    ProbeComponent { name: String, component: usize },
}

impl fmt::Display for SetupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetupError::Mesh(e) => write!(f, "{e}"),
            SetupError::TimeGrid(m) => write!(f, "time grid: {m}"),
            SetupError::Material(m) => write!(f, "material: {m}"),
            SetupError::Frac(e) => write!(f, "fractional settings: {e}"),
            SetupError::ProbeOutsideMesh { name, distance } => {
                write!(f, "probe '{name}' is {distance:.3e} away from the nearest vertex, outside the mesh")
            }
            SetupError::ProbeComponent { name, component } => {
                write!(f, "probe '{name}' requests component {component} beyond the mesh dimension")
            }
        }
    }
}

impl From<MeshError> for SetupError {
    fn from(e: MeshError) -> Self {
        SetupError::Mesh(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NewtonFailure {
    MaxIterations,
    SingularLinearSystem(LinalgError),
    LinearSolverFailed(LinalgError),
    NonFiniteResidual,
    Assembly(FemError),
}

impl fmt::Display for NewtonFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NewtonFailure::MaxIterations => write!(f, "Newton iteration limit reached"),
            NewtonFailure::SingularLinearSystem(e) => write!(f, "singular linear system: {e}"),
            NewtonFailure::LinearSolverFailed(e) => write!(f, "linear solver failed: {e}"),
            NewtonFailure::NonFiniteResidual => write!(f, "residual became non-finite"),
            NewtonFailure::Assembly(e) => write!(f, "{e}"),
        }
    }
}

/// Failed time step with the residual norms of every Newton iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverError {
    pub step: usize,
    pub t: f64,
    pub kind: NewtonFailure,
    pub trace: Vec<f64>,
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} (t = {}): {} after {} residual evaluations", self.step, self.t, self.kind, self.trace.len())?;
        if let Some(last) = self.trace.last() {
            write!(f, ", last residual {last:.3e}")?;
        }
        Ok(())
    }
}

/// Converged Newton solve of one time step.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub u: Vec<f64>,
    /// Residual norm at the start and after every linear solve.
    pub trace: Vec<f64>,
    pub updates: Vec<UpdateResult>,
}

impl NewtonOutcome {
    /// Number of linear solves.
    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }
}

/// Reusable linear solver state.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    kind: LinearSolverKind,
    band: Option<BandLu>,
}

impl LinearSolver {
    pub fn new(kind: LinearSolverKind, pattern: &CsrMatrix) -> Self {
        let band = match kind {
            LinearSolverKind::Direct => Some(BandLu::plan(pattern)),
            LinearSolverKind::Iterative { .. } => None,
        };
        LinearSolver { kind, band }
    }

    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, NewtonFailure> {
        match (self.kind, self.band.as_mut()) {
            (LinearSolverKind::Direct, Some(lu)) => {
                lu.factor(a).map_err(NewtonFailure::SingularLinearSystem)?;
                Ok(lu.solve(b))
            }
            (LinearSolverKind::Iterative { restart, rel_tol, max_iter }, _) => {
                let ilu = Ilu0::new(a).map_err(NewtonFailure::SingularLinearSystem)?;
                let mut x = vec![0.0; b.len()];
                gmres(a, &ilu, b, &mut x, restart, rel_tol, max_iter).map_err(NewtonFailure::LinearSolverFailed)?;
                Ok(x)
            }
            _ => unreachable!("direct solver is planned at construction"),
        }
    }
}

/// Semismooth Newton iteration for one time step, warm-started at `u0`.
#[allow(clippy::too_many_arguments)]
pub fn newton_solve(
    asm: &Assembler<'_>,
    u0: &[f64],
    history: &QuadHistory,
    step: &StepContext,
    f_ext: &[f64],
    tol_abs: f64,
    max_iter: usize,
    linear: &mut LinearSolver,
    matrix: &mut CsrMatrix,
) -> Result<NewtonOutcome, (NewtonFailure, Vec<f64>)> {
    let mut u = u0.to_vec();
    let mut trace = Vec::new();
    let mut updates = asm.update_cells(&u, history, step).map_err(|e| (NewtonFailure::Assembly(e), trace.clone()))?;
    loop {
        let r = asm.residual_from(&updates, f_ext);
        let rn = norm2(&r);
        trace.push(rn);
        if !rn.is_finite() {
            return Err((NewtonFailure::NonFiniteResidual, trace));
        }
        if rn <= tol_abs {
            return Ok(NewtonOutcome { u, trace, updates });
        }
        if trace.len() > max_iter {
            return Err((NewtonFailure::MaxIterations, trace));
        }
        asm.tangent_from(&updates, &step.params, matrix);
        let du = match linear.solve(matrix, &r) {
            Ok(du) => du,
            Err(e) => return Err((e, trace)),
        };
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui -= di;
        }
        updates = match asm.update_cells(&u, history, step) {
            Ok(up) => up,
            Err(e) => return Err((NewtonFailure::Assembly(e), trace)),
        };
    }
}

/// True when the last three residuals of `trace` strictly decrease.
pub fn last_three_decreasing(trace: &[f64]) -> bool {
    let n = trace.len();
    n < 3 || (trace[n - 3] > trace[n - 2] && trace[n - 2] > trace[n - 1])
}

/// Complete description of a load-stepping run.
#[derive(Debug, Clone)]
pub struct Problem<'m> {
    pub mesh: &'m Mesh,
    /// Clamped boundary labels.
    pub dirichlet: Vec<String>,
    /// Loads at the peak of the ramp.
    pub peak_loads: Loads,
    pub ramp: LoadRamp,
    pub grid: TimeGrid,
    pub params: MaterialParams,
    pub frac: FracConfig,
    pub scheme: Scheme,
    pub newton: NewtonConfig,
    pub probes: Vec<Probe>,
    /// Steps whose cell fields are kept in the record.
    pub snapshot_steps: Vec<usize>,
}

/// Per-step results. Step 0 is the unloaded initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub load_factor: f64,
    /// Residual norm of every Newton iterate (empty for step 0).
    pub residuals: Vec<f64>,
    /// Linear solves performed.
    pub iterations: usize,
    pub measurements: Vec<f64>,
    /// `max_cells |dev σ|`.
    pub max_eq_stress: f64,
    /// Cells with a positive plastic multiplier in this step.
    pub plastic_cells: usize,
}

/// Cell and vertex fields at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    /// Full nodal displacement vector.
    pub u: Vec<f64>,
    pub eq_stress: Vec<f64>,
    pub eps_p_norm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dim: usize,
    pub probes: Vec<ResolvedProbe>,
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub final_u: Vec<f64>,
    pub final_history: QuadHistory,
    /// Absolute Newton tolerance used in every step.
    pub tol_abs: f64,
}

impl RunRecord {
    /// Time series of probe `k`.
    pub fn series(&self, k: usize) -> Vec<f64> {
        self.steps.iter().map(|s| s.measurements[k]).collect()
    }

    pub fn final_measurements(&self) -> &[f64] {
        &self.steps[self.steps.len() - 1].measurements
    }
}

/// Failure of a run: either invalid input or a time step that did not converge.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Setup(SetupError),
    Solver(SolverError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Setup(e) => write!(f, "{e}"),
            RunError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl From<SetupError> for RunError {
    fn from(e: SetupError) -> Self {
        RunError::Setup(e)
    }
}

fn snapshot(step: usize, t: f64, u_full: &[f64], history: &QuadHistory) -> Snapshot {
    Snapshot {
        step,
        t,
        u: u_full.to_vec(),
        eq_stress: history.states.iter().map(|s| s.eq_stress()).collect(),
        eps_p_norm: history.states.iter().map(|s| s.eps_p.norm()).collect(),
    }
}

/// Runs the load history: at every instant solve for equilibrium, accept the
/// material update and record the probes.
pub fn run_simulation(problem: &Problem<'_>) -> Result<RunRecord, RunError> {
    let mesh = problem.mesh;
    let dim = mesh.dim();
    problem.params.validate().map_err(SetupError::Material)?;
    problem.frac.validate().map_err(SetupError::Frac)?;
    if problem.frac.dim() != dim {
        return Err(SetupError::Material("interval matrix dimension differs from the mesh dimension").into());
    }
    let dirichlet: Vec<&str> = problem.dirichlet.iter().map(String::as_str).collect();
    let asm = Assembler::new(mesh, &dirichlet).map_err(|e| match e {
        FemError::Mesh(m) => SetupError::Mesh(m),
        FemError::Material { .. } => unreachable!("assembler setup does not touch the material"),
    })?;
    let probes = resolve_probes(mesh, &problem.probes)?;
    let f_peak = asm.external_force(&problem.peak_loads).map_err(|e| match e {
        FemError::Mesh(m) => SetupError::Mesh(m),
        FemError::Material { .. } => unreachable!("load assembly does not touch the material"),
    })?;
    let tol_abs = problem.newton.tol_residual * norm2(&f_peak).max(1.0);

    let n_free = asm.dofs().n_free();
    let mut u = vec![0.0; n_free];
    let mut history = QuadHistory::new(mesh);
    let mut matrix = asm.new_matrix();
    let mut linear = LinearSolver::new(problem.newton.linear_solver, &matrix);
    let times = problem.grid.values();

    let mut steps = Vec::with_capacity(times.len());
    let mut snapshots = Vec::new();
    let u_full = asm.dofs().expand(&u);
    steps.push(StepRecord {
        step: 0,
        t: times[0],
        load_factor: problem.ramp.factor(times[0]),
        residuals: Vec::new(),
        iterations: 0,
        measurements: measure(&u_full, dim, &probes),
        max_eq_stress: 0.0,
        plastic_cells: 0,
    });
    if problem.snapshot_steps.contains(&0) {
        snapshots.push(snapshot(0, times[0], &u_full, &history));
    }

    for (n, &t) in times.iter().enumerate().skip(1) {
        let factor = problem.ramp.factor(t);
        let f_ext: Vec<f64> = f_peak.iter().map(|f| f * factor).collect();
        let ctx = StepContext::new(&history, problem.params, problem.frac, problem.scheme);
        let outcome = newton_solve(&asm, &u, &history, &ctx, &f_ext, tol_abs, problem.newton.max_iter, &mut linear, &mut matrix)
            .map_err(|(kind, trace)| RunError::Solver(SolverError { step: n, t, kind, trace }))?;
        let plastic_cells = outcome.updates.iter().filter(|r| r.delta_gamma > 0.0).count();
        let iterations = outcome.iterations();
        u = outcome.u;
        history = QuadHistory { states: outcome.updates.into_iter().map(|r| r.state).collect() };
        let u_full = asm.dofs().expand(&u);
        steps.push(StepRecord {
            step: n,
            t,
            load_factor: factor,
            residuals: outcome.trace,
            iterations,
            measurements: measure(&u_full, dim, &probes),
            max_eq_stress: history.states.iter().map(|s| s.eq_stress()).fold(0.0, f64::max),
            plastic_cells,
        });
        if problem.snapshot_steps.contains(&n) {
            snapshots.push(snapshot(n, t, &u_full, &history));
        }
    }
    let final_u = asm.dofs().expand(&u);
    Ok(RunRecord { dim, probes, steps, snapshots, final_u, final_history: history, tol_abs })
}
