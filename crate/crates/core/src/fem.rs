//! P1 displacements with one-point quadrature and piecewise-constant history.
//!
//! Every cell carries one material point. Internal forces and the consistent
//! tangent are assembled cell by cell in a fixed order, so repeated assemblies
//! of the same state are bitwise identical.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fracdiff::FracConfig;
use crate::linalg::CsrMatrix;
use crate::material::{
    explicit_update_cached, implicit_update, MaterialError, PointState, PrevFlow, PrevGradients, UpdateResult,
};
use crate::mesh::{Mesh, MeshError};
use crate::tensors::{MaterialParams, SymTensor};

#[derive(Debug, Clone, PartialEq)]
pub enum FemError {
    Mesh(MeshError),
    /// A constitutive update failed in cell `cell`.
    Material { cell: usize, error: MaterialError },
}

impl From<MeshError> for FemError {
    fn from(e: MeshError) -> Self {
        FemError::Mesh(e)
    }
}

impl fmt::Display for FemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FemError::Mesh(e) => write!(f, "{e}"),
            FemError::Material { cell, error } => write!(f, "cell {cell}: {error}"),
        }
    }
}

/// Equation numbering of the vector-valued P1 space with clamped vertices removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    dim: usize,
    /// `eq[v * dim + i]` is the equation of component `i` at vertex `v`.
    eq: Vec<Option<usize>>,
    n_free: usize,
}

impl DofMap {
    /// Clamps every vertex on a facet carrying one of `dirichlet` labels.
    pub fn new(mesh: &Mesh, dirichlet: &[&str]) -> Result<Self, MeshError> {
        let dim = mesh.dim();
        let mut fixed = vec![false; mesh.n_vertices()];
        for name in dirichlet {
            for k in mesh.facets_with_label(name)? {
                for &v in mesh.facet_vertices(k) {
                    fixed[v] = true;
                }
            }
        }
        let mut eq = Vec::with_capacity(dim * fixed.len());
        let mut n_free = 0;
        for &f in &fixed {
            for _ in 0..dim {
                if f {
                    eq.push(None);
                } else {
                    eq.push(Some(n_free));
                    n_free += 1;
                }
            }
        }
        Ok(DofMap { dim, eq, n_free })
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn n_total(&self) -> usize {
        self.eq.len()
    }

    pub fn n_constrained(&self) -> usize {
        self.eq.len() - self.n_free
    }

    pub fn equation(&self, vertex: usize, comp: usize) -> Option<usize> {
        self.eq[vertex * self.dim + comp]
    }

    /// Full nodal vector from free coefficients; clamped entries are 0.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        self.eq.iter().map(|e| e.map_or(0.0, |k| free[k])).collect()
    }

    /// Free coefficients of a full nodal vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free];
        for (i, e) in self.eq.iter().enumerate() {
            if let Some(k) = e {
                out[*k] = full[i];
            }
        }
        out
    }
}

/// Material state of every cell at the last converged time.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadHistory {
    pub states: Vec<PointState>,
}

impl QuadHistory {
    pub fn new(mesh: &Mesh) -> Self {
        QuadHistory { states: vec![PointState::zeros(mesh.dim()); mesh.n_cells()] }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Volume and barycentric-coordinate gradients of one simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub volume: f64,
    pub grads: [[f64; 3]; 4],
}

impl CellGeometry {
    pub fn new(mesh: &Mesh, c: usize) -> Self {
        let d = mesh.dim();
        let verts = mesh.cell(c);
        let x0 = mesh.vertex(verts[0]);
        // Rows of J^-T, with J = [x1 - x0, ..., xd - x0], are the gradients of λ1..λd.
        let mut j = [[0.0; 3]; 3];
        for a in 0..d {
            let xa = mesh.vertex(verts[a + 1]);
            for k in 0..d {
                j[k][a] = xa[k] - x0[k];
            }
        }
        let inv = invert(d, &j);
        let mut grads = [[0.0; 3]; 4];
        for a in 0..d {
            for k in 0..d {
                grads[a + 1][k] = inv[a][k];
                grads[0][k] -= inv[a][k];
            }
        }
        CellGeometry { volume: mesh.cell_volume(c), grads }
    }
}

fn invert(d: usize, m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    if d == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        out[0][0] = m[1][1] / det;
        out[0][1] = -m[0][1] / det;
        out[1][0] = -m[1][0] / det;
        out[1][1] = m[0][0] / det;
    } else {
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        for i in 0..3 {
            for k in 0..3 {
                let (i1, i2) = ((k + 1) % 3, (k + 2) % 3);
                let (k1, k2) = ((i + 1) % 3, (i + 2) % 3);
                out[i][k] = (m[i1][k1] * m[i2][k2] - m[i1][k2] * m[i2][k1]) / det;
            }
        }
    }
    out
}

/// Body force density and per-label surface tractions, both constant in space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Loads {
    pub body: [f64; 3],
    pub tractions: Vec<(String, [f64; 3])>,
}

/// Material update used inside the assembly.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Scheme {
    /// Flow direction frozen at the previous state.
    #[default]
    Explicit,
    /// Flow direction at the new state; `tol` bounds the local residual relative to `Y0`.
    Implicit { tol: f64 },
}

/// Data that is constant during the Newton iterations of one time step.
#[derive(Debug, Clone)]
pub struct StepContext {
    pub params: MaterialParams,
    pub cfg: FracConfig,
    pub scheme: Scheme,
    prev: Vec<PrevFlow>,
}

impl StepContext {
    /// Caches the previous-state gradients of every cell for the explicit scheme.
    pub fn new(history: &QuadHistory, params: MaterialParams, cfg: FracConfig, scheme: Scheme) -> Self {
        let prev = match scheme {
            Scheme::Explicit => history.states.iter().map(|s| PrevGradients::compute(s, &params, &cfg)).collect(),
            Scheme::Implicit { .. } => Vec::new(),
        };
        StepContext { params, cfg, scheme, prev }
    }
}

/// Mesh-dependent assembly data: geometry, numbering and the sparsity pattern.
#[derive(Debug, Clone)]
pub struct Assembler<'m> {
    mesh: &'m Mesh,
    geometry: Vec<CellGeometry>,
    dofs: DofMap,
    pattern: CsrMatrix,
    /// Per cell, storage slot of every local `(row, col)` pair; `usize::MAX` if clamped.
    slots: Vec<Vec<usize>>,
}

impl<'m> Assembler<'m> {
    pub fn new(mesh: &'m Mesh, dirichlet: &[&str]) -> Result<Self, FemError> {
        let dofs = DofMap::new(mesh, dirichlet)?;
        let geometry: Vec<CellGeometry> = (0..mesh.n_cells()).map(|c| CellGeometry::new(mesh, c)).collect();
        let d = mesh.dim();
        let local_eqs = |c: usize| -> Vec<Option<usize>> {
            let mut out = Vec::with_capacity((d + 1) * d);
            for &v in mesh.cell(c) {
                for i in 0..d {
                    out.push(dofs.equation(v, i));
                }
            }
            out
        };
        let mut rows = vec![Vec::new(); dofs.n_free()];
        for c in 0..mesh.n_cells() {
            let eqs = local_eqs(c);
            for r in eqs.iter().flatten() {
                rows[*r].extend(eqs.iter().flatten().copied());
            }
        }
        let pattern = CsrMatrix::from_pattern(rows);
        let slots = (0..mesh.n_cells())
            .map(|c| {
                let eqs = local_eqs(c);
                let mut s = Vec::with_capacity(eqs.len() * eqs.len());
                for r in &eqs {
                    for q in &eqs {
                        s.push(match (r, q) {
                            (Some(r), Some(q)) => pattern.slot(*r, *q).expect("pattern covers cell couplings"),
                            _ => usize::MAX,
                        });
                    }
                }
                s
            })
            .collect();
        Ok(Assembler { mesh, geometry, dofs, pattern, slots })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn geometry(&self, c: usize) -> &CellGeometry {
        &self.geometry[c]
    }

    /// Zero matrix with the sparsity pattern of the tangent.
    pub fn new_matrix(&self) -> CsrMatrix {
        self.pattern.clone()
    }

    /// `ε(u)` on cell `c` for the full nodal vector `u`.
    pub fn strain(&self, u_full: &[f64], c: usize) -> SymTensor {
        let d = self.mesh.dim();
        let g = &self.geometry[c].grads;
        let mut grad = [[0.0; 3]; 3];
        for (a, &v) in self.mesh.cell(c).iter().enumerate() {
            for i in 0..d {
                let ui = u_full[v * d + i];
                for j in 0..d {
                    grad[i][j] += ui * g[a][j];
                }
            }
        }
        SymTensor::sym_of(d, &grad)
    }

    /// External load vector on the free equations for unit load scaling.
    pub fn external_force(&self, loads: &Loads) -> Result<Vec<f64>, FemError> {
        let d = self.mesh.dim();
        let mut full = vec![0.0; self.dofs.n_total()];
        if loads.body.iter().any(|&b| b != 0.0) {
            for c in 0..self.mesh.n_cells() {
                let share = self.geometry[c].volume / (d + 1) as f64;
                for &v in self.mesh.cell(c) {
                    for i in 0..d {
                        full[v * d + i] += loads.body[i] * share;
                    }
                }
            }
        }
        for (label, t) in &loads.tractions {
            for k in self.mesh.facets_with_label(label)? {
                let share = self.mesh.facet_measure(k) / d as f64;
                for &v in self.mesh.facet_vertices(k) {
                    for i in 0..d {
                        full[v * d + i] += t[i] * share;
                    }
                }
            }
        }
        Ok(self.dofs.restrict(&full))
    }

    /// Material update of every cell at displacement `u` (free coefficients).
    pub fn update_cells(
        &self,
        u: &[f64],
        history: &QuadHistory,
        step: &StepContext,
    ) -> Result<Vec<UpdateResult>, FemError> {
        let u_full = self.dofs.expand(u);
        let p = &step.params;
        (0..self.mesh.n_cells())
            .map(|c| {
                let prev = &history.states[c];
                let sigma_tr = p.apply_c(&(self.strain(&u_full, c) - prev.eps_p));
                let res = match step.scheme {
                    Scheme::Explicit => explicit_update_cached(&sigma_tr, prev, p, &step.prev[c]),
                    Scheme::Implicit { tol } => implicit_update(&sigma_tr, prev, p, &step.cfg, tol * p.y0).map(|r| r.0),
                };
                res.map_err(|error| FemError::Material { cell: c, error })
            })
            .collect()
    }

    /// `∫ σ : ε(φ_i) - F_i` on the free equations, with `σ` from `updates`.
    pub fn residual_from(&self, updates: &[UpdateResult], f_ext: &[f64]) -> Vec<f64> {
        let d = self.mesh.dim();
        let mut r: Vec<f64> = f_ext.iter().map(|f| -f).collect();
        for (c, up) in updates.iter().enumerate() {
            let geo = &self.geometry[c];
            for (a, &v) in self.mesh.cell(c).iter().enumerate() {
                let t = up.state.sigma.mul_vec(&geo.grads[a]);
                for i in 0..d {
                    if let Some(k) = self.dofs.equation(v, i) {
                        r[k] += geo.volume * t[i];
                    }
                }
            }
        }
        r
    }

    /// Writes `K_(a,i),(b,k) = ∫ S C sym(e_k ⊗ ∇φ_b) : sym(e_i ⊗ ∇φ_a)` into `matrix`.
    pub fn tangent_from(&self, updates: &[UpdateResult], params: &MaterialParams, matrix: &mut CsrMatrix) {
        let d = self.mesh.dim();
        let nloc = (d + 1) * d;
        matrix.clear();
        let mut unit = [0.0; 3];
        for (c, up) in updates.iter().enumerate() {
            let geo = &self.geometry[c];
            let slots = &self.slots[c];
            for b in 0..=d {
                for k in 0..d {
                    let col = b * d + k;
                    if slots.iter().skip(col).step_by(nloc).all(|&s| s == usize::MAX) {
                        continue;
                    }
                    unit[k] = 1.0;
                    let e = SymTensor::sym_outer(d, &unit, &geo.grads[b]);
                    unit[k] = 0.0;
                    let t = up.tangent.apply(&params.apply_c(&e));
                    for a in 0..=d {
                        let tg = t.mul_vec(&geo.grads[a]);
                        for i in 0..d {
                            let s = slots[(a * d + i) * nloc + col];
                            if s != usize::MAX {
                                matrix.values_mut()[s] += geo.volume * tg[i];
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn assemble_residual(
        &self,
        u: &[f64],
        history: &QuadHistory,
        step: &StepContext,
        f_ext: &[f64],
    ) -> Result<Vec<f64>, FemError> {
        Ok(self.residual_from(&self.update_cells(u, history, step)?, f_ext))
    }

    pub fn assemble_tangent(&self, u: &[f64], history: &QuadHistory, step: &StepContext) -> Result<CsrMatrix, FemError> {
        let updates = self.update_cells(u, history, step)?;
        let mut m = self.new_matrix();
        self.tangent_from(&updates, &step.params, &mut m);
        Ok(m)
    }

    /// History after accepting `u`: the updated state of every cell.
    pub fn commit_history(&self, u: &[f64], history: &QuadHistory, step: &StepContext) -> Result<QuadHistory, FemError> {
        let updates = self.update_cells(u, history, step)?;
        Ok(QuadHistory { states: updates.into_iter().map(|r| r.state).collect() })
    }
}
