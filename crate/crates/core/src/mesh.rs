//! Simplicial meshes with labelled boundary facets, and generators for the
//! notched bar and axis-aligned boxes.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::math::{powf, sqrt};

/// Relative volume below which a cell counts as degenerate.
pub const MIN_RELATIVE_VOLUME: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum MeshError {
    InvalidDimension(usize),
    Empty,
    VertexOutOfRange { what: &'static str, item: usize, vertex: usize },
    NonFiniteCoordinate { vertex: usize },
    /// Cell with non-positive (or negligible) signed volume.
    BadCell { cell: usize, volume: f64 },
    /// Facet that is not a face of exactly one cell.
    NotBoundaryFacet { facet: usize, owners: usize },
    DuplicateFacet { facet: usize, first: usize },
    RepeatedVertex { what: &'static str, item: usize },
    UnknownLabel(String),
    BadResolution(&'static str),
}

impl fmt::Display for MeshError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshError::InvalidDimension(d) => write!(f, "mesh dimension must be 2 or 3, got {d}"),
            MeshError::Empty => write!(f, "mesh has no cells"),
            MeshError::VertexOutOfRange { what, item, vertex } => {
                write!(f, "{what} {item} references missing vertex {vertex}")
            }
            MeshError::NonFiniteCoordinate { vertex } => write!(f, "vertex {vertex} has a non-finite coordinate"),
            MeshError::BadCell { cell, volume } => {
                write!(f, "cell {cell} has non-positive or negligible volume {volume:.3e}")
            }
            MeshError::NotBoundaryFacet { facet, owners } => {
                write!(f, "boundary facet {facet} belongs to {owners} cells (expected exactly 1)")
            }
            MeshError::DuplicateFacet { facet, first } => write!(f, "facet {facet} duplicates facet {first}"),
            MeshError::RepeatedVertex { what, item } => write!(f, "{what} {item} repeats a vertex"),
            MeshError::UnknownLabel(l) => write!(f, "unknown boundary label '{l}'"),
            MeshError::BadResolution(msg) => write!(f, "invalid mesh resolution: {msg}"),
        }
    }
}

/// A facet on the boundary, tagged by an index into the label table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFacet {
    /// The first `dim` entries are used.
    pub vertices: [usize; 3],
    pub label: usize,
}

/// Conforming simplicial mesh of a 2D or 3D domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 3]>,
    /// The first `dim + 1` entries are used.
    cells: Vec<[usize; 4]>,
    facets: Vec<BoundaryFacet>,
    labels: Vec<String>,
    volumes: Vec<f64>,
}

/// Signed volume of the simplex spanned by `pts[0..=dim]` (positive for
/// counter-clockwise triangles and right-handed tetrahedra).
pub fn signed_volume(dim: usize, pts: &[[f64; 3]]) -> f64 {
    let e = |a: usize, k: usize| pts[a][k] - pts[0][k];
    match dim {
        2 => 0.5 * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0)),
        3 => {
            let det = e(1, 0) * (e(2, 1) * e(3, 2) - e(2, 2) * e(3, 1)) - e(1, 1) * (e(2, 0) * e(3, 2) - e(2, 2) * e(3, 0))
                + e(1, 2) * (e(2, 0) * e(3, 1) - e(2, 1) * e(3, 0));
            det / 6.0
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Length (2D) or area (3D) of a facet.
pub fn facet_measure(dim: usize, pts: &[[f64; 3]]) -> f64 {
    let e = |a: usize, k: usize| pts[a][k] - pts[0][k];
    match dim {
        2 => sqrt(e(1, 0) * e(1, 0) + e(1, 1) * e(1, 1)),
        3 => {
            let cx = e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1);
            let cy = e(1, 2) * e(2, 0) - e(1, 0) * e(2, 2);
            let cz = e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0);
            0.5 * sqrt(cx * cx + cy * cy + cz * cz)
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

fn sorted_face(face: &[usize]) -> [usize; 3] {
    let mut k = [usize::MAX; 3];
    k[..face.len()].copy_from_slice(face);
    k[..face.len()].sort_unstable();
    k
}

/// Faces of a simplex with `dim + 1` vertices: every subset of size `dim`.
fn cell_faces(dim: usize, cell: &[usize; 4]) -> impl Iterator<Item = [usize; 3]> + '_ {
    (0..=dim).map(move |skip| {
        let mut f = [usize::MAX; 3];
        let mut k = 0;
        for (a, &v) in cell.iter().enumerate().take(dim + 1) {
            if a != skip {
                f[k] = v;
                k += 1;
            }
        }
        sorted_face(&f[..dim])
    })
}

impl Mesh {
    /// Builds and validates a mesh. Facets refer to `labels` by index.
    pub fn new(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        cells: Vec<[usize; 4]>,
        facets: Vec<BoundaryFacet>,
        labels: Vec<String>,
    ) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::InvalidDimension(dim));
        }
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        for (v, x) in vertices.iter().enumerate() {
            if !x.iter().all(|c| c.is_finite()) {
                return Err(MeshError::NonFiniteCoordinate { vertex: v });
            }
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
        for x in &vertices {
            for k in 0..dim {
                lo[k] = lo[k].min(x[k]);
                hi[k] = hi[k].max(x[k]);
            }
        }
        let scale = (0..dim).map(|k| hi[k] - lo[k]).fold(0.0f64, f64::max);
        let min_vol = MIN_RELATIVE_VOLUME * powf(scale, dim as f64);

        let mut volumes = Vec::with_capacity(cells.len());
        let mut owners: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for (c, cell) in cells.iter().enumerate() {
            let verts = &cell[..=dim];
            for &v in verts {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange { what: "cell", item: c, vertex: v });
                }
            }
            let mut pts = [[0.0; 3]; 4];
            for (a, &v) in verts.iter().enumerate() {
                pts[a] = vertices[v];
            }
            let vol = signed_volume(dim, &pts);
            if !(vol > min_vol) {
                return Err(MeshError::BadCell { cell: c, volume: vol });
            }
            volumes.push(vol);
            for face in cell_faces(dim, cell) {
                *owners.entry(face).or_insert(0) += 1;
            }
        }

        let mut seen: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for (k, facet) in facets.iter().enumerate() {
            let verts = &facet.vertices[..dim];
            for &v in verts {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange { what: "facet", item: k, vertex: v });
                }
            }
            let key = sorted_face(verts);
            if key[..dim].windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::RepeatedVertex { what: "facet", item: k });
            }
            if facet.label >= labels.len() {
                return Err(MeshError::UnknownLabel(facet.label.to_string()));
            }
            let count = owners.get(&key).copied().unwrap_or(0);
            if count != 1 {
                return Err(MeshError::NotBoundaryFacet { facet: k, owners: count });
            }
            if let Some(&first) = seen.get(&key) {
                return Err(MeshError::DuplicateFacet { facet: k, first });
            }
            seen.insert(key, k);
        }
        Ok(Mesh { dim, vertices, cells, facets, labels, volumes })
    }

    /// Builds a mesh and tags every boundary face via `label(centroid)`.
    pub fn with_boundary_labels<F>(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        cells: Vec<[usize; 4]>,
        label: F,
    ) -> Result<Self, MeshError>
    where
        F: Fn(&[f64; 3]) -> &'static str,
    {
        let unlabeled = Mesh::new(dim, vertices, cells, Vec::new(), Vec::new())?;
        let mut labels: Vec<String> = Vec::new();
        let mut facets = Vec::new();
        for face in unlabeled.boundary_faces() {
            let mut c = [0.0; 3];
            for &v in &face[..dim] {
                for (k, ck) in c.iter_mut().enumerate() {
                    *ck += unlabeled.vertices[v][k] / dim as f64;
                }
            }
            let name = label(&c);
            let idx = match labels.iter().position(|l| l == name) {
                Some(i) => i,
                None => {
                    labels.push(name.to_string());
                    labels.len() - 1
                }
            };
            facets.push(BoundaryFacet { vertices: face, label: idx });
        }
        let Mesh { dim, vertices, cells, volumes, .. } = unlabeled;
        Ok(Mesh { dim, vertices, cells, facets, labels, volumes })
    }

    /// Faces that belong to exactly one cell, in sorted-key order.
    pub fn boundary_faces(&self) -> Vec<[usize; 3]> {
        let mut owners: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for cell in &self.cells {
            for face in cell_faces(self.dim, cell) {
                *owners.entry(face).or_insert(0) += 1;
            }
        }
        owners.into_iter().filter(|&(_, n)| n == 1).map(|(f, _)| f).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> [f64; 3] {
        self.vertices[v]
    }

    /// Vertex indices of cell `c` (`dim + 1` entries).
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..=self.dim]
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        self.volumes[c]
    }

    pub fn facets(&self) -> &[BoundaryFacet] {
        &self.facets
    }

    /// Vertex indices of facet `k` (`dim` entries).
    pub fn facet_vertices(&self, k: usize) -> &[usize] {
        &self.facets[k].vertices[..self.dim]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_name(&self, facet: usize) -> &str {
        &self.labels[self.facets[facet].label]
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    /// Facets carrying `label`, or an error if the label does not exist.
    pub fn facets_with_label(&self, name: &str) -> Result<Vec<usize>, MeshError> {
        let idx = self.label_index(name).ok_or_else(|| MeshError::UnknownLabel(name.to_string()))?;
        Ok((0..self.facets.len()).filter(|&k| self.facets[k].label == idx).collect())
    }

    /// Measure of facet `k`.
    pub fn facet_measure(&self, k: usize) -> f64 {
        let mut pts = [[0.0; 3]; 3];
        for (a, &v) in self.facet_vertices(k).iter().enumerate() {
            pts[a] = self.vertices[v];
        }
        facet_measure(self.dim, &pts)
    }

    /// Length of the longest edge of any cell containing vertex `v`.
    pub fn longest_incident_edge(&self, v: usize) -> f64 {
        let mut best = 0.0f64;
        for c in 0..self.cells.len() {
            let cell = self.cell(c);
            if !cell.contains(&v) {
                continue;
            }
            for &w in cell {
                best = best.max(self.distance(v, &self.vertices[w]));
            }
        }
        best
    }

    /// Euclidean distance between vertex `v` and point `p`.
    pub fn distance(&self, v: usize, p: &[f64; 3]) -> f64 {
        let x = &self.vertices[v];
        let s: f64 = (0..self.dim).map(|k| (x[k] - p[k]) * (x[k] - p[k])).sum();
        sqrt(s)
    }

    /// Index of the vertex nearest to `p` (lowest index on ties).
    pub fn nearest_vertex(&self, p: &[f64; 3]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for v in 0..self.vertices.len() {
            let d = self.distance(v, p);
            if d < best.0 {
                best = (d, v);
            }
        }
        best.1
    }

    /// Smallest and largest coordinate along each axis.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        let (mut lo, mut hi) = ([0.0; 3], [0.0; 3]);
        for k in 0..self.dim {
            lo[k] = self.vertices.iter().map(|x| x[k]).fold(f64::INFINITY, f64::min);
            hi[k] = self.vertices.iter().map(|x| x[k]).fold(f64::NEG_INFINITY, f64::max);
        }
        (lo, hi)
    }
}

/// Labels faces at `x = x_min` as `left`, at `x = x_max` as `right`, the rest `free`.
fn left_right_free(x_min: f64, x_max: f64) -> impl Fn(&[f64; 3]) -> &'static str {
    let tol = 1e-9 * (x_max - x_min);
    move |c| {
        if (c[0] - x_min).abs() <= tol {
            "left"
        } else if (c[0] - x_max).abs() <= tol {
            "right"
        } else {
            "free"
        }
    }
}

/// Triangulates the structured `nx x ny` quad grid with alternating diagonals.
fn split_quads(nx: usize, ny: usize) -> Vec<[usize; 4]> {
    let id = |i: usize, j: usize| i * (ny + 1) + j;
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                cells.push([v00, v10, v11, 0]);
                cells.push([v00, v11, v01, 0]);
            } else {
                cells.push([v00, v10, v01, 0]);
                cells.push([v10, v11, v01, 0]);
            }
        }
    }
    cells
}

/// Lower boundary of the notched bar: 0, rising to 0.5 over `[3, 4]`, flat on
/// `[4, 6]`, falling back to 0 over `[6, 7]`. The upper boundary mirrors it about `y = 1`.
pub fn notch_profile(x: f64) -> f64 {
    if x <= 3.0 || x >= 7.0 {
        0.0
    } else if x < 4.0 {
        0.5 * (x - 3.0)
    } else if x <= 6.0 {
        0.5
    } else {
        0.5 * (7.0 - x)
    }
}

/// Notched bar `[0, 10] x [0, 2]` with symmetric V-notches between `x = 3` and `x = 7`.
///
/// Vertex `(i, j)` sits at index `i * (ny + 1) + j` with `x = 10 i / nx` and `y`
/// interpolated between the lower and upper profile. `nx` must be a multiple
/// of 10 so the notch corners are grid lines, and `ny` must be even so that
/// `y = 1` is a grid line. Boundary labels: `left`, `right`, `free`.
pub fn notched_bar(nx: usize, ny: usize) -> Result<Mesh, MeshError> {
    if nx == 0 || nx % 10 != 0 {
        return Err(MeshError::BadResolution("nx must be a positive multiple of 10"));
    }
    if ny == 0 || ny % 2 != 0 {
        return Err(MeshError::BadResolution("ny must be a positive even number"));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for i in 0..=nx {
        let x = 10.0 * i as f64 / nx as f64;
        let lo = notch_profile(x);
        let hi = 2.0 - lo;
        for j in 0..=ny {
            vertices.push([x, lo + (hi - lo) * j as f64 / ny as f64, 0.0]);
        }
    }
    Mesh::with_boundary_labels(2, vertices, split_quads(nx, ny), left_right_free(0.0, 10.0))
}

/// Rectangle `[0, lx] x [0, ly]` split into `2 nx ny` triangles. Labels: `left`, `right`, `free`.
pub fn box2d(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::BadResolution("box resolution must be positive"));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for i in 0..=nx {
        for j in 0..=ny {
            vertices.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64, 0.0]);
        }
    }
    Mesh::with_boundary_labels(2, vertices, split_quads(nx, ny), left_right_free(0.0, lx))
}

/// Box `[0, lx] x [0, ly] x [0, lz]`, every hexahedron split into six
/// tetrahedra sharing its main diagonal. Labels: `left`, `right`, `free`.
pub fn box3d(extent: [f64; 3], n: [usize; 3]) -> Result<Mesh, MeshError> {
    let [nx, ny, nz] = n;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(MeshError::BadResolution("box resolution must be positive"));
    }
    let id = |i: usize, j: usize, k: usize| (i * (ny + 1) + j) * (nz + 1) + k;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for i in 0..=nx {
        for j in 0..=ny {
            for k in 0..=nz {
                vertices.push([
                    extent[0] * i as f64 / nx as f64,
                    extent[1] * j as f64 / ny as f64,
                    extent[2] * k as f64 / nz as f64,
                ]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * nx * ny * nz);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                for perm in PERMS {
                    let mut pos = [i, j, k];
                    let mut tet = [id(i, j, k), 0, 0, 0];
                    for (s, &axis) in perm.iter().enumerate() {
                        pos[axis] += 1;
                        tet[s + 1] = id(pos[0], pos[1], pos[2]);
                    }
                    let pts = [vertices[tet[0]], vertices[tet[1]], vertices[tet[2]], vertices[tet[3]]];
                    if signed_volume(3, &pts) < 0.0 {
                        tet.swap(1, 2);
                    }
                    cells.push(tet);
                }
            }
        }
    }
    Mesh::with_boundary_labels(3, vertices, cells, left_right_free(0.0, extent[0]))
}
