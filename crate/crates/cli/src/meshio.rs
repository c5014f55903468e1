//! Plain-text mesh format.
//!
//! ```text
//! dim nv nc nf
//! x y [z]                 nv lines of coordinates
//! a b c [d]               nc lines of 0-based cell vertices
//! a b [c] label           nf lines of boundary facets with a label
//! ```
//!
//! Tokens are separated by ASCII whitespace. Labels are single tokens.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fracplast_core::mesh::BoundaryFacet;
use fracplast_core::{Mesh, MeshError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error("cannot read mesh {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("mesh line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid mesh: {0}")]
    Mesh(MeshError),
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshIoError {
    MeshIoError::Parse { line, message: message.into() }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), MeshIoError> {
        match self.inner.next() {
            Some((k, l)) => {
                self.last = k + 1;
                Ok((k + 1, l.split_ascii_whitespace().collect()))
            }
            None => Err(parse_err(self.last + 1, format!("unexpected end of file, expected {what}"))),
        }
    }
}

fn number<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, MeshIoError> {
    tok.parse().map_err(|_| parse_err(line, format!("cannot parse {what} '{tok}'")))
}

/// Parses mesh text; geometric validation is done by [`Mesh::new`].
pub fn parse_mesh(text: &str) -> Result<Mesh, MeshIoError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (ln, head) = lines.next_tokens("the header 'dim nv nc nf'")?;
    if head.len() != 4 {
        return Err(parse_err(ln, format!("header needs 4 integers 'dim nv nc nf', found {} tokens", head.len())));
    }
    let dim: usize = number(head[0], ln, "dimension")?;
    let nv: usize = number(head[1], ln, "vertex count")?;
    let nc: usize = number(head[2], ln, "cell count")?;
    let nf: usize = number(head[3], ln, "facet count")?;
    if dim != 2 && dim != 3 {
        return Err(parse_err(ln, format!("dimension must be 2 or 3, got {dim}")));
    }

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = lines.next_tokens("a vertex line")?;
        if t.len() != dim {
            return Err(parse_err(ln, format!("vertex needs {dim} coordinates, found {}", t.len())));
        }
        let mut x = [0.0; 3];
        for (k, tok) in t.iter().enumerate() {
            x[k] = number(tok, ln, "coordinate")?;
        }
        vertices.push(x);
    }

    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, t) = lines.next_tokens("a cell line")?;
        if t.len() != dim + 1 {
            return Err(parse_err(ln, format!("cell needs {} vertex indices, found {}", dim + 1, t.len())));
        }
        let mut c = [0usize; 4];
        for (k, tok) in t.iter().enumerate() {
            c[k] = index(tok, ln, nv)?;
        }
        cells.push(c);
    }

    let mut labels: Vec<String> = Vec::new();
    let mut facets = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, t) = lines.next_tokens("a facet line")?;
        if t.len() != dim + 1 {
            return Err(parse_err(ln, format!("facet needs {dim} vertex indices and a label, found {} tokens", t.len())));
        }
        let mut v = [usize::MAX; 3];
        for k in 0..dim {
            v[k] = index(t[k], ln, nv)?;
        }
        let name = t[dim];
        if name.parse::<f64>().is_ok() {
            return Err(parse_err(ln, format!("facet label '{name}' must not be numeric")));
        }
        let label = match labels.iter().position(|l| l == name) {
            Some(i) => i,
            None => {
                labels.push(name.to_string());
                labels.len() - 1
            }
        };
        facets.push(BoundaryFacet { vertices: v, label });
    }

    for (k, l) in lines.inner {
        if !l.trim().is_empty() {
            return Err(parse_err(k + 1, "unexpected content after the last facet"));
        }
    }
    Mesh::new(dim, vertices, cells, facets, labels).map_err(MeshIoError::Mesh)
}

fn index(tok: &str, line: usize, nv: usize) -> Result<usize, MeshIoError> {
    let v: usize = number(tok, line, "vertex index")?;
    if v >= nv {
        return Err(parse_err(line, format!("vertex index {v} out of range (nv = {nv})")));
    }
    Ok(v)
}

pub fn read_mesh_file(path: &Path) -> Result<Mesh, MeshIoError> {
    let text = std::fs::read_to_string(path).map_err(|source| MeshIoError::Io { path: path.to_path_buf(), source })?;
    parse_mesh(&text)
}

/// Serialises a mesh; coordinates use the shortest representation that round-trips.
pub fn format_mesh(mesh: &Mesh) -> String {
    let dim = mesh.dim();
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {} {}", dim, mesh.n_vertices(), mesh.n_cells(), mesh.facets().len());
    for x in mesh.vertices() {
        let coords: Vec<String> = x[..dim].iter().map(|c| format!("{c:?}")).collect();
        let _ = writeln!(s, "{}", coords.join(" "));
    }
    for c in 0..mesh.n_cells() {
        let ids: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    for k in 0..mesh.facets().len() {
        let ids: Vec<String> = mesh.facet_vertices(k).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {}", ids.join(" "), mesh.label_name(k));
    }
    s
}
