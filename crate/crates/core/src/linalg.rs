//! Dense kernels for local systems, compressed-row sparse matrices, a banded LU
//! with bandwidth-reducing ordering, and restarted GMRES with ILU(0).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math::sqrt;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Pivot of magnitude `pivot` at elimination step `row`.
    Singular { row: usize, pivot: f64 },
    /// The iterative solver stopped with relative residual `residual`.
    NotConverged { iterations: usize, residual: f64 },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Singular { row, pivot } => write!(f, "singular matrix: pivot {pivot:.3e} at row {row}"),
            LinalgError::NotConverged { iterations, residual } => {
                write!(f, "iterative solver not converged after {iterations} iterations (residual {residual:.3e})")
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

/// Solves the dense row-major system `a x = b` in place by LU with partial pivoting.
/// On return `b` holds `x`; `a` is overwritten by its factors.
pub fn solve_dense(a: &mut [f64], b: &mut [f64]) -> Result<(), LinalgError> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for k in 0..n {
        let (mut piv, mut best) = (k, a[k * n + k].abs());
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                piv = i;
                best = v;
            }
        }
        if !(best > 1e-14 * scale) {
            return Err(LinalgError::Singular { row: k, pivot: best });
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let d = a[k * n + k];
        for i in k + 1..n {
            let l = a[i * n + k] / d;
            if l == 0.0 {
                continue;
            }
            a[i * n + k] = l;
            for j in k + 1..n {
                a[i * n + j] -= l * a[k * n + j];
            }
            b[i] -= l * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k * n + j] * b[j];
        }
        b[k] = s / a[k * n + k];
    }
    Ok(())
}

/// Eigenvalues of a dense symmetric row-major matrix (cyclic Jacobi), ascending.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s
    };
    let total: f64 = m.iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        if off(&m) <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    ev
}

/// Smallest eigenvalue of the symmetric part `(A + Aᵀ)/2` of a dense square matrix.
pub fn min_sym_part_eigenvalue(a: &[f64], n: usize) -> f64 {
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
        }
    }
    sym_eigenvalues(&s, n)[0]
}

/// Square compressed-row matrix with a fixed sparsity pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the pattern from per-row column lists (duplicates allowed).
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        CsrMatrix { n, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Storage slot of entry `(row, col)`, if it is in the pattern.
    pub fn slot(&self, row: usize, col: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[a..b].binary_search(&col).ok().map(|k| a + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.slot(row, col).map_or(0.0, |s| self.values[s])
    }

    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let s = self.slot(row, col).expect("entry outside sparsity pattern");
        self.values[s] += v;
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr = s;
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                d[r * self.n + self.col_idx[k]] = self.values[k];
            }
        }
        d
    }

    /// Half-bandwidth under the permutation `inv` (old index -> new index).
    pub fn bandwidth(&self, inv: Option<&[usize]>) -> usize {
        let map = |i: usize| inv.map_or(i, |p| p[i]);
        let mut bw = 0;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (a, b) = (map(r), map(self.col_idx[k]));
                bw = bw.max(a.abs_diff(b));
            }
        }
        bw
    }
}

/// Reverse Cuthill–McKee ordering of the (structurally symmetric) pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let degree: Vec<usize> = (0..n).map(|r| a.row_ptr[r + 1] - a.row_ptr[r]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut nbrs: Vec<usize> = Vec::new();

    let bfs_levels = |start: usize, visited: &[bool]| -> (usize, usize) {
        // Returns (eccentricity, a minimum-degree node of the last level).
        let mut level = vec![usize::MAX; n];
        let mut q = VecDeque::new();
        level[start] = 0;
        q.push_back(start);
        let mut last = start;
        while let Some(v) = q.pop_front() {
            for k in a.row_ptr[v]..a.row_ptr[v + 1] {
                let w = a.col_idx[k];
                if level[w] == usize::MAX && !visited[w] {
                    level[w] = level[v] + 1;
                    q.push_back(w);
                    if level[w] > level[last] || (level[w] == level[last] && degree[w] < degree[last]) {
                        last = w;
                    }
                }
            }
        }
        (level[last], last)
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // Pseudo-peripheral start node.
        let mut start = seed;
        let (mut ecc, mut far) = bfs_levels(start, &visited);
        for _ in 0..8 {
            let (e2, f2) = bfs_levels(far, &visited);
            if e2 <= ecc {
                break;
            }
            start = far;
            ecc = e2;
            far = f2;
        }
        let mut q = VecDeque::new();
        visited[start] = true;
        q.push_back(start);
        while let Some(v) = q.pop_front() {
            order.push(v);
            nbrs.clear();
            for k in a.row_ptr[v]..a.row_ptr[v + 1] {
                let w = a.col_idx[k];
                if !visited[w] {
                    visited[w] = true;
                    nbrs.push(w);
                }
            }
            nbrs.sort_by_key(|&w| (degree[w], w));
            q.extend(nbrs.iter().copied());
        }
    }
    order.reverse();
    order
}

fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Band LU factorisation without pivoting of a permuted sparse matrix.
///
/// Suited to matrices whose symmetric part is positive definite, for which
/// elimination without pivoting is well defined.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    bw: usize,
    perm: Vec<usize>,
    inv: Vec<usize>,
    band: Vec<f64>,
}

impl BandLu {
    /// Picks the identity or reverse Cuthill–McKee ordering, whichever has the
    /// smaller bandwidth, for matrices with the pattern of `a`.
    pub fn plan(a: &CsrMatrix) -> Self {
        let n = a.n();
        let rcm = reverse_cuthill_mckee(a);
        let rcm_inv = invert_permutation(&rcm);
        let (perm, inv) = if a.bandwidth(Some(&rcm_inv)) < a.bandwidth(None) {
            (rcm, rcm_inv)
        } else {
            let id: Vec<usize> = (0..n).collect();
            (id.clone(), id)
        };
        let bw = a.bandwidth(Some(&inv));
        BandLu { n, bw, perm, inv, band: Vec::new() }
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn width(&self) -> usize {
        2 * self.bw + 1
    }

    /// Factorises `a`, which must share the pattern used in [`BandLu::plan`].
    pub fn factor(&mut self, a: &CsrMatrix) -> Result<(), LinalgError> {
        let (n, bw, w) = (self.n, self.bw, self.width());
        self.band.clear();
        self.band.resize(n * w, 0.0);
        let mut scale = 0.0f64;
        for r in 0..n {
            let nr = self.inv[r];
            for k in a.row_ptr[r]..a.row_ptr[r + 1] {
                let nc = self.inv[a.col_idx[k]];
                self.band[nr * w + (nc + bw - nr)] = a.values[k];
                scale = scale.max(a.values[k].abs());
            }
        }
        let band = &mut self.band;
        for k in 0..n {
            let pivot = band[k * w + bw];
            if !(pivot.abs() > 1e-14 * scale) {
                return Err(LinalgError::Singular { row: self.perm[k], pivot });
            }
            let jmax = (k + bw).min(n - 1);
            for i in k + 1..=jmax {
                let ik = i * w + (k + bw - i);
                let l = band[ik] / pivot;
                if l == 0.0 {
                    continue;
                }
                band[ik] = l;
                for j in k + 1..=jmax {
                    band[i * w + (j + bw - i)] -= l * band[k * w + (j + bw - k)];
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` with the stored factors.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.width());
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for j in lo..i {
                s -= self.band[i * w + (j + bw - i)] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = y[i];
            for j in i + 1..=hi {
                s -= self.band[i * w + (j + bw - i)] * y[j];
            }
            y[i] = s / self.band[i * w + bw];
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

/// Incomplete LU with zero fill on the pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self, LinalgError> {
        let mut lu = a.clone();
        let n = lu.n;
        let diag: Vec<usize> = (0..n)
            .map(|r| lu.slot(r, r).ok_or(LinalgError::Singular { row: r, pivot: 0.0 }))
            .collect::<Result<_, _>>()?;
        for i in 1..n {
            for kk in lu.row_ptr[i]..diag[i] {
                let k = lu.col_idx[kk];
                let pivot = lu.values[diag[k]];
                if pivot == 0.0 {
                    return Err(LinalgError::Singular { row: k, pivot });
                }
                let l = lu.values[kk] / pivot;
                lu.values[kk] = l;
                for jj in kk + 1..lu.row_ptr[i + 1] {
                    let j = lu.col_idx[jj];
                    if let Some(s) = lu.slot(k, j) {
                        lu.values[jj] -= l * lu.values[s];
                    }
                }
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let lu = &self.lu;
        let n = lu.n;
        for i in 0..n {
            let mut s = r[i];
            for k in lu.row_ptr[i]..self.diag[i] {
                s -= lu.values[k] * z[lu.col_idx[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.diag[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.values[k] * z[lu.col_idx[k]];
            }
            z[i] = s / lu.values[self.diag[i]];
        }
    }
}

/// Right-preconditioned restarted GMRES. Returns the number of inner iterations.
pub fn gmres(
    a: &CsrMatrix,
    precond: &Ilu0,
    b: &[f64],
    x: &mut [f64],
    restart: usize,
    rel_tol: f64,
    max_iter: usize,
) -> Result<usize, LinalgError> {
    let n = a.n();
    let m = restart.max(1);
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut total = 0;
    let mut rel = f64::INFINITY;
    while total < max_iter {
        a.mul_vec(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm2(&r);
        rel = beta / bnorm;
        if rel <= rel_tol {
            return Ok(total);
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            precond.apply(&basis[k], &mut z);
            a.mul_vec(&z, &mut w);
            for (j, v) in basis.iter().enumerate() {
                let hjk = dot(&w, v);
                h[j][k] = hjk;
                for i in 0..n {
                    w[i] -= hjk * v[i];
                }
            }
            let hn = norm2(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = sqrt(h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]);
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            total += 1;
            rel = g[k + 1].abs() / bnorm;
            if rel <= rel_tol || hn == 0.0 || total >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // Back substitution for the Krylov coefficients.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                update[i] += yj * basis[j][i];
            }
        }
        precond.apply(&update, &mut z);
        for i in 0..n {
            x[i] += z[i];
        }
        if k_used == 0 {
            break;
        }
    }
    a.mul_vec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let final_rel = norm2(&r) / bnorm;
    if final_rel <= rel_tol * 10.0 {
        Ok(total)
    } else {
        Err(LinalgError::NotConverged { iterations: total, residual: final_rel.min(rel.max(final_rel)) })
    }
}
