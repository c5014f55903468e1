//! Symmetric second-order tensors, fourth-order operators and isotropic elasticity.
//!
//! Symmetric tensors are stored packed (upper triangle, Voigt order). Inner
//! products run over the full `d x d` index set, so every stored off-diagonal
//! entry carries weight 2.

use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::math::sqrt;

/// Packed index of `(i, j)` for `d = 2`: `[11, 22, 12]`.
const IDX2: [[usize; 3]; 3] = [[0, 2, 9], [2, 1, 9], [9, 9, 9]];
/// Packed index of `(i, j)` for `d = 3`: `[11, 22, 33, 23, 13, 12]`.
const IDX3: [[usize; 3]; 3] = [[0, 5, 4], [5, 1, 3], [4, 3, 2]];

/// Stored `(i, j)` pairs in packed order.
const PAIRS2: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];
const PAIRS3: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

#[inline]
fn check_dim(dim: usize) {
    assert!(dim == 2 || dim == 3, "tensor dimension must be 2 or 3, got {dim}");
}

/// Number of packed entries of a symmetric `dim x dim` tensor.
#[inline]
pub const fn packed_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Symmetric `d x d` tensor, `d` in {2, 3}.
#[derive(Clone, Copy, PartialEq)]
pub struct SymTensor {
    dim: u8,
    v: [f64; 6],
}

/// Returned by the checked operations when two tensors of different dimension meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionMismatch {
    pub left: usize,
    pub right: usize,
}

impl fmt::Display for DimensionMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dimension mismatch: {} vs {}", self.left, self.right)
    }
}

impl SymTensor {
    pub fn zeros(dim: usize) -> Self {
        check_dim(dim);
        SymTensor { dim: dim as u8, v: [0.0; 6] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t.set(i, i, 1.0);
        }
        t
    }

    /// 2D tensor from `(xx, yy, xy)`.
    pub fn new2(xx: f64, yy: f64, xy: f64) -> Self {
        SymTensor { dim: 2, v: [xx, yy, xy, 0.0, 0.0, 0.0] }
    }

    /// 3D tensor from `(xx, yy, zz, yz, xz, xy)`.
    pub fn new3(xx: f64, yy: f64, zz: f64, yz: f64, xz: f64, xy: f64) -> Self {
        SymTensor { dim: 3, v: [xx, yy, zz, yz, xz, xy] }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut t = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            t.set(i, i, x);
        }
        t
    }

    /// Builds a tensor from packed components in the canonical order.
    pub fn from_packed(dim: usize, packed: &[f64]) -> Self {
        check_dim(dim);
        assert_eq!(packed.len(), packed_len(dim));
        let mut v = [0.0; 6];
        v[..packed.len()].copy_from_slice(packed);
        SymTensor { dim: dim as u8, v }
    }

    /// Builds a tensor from the upper triangle of a row-major `dim x dim` matrix.
    pub fn from_upper(dim: usize, rows: &[[f64; 3]]) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                t.set(i, j, rows[i][j]);
            }
        }
        t
    }

    /// Symmetric part of a full `dim x dim` matrix.
    pub fn sym_of(dim: usize, m: &[[f64; 3]; 3]) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                t.set(i, j, 0.5 * (m[i][j] + m[j][i]));
            }
        }
        t
    }

    /// `sym(a ⊗ b)` for vectors.
    pub fn sym_outer(dim: usize, a: &[f64], b: &[f64]) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                t.set(i, j, 0.5 * (a[i] * b[j] + a[j] * b[i]));
            }
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn len(&self) -> usize {
        packed_len(self.dim())
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn packed(&self) -> &[f64] {
        &self.v[..self.len()]
    }

    #[inline]
    pub fn packed_mut(&mut self) -> &mut [f64] {
        let n = self.len();
        &mut self.v[..n]
    }

    /// `(i, j)` index pair of the `p`-th packed entry.
    #[inline]
    pub fn pair(dim: usize, p: usize) -> (usize, usize) {
        if dim == 2 {
            PAIRS2[p]
        } else {
            PAIRS3[p]
        }
    }

    /// Packed position of `(i, j)`.
    #[inline]
    pub fn index(dim: usize, i: usize, j: usize) -> usize {
        let p = if dim == 2 { IDX2[i][j] } else { IDX3[i][j] };
        debug_assert!(p < packed_len(dim), "index ({i},{j}) out of range for d={dim}");
        p
    }

    /// Weight of the `p`-th packed entry in the full-index contraction.
    #[inline]
    pub fn weight(dim: usize, p: usize) -> f64 {
        if p < dim {
            1.0
        } else {
            2.0
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.v[Self::index(self.dim(), i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        let p = Self::index(self.dim(), i, j);
        self.v[p] = x;
    }

    pub fn to_full(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        let d = self.dim();
        for (i, row) in m.iter_mut().enumerate().take(d) {
            for (j, x) in row.iter_mut().enumerate().take(d) {
                *x = self.get(i, j);
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        self.v[..self.dim()].iter().sum()
    }

    /// `t - tr(t)/d * id`.
    pub fn dev(&self) -> Self {
        let mut out = *self;
        let p = self.trace() / self.dim() as f64;
        for x in &mut out.v[..self.dim()] {
            *x -= p;
        }
        out
    }

    /// Frobenius inner product `a : b` over all `d^2` index pairs.
    #[inline]
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "tensor dimension mismatch");
        let d = self.dim();
        let n = self.len();
        let mut diag = 0.0;
        for p in 0..d {
            diag += self.v[p] * other.v[p];
        }
        let mut off = 0.0;
        for p in d..n {
            off += self.v[p] * other.v[p];
        }
        diag + 2.0 * off
    }

    pub fn checked_inner(&self, other: &Self) -> Result<f64, DimensionMismatch> {
        if self.dim != other.dim {
            return Err(DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self.inner(other))
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        sqrt(self.norm_sq())
    }

    /// Largest absolute stored entry.
    pub fn max_abs(&self) -> f64 {
        self.packed().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for x in out.packed_mut() {
            *x *= s;
        }
        out
    }

    /// `self += s * other`.
    #[inline]
    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!(self.dim, other.dim, "tensor dimension mismatch");
        let n = self.len();
        for p in 0..n {
            self.v[p] += s * other.v[p];
        }
    }

    /// `t · g` for a column vector `g`.
    pub fn mul_vec(&self, g: &[f64]) -> [f64; 3] {
        let d = self.dim();
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate().take(d) {
            *o = (0..d).map(|j| self.get(i, j) * g[j]).sum();
        }
        out
    }

    /// Unit tensor `e^(ij)` of the packed basis: ones at `(i, j)` and `(j, i)`.
    pub fn basis(dim: usize, p: usize) -> Self {
        let mut t = Self::zeros(dim);
        t.v[p] = 1.0;
        t
    }

    pub fn is_finite(&self) -> bool {
        self.packed().iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for SymTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymTensor{}{:?}", self.dim, self.packed())
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    fn add(mut self, rhs: SymTensor) -> SymTensor {
        self.axpy(1.0, &rhs);
        self
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    fn sub(mut self, rhs: SymTensor) -> SymTensor {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl AddAssign for SymTensor {
    fn add_assign(&mut self, rhs: SymTensor) {
        self.axpy(1.0, &rhs);
    }
}

impl SubAssign for SymTensor {
    fn sub_assign(&mut self, rhs: SymTensor) {
        self.axpy(-1.0, &rhs);
    }
}

impl Mul<f64> for SymTensor {
    type Output = SymTensor;
    fn mul(self, s: f64) -> SymTensor {
        self.scale(s)
    }
}

impl Mul<SymTensor> for f64 {
    type Output = SymTensor;
    fn mul(self, t: SymTensor) -> SymTensor {
        t.scale(self)
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        self.scale(-1.0)
    }
}

/// Linear isotropic hardening elasto-plastic material constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Shear-like modulus.
    pub mu: f64,
    /// Bulk-like modulus.
    pub kappa: f64,
    /// Initial yield stress.
    pub y0: f64,
    /// Kinematic hardening modulus.
    pub k1: f64,
    /// Isotropic hardening modulus.
    pub k2: f64,
}

/// Non-fatal checks on a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDiagnostics {
    /// `max{2 mu, kappa d} / (k1 + k2)`.
    pub hardening_ratio: f64,
    /// `hardening_ratio < (sqrt(5) - 1) / 2`: every plastic tangent is positive definite.
    pub tangent_definite: bool,
    /// `kappa - 2 mu / d`; `S C` is positive definite when this is non-negative.
    pub bulk_margin: f64,
}

impl ParamDiagnostics {
    pub fn sc_definite(&self) -> bool {
        self.bulk_margin >= 0.0
    }

    /// `kappa == 2 mu / d` up to rounding: definiteness of `S C` holds only at the boundary.
    pub fn bulk_boundary_case(&self, params: &MaterialParams) -> bool {
        self.bulk_margin.abs() <= 1e-12 * params.kappa
    }
}

/// Golden-ratio threshold for the hardening ratio.
pub const HARDENING_RATIO_LIMIT: f64 = 0.618_033_988_749_894_8;

impl MaterialParams {
    /// Validates that every constant is finite and strictly positive.
    pub fn new(mu: f64, kappa: f64, y0: f64, k1: f64, k2: f64) -> Result<Self, &'static str> {
        let p = MaterialParams { mu, kappa, y0, k1, k2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        let fields = [
            (self.mu, "mu must be positive"),
            (self.kappa, "kappa must be positive"),
            (self.y0, "y0 must be positive"),
            (self.k1, "k1 must be positive"),
            (self.k2, "k2 must be positive"),
        ];
        for (x, msg) in fields {
            if !(x.is_finite() && x > 0.0) {
                return Err(msg);
            }
        }
        Ok(())
    }

    pub fn diagnostics(&self, dim: usize) -> ParamDiagnostics {
        let d = dim as f64;
        let ratio = (2.0 * self.mu).max(self.kappa * d) / (self.k1 + self.k2);
        ParamDiagnostics {
            hardening_ratio: ratio,
            tangent_definite: ratio < HARDENING_RATIO_LIMIT,
            bulk_margin: self.kappa - 2.0 * self.mu / d,
        }
    }

    /// `C e = 2 mu dev(e) + kappa tr(e) id`.
    pub fn apply_c(&self, e: &SymTensor) -> SymTensor {
        let tr = e.trace();
        let mut out = e.dev().scale(2.0 * self.mu);
        for p in 0..e.dim() {
            out.v[p] += self.kappa * tr;
        }
        out
    }

    /// `C^-1 s = dev(s) / (2 mu) + tr(s) / (kappa d^2) id`.
    pub fn apply_c_inverse(&self, s: &SymTensor) -> SymTensor {
        let d = s.dim() as f64;
        let tr = s.trace();
        let mut out = s.dev().scale(0.5 / self.mu);
        for p in 0..s.dim() {
            out.v[p] += tr / (self.kappa * d * d);
        }
        out
    }

    /// Fourth-order elasticity tensor.
    pub fn elasticity(&self, dim: usize) -> Tensor4 {
        let d = dim as f64;
        let lam = self.kappa - 2.0 * self.mu / d;
        Tensor4::from_fn(dim, |i, j, k, l| {
            let dik = (i == k) as u8 as f64;
            let djl = (j == l) as u8 as f64;
            let dil = (i == l) as u8 as f64;
            let djk = (j == k) as u8 as f64;
            let dij = (i == j) as u8 as f64;
            let dkl = (k == l) as u8 as f64;
            self.mu * (dik * djl + dil * djk) + lam * dij * dkl
        })
    }
}

/// Dense fourth-order tensor over the full `d^4` index set.
#[derive(Clone, PartialEq)]
pub struct Tensor4 {
    dim: u8,
    data: [f64; 81],
}

impl fmt::Debug for Tensor4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor4<{}>", self.dim)
    }
}

impl Tensor4 {
    #[inline]
    fn at(dim: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * dim + j) * dim + k) * dim + l
    }

    pub fn zeros(dim: usize) -> Self {
        check_dim(dim);
        Tensor4 { dim: dim as u8, data: [0.0; 81] }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        t.data[Self::at(dim, i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// Fourth-order identity `Id_ijkl = δ_ik δ_jl`.
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j, k, l| ((i == k) && (j == l)) as u8 as f64)
    }

    /// `(a ⊗ b)_ijkl = a_ij b_kl`.
    pub fn outer(a: &SymTensor, b: &SymTensor) -> Self {
        assert_eq!(a.dim(), b.dim());
        Self::from_fn(a.dim(), |i, j, k, l| a.get(i, j) * b.get(k, l))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[Self::at(self.dim(), i, j, k, l)]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(other.data.iter()) {
            *x += y;
        }
        out
    }

    /// `(T t)_ij = Σ_kl T_ijkl t_kl`, symmetrised.
    pub fn apply(&self, t: &SymTensor) -> SymTensor {
        let d = self.dim();
        assert_eq!(d, t.dim());
        let full = t.to_full();
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate().take(d) {
            for (j, x) in row.iter_mut().enumerate().take(d) {
                let mut s = 0.0;
                for (k, frow) in full.iter().enumerate().take(d) {
                    for (l, &fv) in frow.iter().enumerate().take(d) {
                        s += self.get(i, j, k, l) * fv;
                    }
                }
                *x = s;
            }
        }
        SymTensor::sym_of(d, &m)
    }

    /// `(A B)_ijpq = Σ_kl A_ijkl B_klpq`.
    pub fn compose(&self, other: &Self) -> Self {
        let d = self.dim();
        assert_eq!(d, other.dim());
        Self::from_fn(d, |i, j, p, q| {
            let mut s = 0.0;
            for k in 0..d {
                for l in 0..d {
                    s += self.get(i, j, k, l) * other.get(k, l, p, q);
                }
            }
            s
        })
    }

    /// Row-major `d^2 x d^2` matrix with row `(i, j)` and column `(k, l)`.
    pub fn to_matrix(&self) -> alloc::vec::Vec<f64> {
        self.data[..self.dim().pow(4)].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_inner(a: &SymTensor, b: &SymTensor) -> f64 {
        let (fa, fb) = (a.to_full(), b.to_full());
        let d = a.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += fa[i][j] * fb[i][j];
            }
        }
        s
    }

    fn pseudo(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_tensor(dim: usize, seed: &mut u64) -> SymTensor {
        let n = packed_len(dim);
        let vals: alloc::vec::Vec<f64> = (0..n).map(|_| pseudo(seed) * 3.0).collect();
        SymTensor::from_packed(dim, &vals)
    }

    #[test]
    fn dev_of_identity_vanishes() {
        for d in [2, 3] {
            assert_eq!(SymTensor::identity(d).dev().norm(), 0.0);
        }
    }

    #[test]
    fn dev_of_diag_2d() {
        let t = SymTensor::diag(&[3.0, 1.0]).dev();
        assert_eq!(t, SymTensor::diag(&[1.0, -1.0]));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(SymTensor::diag(&[1.0, 2.0, 3.0]).trace(), 6.0);
        assert_eq!(SymTensor::zeros(3).trace(), 0.0);
    }

    #[test]
    fn dev_is_traceless_projection() {
        let mut seed = 7;
        for d in [2, 3] {
            for _ in 0..100 {
                let t = random_tensor(d, &mut seed);
                let dv = t.dev();
                assert!(dv.trace().abs() <= 1e-14 * t.norm().max(1.0));
                assert!((dv.dev() - dv).norm() <= 1e-14 * t.norm().max(1.0));
            }
        }
    }

    #[test]
    fn inner_counts_off_diagonal_twice() {
        assert_eq!(SymTensor::identity(3).inner(&SymTensor::identity(3)), 3.0);
        let a = SymTensor::new2(0.0, 0.0, 1.0);
        assert!((a.norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn inner_matches_dense_contraction() {
        let mut seed = 11;
        for d in [2, 3] {
            for _ in 0..100 {
                let a = random_tensor(d, &mut seed);
                let b = random_tensor(d, &mut seed);
                assert!((a.inner(&b) - dense_inner(&a, &b)).abs() <= 1e-14 * a.norm() * b.norm());
            }
        }
    }

    #[test]
    fn checked_inner_rejects_mixed_dims() {
        let e = SymTensor::zeros(2).checked_inner(&SymTensor::zeros(3)).unwrap_err();
        assert_eq!(e, DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn elasticity_of_identity_table1() {
        let p = MaterialParams::new(55000.0, 55000.0, 10000.0, 110000.0, 110000.0).unwrap();
        let s = p.apply_c(&SymTensor::identity(2));
        assert_eq!(s, SymTensor::diag(&[110000.0, 110000.0]));
        let dev = SymTensor::new2(1.0, -1.0, 0.5);
        assert_eq!(p.apply_c(&dev), dev.scale(2.0 * p.mu));
    }

    #[test]
    fn elasticity_inverse_round_trip() {
        let p = MaterialParams::new(120000.0, 80000.0, 50000.0, 2e5, 2e5).unwrap();
        let mut seed = 3;
        for d in [2, 3] {
            for _ in 0..100 {
                let e = random_tensor(d, &mut seed);
                let back = p.apply_c_inverse(&p.apply_c(&e));
                assert!((back - e).norm() <= 1e-12 * e.norm());
            }
        }
    }

    #[test]
    fn elasticity_symmetric_and_definite() {
        let p = MaterialParams::new(55000.0, 30000.0, 1.0, 1.0, 1.0).unwrap();
        let mut seed = 5;
        for d in [2, 3] {
            for _ in 0..100 {
                let a = random_tensor(d, &mut seed);
                let b = random_tensor(d, &mut seed);
                let ab = a.inner(&p.apply_c(&b));
                let ba = b.inner(&p.apply_c(&a));
                assert!((ab - ba).abs() <= 1e-12 * a.norm() * b.norm() * p.mu);
                let dv = a.dev();
                let lower = 2.0 * p.mu * dv.norm_sq() + p.kappa * a.trace() * a.trace();
                let e = a.inner(&p.apply_c(&a));
                assert!(e > 0.0);
                assert!((e - lower).abs() <= 1e-9 * e);
            }
        }
    }

    #[test]
    fn tensor4_elasticity_matches_packed_map() {
        let p = MaterialParams::new(3.0, 5.0, 1.0, 1.0, 1.0).unwrap();
        let mut seed = 9;
        for d in [2, 3] {
            let c4 = p.elasticity(d);
            for _ in 0..20 {
                let e = random_tensor(d, &mut seed);
                assert!((c4.apply(&e) - p.apply_c(&e)).norm() < 1e-12 * e.norm() * 10.0);
            }
            let id = Tensor4::identity(d);
            let e = random_tensor(d, &mut seed);
            assert_eq!(id.apply(&e), e);
        }
    }

    #[test]
    fn params_diagnostics_table_values() {
        let t1 = MaterialParams::new(55000.0, 55000.0, 10000.0, 110000.0, 110000.0).unwrap();
        let d1 = t1.diagnostics(2);
        assert_eq!(d1.hardening_ratio, 0.5);
        assert!(d1.tangent_definite && d1.sc_definite());
        assert!(d1.bulk_boundary_case(&t1));
        let t2 = MaterialParams::new(120000.0, 80000.0, 50000.0, 200000.0, 200000.0).unwrap();
        let d2 = t2.diagnostics(3);
        assert!((d2.hardening_ratio - 0.6).abs() < 1e-15);
        assert!(d2.tangent_definite);
        assert!(d2.bulk_boundary_case(&t2));
        assert!(MaterialParams::new(1.0, 0.0, 1.0, 1.0, 1.0).is_err());
    }
}
