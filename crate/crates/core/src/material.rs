//! Constitutive update at a single quadrature point.
//!
//! The flow direction of the plastic strain is the normalised fractional
//! stress gradient of the yield function, frozen at the previous state for the
//! explicit scheme and evaluated at the unknown state for the implicit scheme.

use core::fmt;

use crate::fracdiff::{normalized_frac_grad_f, FracConfig, FracError};
use crate::linalg::{solve_dense, sym_eigenvalues};
use crate::math::sqrt;
use crate::tensors::{packed_len, MaterialParams, SymTensor, Tensor4};

/// Relative band around `f = 0` inside which the plastic tangent is returned.
pub const YIELD_TIE_TOL: f64 = 1e-10;

/// Relative size `|dev(σ + χ1)| / Y0` below which the classical gradient is undefined.
pub const DEGENERATE_DEV: f64 = 1e-12;

/// Maximum local Newton iterations of the implicit update.
pub const IMPLICIT_MAX_ITER: usize = 50;

/// Relative finite-difference step (times `Y0`) for the derivative of the flow direction.
pub const FLOW_FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum MaterialError {
    Frac(FracError),
    /// `|dev(σ + χ1)|` vanished where a yield normal was required.
    DegenerateGradient { dev_norm: f64 },
    /// The denominator of the plastic multiplier is not positive.
    NonpositiveDenominator { denominator: f64 },
    MaxIterations { iterations: usize, residual: f64 },
    SingularJacobian,
}

impl From<FracError> for MaterialError {
    fn from(e: FracError) -> Self {
        MaterialError::Frac(e)
    }
}

impl fmt::Display for MaterialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaterialError::Frac(e) => write!(f, "{e}"),
            MaterialError::DegenerateGradient { dev_norm } => {
                write!(f, "yield normal undefined: |dev(sigma + chi1)| = {dev_norm:.3e}")
            }
            MaterialError::NonpositiveDenominator { denominator } => {
                write!(f, "plastic multiplier denominator {denominator:.6e} is not positive")
            }
            MaterialError::MaxIterations { iterations, residual } => {
                write!(f, "local Newton did not converge in {iterations} iterations (residual {residual:.3e})")
            }
            MaterialError::SingularJacobian => write!(f, "singular local Jacobian"),
        }
    }
}

/// History variables at one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState {
    pub sigma: SymTensor,
    pub eps_p: SymTensor,
    pub chi1: SymTensor,
    /// Isotropic hardening force, never positive.
    pub chi2: f64,
}

impl PointState {
    pub fn zeros(dim: usize) -> Self {
        PointState { sigma: SymTensor::zeros(dim), eps_p: SymTensor::zeros(dim), chi1: SymTensor::zeros(dim), chi2: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// Kinematic hardening variable `ξ1 = -χ1 / k1`.
    pub fn xi1(&self, params: &MaterialParams) -> SymTensor {
        self.chi1.scale(-1.0 / params.k1)
    }

    /// Isotropic hardening variable `ξ2 = -χ2 / k2`.
    pub fn xi2(&self, params: &MaterialParams) -> f64 {
        -self.chi2 / params.k2
    }

    /// Equivalent stress `|dev σ|`.
    pub fn eq_stress(&self) -> f64 {
        self.sigma.dev().norm()
    }
}

/// `f(σ, χ) = |dev(σ + χ1)| + χ2 - Y0`.
pub fn yield_f(sigma: &SymTensor, chi1: &SymTensor, chi2: f64, params: &MaterialParams) -> f64 {
    (*sigma + *chi1).dev().norm() + chi2 - params.y0
}

fn unit_dev(sigma: &SymTensor, chi1: &SymTensor, params: &MaterialParams) -> Result<(SymTensor, f64), MaterialError> {
    let dev = (*sigma + *chi1).dev();
    let norm = dev.norm();
    if !(norm >= DEGENERATE_DEV * params.y0) {
        return Err(MaterialError::DegenerateGradient { dev_norm: norm });
    }
    Ok((dev.scale(1.0 / norm), norm))
}

/// `∂σ f = dev(σ + χ1) / |dev(σ + χ1)|`, which is also `∂χ1 f`.
pub fn grad_f_sigma(sigma: &SymTensor, chi1: &SymTensor, params: &MaterialParams) -> Result<SymTensor, MaterialError> {
    unit_dev(sigma, chi1, params).map(|(n, _)| n)
}

/// `∂²σ f = (Id - id⊗id/d)/|D| - D⊗D/|D|³` with `D = dev(σ + χ1)`.
pub fn hess_f_sigma(sigma: &SymTensor, chi1: &SymTensor, params: &MaterialParams) -> Result<Tensor4, MaterialError> {
    let d = sigma.dim();
    let (n, norm) = unit_dev(sigma, chi1, params)?;
    let id = SymTensor::identity(d);
    let proj = Tensor4::identity(d).add(&Tensor4::outer(&id, &id).scale(-1.0 / d as f64));
    Ok(proj.add(&Tensor4::outer(&n, &n).scale(-1.0)).scale(1.0 / norm))
}

/// `∂²σ f : v` from the unit normal `n` and `|D|`, without forming the fourth-order tensor.
#[inline]
fn hess_apply(n: &SymTensor, norm: f64, v: &SymTensor) -> SymTensor {
    let mut out = v.dev();
    out.axpy(-n.inner(v), n);
    out.scale(1.0 / norm)
}

/// Gradients of the previous state that stay fixed during one explicit step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrevGradients {
    /// Normalised fractional gradient `D̂^α f` at the previous state.
    pub flow: SymTensor,
    /// Classical normal `∂χ1 f` at the previous state.
    pub normal: SymTensor,
}

/// Either the previous-state gradients or the reason they do not exist. The
/// error only matters if a plastic step actually needs them.
pub type PrevFlow = Result<PrevGradients, MaterialError>;

impl PrevGradients {
    pub fn compute(prev: &PointState, params: &MaterialParams, cfg: &FracConfig) -> PrevFlow {
        let flow = normalized_frac_grad_f(&prev.sigma, &prev.chi1, prev.chi2, params, cfg)?;
        let normal = grad_f_sigma(&prev.sigma, &prev.chi1, params)?;
        Ok(PrevGradients { flow, normal })
    }
}

/// One element of the generalised derivative of the stress update with respect
/// to the trial stress.
#[derive(Debug, Clone, PartialEq)]
pub enum Tangent {
    /// `S = Id`.
    Elastic,
    /// `S = Id + a ⊗ b`.
    Plastic { a: SymTensor, b: SymTensor },
    General(Tensor4),
}

impl Tangent {
    pub fn apply(&self, t: &SymTensor) -> SymTensor {
        match self {
            Tangent::Elastic => *t,
            Tangent::Plastic { a, b } => {
                let mut out = *t;
                out.axpy(b.inner(t), a);
                out
            }
            Tangent::General(s) => s.apply(t),
        }
    }

    pub fn is_elastic(&self) -> bool {
        matches!(self, Tangent::Elastic)
    }

    pub fn to_tensor4(&self, dim: usize) -> Tensor4 {
        match self {
            Tangent::Elastic => Tensor4::identity(dim),
            Tangent::Plastic { a, b } => Tensor4::identity(dim).add(&Tensor4::outer(a, b)),
            Tangent::General(s) => s.clone(),
        }
    }
}

/// Smallest eigenvalue of the symmetric part of the bilinear form
/// `(s, t) ↦ s : L(t)` on symmetric `dim x dim` tensors.
pub fn min_sym_eigenvalue<F>(dim: usize, map: F) -> f64
where
    F: Fn(&SymTensor) -> SymTensor,
{
    let m = packed_len(dim);
    let basis: alloc::vec::Vec<SymTensor> = (0..m)
        .map(|p| {
            let e = SymTensor::basis(dim, p);
            e.scale(1.0 / e.norm())
        })
        .collect();
    let images: alloc::vec::Vec<SymTensor> = basis.iter().map(&map).collect();
    let mut a = alloc::vec![0.0; m * m];
    for p in 0..m {
        for q in 0..m {
            a[p * m + q] = 0.5 * (basis[p].inner(&images[q]) + basis[q].inner(&images[p]));
        }
    }
    sym_eigenvalues(&a, m)[0]
}

/// Result of a material update.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateResult {
    pub state: PointState,
    pub delta_gamma: f64,
    pub tangent: Tangent,
}

impl UpdateResult {
    fn elastic(sigma_tr: &SymTensor, prev: &PointState) -> Self {
        UpdateResult { state: PointState { sigma: *sigma_tr, ..*prev }, delta_gamma: 0.0, tangent: Tangent::Elastic }
    }
}

/// Denominator `2μ ∂σf(σ_tr) : D̂ + k1 ∂χ1f(σ_tr) : ∂χ1f_prev + k2` of the linearised consistency condition.
fn explicit_denominator(n_tr: &SymTensor, g: &PrevGradients, params: &MaterialParams) -> Result<f64, MaterialError> {
    let den = 2.0 * params.mu * n_tr.inner(&g.flow) + params.k1 * n_tr.inner(&g.normal) + params.k2;
    if den > 0.0 {
        Ok(den)
    } else {
        Err(MaterialError::NonpositiveDenominator { denominator: den })
    }
}

/// Plastic multiplier of the explicit scheme for a plastic trial stress.
pub fn delta_gamma_explicit(
    sigma_tr: &SymTensor,
    prev: &PointState,
    params: &MaterialParams,
    dhat_prev: &SymTensor,
    grad_prev: &SymTensor,
) -> Result<f64, MaterialError> {
    let f_tr = yield_f(sigma_tr, &prev.chi1, prev.chi2, params);
    let n_tr = grad_f_sigma(sigma_tr, &prev.chi1, params)?;
    let g = PrevGradients { flow: *dhat_prev, normal: *grad_prev };
    Ok(f_tr / explicit_denominator(&n_tr, &g, params)?)
}

/// Explicit return mapping. Previous-state gradients are computed only when the
/// trial stress is plastic.
pub fn explicit_update(
    sigma_tr: &SymTensor,
    prev: &PointState,
    params: &MaterialParams,
    cfg: &FracConfig,
) -> Result<UpdateResult, MaterialError> {
    let f_tr = yield_f(sigma_tr, &prev.chi1, prev.chi2, params);
    if f_tr < -YIELD_TIE_TOL * params.y0 {
        return Ok(UpdateResult::elastic(sigma_tr, prev));
    }
    let g = PrevGradients::compute(prev, params, cfg);
    explicit_update_cached(sigma_tr, prev, params, &g)
}

/// Explicit return mapping with precomputed previous-state gradients.
pub fn explicit_update_cached(
    sigma_tr: &SymTensor,
    prev: &PointState,
    params: &MaterialParams,
    prev_flow: &PrevFlow,
) -> Result<UpdateResult, MaterialError> {
    let f_tr = yield_f(sigma_tr, &prev.chi1, prev.chi2, params);
    if f_tr < -YIELD_TIE_TOL * params.y0 {
        return Ok(UpdateResult::elastic(sigma_tr, prev));
    }
    let g = prev_flow.as_ref().map_err(Clone::clone)?;
    let (n_tr, dev_norm) = unit_dev(sigma_tr, &prev.chi1, params)?;
    let den = explicit_denominator(&n_tr, g, params)?;
    let a = params.apply_c(&g.flow);

    // b = -∂σ(f/den): the derivative of the plastic multiplier.
    let mut dir = g.flow.scale(2.0 * params.mu);
    dir.axpy(params.k1, &g.normal);
    let mut b = hess_apply(&n_tr, dev_norm, &dir).scale(f_tr / (den * den));
    b.axpy(-1.0 / den, &n_tr);
    let tangent = Tangent::Plastic { a, b };

    if f_tr <= 0.0 {
        // Tie on the yield surface: trial state, plastic tangent.
        let mut r = UpdateResult::elastic(sigma_tr, prev);
        r.tangent = tangent;
        return Ok(r);
    }
    let dg = f_tr / den;
    let mut state = *prev;
    state.sigma = *sigma_tr;
    state.sigma.axpy(-dg, &a);
    state.chi1.axpy(-params.k1 * dg, &g.normal);
    state.chi2 -= params.k2 * dg;
    state.eps_p.axpy(dg, &g.flow);
    Ok(UpdateResult { state, delta_gamma: dg, tangent })
}

/// Linearised yield function `f(σ_tr) + ∂σf : (σ - σ_tr) + ∂χ1f : (χ1 - χ1_prev) + (χ2 - χ2_prev)`
/// with all gradients at the trial state. Vanishes after a plastic explicit step.
pub fn linearized_yield(
    sigma_tr: &SymTensor,
    prev: &PointState,
    next: &PointState,
    params: &MaterialParams,
) -> Result<f64, MaterialError> {
    let f_tr = yield_f(sigma_tr, &prev.chi1, prev.chi2, params);
    let n = grad_f_sigma(sigma_tr, &prev.chi1, params)?;
    Ok(f_tr + n.inner(&(next.sigma - *sigma_tr)) + n.inner(&(next.chi1 - prev.chi1)) + (next.chi2 - prev.chi2))
}

/// One element of the generalised derivative of the explicit return map at `sigma`.
pub fn tangent_element(
    sigma: &SymTensor,
    prev: &PointState,
    params: &MaterialParams,
    cfg: &FracConfig,
) -> Result<Tangent, MaterialError> {
    explicit_update(sigma, prev, params, cfg).map(|r| r.tangent)
}

/// Classical radial return `σ - 2μ max{0, f}/(2μ + k1 + k2) n` with the normal at the trial state.
pub fn classical_return_oracle(
    sigma_tr: &SymTensor,
    prev: &PointState,
    params: &MaterialParams,
) -> Result<UpdateResult, MaterialError> {
    let f_tr = yield_f(sigma_tr, &prev.chi1, prev.chi2, params);
    if f_tr <= 0.0 {
        return Ok(UpdateResult::elastic(sigma_tr, prev));
    }
    let (n, dev_norm) = unit_dev(sigma_tr, &prev.chi1, params)?;
    let den = 2.0 * params.mu + params.k1 + params.k2;
    let dg = f_tr / den;
    let mut state = *prev;
    state.sigma = *sigma_tr;
    state.sigma.axpy(-2.0 * params.mu * dg, &n);
    state.chi1.axpy(-params.k1 * dg, &n);
    state.chi2 -= params.k2 * dg;
    state.eps_p.axpy(dg, &n);
    let d = sigma_tr.dim();
    let hess = hess_f_sigma(sigma_tr, &prev.chi1, params)?;
    debug_assert!((hess.apply(&n)).norm() <= 1e-9 / dev_norm);
    let corr = Tensor4::outer(&n, &n).add(&hess.scale(f_tr)).scale(-2.0 * params.mu / den);
    Ok(UpdateResult { state, delta_gamma: dg, tangent: Tangent::General(Tensor4::identity(d).add(&corr)) })
}

/// Fourth-order tensor of a linear map given on packed coordinates,
/// `m[p * len + q] = (L E_q)_p`.
fn tensor4_from_packed(dim: usize, m: &[f64]) -> Tensor4 {
    let len = packed_len(dim);
    Tensor4::from_fn(dim, |i, j, k, l| {
        let p = SymTensor::index(dim, i, j);
        let q = SymTensor::index(dim, k, l);
        let w = if k == l { 1.0 } else { 0.5 };
        m[p * len + q] * w
    })
}

struct LocalEval {
    res: alloc::vec::Vec<f64>,
    norm: f64,
    f: f64,
    n: SymTensor,
    dev_norm: f64,
    flow: Option<SymTensor>,
}

/// Implicit update: solves the complementarity system with the max-type NCP
/// function by a local semismooth Newton method. Returns the update together
/// with the number of residual evaluations. `tol` is an absolute bound in
/// stress units on the Euclidean norm of the residual.
pub fn implicit_update(
    sigma_tr: &SymTensor,
    prev: &PointState,
    params: &MaterialParams,
    cfg: &FracConfig,
    tol: f64,
) -> Result<(UpdateResult, usize), MaterialError> {
    let dim = sigma_tr.dim();
    let m = packed_len(dim);
    let nu = 2 * m + 2;
    let mut sigma = *sigma_tr;
    let mut chi1 = prev.chi1;
    let mut chi2 = prev.chi2;
    let mut dg = 0.0f64;

    let eval = |sigma: &SymTensor, chi1: &SymTensor, chi2: f64, dg: f64| -> Result<LocalEval, MaterialError> {
        let f = yield_f(sigma, chi1, chi2, params);
        let active = dg + f >= 0.0;
        let dev = (*sigma + *chi1).dev();
        let dev_norm = dev.norm();
        let need_grad = dg > 0.0 || active;
        let (n, flow) = if need_grad {
            let (n, _) = unit_dev(sigma, chi1, params)?;
            (n, Some(normalized_frac_grad_f(sigma, chi1, chi2, params, cfg)?))
        } else {
            (SymTensor::zeros(dim), None)
        };
        let mut r1 = *sigma - *sigma_tr;
        let mut r2 = *chi1 - prev.chi1;
        if dg != 0.0 {
            let flow = flow.expect("flow evaluated whenever the multiplier is nonzero");
            r1.axpy(dg, &params.apply_c(&flow));
            r2.axpy(params.k1 * dg, &n);
        }
        let r3 = chi2 - prev.chi2 + params.k2 * dg;
        let r4 = (dg + f).max(0.0) - dg;
        let mut res = alloc::vec::Vec::with_capacity(nu);
        res.extend_from_slice(r1.packed());
        res.extend_from_slice(r2.packed());
        res.push(r3);
        res.push(r4);
        let norm = sqrt(r1.norm_sq() + r2.norm_sq() + r3 * r3 + r4 * r4);
        Ok(LocalEval { res, norm, f, n, dev_norm, flow })
    };

    let jacobian = |sigma: &SymTensor, chi1: &SymTensor, chi2: f64, dg: f64, ev: &LocalEval| -> Result<alloc::vec::Vec<f64>, MaterialError> {
        let mut jac = alloc::vec![0.0; nu * nu];
        let active = dg + ev.f >= 0.0;
        let h = FLOW_FD_STEP * params.y0;
        let mut set_col = |col: usize, r1: &SymTensor, r2: &SymTensor, r3: f64, r4: f64| {
            for p in 0..m {
                jac[p * nu + col] = r1.packed()[p];
                jac[(m + p) * nu + col] = r2.packed()[p];
            }
            jac[2 * m * nu + col] = r3;
            jac[(2 * m + 1) * nu + col] = r4;
        };
        for p in 0..m {
            let e = SymTensor::basis(dim, p);
            // The flow direction depends on σ and χ1 only through σ + χ1.
            let c_dflow = if dg != 0.0 {
                let plus = normalized_frac_grad_f(&(*sigma + e.scale(h)), chi1, chi2, params, cfg)?;
                let minus = normalized_frac_grad_f(&(*sigma - e.scale(h)), chi1, chi2, params, cfg)?;
                params.apply_c(&(plus - minus).scale(dg / (2.0 * h)))
            } else {
                SymTensor::zeros(dim)
            };
            let dn = if dg != 0.0 { hess_apply(&ev.n, ev.dev_norm, &e).scale(params.k1 * dg) } else { SymTensor::zeros(dim) };
            let df = if active { ev.n.inner(&e) } else { 0.0 };
            set_col(p, &(e + c_dflow), &dn, 0.0, df);
            set_col(m + p, &c_dflow, &(e + dn), 0.0, df);
        }
        set_col(2 * m, &SymTensor::zeros(dim), &SymTensor::zeros(dim), 1.0, if active { 1.0 } else { 0.0 });
        let (c_flow, k1n) = match ev.flow {
            Some(flow) => (params.apply_c(&flow), ev.n.scale(params.k1)),
            None => (SymTensor::zeros(dim), SymTensor::zeros(dim)),
        };
        set_col(2 * m + 1, &c_flow, &k1n, params.k2, if active { 0.0 } else { -1.0 });
        Ok(jac)
    };

    let mut evals = 0;
    let mut ev = eval(&sigma, &chi1, chi2, dg)?;
    evals += 1;
    while ev.norm > tol {
        if evals > IMPLICIT_MAX_ITER {
            return Err(MaterialError::MaxIterations { iterations: evals - 1, residual: ev.norm });
        }
        let mut jac = jacobian(&sigma, &chi1, chi2, dg, &ev)?;
        let mut step: alloc::vec::Vec<f64> = ev.res.iter().map(|r| -r).collect();
        solve_dense(&mut jac, &mut step).map_err(|_| MaterialError::SingularJacobian)?;
        for p in 0..m {
            sigma.packed_mut()[p] += step[p];
            chi1.packed_mut()[p] += step[m + p];
        }
        chi2 += step[2 * m];
        dg += step[2 * m + 1];
        ev = eval(&sigma, &chi1, chi2, dg)?;
        evals += 1;
    }

    let state_sigma = sigma;
    let eps_p = prev.eps_p + params.apply_c_inverse(&(*sigma_tr - state_sigma));
    let state = PointState { sigma: state_sigma, eps_p, chi1, chi2 };
    if dg == 0.0 && ev.f < 0.0 {
        return Ok((UpdateResult { state, delta_gamma: 0.0, tangent: Tangent::Elastic }, evals));
    }

    // Implicit function theorem: dX/dσ_tr = J^-1 [Id; 0; 0; 0].
    let jac = jacobian(&sigma, &chi1, chi2, dg, &ev)?;
    let mut map = alloc::vec![0.0; m * m];
    for q in 0..m {
        let mut a = jac.clone();
        let mut rhs = alloc::vec![0.0; nu];
        rhs[q] = 1.0;
        solve_dense(&mut a, &mut rhs).map_err(|_| MaterialError::SingularJacobian)?;
        for p in 0..m {
            map[p * m + q] = rhs[p];
        }
    }
    let tangent = Tangent::General(tensor4_from_packed(dim, &map));
    Ok((UpdateResult { state, delta_gamma: dg, tangent }, evals))
}
