//! Riesz–Caputo fractional derivatives and the fractional stress gradient of the
//! von-Mises yield function.
//!
//! One-sided Caputo integrals are evaluated by product integration: the
//! derivative is replaced by first-order difference quotients on an equispaced
//! grid and the kernel `s^(-alpha)` is integrated exactly over every subinterval.
//! This is the implicit-Euler convolution quadrature restricted to a finite
//! window and handles the endpoint singularity without adaptivity.

use core::fmt;

use crate::math::{gamma, powf, sqrt};
use crate::tensors::{packed_len, MaterialParams, SymTensor};

/// Default number of subintervals per half-interval.
pub const DEFAULT_NODES: usize = 10;

/// Relative proximity bound of the well-posedness guard: `|dev(...)| >= GUARD * Y0`.
pub const WELL_POSEDNESS_GUARD: f64 = 1e-6;

/// Sample points (in units of the half-width) at which the guard is evaluated.
const GUARD_POINTS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// How an off-diagonal stress component is varied when differentiating along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbationMode {
    /// Move entry `(i, j)` alone; `(j, i)` stays fixed. Each of the `d^2`
    /// components is an independent coordinate, which makes the fractional
    /// gradient tend to the classical gradient as `alpha -> 1`.
    #[default]
    SingleEntry,
    /// Move `(i, j)` and `(j, i)` together, staying inside the symmetric matrices.
    SymmetricPair,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FracError {
    /// Fractional order outside `(0, 1)`.
    InvalidOrder(f64),
    /// Non-positive or non-finite interval half-width.
    InvalidDelta(f64),
    TooFewNodes(usize),
    /// A sample of the differentiated function was NaN or infinite.
    NonFinite,
    /// The deviator comes too close to zero on the integration segment of
    /// component `(i, j)`; the fractional gradient may be undefined there.
    WellPosedness { i: usize, j: usize, x: f64, dev_norm: f64 },
    /// The fractional gradient vanished and cannot be normalised.
    DegenerateGradient { norm: f64 },
}

impl fmt::Display for FracError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FracError::InvalidOrder(a) => write!(f, "fractional order {a} outside (0, 1)"),
            FracError::InvalidDelta(d) => write!(f, "interval half-width {d} must be positive"),
            FracError::TooFewNodes(n) => write!(f, "need at least 2 quadrature nodes, got {n}"),
            FracError::NonFinite => write!(f, "non-finite sample in fractional quadrature"),
            FracError::WellPosedness { i, j, x, dev_norm } => write!(
                f,
                "fractional gradient ill-posed: |dev| = {dev_norm:.3e} at offset {x} along component ({i},{j})"
            ),
            FracError::DegenerateGradient { norm } => {
                write!(f, "fractional gradient norm {norm:.3e} too small to normalise")
            }
        }
    }
}

/// Fractional order, interval matrix and quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracConfig {
    pub alpha: f64,
    /// Half-widths `Δ_ij` of the symmetric differentiation windows.
    pub delta: SymTensor,
    /// Subintervals per half-interval.
    pub n_nodes: usize,
    pub mode: PerturbationMode,
}

impl FracConfig {
    pub fn new(alpha: f64, delta: SymTensor, n_nodes: usize) -> Result<Self, FracError> {
        let cfg = FracConfig { alpha, delta, n_nodes, mode: PerturbationMode::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mode(mut self, mode: PerturbationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_nodes(mut self, n_nodes: usize) -> Self {
        self.n_nodes = n_nodes;
        self
    }

    pub fn dim(&self) -> usize {
        self.delta.dim()
    }

    pub fn validate(&self) -> Result<(), FracError> {
        check_order(self.alpha)?;
        if self.n_nodes < 2 {
            return Err(FracError::TooFewNodes(self.n_nodes));
        }
        for &d in self.delta.packed() {
            check_delta(d)?;
        }
        Ok(())
    }
}

fn check_order(alpha: f64) -> Result<(), FracError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(FracError::InvalidOrder(alpha))
    }
}

fn check_delta(delta: f64) -> Result<(), FracError> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(FracError::InvalidDelta(delta))
    }
}

/// Value of the Riesz–Caputo derivative of a unit-slope line, `δ^(1-α) / Γ(2-α)`.
pub fn linear_response(delta: f64, alpha: f64) -> f64 {
    powf(delta, 1.0 - alpha) / gamma(2.0 - alpha)
}

/// Riesz–Caputo derivative of order `alpha` in `(0, 1)` of `h` at `t` over
/// `[t - delta, t + delta]`:
///
/// `½ (ᶜD^α_{t-δ,t} h(t) − ᶜD^α_{t,t+δ} h(t))
///   = 1/(2Γ(1-α)) (∫_{t-δ}^t (t-τ)^{-α} h'(τ) dτ + ∫_t^{t+δ} (τ-t)^{-α} h'(τ) dτ)`.
///
/// `n_nodes` is the number of subintervals per side; the rule is exact
/// whenever `h` is affine.
pub fn riesz_caputo_1d<F>(h: F, t: f64, delta: f64, alpha: f64, n_nodes: usize) -> Result<f64, FracError>
where
    F: Fn(f64) -> f64,
{
    check_order(alpha)?;
    check_delta(delta)?;
    if n_nodes < 2 {
        return Err(FracError::TooFewNodes(n_nodes));
    }
    let step = delta / n_nodes as f64;
    let beta = 1.0 - alpha;

    let h0 = h(t);
    if !h0.is_finite() {
        return Err(FracError::NonFinite);
    }
    let (mut left_prev, mut right_prev) = (h0, h0);
    let mut pow_prev = 0.0;
    let mut acc = 0.0;
    for j in 0..n_nodes {
        let off = (j + 1) as f64 * step;
        let left = h(t - off);
        let right = h(t + off);
        if !(left.is_finite() && right.is_finite()) {
            return Err(FracError::NonFinite);
        }
        // Kernel moment of the j-th cell from the centre, without the step^β factor.
        let pow_next = powf((j + 1) as f64, beta);
        acc += (pow_next - pow_prev) * ((left_prev - left) + (right - right_prev));
        pow_prev = pow_next;
        left_prev = left;
        right_prev = right;
    }
    Ok(acc * powf(step, beta - 1.0) / (2.0 * gamma(2.0 - alpha)))
}

/// Coefficients of `|dev(σ + χ1 + x E)|^2 = base + cross x + curv x^2` along the
/// coordinate line of packed component `p`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Line {
    pub base: f64,
    pub cross: f64,
    pub curv: f64,
}

impl Line {
    pub(crate) fn new(dev: &SymTensor, p: usize, mode: PerturbationMode) -> Line {
        let d = dev.dim();
        let base = dev.norm_sq();
        let dp = dev.packed()[p];
        if p < d {
            // dev(e^(ii)) has squared norm (d-1)/d and dev : dev(e^(ii)) = dev_ii.
            Line { base, cross: 2.0 * dp, curv: (d as f64 - 1.0) / d as f64 }
        } else {
            match mode {
                PerturbationMode::SingleEntry => Line { base, cross: 2.0 * dp, curv: 1.0 },
                PerturbationMode::SymmetricPair => Line { base, cross: 4.0 * dp, curv: 2.0 },
            }
        }
    }

    #[inline]
    pub(crate) fn dev_norm(&self, x: f64) -> f64 {
        sqrt((self.base + x * (self.cross + self.curv * x)).max(0.0))
    }
}

/// Checks that `|dev(σ + χ1 + x Δ_ij e^(ij))|` stays away from zero at the guard points.
fn guard(line: &Line, p: usize, half_width: f64, y0: f64, dim: usize) -> Result<(), FracError> {
    let bound = WELL_POSEDNESS_GUARD * y0;
    for &x in &GUARD_POINTS {
        let n = line.dev_norm(x * half_width);
        if !(n >= bound) {
            let (i, j) = SymTensor::pair(dim, p);
            return Err(FracError::WellPosedness { i, j, x, dev_norm: n });
        }
    }
    Ok(())
}

/// Fractional gradient `D^α_σ f(σ, χ)` of the von-Mises yield function.
///
/// Component `(i, j)` is the Riesz–Caputo derivative of
/// `x ↦ f(σ + x e^(ij), χ)` at `x = 0` on the window `[-Δ_ij, Δ_ij]`.
/// Only the upper triangle is evaluated; the result is symmetric by storage.
pub fn frac_grad_f(
    sigma: &SymTensor,
    chi1: &SymTensor,
    chi2: f64,
    params: &MaterialParams,
    cfg: &FracConfig,
) -> Result<SymTensor, FracError> {
    let dim = sigma.dim();
    assert_eq!(dim, cfg.dim(), "interval matrix and stress dimension differ");
    let dev = (*sigma + *chi1).dev();
    let shift = chi2 - params.y0;
    let mut out = SymTensor::zeros(dim);
    for p in 0..packed_len(dim) {
        let half_width = cfg.delta.packed()[p];
        let line = Line::new(&dev, p, cfg.mode);
        guard(&line, p, half_width, params.y0, dim)?;
        let value = riesz_caputo_1d(|x| line.dev_norm(x) + shift, 0.0, half_width, cfg.alpha, cfg.n_nodes)?;
        out.packed_mut()[p] = value;
    }
    Ok(out)
}

/// Normalised fractional gradient `D̂^α_σ f = D^α_σ f / |D^α_σ f|`.
pub fn normalized_frac_grad_f(
    sigma: &SymTensor,
    chi1: &SymTensor,
    chi2: f64,
    params: &MaterialParams,
    cfg: &FracConfig,
) -> Result<SymTensor, FracError> {
    let g = frac_grad_f(sigma, chi1, chi2, params, cfg)?;
    let norm = g.norm();
    let scale = cfg
        .delta
        .packed()
        .iter()
        .map(|&d| linear_response(d, cfg.alpha))
        .fold(0.0f64, f64::max);
    if !(norm > 1e-12 * scale) {
        return Err(FracError::DegenerateGradient { norm });
    }
    Ok(g.scale(1.0 / norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> (MaterialParams, FracConfig) {
        let p = MaterialParams::new(55000.0, 55000.0, 10000.0, 110000.0, 110000.0).unwrap();
        let cfg = FracConfig::new(0.5, SymTensor::new2(100.0, 200.0, 100.0), DEFAULT_NODES).unwrap();
        (p, cfg)
    }

    #[test]
    fn constant_function_has_zero_derivative() {
        for alpha in [0.1, 0.5, 0.9] {
            assert_eq!(riesz_caputo_1d(|_| 3.5, 0.7, 0.3, alpha, 10).unwrap(), 0.0);
        }
    }

    #[test]
    fn linear_function_closed_form() {
        for &(t, delta, alpha) in &[(0.0, 1.0, 0.5), (2.0, 0.25, 0.3), (-1.0, 100.0, 0.9), (5.0, 7.0, 0.01)] {
            let exact = powf(delta, 1.0 - alpha) / gamma(2.0 - alpha);
            for n in [2, 3, 10] {
                let got = riesz_caputo_1d(|x| 4.0 + x, t, delta, alpha, n).unwrap();
                assert!((got - exact).abs() <= 1e-12 * exact, "t={t} δ={delta} α={alpha} n={n}");
            }
        }
    }

    #[test]
    fn square_near_integer_order() {
        let got = riesz_caputo_1d(|x| x * x, 1.0, 0.5, 0.999, 1000).unwrap();
        assert!((got - 2.0).abs() < 1e-2, "{got}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(riesz_caputo_1d(|x| x, 0.0, 0.0, 0.5, 10), Err(FracError::InvalidDelta(0.0)));
        assert_eq!(riesz_caputo_1d(|x| x, 0.0, 1.0, 1.0, 10), Err(FracError::InvalidOrder(1.0)));
        assert_eq!(riesz_caputo_1d(|x| x, 0.0, 1.0, 0.0, 10), Err(FracError::InvalidOrder(0.0)));
        assert_eq!(riesz_caputo_1d(|x| x, 0.0, 1.0, 0.5, 1), Err(FracError::TooFewNodes(1)));
        assert_eq!(riesz_caputo_1d(|x| 1.0 / x, 0.0, 1.0, 0.5, 4), Err(FracError::NonFinite));
        assert!(FracConfig::new(0.5, SymTensor::new2(1.0, -1.0, 1.0), 10).is_err());
    }

    #[test]
    fn odd_integrand_gives_zero_off_diagonal() {
        let (p, cfg) = table1();
        // σ12 + χ1_12 = 0 with a nonzero remainder of the deviator.
        let sigma = SymTensor::new2(15000.0, -3000.0, 40.0);
        let chi1 = SymTensor::new2(-100.0, 0.0, -40.0);
        let g = frac_grad_f(&sigma, &chi1, 0.0, &p, &cfg).unwrap();
        assert_eq!(g.get(0, 1), 0.0);
        assert!(g.get(0, 0) > 0.0 && g.get(1, 1) < 0.0);
    }

    #[test]
    fn line_coefficients_match_dense_deviator() {
        let dev = SymTensor::new3(1.0, -3.0, 2.0, 0.5, -0.25, 0.75);
        let x = 0.37;
        for p in 0..6 {
            let (i, j) = SymTensor::pair(3, p);
            for mode in [PerturbationMode::SingleEntry, PerturbationMode::SymmetricPair] {
                let mut m = dev.to_full();
                m[i][j] += x;
                if mode == PerturbationMode::SymmetricPair && i != j {
                    m[j][i] += x;
                }
                let tr = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
                let mut n2 = 0.0;
                for (a, row) in m.iter().enumerate() {
                    for (b, &v) in row.iter().enumerate() {
                        let v = if a == b { v - tr } else { v };
                        n2 += v * v;
                    }
                }
                let line = Line::new(&dev, p, mode);
                assert!((line.dev_norm(x) - sqrt(n2)).abs() < 1e-14, "p={p} {mode:?}");
            }
        }
    }

    #[test]
    fn guard_rejects_vanishing_deviator() {
        let (p, cfg) = table1();
        let err = frac_grad_f(&SymTensor::zeros(2), &SymTensor::zeros(2), 0.0, &p, &cfg).unwrap_err();
        assert!(matches!(err, FracError::WellPosedness { .. }));
    }

    #[test]
    fn normalized_has_unit_norm() {
        let (p, cfg) = table1();
        let sigma = SymTensor::new2(16000.0, 1000.0, 3000.0);
        let g = normalized_frac_grad_f(&sigma, &SymTensor::zeros(2), 0.0, &p, &cfg).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_pair_mode_doubles_off_diagonal_slope() {
        let (p, cfg) = table1();
        let sigma = SymTensor::new2(16000.0, 1000.0, 3000.0);
        let near_one = cfg.with_alpha(1.0 - 1e-9).with_nodes(200);
        let single = frac_grad_f(&sigma, &SymTensor::zeros(2), 0.0, &p, &near_one).unwrap();
        let pair = frac_grad_f(&sigma, &SymTensor::zeros(2), 0.0, &p, &near_one.with_mode(PerturbationMode::SymmetricPair))
            .unwrap();
        assert!((pair.get(0, 0) - single.get(0, 0)).abs() < 1e-12);
        assert!((pair.get(0, 1) / single.get(0, 1) - 2.0).abs() < 1e-3);
    }
}
