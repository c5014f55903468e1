//! Reference implementations used to check the library from outside.
//!
//! The fractional derivative is evaluated from its integral definition with
//! adaptive Gauss-Kronrod quadrature after removing the endpoint singularity by
//! the substitution `s = u^(1/(1-α))`. The yield function and its line
//! derivatives are evaluated on dense (not necessarily symmetric) matrices.

#![allow(dead_code)]

use fracplast_core::{MaterialParams, PerturbationMode, SymTensor};
use nalgebra::DMatrix;
use rand::Rng;
use statrs::function::gamma::gamma;

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = K15_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for k in 0..7 {
        let x = h * GK_NODES[k];
        let s = f(c - x) + f(c + x);
        kron += K15_WEIGHTS[k] * s;
        if k % 2 == 1 {
            gauss += G7_WEIGHTS[k / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> f64 {
    if whole.1 <= tol || depth == 0 {
        return whole.0;
    }
    let m = 0.5 * (a + b);
    let left = gk15(f, a, m);
    let right = gk15(f, m, b);
    adapt(f, a, m, left, 0.5 * tol, depth - 1) + adapt(f, m, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod (7, 15) quadrature with absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let whole = gk15(&f, a, b);
    adapt(&f, a, b, whole, tol, 40)
}

/// Riesz-Caputo derivative at `t` on `[t - δ, t + δ]` from the derivative `dh`:
/// `1/(2Γ(1-α)) ∫_0^δ s^(-α) (h'(t-s) + h'(t+s)) ds`.
/// With `s = u^(1/β)`, `β = 1-α`, the weight becomes the constant `1/β`.
pub fn riesz_caputo<F: Fn(f64) -> f64>(dh: F, t: f64, delta: f64, alpha: f64) -> f64 {
    let beta = 1.0 - alpha;
    let upper = delta.powf(beta);
    let g = |u: f64| {
        let s = u.powf(1.0 / beta);
        dh(t - s) + dh(t + s)
    };
    // Line derivatives of the yield function are bounded by 2 in magnitude.
    let integral = integrate(g, 0.0, upper, 1e-13 * upper) / beta;
    integral / (2.0 * gamma(1.0 - alpha))
}

pub fn dense(t: &SymTensor) -> DMatrix<f64> {
    let d = t.dim();
    DMatrix::from_fn(d, d, |i, j| t.get(i, j))
}

pub fn dense_dev(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    m - DMatrix::identity(d, d) * (m.trace() / d as f64)
}

/// Yield function on a dense matrix, `|dev(m)|_F + χ2 - Y0`.
pub fn dense_yield(m: &DMatrix<f64>, chi2: f64, y0: f64) -> f64 {
    dense_dev(m).norm() + chi2 - y0
}

/// Derivative along the coordinate line of entry `(i, j)` of `x ↦ f(σ + χ1 + x E)`.
pub fn line_derivative(base: &DMatrix<f64>, i: usize, j: usize, x: f64, mode: PerturbationMode) -> f64 {
    let mut m = base.clone();
    m[(i, j)] += x;
    let paired = i != j && mode == PerturbationMode::SymmetricPair;
    if paired {
        m[(j, i)] += x;
    }
    let dev = dense_dev(&m);
    let d = dev[(i, j)] / dev.norm();
    if paired {
        2.0 * d
    } else {
        d
    }
}

/// Fractional gradient from the integral definition, one quadrature per component.
pub fn frac_grad(
    sigma: &SymTensor,
    chi1: &SymTensor,
    alpha: f64,
    delta: &SymTensor,
    mode: PerturbationMode,
) -> SymTensor {
    let d = sigma.dim();
    let base = dense(&(*sigma + *chi1));
    let mut out = SymTensor::zeros(d);
    for i in 0..d {
        for j in i..d {
            let v = riesz_caputo(|x| line_derivative(&base, i, j, x, mode), 0.0, delta.get(i, j), alpha);
            out.set(i, j, v);
        }
    }
    out
}

/// Classical gradient `dev(σ + χ1)/|dev(σ + χ1)|` on dense matrices.
pub fn classical_grad(sigma: &SymTensor, chi1: &SymTensor) -> SymTensor {
    let dev = dense_dev(&dense(&(*sigma + *chi1)));
    let n = dev.norm();
    let d = sigma.dim();
    let mut out = SymTensor::zeros(d);
    for i in 0..d {
        for j in i..d {
            out.set(i, j, dev[(i, j)] / n);
        }
    }
    out
}

pub fn table1() -> MaterialParams {
    MaterialParams::new(55000.0, 55000.0, 10000.0, 110000.0, 110000.0).unwrap()
}

pub fn table2() -> MaterialParams {
    MaterialParams::new(120000.0, 80000.0, 50000.0, 200000.0, 200000.0).unwrap()
}

pub fn table1_delta() -> SymTensor {
    SymTensor::new2(100.0, 200.0, 100.0)
}

pub fn table2_delta() -> SymTensor {
    SymTensor::from_upper(3, &[[100.0, 100.0, 100.0], [0.0, 500.0, 100.0], [0.0, 0.0, 900.0]])
}

pub fn params_for(dim: usize) -> MaterialParams {
    if dim == 2 {
        table1()
    } else {
        table2()
    }
}

pub fn random_sym<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> SymTensor {
    let mut t = SymTensor::zeros(dim);
    for v in t.packed_mut() {
        *v = rng.gen_range(-scale..scale);
    }
    t
}

pub fn random_unit_dev<R: Rng>(rng: &mut R, dim: usize) -> SymTensor {
    loop {
        let d = random_sym(rng, dim, 1.0).dev();
        let n = d.norm();
        if n > 0.1 {
            return d.scale(1.0 / n);
        }
    }
}

/// Window half-widths drawn uniformly from `[lo, hi]`.
pub fn random_delta<R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> SymTensor {
    let mut t = SymTensor::zeros(dim);
    for v in t.packed_mut() {
        *v = rng.gen_range(lo..hi);
    }
    t
}

/// Stress and hardening state with `f ≥ 0`: `|dev(σ + χ1)| = (Y0 - χ2)(1 + excess)`.
pub struct PlasticState {
    pub sigma: SymTensor,
    pub chi1: SymTensor,
    pub chi2: f64,
}

pub fn random_plastic_state<R: Rng>(rng: &mut R, params: &MaterialParams, dim: usize, max_excess: f64) -> PlasticState {
    let y0 = params.y0;
    let chi1 = random_unit_dev(rng, dim).scale(rng.gen_range(0.0..0.5 * y0));
    let chi2 = -rng.gen_range(0.0..0.5 * y0);
    let radius = (y0 - chi2) * (1.0 + rng.gen_range(0.0..max_excess));
    let mut sigma = random_unit_dev(rng, dim).scale(radius) - chi1;
    let p = rng.gen_range(-y0..y0);
    for i in 0..dim {
        sigma.set(i, i, sigma.get(i, i) + p);
    }
    PlasticState { sigma, chi1, chi2 }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
