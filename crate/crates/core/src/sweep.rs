//! Classical and fractional flow directions sampled along the yield surface in
//! the `σ11`–`σ22` plane.

use alloc::vec::Vec;

use crate::fracdiff::{normalized_frac_grad_f, FracConfig};
use crate::material::{grad_f_sigma, MaterialError};
use crate::math::{acos, cos, sin};
use crate::tensors::{MaterialParams, SymTensor};

/// Samples farther than this multiple of `Y0` from the origin are skipped
/// (in 2D the yield surface is unbounded along the hydrostatic axis).
pub const SWEEP_RADIUS_CAP: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    /// Polar angle of the stress point in the `σ11`–`σ22` plane.
    pub theta: f64,
    pub sigma: [f64; 2],
    /// `(σ11, σ22)` components of the classical normal.
    pub classical: [f64; 2],
    /// `(σ11, σ22)` components of the normalised fractional gradient.
    pub fractional: [f64; 2],
    /// Angle between the full classical and fractional flow tensors.
    pub angle: f64,
}

impl FlowSample {
    pub fn projected_inner(&self) -> f64 {
        self.classical[0] * self.fractional[0] + self.classical[1] * self.fractional[1]
    }
}

/// Walks `n_samples` equally spaced polar angles. At each angle the stress
/// `r (cos θ, sin θ)` on `f = 0` (with `χ = 0`) is located and both flow
/// directions are evaluated there.
pub fn flow_vector_sweep(
    params: &MaterialParams,
    cfg: &FracConfig,
    n_samples: usize,
) -> Result<Vec<FlowSample>, MaterialError> {
    let dim = cfg.dim();
    let zero = SymTensor::zeros(dim);
    let mut out = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let theta = 2.0 * core::f64::consts::PI * k as f64 / n_samples as f64;
        let mut unit = SymTensor::zeros(dim);
        unit.set(0, 0, cos(theta));
        unit.set(1, 1, sin(theta));
        let dev_norm = unit.dev().norm();
        if !(dev_norm * SWEEP_RADIUS_CAP > 1.0) {
            continue;
        }
        let sigma = unit.scale(params.y0 / dev_norm);
        let n = grad_f_sigma(&sigma, &zero, params)?;
        let g = normalized_frac_grad_f(&sigma, &zero, 0.0, params, cfg)?;
        let c = n.inner(&g).clamp(-1.0, 1.0);
        out.push(FlowSample {
            theta,
            sigma: [sigma.get(0, 0), sigma.get(1, 1)],
            classical: [n.get(0, 0), n.get(1, 1)],
            fractional: [g.get(0, 0), g.get(1, 1)],
            angle: acos(c),
        });
    }
    Ok(out)
}
