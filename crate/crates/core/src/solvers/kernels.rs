use std::f64::consts::PI;

use crate::error::{contract, Result};
use crate::process::FbmSpec;

/// Transition density of `x + B^H(t)`: Gaussian with variance `t^(2H)` per coordinate.
pub fn heat_kernel_fbm(spec: &FbmSpec, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(contract(format!("kernel needs t > 0, got {t}")));
    }
    if x.len() != spec.dim() || y.len() != spec.dim() {
        return Err(contract("kernel arguments must match the fBm dimension"));
    }
    let var = t.powf(2.0 * spec.hurst());
    let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((2.0 * PI * var).powf(-0.5 * spec.dim() as f64) * (-r2 / (2.0 * var)).exp())
}
