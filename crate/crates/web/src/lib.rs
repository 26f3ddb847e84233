//! Browser bindings: three small evolutions computed on demand for the demo page.
//!
//! Each export has a plain Rust counterpart returning `Result<_, String>` so the
//! numerics are testable natively.

use std::f64::consts::PI;

use conformable::solvers::{solve_fourier, solve_spectral_interval, SpectralBasis};
use conformable::{FractionalOrder, GridField, LevySymbol};
use wasm_bindgen::prelude::*;

/// Half-width of the periodic window used by [`fourier_profile`].
pub const FOURIER_HALF_WIDTH: f64 = 10.0;

fn order(alpha: f64) -> Result<FractionalOrder, String> {
    FractionalOrder::new(alpha).map_err(|e| e.to_string())
}

fn parabola(x: f64) -> f64 {
    4.0 * x * (PI - x) / (PI * PI)
}

/// Killed heat evolution of `4x(pi-x)/pi^2` on `[0, pi]` at `n` equally spaced points.
pub fn spectral_values(alpha: f64, t: f64, n: usize) -> Result<Vec<f64>, String> {
    if n < 2 {
        return Err("need at least two points".into());
    }
    let o = order(alpha)?;
    let basis = SpectralBasis::project(&parabola, PI, 128).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
    let sol = solve_spectral_interval(&parabola, &basis, o, t, &xs, 1e-10).map_err(|e| e.to_string())?;
    Ok(sol.values)
}

/// Symmetric `beta`-stable evolution of a unit Gaussian bump on a periodic
/// window of `n` points starting at `-FOURIER_HALF_WIDTH`.
pub fn fourier_values(alpha: f64, beta: f64, t: f64, n: usize) -> Result<Vec<f64>, String> {
    let o = order(alpha)?;
    let w = FOURIER_HALF_WIDTH;
    let grid = GridField::sample_periodic_1d(-w, w, n, |x| (-2.0 * x * x).exp()).map_err(|e| e.to_string())?;
    let sym = LevySymbol::symmetric_stable(1, 1.0, beta).map_err(|e| e.to_string())?;
    Ok(solve_fourier(&grid, &sym, o, t).map_err(|e| e.to_string())?.values)
}

/// Clock `t^alpha / alpha` at `n` equally spaced times in `[0, t_max]`.
pub fn clock_values(alpha: f64, t_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let o = order(alpha)?;
    if n < 2 || !(t_max > 0.0 && t_max.is_finite()) {
        return Err("need t_max > 0 and at least two points".into());
    }
    Ok((0..n).map(|i| o.clock(t_max * i as f64 / (n - 1) as f64)).collect())
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn spectral_profile(alpha: f64, t: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(spectral_values(alpha, t, n))
}

#[wasm_bindgen]
pub fn fourier_profile(alpha: f64, beta: f64, t: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(fourier_values(alpha, beta, t, n))
}

#[wasm_bindgen]
pub fn clock_curve(alpha: f64, t_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(clock_values(alpha, t_max, n))
}
