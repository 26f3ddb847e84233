//! Dirichlet eigenfunction expansion on `[0, L]` with `lambda_n = (n pi / L)^2`
//! and unnormalized eigenfunctions `sin(n pi x / L)`.
//!
//! The normalization `2/L` lives in the coefficients
//! `b_n = (2/L) int_0^L f(y) sin(n pi y / L) dy` and in the kernel series.

use std::f64::consts::PI;

use crate::error::{checked, contract, Result};
use crate::order::FractionalOrder;
use crate::quad::{composite_gauss_legendre, Estimate};

pub const DEFAULT_MODES: usize = 256;
pub const MAX_MODES: usize = 4096;

const GL_ORDER: usize = 8;

/// Calls `visit(n, sin(n theta))` for `n = 1..=modes`, by complex rotation
/// re-anchored on exact values every 64 modes.
fn for_each_sine(theta: f64, modes: usize, mut visit: impl FnMut(usize, f64)) {
    let (s1, c1) = theta.sin_cos();
    let (mut s, mut c) = (0.0, 1.0);
    for n in 1..=modes {
        if n % 64 == 0 {
            (s, c) = (n as f64 * theta).sin_cos();
        } else {
            (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
        }
        visit(n, s);
    }
}

/// Eigenpairs of the Dirichlet Laplacian on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSpectrum {
    length: f64,
    n_modes: usize,
}

impl IntervalSpectrum {
    pub fn new(length: f64, n_modes: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) || n_modes == 0 {
            return Err(contract("interval length and mode count must be positive"));
        }
        Ok(Self { length, n_modes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        let w = n as f64 * PI / self.length;
        w * w
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.n_modes).map(|n| self.eigenvalue(n)).collect()
    }

    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        (n as f64 * PI * x / self.length).sin()
    }

    /// `sum_{n > N} exp(-lambda_n s)`, bounded by a geometric series.
    fn tail_sum(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return f64::INFINITY;
        }
        let w = (PI / self.length).powi(2);
        let n = self.n_modes as f64;
        let first = (-w * (n + 1.0) * (n + 1.0) * s).exp();
        first / (1.0 - (-w * (2.0 * n + 3.0) * s).exp())
    }
}

/// Sine coefficients of an initial datum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    spectrum: IntervalSpectrum,
    coefficients: Vec<f64>,
}

impl SpectralBasis {
    /// Projects `f` onto the first `n_modes` eigenfunctions by composite
    /// Gauss–Legendre quadrature.
    pub fn project<F: Fn(f64) -> f64>(f: &F, length: f64, n_modes: usize) -> Result<Self> {
        let spectrum = IntervalSpectrum::new(length, n_modes)?;
        let panels = (2 * n_modes).max(64);
        let (nodes, weights) = composite_gauss_legendre(0.0, length, panels, GL_ORDER);
        let mut coefficients = vec![0.0; n_modes];
        for (&y, &w) in nodes.iter().zip(&weights) {
            let fy = checked(y, f(y))? * w;
            for_each_sine(PI * y / length, n_modes, |n, s| coefficients[n - 1] += fy * s);
        }
        let norm = 2.0 / length;
        coefficients.iter_mut().for_each(|b| *b *= norm);
        Ok(Self {
            spectrum,
            coefficients,
        })
    }

    pub fn spectrum(&self) -> &IntervalSpectrum {
        &self.spectrum
    }

    pub fn length(&self) -> f64 {
        self.spectrum.length
    }

    pub fn n_modes(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum.eigenvalues()
    }

    /// `sum_n b_n exp(-lambda_n s) sin(n pi x / L)` at clock value `s`.
    pub fn evaluate(&self, s: f64, x: f64) -> f64 {
        let l = self.spectrum.length;
        if x <= 0.0 || x >= l {
            return 0.0;
        }
        let mut sum = 0.0;
        for_each_sine(PI * x / l, self.n_modes(), |n, sn| {
            sum += self.coefficients[n - 1] * (-self.spectrum.eigenvalue(n) * s).exp() * sn;
        });
        sum
    }

    /// Bound on the coefficients beyond the last mode, taken as the largest
    /// magnitude over the upper half of the retained ones.
    fn coefficient_bound(&self) -> f64 {
        let n = self.n_modes();
        self.coefficients[n / 2..].iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }

    fn tail_bound(&self, s: f64) -> f64 {
        let b = self.coefficient_bound();
        if b == 0.0 {
            0.0
        } else {
            b * self.spectrum.tail_sum(s)
        }
    }
}

/// Values of the spectral solution plus its truncation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution {
    pub values: Vec<f64>,
    pub tail_bound: f64,
    pub n_modes: usize,
    /// Set when even [`MAX_MODES`] modes leave a tail above the tolerance.
    pub truncated: bool,
}

/// `u(t, x) = sum_n b_n sin(n pi x / L) exp(-lambda_n t^alpha / alpha)`.
///
/// When the tail bound exceeds `tol` the basis is re-projected with twice the
/// modes, up to [`MAX_MODES`]. At `t = 0` the initial datum itself is returned
/// in the interior (and zero on the boundary).
pub fn solve_spectral_interval<F: Fn(f64) -> f64>(
    f: &F,
    basis: &SpectralBasis,
    order: FractionalOrder,
    t: f64,
    query: &[f64],
    tol: f64,
) -> Result<SpectralSolution> {
    let l = basis.length();
    // grid points may overshoot the endpoints by rounding
    let slack = 1e-12 * l;
    if let Some(x) = query.iter().find(|x| !(**x >= -slack && **x <= l + slack)) {
        return Err(contract(format!("query point {x} lies outside [0, {l}]")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(contract(format!("time must be nonnegative, got {t}")));
    }
    let s = order.clock(t);
    if s == 0.0 {
        let values = query
            .iter()
            .map(|&x| if x <= 0.0 || x >= l { Ok(0.0) } else { checked(x, f(x)) })
            .collect::<Result<Vec<_>>>()?;
        return Ok(SpectralSolution {
            values,
            tail_bound: 0.0,
            n_modes: basis.n_modes(),
            truncated: false,
        });
    }

    let mut owned;
    let mut current = basis;
    let mut tail = current.tail_bound(s);
    while tail > tol && current.n_modes() < MAX_MODES {
        owned = SpectralBasis::project(f, l, (2 * current.n_modes()).min(MAX_MODES))?;
        current = &owned;
        tail = current.tail_bound(s);
    }
    Ok(SpectralSolution {
        values: query.iter().map(|&x| current.evaluate(s, x)).collect(),
        tail_bound: tail,
        n_modes: current.n_modes(),
        truncated: tail > tol,
    })
}

/// Killed heat kernel `(2/L) sum_n exp(-lambda_n t) sin(n pi x/L) sin(n pi y/L)`
/// with a bound on the omitted tail.
pub fn kernel_series_pd(spectrum: &IntervalSpectrum, t: f64, x: f64, y: f64) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(contract(format!("kernel series needs t > 0, got {t}")));
    }
    let l = spectrum.length;
    let n = spectrum.n_modes;
    let mut sx = vec![0.0; n];
    let mut sy = vec![0.0; n];
    for_each_sine(PI * x / l, n, |k, s| sx[k - 1] = s);
    for_each_sine(PI * y / l, n, |k, s| sy[k - 1] = s);
    let sum: f64 = (0..n)
        .map(|k| (-spectrum.eigenvalue(k + 1) * t).exp() * (sx[k] * sy[k]))
        .sum();
    Ok(Estimate {
        value: 2.0 / l * sum,
        error: 2.0 / l * spectrum.tail_sum(t),
    })
}
