//! Evolution by the Fourier multiplier `exp(psi(k) t^alpha / alpha)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{contract, Error, Result};
use crate::grid::GridField;
use crate::levy::{conformable_characteristic, LevySymbol};
use crate::order::FractionalOrder;

/// Angular frequencies of an `n`-point periodic grid with spacing `h`, in FFT order.
pub fn angular_frequencies(n: usize, h: f64) -> Vec<f64> {
    let base = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|j| if j <= (n - 1) / 2 { j as f64 } else { j as f64 - n as f64 } * base)
        .collect()
}

fn fft_axis(data: &mut [Complex64], extent: &[usize], axis: usize, inverse: bool, planner: &mut FftPlanner<f64>) {
    let n = extent[axis];
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    if extent.len() == 1 || axis == 1 {
        fft.process(data);
    } else {
        let cols = extent[1];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..cols {
            for r in 0..n {
                buf[r] = data[r * cols + c];
            }
            fft.process(&mut buf);
            for r in 0..n {
                data[r * cols + c] = buf[r];
            }
        }
    }
}

fn partner(i: usize, n: usize) -> usize {
    (n - i) % n
}

/// Multiplies the discrete Fourier transform of `f` by the conformable
/// characteristic function and transforms back.
///
/// The grid is treated as one period. Self-paired modes (zero and Nyquist)
/// use the real part of the multiplier so the output stays real.
pub fn solve_fourier(f: &GridField, sym: &LevySymbol, order: FractionalOrder, t: f64) -> Result<GridField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(contract(format!("time must be nonnegative, got {t}")));
    }
    let dim = f.dim();
    if sym.dim() != dim {
        return Err(contract(format!(
            "symbol dimension {} does not match grid dimension {dim}",
            sym.dim()
        )));
    }
    let freqs: Vec<Vec<f64>> = (0..dim).map(|a| angular_frequencies(f.extent[a], f.spacing[a])).collect();
    let extent = &f.extent;
    let total = f.len();
    let index = |i: usize| -> Vec<usize> {
        if dim == 1 {
            vec![i]
        } else {
            vec![i / extent[1], i % extent[1]]
        }
    };
    let flat = |ix: &[usize]| -> usize {
        if dim == 1 {
            ix[0]
        } else {
            ix[0] * extent[1] + ix[1]
        }
    };

    let mut multiplier: Vec<Complex64> = (0..total)
        .map(|i| {
            let k: Vec<f64> = index(i).iter().enumerate().map(|(a, &j)| freqs[a][j]).collect();
            conformable_characteristic(sym, order, t, &k)
        })
        .collect();
    for i in 0..total {
        let ix = index(i);
        let p: Vec<usize> = ix.iter().enumerate().map(|(a, &j)| partner(j, extent[a])).collect();
        let pi = flat(&p);
        if pi == i {
            multiplier[i] = Complex64::new(multiplier[i].re, 0.0);
        } else if pi > i {
            let (m, mp) = (multiplier[i], multiplier[pi]);
            if (m - mp.conj()).norm() > 1e-12 * m.norm().max(1.0) {
                return Err(Error::Internal(format!(
                    "Fourier multiplier is not Hermitian at mode {ix:?}"
                )));
            }
        }
    }

    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    for axis in 0..dim {
        fft_axis(&mut data, extent, axis, false, &mut planner);
    }
    for (d, m) in data.iter_mut().zip(&multiplier) {
        *d *= m;
    }
    for axis in 0..dim {
        fft_axis(&mut data, extent, axis, true, &mut planner);
    }

    let norm = f.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = (total as f64).recip();
    let max_imag = data.iter().fold(0.0f64, |a, v| a.max((v.im * scale).abs()));
    if max_imag > 1e-10 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Internal(format!(
            "inverse transform left an imaginary part of {max_imag:e}"
        )));
    }
    f.with_values(data.iter().map(|v| v.re * scale).collect())
}
