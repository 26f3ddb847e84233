//! Explicit Runge–Kutta (Heun) time stepping of `T_alpha u = L u`.
//!
//! Two forms are stepped:
//! * direct: `du/dt = t^(alpha-1) L u` on a graded `t` mesh starting at
//!   `t0 = (alpha s0)^(1/alpha)`, `s0 = 1e-6 clock(T)`, reached by a
//!   micro-step in the substituted variable;
//! * substituted: `du/ds = L u` on a uniform mesh of `[0, T^alpha / alpha]`.
//!
//! The Fourier-multiplier operator uses its own naive DFT, not `rustfft`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{contract, Error, Result};
use crate::grid::GridField;
use crate::levy::LevySymbol;
use crate::order::FractionalOrder;

/// Heun's method is stable for `h * lambda` in `[-2, 0]`.
const RK2_REAL_STABILITY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteppingMode {
    DirectT,
    SubstitutedS,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteppingScheme {
    pub mode: SteppingMode,
    pub t_final: f64,
    pub n_steps: usize,
    pub safety: f64,
}

impl SteppingScheme {
    pub fn new(mode: SteppingMode, t_final: f64, n_steps: usize, safety: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(contract(format!("t_final must be positive, got {t_final}")));
        }
        if n_steps < 10 {
            return Err(contract(format!("at least 10 steps required, got {n_steps}")));
        }
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(contract(format!("safety factor must lie in (0,1], got {safety}")));
        }
        Ok(Self {
            mode,
            t_final,
            n_steps,
            safety,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FdOperator {
    /// Three-point `d^2/dx^2`.
    Laplacian1d,
    /// `psi(-i d/dx)` applied through a discrete Fourier transform.
    SpectralMultiplier(LevySymbol),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    FreePeriodic,
    DirichletInterval(f64),
}

trait Apply {
    fn apply(&self, u: &[f64], out: &mut [f64]);
    /// Largest magnitude of the operator's spectrum.
    fn radius(&self) -> f64;
}

struct Stencil {
    inv_h2: f64,
    periodic: bool,
}

impl Apply for Stencil {
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        if self.periodic {
            for i in 0..n {
                let (l, r) = (u[(i + n - 1) % n], u[(i + 1) % n]);
                out[i] = (l - 2.0 * u[i] + r) * self.inv_h2;
            }
        } else {
            out[0] = 0.0;
            out[n - 1] = 0.0;
            for i in 1..n - 1 {
                out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * self.inv_h2;
            }
        }
    }

    fn radius(&self) -> f64 {
        4.0 * self.inv_h2
    }
}

struct NaiveDft {
    roots: Vec<Complex64>,
    symbol: Vec<Complex64>,
    scratch: std::cell::RefCell<Vec<Complex64>>,
}

impl NaiveDft {
    fn new(sym: &LevySymbol, n: usize, h: f64) -> Self {
        let roots = (0..n)
            .map(|r| Complex64::from_polar(1.0, -2.0 * PI * r as f64 / n as f64))
            .collect();
        let symbol = (0..n)
            .map(|j| {
                let m = if 2 * j < n { j as f64 } else { j as f64 - n as f64 };
                sym.evaluate(&[2.0 * PI * m / (n as f64 * h)])
            })
            .collect();
        Self {
            roots,
            symbol,
            scratch: std::cell::RefCell::new(vec![Complex64::new(0.0, 0.0); n]),
        }
    }
}

impl Apply for NaiveDft {
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        let mut hat = self.scratch.borrow_mut();
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, um) in u.iter().enumerate() {
                acc += self.roots[(j * m) % n] * um;
            }
            hat[j] = acc * self.symbol[j];
        }
        for (m, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, hj) in hat.iter().enumerate() {
                // conj(root) * hat, real part only
                let w = self.roots[(j * m) % n];
                acc += w.re * hj.re + w.im * hj.im;
            }
            *o = acc / n as f64;
        }
    }

    fn radius(&self) -> f64 {
        self.symbol.iter().fold(0.0f64, |a, s| a.max(s.norm()))
    }
}

#[allow(clippy::too_many_arguments)]
fn heun_step(op: &dyn Apply, u: &mut [f64], h: f64, c0: f64, c1: f64, k1: &mut [f64], k2: &mut [f64], tmp: &mut [f64]) {
    op.apply(u, k1);
    for i in 0..u.len() {
        tmp[i] = u[i] + h * c0 * k1[i];
    }
    op.apply(tmp, k2);
    for i in 0..u.len() {
        u[i] += 0.5 * h * (c0 * k1[i] + c1 * k2[i]);
    }
}

/// `t` mesh with `h_i t_i^(alpha-1) = delta` (last step clipped to `t_final`).
fn graded_mesh(order: FractionalOrder, t0: f64, t_final: f64, delta: f64, cap: usize) -> Option<Vec<f64>> {
    let mut mesh = vec![t0];
    let mut t = t0;
    while t < t_final {
        if mesh.len() > cap {
            return None;
        }
        let next = t + delta / order.clock_rate(t);
        t = if next >= t_final * (1.0 - 1e-14) { t_final } else { next };
        mesh.push(t);
    }
    Some(mesh)
}

/// Smallest `delta` whose graded mesh has at most `n_steps` steps.
fn mesh_for_steps(order: FractionalOrder, t0: f64, t_final: f64, n_steps: usize) -> Vec<f64> {
    let span = order.clock(t_final);
    let (mut lo, mut hi) = (span / n_steps as f64 * 1e-3, span);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        match graded_mesh(order, t0, t_final, mid, n_steps + 1) {
            Some(m) if m.len() - 1 <= n_steps => hi = mid,
            _ => lo = mid,
        }
        if hi / lo < 1.0 + 1e-12 {
            break;
        }
    }
    graded_mesh(order, t0, t_final, hi, usize::MAX).expect("uncapped mesh")
}

/// Explicit oracle solution of `T_alpha u = L u` at `scheme.t_final`.
pub fn solve_fd(
    f: &GridField,
    operator: &FdOperator,
    order: FractionalOrder,
    scheme: &SteppingScheme,
    boundary: Boundary,
) -> Result<GridField> {
    if f.dim() != 1 {
        return Err(contract("the finite-difference oracle works on 1-d grids"));
    }
    let n = f.len();
    let h = f.spacing[0];
    let op: Box<dyn Apply> = match (operator, boundary) {
        (FdOperator::Laplacian1d, Boundary::FreePeriodic) => Box::new(Stencil {
            inv_h2: 1.0 / (h * h),
            periodic: true,
        }),
        (FdOperator::Laplacian1d, Boundary::DirichletInterval(l)) => {
            let span = h * (n - 1) as f64;
            if f.origin[0] != 0.0 || (span - l).abs() > 1e-12 * l {
                return Err(contract(format!("grid must span [0, {l}] including both endpoints")));
            }
            if f.values[0].abs() > 1e-12 || f.values[n - 1].abs() > 1e-12 {
                return Err(contract("Dirichlet data must vanish at both endpoints"));
            }
            Box::new(Stencil {
                inv_h2: 1.0 / (h * h),
                periodic: false,
            })
        }
        (FdOperator::SpectralMultiplier(sym), Boundary::FreePeriodic) => {
            if sym.dim() != 1 {
                return Err(contract("multiplier symbol must be one-dimensional"));
            }
            Box::new(NaiveDft::new(sym, n, h))
        }
        (FdOperator::SpectralMultiplier(_), Boundary::DirichletInterval(_)) => {
            return Err(contract("Fourier multipliers need the periodic boundary"));
        }
    };

    let rho = op.radius();
    let limit = RK2_REAL_STABILITY * scheme.safety;
    let horizon = order.clock(scheme.t_final);
    let mut u = f.values.clone();
    if matches!(boundary, Boundary::DirichletInterval(_)) {
        u[0] = 0.0;
        u[n - 1] = 0.0;
    }
    let (mut k1, mut k2, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    match scheme.mode {
        SteppingMode::SubstitutedS => {
            let step = horizon / scheme.n_steps as f64;
            if step * rho > limit {
                let min_steps = (horizon * rho / limit).ceil() as usize;
                return Err(Error::Stability {
                    n_steps: scheme.n_steps,
                    min_steps,
                });
            }
            for _ in 0..scheme.n_steps {
                heun_step(op.as_ref(), &mut u, step, 1.0, 1.0, &mut k1, &mut k2, &mut tmp);
            }
        }
        SteppingMode::DirectT => {
            let s0 = 1e-6 * horizon;
            let t0 = order.inverse_clock(s0);
            let mesh = mesh_for_steps(order, t0, scheme.t_final, scheme.n_steps);
            let worst = mesh
                .windows(2)
                .map(|w| (w[1] - w[0]) * order.clock_rate(w[0]).max(order.clock_rate(w[1])))
                .fold(0.0f64, f64::max);
            if worst * rho > limit {
                let delta = limit / rho;
                let min_steps = graded_mesh(order, t0, scheme.t_final, delta, usize::MAX)
                    .map(|m| m.len() - 1)
                    .unwrap_or(usize::MAX);
                return Err(Error::Stability {
                    n_steps: scheme.n_steps,
                    min_steps: min_steps.max(scheme.n_steps + 1),
                });
            }
            let micro = ((s0 * rho / limit).ceil() as usize).max(1);
            for _ in 0..micro {
                heun_step(op.as_ref(), &mut u, s0 / micro as f64, 1.0, 1.0, &mut k1, &mut k2, &mut tmp);
            }
            for w in mesh.windows(2) {
                let (c0, c1) = (order.clock_rate(w[0]), order.clock_rate(w[1]));
                heun_step(op.as_ref(), &mut u, w[1] - w[0], c0, c1, &mut k1, &mut k2, &mut tmp);
            }
        }
    }
    f.with_values(u)
}
