//! Conformable derivative, conformable integral and conformable eigenfunctions.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{checked, contract, Error, Result};
use crate::order::FractionalOrder;
use crate::quad::{gauss_kronrod, Estimate};

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of time, optionally with its classical derivative.
#[derive(Clone)]
pub struct ScalarFunction {
    eval: Evaluator,
    derivative: Option<Evaluator>,
    domain: (f64, f64),
}

impl std::fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("has_derivative", &self.derivative.is_some())
            .field("domain", &self.domain)
            .finish()
    }
}

impl ScalarFunction {
    /// A function defined on `[0, inf)`.
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            derivative: None,
            domain: (0.0, f64::INFINITY),
        }
    }

    pub fn with_derivative(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            derivative: Some(Arc::new(df)),
            ..Self::new(f)
        }
    }

    /// Restricts the declared domain to `(a, b)`.
    pub fn on_domain(mut self, a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && a < b) {
            return Err(contract(format!("domain ({a}, {b}) must satisfy 0 <= a < b")));
        }
        self.domain = (a, b);
        Ok(self)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn derivative(&self, t: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(t))
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    fn contains(&self, t: f64) -> bool {
        t > self.domain.0 && t < self.domain.1 || (t == self.domain.0 && t > 0.0)
    }
}

/// Decreasing step sizes for the limit definition.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSchedule(Vec<f64>);

impl EpsSchedule {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.len() < 2 {
            return Err(contract("eps schedule needs at least two entries"));
        }
        if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(contract("eps schedule must be positive and strictly decreasing"));
        }
        Ok(Self(eps))
    }

    pub fn geometric(eps0: f64, ratio: f64, levels: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(contract("schedule ratio must lie in (0,1)"));
        }
        Self::new((0..levels).map(|i| eps0 * ratio.powi(i as i32)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Default for EpsSchedule {
    /// `1e-2 * 2^-i` for eight levels.
    fn default() -> Self {
        Self::geometric(1e-2, 0.5, 8).expect("valid default schedule")
    }
}

/// Conformable derivative from its limit definition
/// `lim (f(t + eps t^(1-alpha)) - f(t)) / eps`, extrapolated to `eps = 0`.
///
/// The difference quotients are fed through a Neville tableau; the entry with
/// the smallest local error estimate is returned. The reported error is floored
/// at the roundoff level of the finest quotient.
pub fn conformable_derivative_limit(
    f: &ScalarFunction,
    order: FractionalOrder,
    t: f64,
    schedule: &EpsSchedule,
) -> Result<Estimate> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(contract(format!("derivative requires t > 0, got {t}")));
    }
    let eps = schedule.as_slice();
    let h = order.clock_rate(t).recip();
    if !f.contains(t) || !f.contains(t + eps[0] * h) {
        return Err(contract(format!("f is not declared on a neighbourhood of t = {t}")));
    }
    let f0 = checked(t, f.eval(t))?;
    let mut scale = f0.abs();
    let mut quotients = Vec::with_capacity(eps.len());
    for &e in eps {
        let x = t + e * h;
        let fx = checked(x, f.eval(x))?;
        scale = scale.max(fx.abs());
        quotients.push((fx - f0) / e);
    }

    let n = eps.len();
    let roundoff = 16.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) / eps[n - 1];

    let mut tableau = vec![vec![0.0; n]; n];
    let mut best = quotients[0];
    let mut best_err = f64::INFINITY;
    for i in 0..n {
        tableau[i][0] = quotients[i];
        for j in 1..=i {
            let (ej, ei) = (eps[i - j], eps[i]);
            tableau[i][j] = (ej * tableau[i][j - 1] - ei * tableau[i - 1][j - 1]) / (ej - ei);
            let err = (tableau[i][j] - tableau[i][j - 1])
                .abs()
                .max((tableau[i][j] - tableau[i - 1][j - 1]).abs());
            if err <= best_err {
                best_err = err;
                best = tableau[i][j];
            }
        }
        if i > 1 && (tableau[i][i] - tableau[i - 1][i - 1]).abs() >= 2.0 * best_err.max(roundoff) {
            break;
        }
    }

    let first = (quotients[1] - quotients[0]).abs();
    let last = (quotients[n - 1] - quotients[n - 2]).abs();
    if !best.is_finite() || !best_err.is_finite() || (last > first && last > 10.0 * roundoff) {
        return Err(Error::Convergence(format!(
            "difference quotients at t = {t} do not settle (successive gaps {first:e} -> {last:e})"
        )));
    }
    Ok(Estimate {
        value: best,
        error: best_err.max(roundoff),
    })
}

/// `t^(1-alpha) f'(t)` for differentiable `f`.
pub fn conformable_derivative_smooth(f: &ScalarFunction, order: FractionalOrder, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(contract(format!("derivative requires t > 0, got {t}")));
    }
    let df = f
        .derivative(t)
        .ok_or_else(|| contract("smooth conformable derivative needs a derivative evaluator"))?;
    Ok(order.clock_rate(t).recip() * checked(t, df)?)
}

/// Conformable integral `int_a^t f(x) x^(alpha-1) dx`.
///
/// Evaluated in the variable `s = x^alpha`, where it becomes
/// `(1/alpha) int f(s^(1/alpha)) ds` with a bounded integrand; this removes the
/// `x^(alpha-1)` singularity when `a = 0`. For `a > 0` the integrand is
/// integrated directly.
pub fn conformable_integral(
    f: &ScalarFunction,
    order: FractionalOrder,
    a: f64,
    t: f64,
    n_nodes: usize,
) -> Result<Estimate> {
    if !(a >= 0.0 && t > a && t.is_finite()) {
        return Err(contract(format!("integral requires 0 <= a < t, got a = {a}, t = {t}")));
    }
    if n_nodes == 0 {
        return Err(contract("n_nodes must be positive"));
    }
    let alpha = order.alpha();
    let (abs_tol, rel_tol) = (1e-12, 1e-10);
    if a == 0.0 && !order.is_classical() {
        let inv = alpha.recip();
        let r = gauss_kronrod(
            |s: f64| {
                let x = s.powf(inv);
                checked(x, f.eval(x)).unwrap_or(f64::NAN)
            },
            0.0,
            t.powf(alpha),
            n_nodes,
            abs_tol * alpha,
            rel_tol,
        )?;
        Ok(Estimate {
            value: r.value * inv,
            error: r.error * inv,
        })
    } else {
        gauss_kronrod(|x: f64| f.eval(x) * order.clock_rate(x), a, t, n_nodes, abs_tol, rel_tol)
    }
}

/// Solution `c exp(lambda t^alpha / alpha)` of `T_alpha g = lambda g`, `g(0) = c`.
pub fn conformable_eigenfunction(
    lambda: Complex64,
    c: Complex64,
    order: FractionalOrder,
    t: f64,
) -> Complex64 {
    c * (lambda * order.clock(t)).exp()
}
