use crate::error::{contract, Result};

/// Conformable order `alpha` in `(0, 1]`.
///
/// The order induces the deterministic clock `t^alpha / alpha` under which a
/// conformable evolution becomes a classical one.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub const CLASSICAL: FractionalOrder = FractionalOrder(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(contract(format!("alpha must lie in (0,1], got {alpha}")))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }

    /// The nonlinear clock `t^alpha / alpha`. Exact identity when `alpha = 1`.
    pub fn clock(self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "clock evaluated at negative time {t}");
        if self.is_classical() {
            t
        } else if t == 0.0 {
            0.0
        } else {
            t.powf(self.0) / self.0
        }
    }

    /// Inverse of [`clock`](Self::clock): the physical time at which the clock reads `s`.
    pub fn inverse_clock(self, s: f64) -> f64 {
        if self.is_classical() {
            s
        } else if s == 0.0 {
            0.0
        } else {
            (self.0 * s).powf(1.0 / self.0)
        }
    }

    /// Coefficient `t^(alpha - 1)` of the classical form `du/dt = t^(alpha-1) L u`.
    pub fn clock_rate(self, t: f64) -> f64 {
        if self.is_classical() {
            1.0
        } else {
            t.powf(self.0 - 1.0)
        }
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = crate::Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

/// Free-function form of [`FractionalOrder::clock`].
pub fn nonlinear_clock(order: FractionalOrder, t: f64) -> f64 {
    order.clock(t)
}
