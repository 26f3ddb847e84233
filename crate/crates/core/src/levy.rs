//! Fourier symbols `psi(k)` of the supported Lévy generators, with
//! `E[exp(i k.X(t))] = exp(t psi(k))`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{contract, Result};
use crate::order::FractionalOrder;
use crate::process::StableSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum LevySymbol {
    /// `psi(k) = i k.a - k.Qk / 2`; Brownian motion with variance `t` per coordinate is `Q = I`.
    Gaussian {
        drift: DVector<f64>,
        diffusion: DMatrix<f64>,
    },
    /// `psi(k) = -D |k|^beta`.
    SymmetricStable { dim: usize, scale: f64, beta: f64 },
    /// `psi(k) = D sum_j (i k_j)^beta_j` on the principal branch.
    IndependentStable { scale: f64, betas: Vec<f64> },
}

impl LevySymbol {
    pub fn gaussian(drift: Vec<f64>, diffusion: DMatrix<f64>) -> Result<Self> {
        let d = drift.len();
        if d == 0 || diffusion.nrows() != d || diffusion.ncols() != d {
            return Err(contract("drift and diffusion dimensions disagree"));
        }
        if drift.iter().chain(diffusion.iter()).any(|v| !v.is_finite()) {
            return Err(contract("gaussian symbol entries must be finite"));
        }
        let asym = (&diffusion - diffusion.transpose()).abs().max();
        let scale = diffusion.abs().max().max(1.0);
        if asym > 1e-12 * scale {
            return Err(contract("diffusion matrix must be symmetric"));
        }
        let min_eig = diffusion.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-12 * scale {
            return Err(contract(format!(
                "diffusion matrix must be positive semidefinite (eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self::Gaussian {
            drift: DVector::from_vec(drift),
            diffusion,
        })
    }

    /// `psi(k) = -c |k|^2`, i.e. generator `c * Laplacian` (`Q = 2c I`).
    pub fn heat(dim: usize, c: f64) -> Result<Self> {
        Self::gaussian(vec![0.0; dim], DMatrix::identity(dim, dim) * (2.0 * c))
    }

    pub fn symmetric_stable(dim: usize, scale: f64, beta: f64) -> Result<Self> {
        StableSpec::spherical(beta, scale, dim)?;
        Ok(Self::SymmetricStable { dim, scale, beta })
    }

    pub fn independent_stable(scale: f64, betas: Vec<f64>) -> Result<Self> {
        StableSpec::independent(betas.clone(), scale)?;
        Ok(Self::IndependentStable { scale, betas })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Gaussian { drift, .. } => drift.len(),
            Self::SymmetricStable { dim, .. } => *dim,
            Self::IndependentStable { betas, .. } => betas.len(),
        }
    }

    /// The process-side specification for the stable families.
    pub fn stable_spec(&self) -> Option<StableSpec> {
        match self {
            Self::Gaussian { .. } => None,
            Self::SymmetricStable { dim, scale, beta } => StableSpec::spherical(*beta, *scale, *dim).ok(),
            Self::IndependentStable { scale, betas } => StableSpec::independent(betas.clone(), *scale).ok(),
        }
    }

    pub fn evaluate(&self, k: &[f64]) -> Complex64 {
        debug_assert_eq!(k.len(), self.dim());
        match self {
            Self::Gaussian { drift, diffusion } => {
                let kv = DVector::from_column_slice(k);
                let quad = kv.dot(&(diffusion * &kv));
                Complex64::new(-0.5 * quad, kv.dot(drift))
            }
            Self::SymmetricStable { scale, beta, .. } => {
                let norm = k.iter().map(|x| x * x).sum::<f64>().sqrt();
                Complex64::new(-scale * norm.powf(*beta), 0.0)
            }
            Self::IndependentStable { scale, betas } => {
                let sum: Complex64 = k
                    .iter()
                    .zip(betas)
                    .map(|(&kj, &b)| principal_power_ik(kj, b))
                    .sum();
                sum * scale
            }
        }
    }
}

/// `(i k)^beta` on the principal branch, `i = exp(i pi / 2)`.
fn principal_power_ik(k: f64, beta: f64) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if beta == 2.0 {
        return Complex64::new(-k * k, 0.0);
    }
    Complex64::from_polar(k.abs().powf(beta), std::f64::consts::FRAC_PI_2 * beta * k.signum())
}

pub fn evaluate_symbol(sym: &LevySymbol, k: &[f64]) -> Complex64 {
    sym.evaluate(k)
}

/// `exp(psi(k) t^alpha / alpha)`, exactly one at `t = 0`.
pub fn conformable_characteristic(sym: &LevySymbol, order: FractionalOrder, t: f64, k: &[f64]) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    (sym.evaluate(k) * order.clock(t)).exp()
}
