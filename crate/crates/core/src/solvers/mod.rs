//! Solution routes for `T_alpha u = L u`: Monte Carlo on the clocked horizon,
//! Fourier-symbol evolution, interval eigenfunction expansion and closed-form
//! kernels.

pub mod fourier;
pub mod kernels;
pub mod mc;
pub mod spectral;

pub use fourier::{angular_frequencies, solve_fourier};
pub use kernels::heat_kernel_fbm;
pub use mc::{solve_mc_free, solve_mc_killed, FreeProcess, McEstimate, MIN_PATHS};
pub use spectral::{
    kernel_series_pd, solve_spectral_interval, IntervalSpectrum, SpectralBasis, SpectralSolution,
    DEFAULT_MODES, MAX_MODES,
};
