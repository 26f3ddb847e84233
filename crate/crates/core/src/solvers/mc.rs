//! Monte Carlo representations `u(t,x) = E[f(x + X(t^alpha/alpha))]`, with and
//! without killing at the boundary of an interval.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{contract, Error, Result};
use crate::exec::map_indexed;
use crate::levy::LevySymbol;
use crate::order::FractionalOrder;
use crate::process::{FbmSpec, IncrementSampler, IntervalDomain, StableSpec};
use crate::rng::{stream_rng, StreamTag, BLOCK};

/// Fewer paths than this make the standard error meaningless.
pub const MIN_PATHS: usize = 100;

const PATH_CHUNK: usize = 256;

/// Sample mean and standard error per query point.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    /// Systematic error allowance (time discretization of killed paths); zero otherwise.
    pub bias_budget: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn std_error(&self) -> f64 {
        if self.n < 2.0 {
            return f64::INFINITY;
        }
        (self.m2.max(0.0) / (self.n - 1.0)).sqrt() / self.n.sqrt()
    }
}

/// The process driving a free-space Monte Carlo solve.
#[derive(Debug, Clone, Copy)]
pub enum FreeProcess<'a> {
    /// Lévy process run on the clock `t^alpha / alpha`.
    Levy(&'a LevySymbol),
    /// Fractional Brownian motion at physical time `t`, no clock.
    Fbm(&'a FbmSpec),
}

impl FreeProcess<'_> {
    fn dim(&self) -> usize {
        match self {
            FreeProcess::Levy(s) => s.dim(),
            FreeProcess::Fbm(s) => s.dim(),
        }
    }
}

enum Draw {
    Gaussian { drift: Vec<f64>, root: DMatrix<f64> },
    Stable(IncrementSampler),
}

impl Draw {
    fn tag(&self) -> StreamTag {
        match self {
            Draw::Gaussian { .. } => StreamTag::GaussianIncrement,
            Draw::Stable(_) => StreamTag::StableIncrement,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, z: &mut [f64], out: &mut [f64]) {
        match self {
            Draw::Gaussian { drift, root } => {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for (i, o) in out.iter_mut().enumerate() {
                    *o = drift[i] + (0..z.len()).map(|j| root[(i, j)] * z[j]).sum::<f64>();
                }
            }
            Draw::Stable(s) => s.draw(rng, out),
        }
    }
}

fn levy_draw(sym: &LevySymbol, s: f64) -> Result<Draw> {
    match sym {
        LevySymbol::Gaussian { drift, diffusion } => {
            let eig = diffusion.clone().symmetric_eigen();
            let sqrt_vals = eig.eigenvalues.map(|l| (l.max(0.0) * s).sqrt());
            let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
            Ok(Draw::Gaussian {
                drift: drift.iter().map(|a| a * s).collect(),
                root,
            })
        }
        _ => {
            let spec = sym.stable_spec().expect("stable family");
            Ok(Draw::Stable(spec.increments(s)?))
        }
    }
}

/// Free-space Monte Carlo estimate at each query point.
///
/// For a Lévy symbol the process is sampled with a single increment of length
/// `t^alpha / alpha`. For fBm the marginal of `B^H(t)` is sampled at physical
/// time `t`. All query points share the same draws.
pub fn solve_mc_free<F>(
    f: &F,
    process: FreeProcess<'_>,
    order: FractionalOrder,
    t: f64,
    query: &[Vec<f64>],
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(contract(format!("Monte Carlo horizon must be positive, got {t}")));
    }
    if n_paths < MIN_PATHS {
        return Err(contract(format!("need at least {MIN_PATHS} paths, got {n_paths}")));
    }
    let dim = process.dim();
    if query.iter().any(|q| q.len() != dim) {
        return Err(contract(format!("query points must have dimension {dim}")));
    }
    let draw = match process {
        FreeProcess::Levy(sym) => levy_draw(sym, order.clock(t))?,
        FreeProcess::Fbm(spec) => {
            let sd = t.powf(spec.hurst());
            Draw::Gaussian {
                drift: vec![0.0; dim],
                root: DMatrix::identity(dim, dim) * sd,
            }
        }
    };
    let tag = match process {
        FreeProcess::Fbm(_) => StreamTag::FbmMarginal,
        FreeProcess::Levy(_) => draw.tag(),
    };

    let blocks = map_indexed(n_paths.div_ceil(BLOCK), |b| -> Result<Vec<Moments>> {
        let count = BLOCK.min(n_paths - b * BLOCK);
        let mut rng = stream_rng(seed, tag, b as u64);
        let mut stats = vec![Moments::default(); query.len()];
        let mut z = vec![0.0; dim];
        let mut inc = vec![0.0; dim];
        let mut x = vec![0.0; dim];
        for _ in 0..count {
            draw.sample(&mut rng, &mut z, &mut inc);
            for (q, st) in query.iter().zip(stats.iter_mut()) {
                for j in 0..dim {
                    x[j] = q[j] + inc[j];
                }
                let v = f(&x);
                if !v.is_finite() {
                    return Err(Error::Evaluation { at: x[0], value: v });
                }
                st.push(v);
            }
        }
        Ok(stats)
    });

    let mut total = vec![Moments::default(); query.len()];
    for block in blocks {
        for (acc, m) in total.iter_mut().zip(block?) {
            acc.merge(&m);
        }
    }
    Ok(McEstimate {
        mean: total.iter().map(|m| m.mean).collect(),
        std_error: total.iter().map(Moments::std_error).collect(),
        n_paths,
        seed,
        bias_budget: 0.0,
    })
}

/// Monte Carlo for the killed problem on `[0, L]`:
/// `E_x[f(X(s)) 1{tau > s}]` with `s = t^alpha / alpha` and `X` the symmetric
/// stable process with `psi(k) = -|k|^beta` (`beta = 2`: generator `d^2/dx^2`).
///
/// Exit is checked only at the grid times, which overestimates survival by
/// `O(sqrt(dt))` for `beta = 2`. Missed crossings act like a boundary pushed
/// out by about `0.58 * sqrt(2 dt)`; the returned `bias_budget` allows twice
/// the increment scale, `2 (2 dt)^(1/beta) * max |f|` over surviving endpoints.
#[allow(clippy::too_many_arguments)]
pub fn solve_mc_killed<F>(
    f: &F,
    domain: &IntervalDomain,
    order: FractionalOrder,
    beta: f64,
    t: f64,
    start_x: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<McEstimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(contract(format!("Monte Carlo horizon must be positive, got {t}")));
    }
    if n_paths < MIN_PATHS {
        return Err(contract(format!("need at least {MIN_PATHS} paths, got {n_paths}")));
    }
    if !domain.contains_open(start_x) {
        return Err(contract(format!("start point {start_x} must lie inside (0, L)")));
    }
    let horizon = order.clock(t);
    if !(dt > 0.0 && dt <= horizon / 100.0) {
        return Err(contract(format!(
            "time step {dt} must be positive and at most clock(t)/100 = {}",
            horizon / 100.0
        )));
    }
    let n_steps = (horizon / dt).ceil() as usize;
    let step = horizon / n_steps as f64;
    let sampler = StableSpec::spherical(beta, 1.0, 1)?.increments(step)?;

    let chunks = map_indexed(n_paths.div_ceil(PATH_CHUNK), |c| -> Result<(Moments, f64)> {
        let mut stats = Moments::default();
        let mut fmax = 0.0f64;
        let end = ((c + 1) * PATH_CHUNK).min(n_paths);
        for p in c * PATH_CHUNK..end {
            let mut rng = stream_rng(seed, StreamTag::KilledPath, p as u64);
            let mut x = start_x;
            let mut alive = true;
            for _ in 0..n_steps {
                x += sampler.draw_scalar(&mut rng);
                if !domain.contains_open(x) {
                    alive = false;
                    break;
                }
            }
            let v = if alive {
                let v = f(x);
                if !v.is_finite() {
                    return Err(Error::Evaluation { at: x, value: v });
                }
                fmax = fmax.max(v.abs());
                v
            } else {
                0.0
            };
            stats.push(v);
        }
        Ok((stats, fmax))
    });

    let mut total = Moments::default();
    let mut fmax = 0.0f64;
    for chunk in chunks {
        let (m, fm) = chunk?;
        total.merge(&m);
        fmax = fmax.max(fm);
    }
    Ok(McEstimate {
        mean: vec![total.mean],
        std_error: vec![total.std_error()],
        n_paths,
        seed,
        bias_budget: 2.0 * (2.0 * step).powf(1.0 / beta) * fmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_invariant() {
        let sym = LevySymbol::symmetric_stable(1, 1.0, 1.3).unwrap();
        let est = solve_mc_free(
            &|_: &[f64]| 1.0,
            FreeProcess::Levy(&sym),
            FractionalOrder::new(0.4).unwrap(),
            2.0,
            &[vec![0.0], vec![5.0]],
            1000,
            3,
        )
        .unwrap();
        assert_eq!(est.mean, vec![1.0, 1.0]);
        assert_eq!(est.std_error, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_few_paths_and_bad_queries() {
        let sym = LevySymbol::heat(1, 1.0).unwrap();
        let o = FractionalOrder::CLASSICAL;
        let f = |_: &[f64]| 1.0;
        assert!(solve_mc_free(&f, FreeProcess::Levy(&sym), o, 1.0, &[vec![0.0]], 99, 0).is_err());
        assert!(solve_mc_free(&f, FreeProcess::Levy(&sym), o, 1.0, &[vec![0.0, 1.0]], 500, 0).is_err());
        let nan = |_: &[f64]| f64::NAN;
        assert!(matches!(
            solve_mc_free(&nan, FreeProcess::Levy(&sym), o, 1.0, &[vec![0.0]], 500, 0),
            Err(Error::Evaluation { .. })
        ));
    }

    #[test]
    fn killed_zero_datum() {
        let d = IntervalDomain::new(1.0).unwrap();
        let o = FractionalOrder::new(0.5).unwrap();
        let est = solve_mc_killed(&|_| 0.0, &d, o, 2.0, 1.0, 0.5, 500, 1e-3, 1).unwrap();
        assert_eq!(est.mean, vec![0.0]);
        assert!(solve_mc_killed(&|_| 0.0, &d, o, 2.0, 1.0, 0.5, 500, 0.5, 1).is_err());
        assert!(solve_mc_killed(&|_| 0.0, &d, o, 2.0, 1.0, 1.5, 500, 1e-3, 1).is_err());
    }

    #[test]
    fn moments_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|x| all.push(*x));
        let mut merged = Moments::default();
        for c in xs.chunks(77) {
            let mut m = Moments::default();
            c.iter().for_each(|x| m.push(*x));
            merged.merge(&m);
        }
        assert!((all.mean - merged.mean).abs() < 1e-12);
        assert!((all.m2 - merged.m2).abs() < 1e-8 * all.m2);
    }
}
