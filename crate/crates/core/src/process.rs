//! Sample paths and marginals of Brownian motion, fractional Brownian motion
//! and stable Lévy processes, plus exit detection on an interval.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{contract, Error, Result};
use crate::exec::map_indexed;
use crate::export::{fmt_f64, CsvTable};
use crate::rng::{stream_rng, StreamTag, BLOCK};

/// Longest grid accepted by the dense fBm factorization.
pub const MAX_FBM_POINTS: usize = 8192;

/// Fractional Brownian motion with Hurst index `hurst` in `dim` independent coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmSpec {
    hurst: f64,
    dim: usize,
}

impl FbmSpec {
    pub fn new(hurst: f64, dim: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(contract(format!("hurst index must lie in (0,1), got {hurst}")));
        }
        if dim == 0 {
            return Err(contract("dimension must be positive"));
        }
        Ok(Self { hurst, dim })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `E[B(s) B(t)] = (s^2H + t^2H - |s - t|^2H) / 2` for one coordinate.
pub fn fbm_covariance(spec: &FbmSpec, s: f64, t: f64) -> f64 {
    let e = 2.0 * spec.hurst;
    0.5 * (s.abs().powf(e) + t.abs().powf(e) - (s - t).abs().powf(e))
}

/// A trajectory sampled on a time grid. `values` is row-major: `dim` entries per time.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub dim: usize,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// CSV with header `t,x1,...,xd` and one row per time point.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|j| format!("x{j}")));
        let mut table = CsvTable::new(&header);
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![fmt_f64(*t)];
            row.extend(self.value(i).iter().map(|v| fmt_f64(*v)));
            table.push_cells(&row);
        }
        table.into_string()
    }
}

/// A set of `len` points in `dim` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coordinate(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.coords.iter().skip(j).step_by(self.dim).copied()
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    match times.first() {
        Some(0.0) => {}
        _ => return Err(contract("time grid must start at 0")),
    }
    if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(contract("time grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// Generates `n` points in blocks of [`BLOCK`], one random stream per block.
fn sample_blocks<F>(n: usize, dim: usize, seed: u64, tag: StreamTag, draw: F) -> PointCloud
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [f64]) + Sync + Send,
{
    let blocks = map_indexed(n.div_ceil(BLOCK), |b| {
        let count = BLOCK.min(n - b * BLOCK);
        let mut rng = stream_rng(seed, tag, b as u64);
        let mut out = vec![0.0; count * dim];
        for p in out.chunks_exact_mut(dim) {
            draw(&mut rng, p);
        }
        out
    });
    PointCloud {
        dim,
        coords: blocks.concat(),
    }
}

/// Exact fBm path sampler on a fixed grid via Cholesky factorization of the
/// covariance matrix.
#[derive(Debug, Clone)]
pub struct FbmSampler {
    spec: FbmSpec,
    times: Vec<f64>,
    factor: DMatrix<f64>,
}

impl FbmSampler {
    pub fn new(spec: FbmSpec, times: &[f64]) -> Result<Self> {
        check_grid(times)?;
        if times.len() > MAX_FBM_POINTS {
            return Err(contract(format!(
                "dense fBm synthesis supports at most {MAX_FBM_POINTS} time points"
            )));
        }
        let inner = &times[1..];
        let m = inner.len();
        let cov = DMatrix::from_fn(m, m, |i, j| fbm_covariance(&spec, inner[i], inner[j]));
        let max_diag = (0..m).map(|i| cov[(i, i)]).fold(0.0, f64::max);
        let mut jitter = 0.0;
        let factor = loop {
            let mut c = cov.clone();
            for i in 0..m {
                c[(i, i)] += jitter;
            }
            if let Some(ch) = c.cholesky() {
                break ch.unpack();
            }
            jitter = if jitter == 0.0 { 1e-14 * max_diag } else { jitter * 10.0 };
            if jitter > 1e-8 * max_diag {
                return Err(Error::Factorization(
                    "fBm covariance is not positive definite after jitter".into(),
                ));
            }
        };
        Ok(Self {
            spec,
            times: times.to_vec(),
            factor,
        })
    }

    /// Path number `index` for `seed`; coordinates are independent copies.
    pub fn sample(&self, seed: u64, index: u64) -> SamplePath {
        let m = self.times.len() - 1;
        let dim = self.spec.dim;
        let mut rng = stream_rng(seed, StreamTag::FbmPath, index);
        let mut values = vec![0.0; self.times.len() * dim];
        let mut z = vec![0.0; m];
        for j in 0..dim {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            for i in 0..m {
                let row = self.factor.row(i);
                let x: f64 = (0..=i).map(|k| row[k] * z[k]).sum();
                values[(i + 1) * dim + j] = x;
            }
        }
        SamplePath {
            times: self.times.clone(),
            dim,
            values,
            seed,
        }
    }
}

pub fn sample_fbm_path(spec: &FbmSpec, times: &[f64], seed: u64) -> Result<SamplePath> {
    Ok(FbmSampler::new(*spec, times)?.sample(seed, 0))
}

/// `n` independent draws of `B^H(t)`: centered Gaussians with std `t^H` per coordinate.
pub fn sample_fbm_marginal(spec: &FbmSpec, t: f64, n: usize, seed: u64) -> Result<PointCloud> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(contract(format!("marginal time must be positive, got {t}")));
    }
    let sd = t.powf(spec.hurst);
    Ok(sample_blocks(n, spec.dim, seed, StreamTag::FbmMarginal, |rng, p| {
        for x in p {
            *x = sd * rng.sample::<f64, _>(StandardNormal);
        }
    }))
}

/// How a multivariate stable law is assembled.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginals {
    /// Rotation invariant, `psi(k) = -D |k|^beta`.
    Spherical { beta: f64 },
    /// Independent coordinates, `psi(k) = D sum_j (i k_j)^beta_j`, `beta_j` in `(1, 2]`.
    Independent { betas: Vec<f64> },
}

/// Stable Lévy process specification.
#[derive(Debug, Clone, PartialEq)]
pub struct StableSpec {
    scale_d: f64,
    dim: usize,
    marginals: Marginals,
}

impl StableSpec {
    pub fn spherical(beta: f64, scale_d: f64, dim: usize) -> Result<Self> {
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(contract(format!("stable index must lie in (0,2], got {beta}")));
        }
        if !(scale_d > 0.0 && scale_d.is_finite()) || dim == 0 {
            return Err(contract("scale must be positive and dimension nonzero"));
        }
        Ok(Self {
            scale_d,
            dim,
            marginals: Marginals::Spherical { beta },
        })
    }

    pub fn independent(betas: Vec<f64>, scale_d: f64) -> Result<Self> {
        if betas.is_empty() {
            return Err(contract("at least one coordinate index required"));
        }
        if let Some(b) = betas.iter().find(|b| !(**b > 1.0 && **b <= 2.0)) {
            return Err(contract(format!(
                "independent-marginal indices must lie in (1,2], got {b}"
            )));
        }
        if !(scale_d > 0.0 && scale_d.is_finite()) {
            return Err(contract("scale must be positive"));
        }
        Ok(Self {
            scale_d,
            dim: betas.len(),
            marginals: Marginals::Independent { betas },
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale_d
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn marginals(&self) -> &Marginals {
        &self.marginals
    }

    /// Sampler for increments over a time step `dt`.
    pub fn increments(&self, dt: f64) -> Result<IncrementSampler> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(contract(format!("time step must be positive, got {dt}")));
        }
        let sd = self.scale_d * dt;
        let kind = match &self.marginals {
            Marginals::Spherical { beta } if *beta == 2.0 => Kind::Gaussian { sd: (2.0 * sd).sqrt() },
            Marginals::Spherical { beta } if self.dim == 1 => Kind::Symmetric1d {
                beta: *beta,
                scale: sd.powf(beta.recip()),
            },
            Marginals::Spherical { beta } => Kind::Subordinated {
                gamma: beta / 2.0,
                sd: (2.0 * sd.powf(2.0 / beta)).sqrt(),
            },
            Marginals::Independent { betas } => Kind::Skewed(
                betas
                    .iter()
                    .map(|&b| SkewedCoord::new(b, sd))
                    .collect(),
            ),
        };
        Ok(IncrementSampler { dim: self.dim, kind })
    }
}

#[derive(Debug, Clone)]
struct SkewedCoord {
    alpha: f64,
    sigma: f64,
    shift: f64,
    stretch: f64,
}

impl SkewedCoord {
    // Totally skewed (skewness -1) stable law matching exp(dt D (ik)^alpha).
    fn new(alpha: f64, sd: f64) -> Self {
        if alpha == 2.0 {
            return Self {
                alpha,
                sigma: (2.0 * sd).sqrt(),
                shift: 0.0,
                stretch: 1.0,
            };
        }
        let tan = (FRAC_PI_2 * alpha).tan();
        let skew = -1.0;
        Self {
            alpha,
            sigma: (-sd * (FRAC_PI_2 * alpha).cos()).powf(alpha.recip()),
            shift: (skew * tan).atan() / alpha,
            stretch: (1.0 + skew * skew * tan * tan).powf(0.5 / alpha),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.alpha == 2.0 {
            return self.sigma * rng.sample::<f64, _>(StandardNormal);
        }
        let v = PI * (rng.sample::<f64, _>(Open01) - 0.5);
        let w: f64 = rng.sample(Exp1);
        let a = self.alpha;
        let vb = v + self.shift;
        let x = self.stretch * (a * vb).sin() / v.cos().powf(a.recip())
            * ((v - a * vb).cos() / w).powf((1.0 - a) / a);
        self.sigma * x
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Gaussian { sd: f64 },
    Symmetric1d { beta: f64, scale: f64 },
    Subordinated { gamma: f64, sd: f64 },
    Skewed(Vec<SkewedCoord>),
}

/// Draws increments of a [`StableSpec`] over a fixed time step.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    dim: usize,
    kind: Kind,
}

impl IncrementSampler {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.kind {
            Kind::Gaussian { sd } => {
                for x in out {
                    *x = sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
            Kind::Symmetric1d { beta, scale } => out[0] = scale * symmetric_stable(*beta, rng),
            Kind::Subordinated { gamma, sd } => {
                let a = positive_stable(*gamma, rng).sqrt() * sd;
                for x in out {
                    *x = a * rng.sample::<f64, _>(StandardNormal);
                }
            }
            Kind::Skewed(coords) => {
                for (x, c) in out.iter_mut().zip(coords) {
                    *x = c.draw(rng);
                }
            }
        }
    }

    /// One-dimensional draw; panics for `dim > 1`.
    pub fn draw_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        assert_eq!(self.dim, 1);
        let mut x = [0.0];
        self.draw(rng, &mut x);
        x[0]
    }
}

/// Standard symmetric stable variate with characteristic function
/// `exp(-|k|^beta)`, via the Chambers–Mallows–Stuck transform.
pub fn symmetric_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    if beta == 2.0 {
        return std::f64::consts::SQRT_2 * rng.sample::<f64, _>(StandardNormal);
    }
    let v = PI * (rng.sample::<f64, _>(Open01) - 0.5);
    if beta == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    (beta * v).sin() / v.cos().powf(beta.recip()) * (((1.0 - beta) * v).cos() / w).powf((1.0 - beta) / beta)
}

/// Positive stable variate with Laplace transform `exp(-lambda^gamma)`,
/// `gamma` in `(0, 1)` (Kanter's representation).
pub fn positive_stable<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> f64 {
    let u = PI * rng.sample::<f64, _>(Open01);
    let e: f64 = rng.sample(Exp1);
    (gamma * u).sin() / u.sin().powf(gamma.recip())
        * (((1.0 - gamma) * u).sin() / e).powf((1.0 - gamma) / gamma)
}

/// `n` independent increments over a step `dt`.
pub fn sample_stable_increment(spec: &StableSpec, dt: f64, n: usize, seed: u64) -> Result<PointCloud> {
    let sampler = spec.increments(dt)?;
    Ok(sample_blocks(n, spec.dim, seed, StreamTag::StableIncrement, |rng, p| {
        sampler.draw(rng, p)
    }))
}

/// Cumulative sums of independent increments over each grid step.
pub fn sample_levy_path(spec: &StableSpec, times: &[f64], seed: u64) -> Result<SamplePath> {
    check_grid(times)?;
    let dim = spec.dim;
    let mut rng = stream_rng(seed, StreamTag::LevyPath, 0);
    let mut values = vec![0.0; times.len() * dim];
    let mut inc = vec![0.0; dim];
    for i in 1..times.len() {
        spec.increments(times[i] - times[i - 1])?.draw(&mut rng, &mut inc);
        for j in 0..dim {
            values[i * dim + j] = values[(i - 1) * dim + j] + inc[j];
        }
    }
    Ok(SamplePath {
        times: times.to_vec(),
        dim,
        values,
        seed,
    })
}

/// The interval `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalDomain {
    length: f64,
}

impl IntervalDomain {
    pub fn new(length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(contract(format!("interval length must be positive, got {length}")));
        }
        Ok(Self { length })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn contains_open(&self, x: f64) -> bool {
        x > 0.0 && x < self.length
    }
}

/// Smallest index at which `start_x + path` leaves `(0, L)`.
pub fn first_exit_index(path: &SamplePath, domain: &IntervalDomain, start_x: f64) -> Result<Option<usize>> {
    if path.dim != 1 {
        return Err(contract(format!("exit detection needs a 1-d path, got dim {}", path.dim)));
    }
    if !domain.contains_open(start_x) {
        return Err(contract(format!("start point {start_x} is not inside the interval")));
    }
    Ok(path.values.iter().position(|v| !domain.contains_open(start_x + v)))
}
