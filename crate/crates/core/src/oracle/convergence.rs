use crate::error::{contract, Result};
use crate::rng::derive_seed;
use crate::stats::slope;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_paths: usize,
    /// Root mean square of the errors over the repeats.
    pub rms_error: f64,
    pub median_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln(rms_error)` against `ln(n_paths)`; NaN when an error is zero.
    pub slope: f64,
}

/// Runs `estimate(n_paths, seed)` `repeats` times per path count, with seeds
/// derived from `(seed, n_paths, repeat)`, and measures the error against a
/// reference value.
pub fn mc_convergence_study<E>(
    estimate: E,
    reference: f64,
    n_paths_list: &[usize],
    seed: u64,
    repeats: usize,
) -> Result<ConvergenceStudy>
where
    E: Fn(usize, u64) -> Result<f64>,
{
    if n_paths_list.len() < 2 || n_paths_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(contract("need at least two increasing path counts"));
    }
    if repeats == 0 {
        return Err(contract("need at least one repeat"));
    }
    let mut rows = Vec::with_capacity(n_paths_list.len());
    for &n in n_paths_list {
        let mut errors = (0..repeats)
            .map(|r| Ok((estimate(n, derive_seed(seed, &[n as u64, r as u64]))? - reference).abs()))
            .collect::<Result<Vec<f64>>>()?;
        let rms = (errors.iter().map(|e| e * e).sum::<f64>() / repeats as f64).sqrt();
        errors.sort_by(f64::total_cmp);
        let median = if repeats % 2 == 1 {
            errors[repeats / 2]
        } else {
            0.5 * (errors[repeats / 2 - 1] + errors[repeats / 2])
        };
        rows.push(ConvergenceRow {
            n_paths: n,
            rms_error: rms,
            median_error: median,
        });
    }
    let slope = if rows.iter().any(|r| r.rms_error == 0.0) {
        f64::NAN
    } else {
        let x: Vec<f64> = rows.iter().map(|r| (r.n_paths as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.rms_error.ln()).collect();
        slope(&x, &y)
    };
    Ok(ConvergenceStudy { rows, slope })
}
