use crate::error::{contract, Result};
use crate::export::fmt_f64;
use crate::grid::GridField;

/// Header of the comparison CSV.
pub const REPORT_HEADER: [&str; 7] = ["method_a", "method_b", "alpha", "t", "max_abs", "l2", "rel_l2"];

/// Difference norms between two discretized solutions. `rel_l2` is relative
/// to the second argument and absent when its norm is below `1e-14`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub max_abs: f64,
    pub l2: f64,
    pub rel_l2: Option<f64>,
    pub n_points: usize,
}

impl ErrorReport {
    pub fn csv_row(&self, method_a: &str, method_b: &str, alpha: f64, t: f64) -> Vec<String> {
        vec![
            method_a.to_string(),
            method_b.to_string(),
            fmt_f64(alpha),
            fmt_f64(t),
            fmt_f64(self.max_abs),
            fmt_f64(self.l2),
            fmt_f64(self.rel_l2.unwrap_or(f64::NAN)),
        ]
    }
}

fn report(u1: &[f64], u2: &[f64], weight: f64) -> ErrorReport {
    let mut max_abs = 0.0f64;
    let (mut d2, mut r2) = (0.0, 0.0);
    for (a, b) in u1.iter().zip(u2) {
        let d = a - b;
        max_abs = max_abs.max(d.abs());
        d2 += d * d;
        r2 += b * b;
    }
    let l2 = (d2 * weight).sqrt();
    let ref_norm = (r2 * weight).sqrt();
    ErrorReport {
        max_abs,
        l2,
        rel_l2: (ref_norm >= 1e-14).then(|| l2 / ref_norm),
        n_points: u1.len(),
    }
}

/// Norms of `u1 - u2` on a shared grid, `l2` weighted by the cell volume.
pub fn compare_fields(u1: &GridField, u2: &GridField) -> Result<ErrorReport> {
    if !u1.same_layout(u2) {
        return Err(contract("fields live on different grids"));
    }
    Ok(report(&u1.values, &u2.values, u1.cell_volume()))
}

/// Norms of `u1 - u2` at matching query points, unit weights.
pub fn compare_values(u1: &[f64], u2: &[f64]) -> Result<ErrorReport> {
    if u1.len() != u2.len() || u1.is_empty() {
        return Err(contract(format!(
            "point sets differ in size ({} vs {})",
            u1.len(),
            u2.len()
        )));
    }
    Ok(report(u1, u2, 1.0))
}
