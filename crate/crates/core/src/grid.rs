use crate::error::{contract, Result};
use crate::export::{fmt_f64, CsvTable};

/// Real values on a uniform 1-d or 2-d grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub extent: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, extent: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let dim = origin.len();
        if !(dim == 1 || dim == 2) || spacing.len() != dim || extent.len() != dim {
            return Err(contract("grid fields are 1-d or 2-d with matching axis data"));
        }
        if extent.iter().any(|&n| n < 2) {
            return Err(contract("each axis needs at least two points"));
        }
        if spacing.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(contract("grid spacing must be positive"));
        }
        if values.len() != extent.iter().product::<usize>() {
            return Err(contract("value count does not match grid extent"));
        }
        Ok(Self {
            origin,
            spacing,
            extent,
            values,
        })
    }

    /// Samples `f` at `n` points spanning `[lo, hi]` inclusive.
    pub fn sample_1d(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(contract("need hi > lo and at least two points"));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let values = (0..n).map(|i| f(if i + 1 == n { hi } else { lo + h * i as f64 })).collect();
        Self::new(vec![lo], vec![h], vec![n], values)
    }

    /// Periodic layout: `n` points starting at `lo` with spacing `(hi - lo) / n`.
    pub fn sample_periodic_1d(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(contract("need hi > lo and at least two points"));
        }
        let h = (hi - lo) / n as f64;
        let values = (0..n).map(|i| f(lo + h * i as f64)).collect();
        Self::new(vec![lo], vec![h], vec![n], values)
    }

    /// Periodic 2-d layout on the square `[lo, hi)^2`.
    pub fn sample_periodic_2d(lo: f64, hi: f64, n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(contract("need hi > lo and at least two points"));
        }
        let h = (hi - lo) / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(lo + h * i as f64, lo + h * j as f64));
            }
        }
        Self::new(vec![lo, lo], vec![h, h], vec![n, n], values)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Coordinates of the point with flat index `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        match self.dim() {
            1 => vec![self.origin[0] + self.spacing[0] * i as f64],
            _ => {
                let (r, c) = (i / self.extent[1], i % self.extent[1]);
                vec![
                    self.origin[0] + self.spacing[0] * r as f64,
                    self.origin[1] + self.spacing[1] * c as f64,
                ]
            }
        }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn same_layout(&self, other: &GridField) -> bool {
        self.origin == other.origin && self.spacing == other.spacing && self.extent == other.extent
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.origin.clone(), self.spacing.clone(), self.extent.clone(), values)
    }

    /// Trapezoidal mass.
    pub fn mass(&self) -> f64 {
        let weight = |n: usize, i: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let total: f64 = match self.dim() {
            1 => {
                let n = self.extent[0];
                self.values.iter().enumerate().map(|(i, v)| weight(n, i) * v).sum()
            }
            _ => {
                let (n0, n1) = (self.extent[0], self.extent[1]);
                self.values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| weight(n0, i / n1) * weight(n1, i % n1) * v)
                    .sum()
            }
        };
        total * self.cell_volume()
    }

    /// Trapezoidal mass of one period of a periodic layout (every node full weight).
    pub fn periodic_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Linear interpolation along a 1-d grid; zero outside it.
    pub fn interpolate_1d(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dim(), 1);
        let s = (x - self.origin[0]) / self.spacing[0];
        let n = self.extent[0];
        if !(s >= 0.0 && s <= (n - 1) as f64) {
            return 0.0;
        }
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }

    /// CSV with header `x,u` (1-d) or `x,y,u` (2-d).
    pub fn to_csv(&self) -> String {
        let header: &[&str] = if self.dim() == 1 { &["x", "u"] } else { &["x", "y", "u"] };
        let mut table = CsvTable::new(header);
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.point(i).into_iter().map(fmt_f64).collect();
            row.push(fmt_f64(*v));
            table.push_cells(&row);
        }
        table.into_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GridField::new(vec![0.0], vec![0.1], vec![1], vec![0.0]).is_err());
        assert!(GridField::new(vec![0.0], vec![0.0], vec![2], vec![0.0, 0.0]).is_err());
        assert!(GridField::new(vec![0.0], vec![0.1], vec![3], vec![0.0, 0.0]).is_err());
        assert!(GridField::new(vec![0.0; 3], vec![0.1; 3], vec![2; 3], vec![0.0; 8]).is_err());
    }

    #[test]
    fn trapezoid_mass_of_gaussian() {
        let g = GridField::sample_1d(-10.0, 10.0, 2001, |x| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()).unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-10);
        let g2 = GridField::sample_periodic_2d(-8.0, 8.0, 128, |x, y| {
            (-(x * x + y * y) / 2.0).exp() / (2.0 * std::f64::consts::PI)
        })
        .unwrap();
        assert!((g2.mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn interpolation_and_csv() {
        let g = GridField::sample_1d(0.0, 1.0, 3, |x| 2.0 * x).unwrap();
        assert!((g.interpolate_1d(0.25) - 0.5).abs() < 1e-15);
        assert_eq!(g.interpolate_1d(2.0), 0.0);
        assert!(g.to_csv().starts_with("x,u\n"));
        let g2 = GridField::sample_periodic_2d(0.0, 1.0, 2, |x, y| x + y).unwrap();
        assert!(g2.to_csv().starts_with("x,y,u\n"));
        assert_eq!(g2.point(1), vec![0.0, 0.5]);
    }
}
