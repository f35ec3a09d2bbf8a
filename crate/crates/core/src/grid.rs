use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic 1D grid. Point `j` sits at `x_min + j*dx`; the momentum
/// lattice is the DFT dual, stored in ascending ("centred") order
/// `p_c = (c - n/2) * dp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n_points: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_points = {n_points} must be a power of two >= 8"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::Config(format!(
                "grid bounds [{x_min}, {x_max}] must be finite with x_max > x_min"
            )));
        }
        Ok(Self { n_points, x_min, x_max })
    }

    /// Grid of `n_points` centred on `center` with half-width `half_width`.
    pub fn centered(n_points: usize, center: f64, half_width: f64) -> Result<Self> {
        Self::new(n_points, center - half_width, center + half_width)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }
    pub fn dp(&self) -> f64 {
        2.0 * PI / self.length()
    }
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }
    /// Momentum at centred index `c`.
    pub fn p(&self, c: usize) -> f64 {
        (c as f64 - (self.n_points / 2) as f64) * self.dp()
    }
    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|c| self.p(c)).collect()
    }
    /// Largest |p| on the lattice.
    pub fn p_max(&self) -> f64 {
        (self.n_points / 2) as f64 * self.dp()
    }
    /// Centred index of the lattice momentum closest to `p` (clamped).
    pub fn nearest_momentum_index(&self, p: f64) -> usize {
        let c = (p / self.dp()).round() + (self.n_points / 2) as f64;
        c.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
    /// Points inside the outer 5% strip on either side of the box.
    pub fn in_boundary_strip(&self, j: usize) -> bool {
        let strip = 0.05 * self.length();
        let x = self.x(j);
        x < self.x_min + strip || x >= self.x_max - strip
    }
}

pub fn make_grid(n_points: usize, x_min: f64, x_max: f64) -> Result<Grid1D> {
    Grid1D::new(n_points, x_min, x_max)
}

/// Default time step: `0.1 / E(p_max)` with `E(p) = sqrt(c²p² + m²c⁴)`.
pub fn default_dt(grid: &Grid1D, c: f64, m: f64) -> f64 {
    let p = grid.p_max();
    0.1 / (c * c * p * p + m * m * c.powi(4)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_spacing() {
        let g = make_grid(8, -1.0, 1.0).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert!((g.dp() - PI).abs() < 1e-15);
        assert_eq!(g.p(4), 0.0);
        assert!((g.p(0) + 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn figure_grid() {
        let g = make_grid(1024, -150.0, 150.0).unwrap();
        assert!((g.dx() - 0.29296875).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(make_grid(7, -1.0, 1.0), Err(Error::Config(_))));
        assert!(make_grid(4, -1.0, 1.0).is_err());
        assert!(make_grid(16, 1.0, -1.0).is_err());
        assert!(make_grid(16, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn strip_is_five_percent_each_side() {
        let g = make_grid(1024, 0.0, 1.0).unwrap();
        let n = (0..1024).filter(|&j| g.in_boundary_strip(j)).count();
        assert!((100..=104).contains(&n), "{n}");
    }
}
