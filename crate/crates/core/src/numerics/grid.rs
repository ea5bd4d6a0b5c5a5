use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Reduced Planck constant and particle mass, in whatever unit system the
/// caller works in. Both particles share the same mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        Ok(Self {
            hbar: positive("hbar", hbar)?,
            mass: positive("mass", mass)?,
        })
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

/// Uniform periodic position lattice `x_k = x_min + k dx` together with its
/// Fourier-dual momentum lattice `p_j = (j - n/2) dp`, `dp = 2 pi hbar / (n dx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    x_min: f64,
    dx: f64,
    constants: PhysicalConstants,
}

/// Grid with the default constants (hbar = m = 1).
pub fn make_grid(n: usize, x_min: f64, x_max: f64) -> Result<Grid1D> {
    Grid1D::new(n, x_min, x_max, PhysicalConstants::default())
}

impl Grid1D {
    pub fn new(n: usize, x_min: f64, x_max: f64, constants: PhysicalConstants) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::EmptyDomain { x_min, x_max });
        }
        Ok(Self {
            n,
            x_min,
            dx: (x_max - x_min) / n as f64,
            constants,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    /// Exclusive upper end of the periodic domain.
    pub fn x_max(&self) -> f64 {
        self.x_min + self.n as f64 * self.dx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.constants.hbar / (self.n as f64 * self.dx)
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants
    }

    pub fn hbar(&self) -> f64 {
        self.constants.hbar
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }

    pub fn p(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dp()
    }

    /// Largest momentum magnitude representable on the lattice.
    pub fn p_max(&self) -> f64 {
        PI * self.constants.hbar / self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.p(j)).collect()
    }

    /// Index of the lattice point nearest `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.dx).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eight_point_grid() {
        let g = make_grid(8, -4.0, 4.0).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_relative_eq!(g.dp(), std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(g.p(4), 0.0);
        assert_eq!(g.x_max(), 4.0);
    }

    #[test]
    fn spacing_for_default_domain() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        assert_eq!(g.dx(), 0.078125);
    }

    #[test]
    fn dual_lattice_product() {
        for &(n, lo, hi, hbar) in &[
            (8, -4.0, 4.0, 1.0),
            (1024, -40.0, 40.0, 1.0),
            (256, -3.0, 7.0, 0.3),
        ] {
            let c = PhysicalConstants::new(hbar, 1.0).unwrap();
            let g = Grid1D::new(n, lo, hi, c).unwrap();
            assert_relative_eq!(g.dp() * g.dx() * n as f64, 2.0 * PI * hbar, max_relative = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_sizes_and_domains() {
        assert_eq!(make_grid(12, -4.0, 4.0), Err(Error::GridSize(12)));
        assert_eq!(make_grid(4, -4.0, 4.0), Err(Error::GridSize(4)));
        assert!(matches!(make_grid(16, 1.0, 1.0), Err(Error::EmptyDomain { .. })));
        assert!(PhysicalConstants::new(0.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, -1.0).is_err());
    }
}
