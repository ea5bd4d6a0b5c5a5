//! Single-particle packets, the two-mode Gaussian EPR pair, and the
//! equal-weight superposition of `N` correlated position peaks.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::numerics::{ComplexField1D, ComplexField2D, Grid1D};

/// A packet of position std `sigma` must span at least this many lattice cells.
pub const PACKET_MIN_CELLS: f64 = 2.0;

/// Widths of two-particle modes must reach `4 dx / pi`, which keeps the
/// conjugate momentum distribution within 8 standard deviations of the
/// lattice's Nyquist momentum.
pub const MODE_MIN_CELLS: f64 = 4.0 * FRAC_1_PI;

fn require_resolved(what: &'static str, width: f64, grid: &Grid1D, cells: f64) -> Result<()> {
    let required = cells * grid.dx();
    if width < required {
        return Err(Error::UnderResolved {
            what,
            width,
            required,
            dx: grid.dx(),
        });
    }
    Ok(())
}

fn gaussian_amplitude(x: f64, center: f64, sigma: f64) -> f64 {
    (2.0 * PI * sigma * sigma).powf(-0.25) * (-(x - center).powi(2) / (4.0 * sigma * sigma)).exp()
}

/// Minimum-uncertainty packet `exp(-(x - x0)^2 / (4 sigma^2) + i p0 x / hbar)`,
/// normalized on the lattice.
pub fn gaussian_packet(grid: Grid1D, x0: f64, p0: f64, sigma: f64) -> Result<ComplexField1D> {
    positive("sigma", sigma)?;
    require_resolved("packet width", sigma, &grid, PACKET_MIN_CELLS)?;
    let hbar = grid.hbar();
    let f = ComplexField1D::from_fn(grid, |x| {
        Complex64::from_polar(gaussian_amplitude(x, x0, sigma), p0 * x / hbar)
    })
    .normalized()?;
    f.check_boundary()?;
    Ok(f)
}

/// Widths of the regularized EPR state: `sigma_plus` for the `x1 + x2` mode,
/// `sigma_minus` for the `x1 - x2` mode. `sigma_plus -> 0` approaches the
/// ideal correlation `x1 + x2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EprParams {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
}

impl EprParams {
    pub fn new(sigma_plus: f64, sigma_minus: f64) -> Result<Self> {
        Ok(Self {
            sigma_plus: positive("sigma_plus", sigma_plus)?,
            sigma_minus: positive("sigma_minus", sigma_minus)?,
        })
    }

    /// `k = (s-^2 - s+^2) / (s-^2 + s+^2)`; the position correlation
    /// coefficient of the pair is `-k`.
    pub fn correlation_quality(&self) -> f64 {
        let (p, m) = (self.sigma_plus.powi(2), self.sigma_minus.powi(2));
        (m - p) / (m + p)
    }

    pub fn is_entangled(&self) -> bool {
        self.sigma_plus != self.sigma_minus
    }

    /// Std of either single-particle position marginal, `sqrt(s+^2 + s-^2) / 2`.
    pub fn marginal_std(&self) -> f64 {
        (self.sigma_plus.powi(2) + self.sigma_minus.powi(2)).sqrt() / 2.0
    }
}

/// `psi(x1, x2) ~ exp(-(x1 + x2)^2 / (4 s+^2)) exp(-(x1 - x2)^2 / (4 s-^2))`.
pub fn epr_pair(grids: [Grid1D; 2], params: EprParams) -> Result<ComplexField2D> {
    let EprParams {
        sigma_plus,
        sigma_minus,
    } = EprParams::new(params.sigma_plus, params.sigma_minus)?;
    for g in &grids {
        require_resolved("sigma_plus", sigma_plus, g, MODE_MIN_CELLS)?;
        require_resolved("sigma_minus", sigma_minus, g, MODE_MIN_CELLS)?;
    }
    let (a, b) = (
        1.0 / (4.0 * sigma_plus * sigma_plus),
        1.0 / (4.0 * sigma_minus * sigma_minus),
    );
    let psi = ComplexField2D::from_fn(grids, |x1, x2| {
        let (s, d) = (x1 + x2, x1 - x2);
        Complex64::new((-a * s * s - b * d * d).exp(), 0.0)
    })
    .normalized()?;
    psi.check_boundary()?;
    Ok(psi)
}

/// `N` equal-amplitude product peaks placed at `(x_i, -x_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEntangledSpec {
    pub terms: usize,
    pub spacing: f64,
    pub peak_sigma: f64,
}

impl DiscreteEntangledSpec {
    pub fn new(terms: usize, spacing: f64, peak_sigma: f64) -> Result<Self> {
        let spec = Self {
            terms,
            spacing,
            peak_sigma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms < 2 {
            return Err(Error::InvalidParameter {
                name: "terms",
                value: self.terms as f64,
                constraint: "an entangled superposition needs at least 2 terms",
            });
        }
        positive("spacing", self.spacing)?;
        positive("peak_sigma", self.peak_sigma)?;
        if self.spacing < 6.0 * self.peak_sigma {
            return Err(Error::OverlappingPeaks {
                spacing: self.spacing,
                peak_sigma: self.peak_sigma,
            });
        }
        Ok(())
    }

    /// Particle-1 peak positions, centered on the origin.
    pub fn peak_positions(&self) -> Vec<f64> {
        let mid = (self.terms as f64 - 1.0) / 2.0;
        (0..self.terms).map(|i| (i as f64 - mid) * self.spacing).collect()
    }
}

/// The normalized product peak `g(x1 - x_j) g(x2 + x_j)`.
pub fn discrete_peak(grids: [Grid1D; 2], spec: &DiscreteEntangledSpec, j: usize) -> Result<ComplexField2D> {
    let c = spec.peak_positions()[j];
    let s = spec.peak_sigma;
    ComplexField2D::from_fn(grids, |x1, x2| {
        Complex64::new(gaussian_amplitude(x1, c, s) * gaussian_amplitude(x2, -c, s), 0.0)
    })
    .normalized()
}

/// `N^-1/2 sum_i |x_i>_1 |-x_i>_2` with Gaussian-regularized peaks.
pub fn discrete_entangled(grids: [Grid1D; 2], spec: DiscreteEntangledSpec) -> Result<ComplexField2D> {
    spec.validate()?;
    for g in &grids {
        require_resolved("peak_sigma", spec.peak_sigma, g, PACKET_MIN_CELLS)?;
    }
    let centers = spec.peak_positions();
    let s = spec.peak_sigma;
    let psi = ComplexField2D::from_fn(grids, |x1, x2| {
        let v: f64 = centers
            .iter()
            .map(|&c| gaussian_amplitude(x1, c, s) * gaussian_amplitude(x2, -c, s))
            .sum();
        Complex64::new(v, 0.0)
    })
    .normalized()?;
    psi.check_boundary()?;
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{make_grid, marginal, moments, Axis};

    #[test]
    fn packet_moments() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        let d = moments(&gaussian_packet(g, 0.0, 0.0, 1.0).unwrap()).unwrap();
        assert!((d.std_x - 1.0).abs() < 1e-8 && (d.std_p - 0.5).abs() < 1e-8);
        let d = moments(&gaussian_packet(g, 0.0, 3.0, 1.0).unwrap()).unwrap();
        assert!((d.mean_p - 3.0).abs() < 1e-8);
    }

    #[test]
    fn packet_guards() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        assert!(matches!(
            gaussian_packet(g, 0.0, 0.0, g.dx()),
            Err(Error::UnderResolved { .. })
        ));
        assert!(matches!(
            gaussian_packet(g, 38.0, 0.0, 1.0),
            Err(Error::BoundaryOverflow { .. })
        ));
    }

    #[test]
    fn equal_widths_separate() {
        let g = make_grid(128, -16.0, 16.0).unwrap();
        let psi = epr_pair([g, g], EprParams::new(1.5, 1.5).unwrap()).unwrap();
        // every row is proportional to the same profile
        let r0 = psi.row(60);
        let r1 = psi.row(70);
        let scale = r1[64] / r0[64];
        for (a, b) in r0.iter().zip(r1) {
            assert!((a * scale - b).norm() < 1e-14);
        }
    }

    #[test]
    fn exchange_symmetry() {
        let g = make_grid(256, -40.0, 40.0).unwrap();
        let psi = epr_pair([g, g], EprParams::new(0.5, 10.0).unwrap()).unwrap();
        let t = psi.transposed();
        for (a, b) in psi.values().iter().zip(t.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        let m1 = marginal(&psi, Axis::One);
        let m2 = marginal(&psi, Axis::Two);
        assert!(m1.l1_distance(&m2).unwrap() < 1e-12);
    }

    #[test]
    fn discrete_spec_validation() {
        assert!(DiscreteEntangledSpec::new(1, 4.0, 0.3).is_err());
        assert!(matches!(
            DiscreteEntangledSpec::new(3, 1.0, 0.3),
            Err(Error::OverlappingPeaks { .. })
        ));
        let spec = DiscreteEntangledSpec::new(4, 2.0, 0.3).unwrap();
        assert_eq!(spec.peak_positions(), vec![-3.0, -1.0, 1.0, 3.0]);
    }

    #[test]
    fn entangled_params() {
        let p = EprParams::new(0.1, 10.0).unwrap();
        assert!(p.is_entangled());
        assert!((p.correlation_quality() - 0.9998).abs() < 1e-6);
        assert!(EprParams::new(-1.0, 1.0).is_err());
    }
}
