//! Free-particle evolution, the analytic spreading law, and the paraxial
//! mapping from transverse width to angular width.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::numerics::{
    for_each_line, Axis, ComplexField1D, ComplexField2D, Grid1D, LatticeTransform, Representation,
};

/// Multipliers `exp(-i p^2 t / (2 m hbar))` on the momentum lattice.
fn kinetic_phases(grid: &Grid1D, t: f64) -> Vec<Complex64> {
    let c = grid.constants();
    (0..grid.n())
        .map(|j| {
            let p = grid.p(j);
            Complex64::from_polar(1.0, -p * p * t / (2.0 * c.mass * c.hbar))
        })
        .collect()
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t",
            value: t,
            constraint: "evolution time must be non-negative",
        })
    }
}

fn require_position(actual: Representation) -> Result<()> {
    if actual != Representation::Position {
        return Err(Error::Representation {
            expected: Representation::Position,
            actual,
        });
    }
    Ok(())
}

/// Exact free evolution under `H = p^2 / (2m)` per particle.
pub trait FreeEvolve: Sized {
    /// Evolves a position-space field by `t >= 0`; errors if the evolved
    /// state reaches the domain boundary.
    fn free_evolve(&self, t: f64) -> Result<Self>;
}

impl FreeEvolve for ComplexField1D {
    fn free_evolve(&self, t: f64) -> Result<Self> {
        let out = evolve_unchecked(self, t)?;
        out.check_boundary()?;
        Ok(out)
    }
}

/// Free evolution without the boundary guard, for callers that judge
/// wraparound on a weighted mixture instead of on each branch.
pub(crate) fn evolve_unchecked(f: &ComplexField1D, t: f64) -> Result<ComplexField1D> {
    check_time(t)?;
    require_position(f.representation())?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    let plan = LatticeTransform::new(&grid);
    let phases = kinetic_phases(&grid, t);
    let mut values = f.values().to_vec();
    let mut scratch = plan.make_scratch();
    plan.to_momentum(&mut values, &mut scratch);
    values.iter_mut().zip(&phases).for_each(|(v, w)| *v *= w);
    plan.to_position(&mut values, &mut scratch);
    ComplexField1D::new(grid, values, Representation::Position)
}

impl FreeEvolve for ComplexField2D {
    fn free_evolve(&self, t: f64) -> Result<Self> {
        let once = evolve_axis(self, Axis::One, t)?;
        evolve_axis(&once, Axis::Two, t)
    }
}

/// Evolves only the particle on `axis`, leaving the other untouched.
pub fn evolve_axis(f: &ComplexField2D, axis: Axis, t: f64) -> Result<ComplexField2D> {
    check_time(t)?;
    require_position(f.representation(axis))?;
    require_position(f.representation(axis.other()))?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid(axis);
    let plan = LatticeTransform::new(&grid);
    let phases = kinetic_phases(&grid, t);
    let mut out = f.clone();
    for_each_line(&mut out, axis, plan.scratch_len(), |line, scratch| {
        plan.to_momentum(line, scratch);
        line.iter_mut().zip(&phases).for_each(|(v, w)| *v *= w);
        plan.to_position(line, scratch);
    });
    out.check_boundary()?;
    Ok(out)
}

/// Position std of a free minimum-uncertainty packet:
/// `sqrt(sigma0^2 + (hbar t / (2 m sigma0))^2)`.
pub fn spread_law(sigma0: f64, t: f64, hbar: f64, mass: f64) -> Result<f64> {
    positive("sigma0", sigma0)?;
    let growth = hbar * t / (2.0 * mass * sigma0);
    Ok((sigma0 * sigma0 + growth * growth).sqrt())
}

/// Classical longitudinal flight: distance from the source is
/// `longitudinal_speed * (t - source_time)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParaxialGeometry {
    pub longitudinal_speed: f64,
    pub source_time: f64,
}

impl ParaxialGeometry {
    pub fn new(longitudinal_speed: f64, source_time: f64) -> Result<Self> {
        positive("longitudinal_speed", longitudinal_speed)?;
        Ok(Self {
            longitudinal_speed,
            source_time,
        })
    }

    pub fn distance(&self, t: f64) -> f64 {
        self.longitudinal_speed * (t - self.source_time)
    }
}

/// Small-angle width `std_x / distance` subtended at the source.
pub fn angular_width(std_x: f64, t: f64, geom: &ParaxialGeometry) -> Result<f64> {
    let d = geom.distance(t);
    if !(d > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            constraint: "detection must happen after the source time",
        });
    }
    Ok(std_x / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{make_grid, moments};
    use crate::states::gaussian_packet;

    #[test]
    fn zero_time_is_identity() {
        let g = make_grid(256, -20.0, 20.0).unwrap();
        let f = gaussian_packet(g, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(f.free_evolve(0.0).unwrap(), f);
        assert!(f.free_evolve(-1.0).is_err());
    }

    #[test]
    fn spreading_matches_law() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        let f = gaussian_packet(g, 0.0, 0.0, 1.0)
            .unwrap()
            .free_evolve(2.0)
            .unwrap();
        let d = moments(&f).unwrap();
        assert!((d.std_x - 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn spread_law_values() {
        assert_eq!(spread_law(1.0, 0.0, 1.0, 1.0).unwrap(), 1.0);
        assert!((spread_law(1.0, 2.0, 1.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((spread_law(0.5, 1.0, 1.0, 1.0).unwrap() - 1.118034).abs() < 1e-6);
    }

    #[test]
    fn angular_width_definition() {
        let geom = ParaxialGeometry::new(100.0, 0.0).unwrap();
        assert!((angular_width(0.1, 1.0, &geom).unwrap() - 0.001).abs() < 1e-15);
        let a = angular_width(0.3, 3.0, &geom).unwrap();
        let b = angular_width(0.6, 6.0, &geom).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(angular_width(0.1, 0.0, &geom).is_err());
    }

    #[test]
    fn wraparound_is_reported() {
        let g = make_grid(128, -8.0, 8.0).unwrap();
        let f = gaussian_packet(g, 0.0, 0.0, 0.5).unwrap();
        assert!(matches!(f.free_evolve(20.0), Err(Error::BoundaryOverflow { .. })));
    }
}
