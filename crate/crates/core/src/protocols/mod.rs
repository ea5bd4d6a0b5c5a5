//! End-to-end experiments assembled from the lower modules. Each takes a
//! validated configuration and returns a serializable report.

pub mod audit;
pub mod discriminator;
pub mod kim_shih;
pub mod persistence;
pub mod signaling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexField2D, Grid1D, PhysicalConstants};
use crate::states::{epr_pair, EprParams};

/// Lattice used for both particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: 1024,
            x_min: -40.0,
            x_max: 40.0,
        }
    }
}

impl GridSpec {
    pub fn build(&self, constants: PhysicalConstants) -> Result<Grid1D> {
        Grid1D::new(self.n, self.x_min, self.x_max, constants)
    }
}

/// The EPR pair on a square lattice.
pub fn epr_source(grid: Grid1D, epr: EprParams) -> Result<ComplexField2D> {
    epr_pair([grid, grid], epr)
}

pub(crate) fn check_time(name: &'static str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: t,
            constraint: "must be non-negative and finite",
        })
    }
}

pub(crate) fn check_delays(delays: &[f64]) -> Result<()> {
    if delays.is_empty() {
        return Err(Error::Config("delays must not be empty".into()));
    }
    for &d in delays {
        check_time("delays", d)?;
    }
    if let Some(w) = delays.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "delays",
            value: w[1],
            constraint: "delays must be strictly ascending",
        });
    }
    Ok(())
}

/// `|a - b| / scale`.
pub(crate) fn deviation(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.abs()
}
