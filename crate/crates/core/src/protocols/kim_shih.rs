//! Momentum spread of particle 2 after a slit selection on particle 1,
//! compared with the `hbar / a` a collapse onto the slit would imply.

use serde::{Deserialize, Serialize};

use super::{check_time, epr_source, GridSpec};
use crate::error::Result;
use crate::measurement::{condition_on_slit, Aperture};
use crate::numerics::PhysicalConstants;
use crate::oracle::{condition_then_evolve, epr_covariance};
use crate::states::EprParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KimShihConfig {
    pub constants: PhysicalConstants,
    pub grid: GridSpec,
    pub epr: EprParams,
    pub slit: Aperture,
    pub delay: f64,
}

impl KimShihConfig {
    pub fn validate(&self) -> Result<()> {
        check_time("delay", self.delay)?;
        self.slit.check_resolved(&self.grid.build(self.constants)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub detection_probability: f64,
    /// Momentum std of the exact conditional ensemble.
    pub std_p2: f64,
    pub oracle_std_p2: f64,
    /// `hbar / a`.
    pub collapse_bound: f64,
    pub ratio: f64,
    /// `ratio < 1`: the spread is narrower than a collapse would allow.
    pub below_bound: bool,
    pub uncertainty_product: f64,
}

pub fn run_kim_shih(cfg: &KimShihConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let c = cfg.constants;
    let grid = cfg.grid.build(c)?;
    let ensemble = condition_on_slit(&epr_source(grid, cfg.epr)?, &cfg.slit)?.evolve(cfg.delay)?;
    let d = ensemble.dispersion()?;
    let oracle = condition_then_evolve(&epr_covariance(cfg.epr, c.hbar), &cfg.slit, cfg.delay, c.mass)?;
    let collapse_bound = c.hbar / cfg.slit.full_width();
    let ratio = d.std_p / collapse_bound;
    Ok(BoundReport {
        detection_probability: ensemble.detection_probability,
        std_p2: d.std_p,
        oracle_std_p2: oracle.var_p2.sqrt(),
        collapse_bound,
        ratio,
        below_bound: ratio < 1.0,
        uncertainty_product: d.product,
    })
}
