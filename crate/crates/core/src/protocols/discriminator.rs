//! Particle 2 under three models after particle 1 passes a slit, followed
//! for a list of delays:
//!
//! - M1: instantaneous collapse onto a packet of width `a` at `-x1`;
//! - M2: the exact conditional ensemble of detected pairs;
//! - M3: particle 2 with no selection at all.

use serde::{Deserialize, Serialize};

use super::{check_delays, check_time, epr_source, GridSpec};
use crate::dynamics::{angular_width, spread_law, FreeEvolve, ParaxialGeometry};
use crate::error::Result;
use crate::measurement::{
    collapse_packet_m1, condition_on_slit, unconditional_ensemble, Aperture, ConditionalEnsemble,
    ResidualStats,
};
use crate::numerics::{moments, to_momentum, ComplexField1D, Density1D, DispersionReport, PhysicalConstants};
use crate::states::EprParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorConfig {
    pub constants: PhysicalConstants,
    pub grid: GridSpec,
    pub epr: EprParams,
    pub slit: Aperture,
    pub measurement_time: f64,
    pub delays: Vec<f64>,
    pub geometry: ParaxialGeometry,
}

impl DiscriminatorConfig {
    pub fn validate(&self) -> Result<()> {
        check_time("measurement_time", self.measurement_time)?;
        check_delays(&self.delays)?;
        ParaxialGeometry::new(self.geometry.longitudinal_speed, self.geometry.source_time)?;
        let grid = self.grid.build(self.constants)?;
        self.slit.check_resolved(&grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    M1,
    M2,
    M3,
}

impl Model {
    pub fn label(self) -> &'static str {
        match self {
            Model::M1 => "m1",
            Model::M2 => "m2",
            Model::M3 => "m3",
        }
    }
}

/// Particle-2 statistics of one model at one delay. The densities are kept
/// out of the serialized form; callers export them separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub model: Model,
    pub dispersion: DispersionReport,
    /// `None` when the detection time is not after the source time.
    pub angular_width: Option<f64>,
    #[serde(skip)]
    pub position_density: Option<Density1D>,
    #[serde(skip)]
    pub momentum_density: Option<Density1D>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayPoint {
    pub delay: f64,
    pub m1: ModelSnapshot,
    pub m2: ModelSnapshot,
    pub m3: ModelSnapshot,
    /// `spread_law(a/2, delay)`, the width M1 should show.
    pub m1_spread_law: f64,
    pub m2_residual: ResidualStats,
    /// Smallest fidelity between an M2 branch and the heaviest M3 branch.
    pub m2_m3_min_fidelity: f64,
}

impl DelayPoint {
    pub fn snapshots(&self) -> [&ModelSnapshot; 3] {
        [&self.m1, &self.m2, &self.m3]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorReport {
    pub detection_probability: f64,
    /// Particle-1 position the M1 packet is conditioned on.
    pub m1_x1: f64,
    pub points: Vec<DelayPoint>,
}

fn snapshot(
    model: Model,
    dispersion: DispersionReport,
    position: Density1D,
    momentum: Density1D,
    t: f64,
    geometry: &ParaxialGeometry,
) -> ModelSnapshot {
    ModelSnapshot {
        model,
        angular_width: angular_width(dispersion.std_x, t, geometry).ok(),
        dispersion,
        position_density: Some(position),
        momentum_density: Some(momentum),
    }
}

fn packet_snapshot(f: &ComplexField1D, t: f64, geometry: &ParaxialGeometry) -> Result<ModelSnapshot> {
    Ok(snapshot(
        Model::M1,
        moments(f)?,
        Density1D::from_field(f),
        Density1D::from_field(&to_momentum(f)?),
        t,
        geometry,
    ))
}

fn ensemble_snapshot(
    model: Model,
    e: &ConditionalEnsemble,
    t: f64,
    geometry: &ParaxialGeometry,
) -> Result<ModelSnapshot> {
    Ok(snapshot(
        model,
        e.dispersion()?,
        e.position_density()?,
        e.momentum_density()?,
        t,
        geometry,
    ))
}

pub fn run_discriminator(cfg: &DiscriminatorConfig) -> Result<DiscriminatorReport> {
    cfg.validate()?;
    let grid = cfg.grid.build(cfg.constants)?;
    let psi = epr_source(grid, cfg.epr)?.free_evolve(cfg.measurement_time)?;
    let m1_x1 = cfg.slit.center;
    let m1_0 = collapse_packet_m1(grid, m1_x1, &cfg.slit)?;
    let m2_0 = condition_on_slit(&psi, &cfg.slit)?;
    let m3_0 = unconditional_ensemble(&psi)?;
    let c = cfg.constants;
    let points = cfg
        .delays
        .iter()
        .map(|&delay| {
            let t = cfg.measurement_time + delay;
            let m1 = m1_0.free_evolve(delay)?;
            let m2 = m2_0.evolve(delay)?;
            let m3 = m3_0.evolve(delay)?;
            Ok(DelayPoint {
                delay,
                m1: packet_snapshot(&m1, t, &cfg.geometry)?,
                m2: ensemble_snapshot(Model::M2, &m2, t, &cfg.geometry)?,
                m3: ensemble_snapshot(Model::M3, &m3, t, &cfg.geometry)?,
                m1_spread_law: spread_law(cfg.slit.full_width() / 2.0, delay, c.hbar, c.mass)?,
                m2_residual: m2.residual_stats()?,
                m2_m3_min_fidelity: m2.min_fidelity(&m3.dominant().field)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscriminatorReport {
        detection_probability: m2_0.detection_probability,
        m1_x1,
        points,
    })
}
