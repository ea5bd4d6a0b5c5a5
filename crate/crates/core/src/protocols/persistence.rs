//! How the position correlation between the particles looks a while after
//! particle 1 was selected by a slit, computed twice: on the lattice by
//! conditioning and then evolving the branches, and by the covariance
//! oracle.

use serde::{Deserialize, Serialize};

use super::{check_delays, check_time, deviation, epr_source, GridSpec};
use crate::dynamics::FreeEvolve;
use crate::error::Result;
use crate::measurement::{condition_on_slit, Aperture, ResidualStats};
use crate::numerics::{PhysicalConstants, X1};
use crate::oracle::{condition_then_evolve, detection_probability, epr_covariance, evolve_covariance};
use crate::states::EprParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceConfig {
    pub constants: PhysicalConstants,
    pub grid: GridSpec,
    pub epr: EprParams,
    pub slit: Aperture,
    pub measurement_time: f64,
    pub delays: Vec<f64>,
}

impl PersistenceConfig {
    pub fn validate(&self) -> Result<()> {
        check_time("measurement_time", self.measurement_time)?;
        check_delays(&self.delays)?;
        self.slit.check_resolved(&self.grid.build(self.constants)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceRow {
    pub delay: f64,
    pub grid_mean_x2: f64,
    pub grid_std_x2: f64,
    pub oracle_mean_x2: f64,
    pub oracle_std_x2: f64,
    /// Mean deviation relative to `max(|oracle mean|, oracle std)`.
    pub mean_deviation: f64,
    pub std_deviation: f64,
    pub grid_residual: ResidualStats,
    pub oracle_residual: ResidualStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceReport {
    pub detection_probability: f64,
    pub oracle_detection_probability: f64,
    pub rows: Vec<PersistenceRow>,
}

pub fn run_correlation_persistence(cfg: &PersistenceConfig) -> Result<PersistenceReport> {
    cfg.validate()?;
    let c = cfg.constants;
    let grid = cfg.grid.build(c)?;
    let psi = epr_source(grid, cfg.epr)?.free_evolve(cfg.measurement_time)?;
    let selected = condition_on_slit(&psi, &cfg.slit)?;
    let at_measurement = evolve_covariance(&epr_covariance(cfg.epr, c.hbar), cfg.measurement_time, c.mass);
    let rows = cfg
        .delays
        .iter()
        .map(|&delay| {
            let e = selected.evolve(delay)?;
            let d = e.dispersion()?;
            let o = condition_then_evolve(&at_measurement, &cfg.slit, delay, c.mass)?;
            let oracle_std = o.var_x2.sqrt();
            Ok(PersistenceRow {
                delay,
                grid_mean_x2: d.mean_x,
                grid_std_x2: d.std_x,
                oracle_mean_x2: o.mean_x2,
                oracle_std_x2: oracle_std,
                mean_deviation: deviation(d.mean_x, o.mean_x2, o.mean_x2.abs().max(oracle_std)),
                std_deviation: deviation(d.std_x, oracle_std, oracle_std),
                grid_residual: e.residual_stats()?,
                oracle_residual: ResidualStats {
                    mean: o.residual_mean,
                    std: o.residual_var.sqrt(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PersistenceReport {
        detection_probability: selected.detection_probability,
        oracle_detection_probability: detection_probability(
            at_measurement.mean[X1],
            at_measurement.cov[X1][X1],
            &cfg.slit,
        ),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_tracks_oracle() {
        let cfg = PersistenceConfig {
            constants: PhysicalConstants::default(),
            grid: GridSpec::default(),
            epr: EprParams::new(0.5, 10.0).unwrap(),
            slit: Aperture::tophat(2.0, 1.0).unwrap(),
            measurement_time: 0.0,
            delays: vec![0.0, 0.5, 1.0],
        };
        let r = run_correlation_persistence(&cfg).unwrap();
        assert!((r.detection_probability - r.oracle_detection_probability).abs() < 1e-5);
        for row in &r.rows {
            assert!(row.mean_deviation < 5e-3, "{row:?}");
            assert!(row.std_deviation < 1e-2, "{row:?}");
        }
        // the branches spread, so the residual widens with delay
        assert!(r.rows[2].grid_residual.std > r.rows[0].grid_residual.std);
    }

    #[test]
    fn sharp_correlation_at_zero_delay() {
        let sigma_plus = 0.1;
        let cfg = PersistenceConfig {
            constants: PhysicalConstants::default(),
            grid: GridSpec::default(),
            epr: EprParams::new(sigma_plus, 10.0).unwrap(),
            slit: Aperture::tophat(2.0, 1.0).unwrap(),
            measurement_time: 0.0,
            delays: vec![0.0],
        };
        let r = run_correlation_persistence(&cfg).unwrap();
        assert!(r.rows[0].grid_residual.mean.abs() < sigma_plus);
        assert!(r.rows[0].oracle_residual.mean.abs() < sigma_plus);
    }
}
