//! Lattice results against the covariance oracle, quantity by quantity.

use serde::{Deserialize, Serialize};

use super::{check_delays, deviation, epr_source, GridSpec};
use crate::dynamics::FreeEvolve;
use crate::error::Result;
use crate::measurement::{condition_on_slit, Aperture};
use crate::numerics::{phase_space_moments, PhysicalConstants, P1, P2, X1, X2};
use crate::oracle::{condition_then_evolve, epr_covariance, evolve_covariance};
use crate::states::EprParams;

/// Tolerance for moments of states with no selection applied.
pub const UNCONDITIONED_TOLERANCE: f64 = 1e-3;
/// Tolerance for moments after a slit selection.
pub const CONDITIONED_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckConfig {
    pub constants: PhysicalConstants,
    pub grid: GridSpec,
    pub epr: EprParams,
    pub slit: Aperture,
    pub delays: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub quantity: String,
    pub delay: f64,
    pub grid: f64,
    pub oracle: f64,
    /// `|grid - oracle| / scale`, with the scale given per quantity.
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckReport {
    pub rows: Vec<CheckRow>,
    pub passed: bool,
}

impl OracleCheckReport {
    pub fn worst(&self) -> Option<&CheckRow> {
        self.rows
            .iter()
            .max_by(|a, b| (a.deviation / a.tolerance).total_cmp(&(b.deviation / b.tolerance)))
    }
}

struct Rows(Vec<CheckRow>);

impl Rows {
    fn push(&mut self, quantity: &str, delay: f64, grid: f64, oracle: f64, scale: f64, tolerance: f64) {
        let deviation = deviation(grid, oracle, scale);
        self.0.push(CheckRow {
            quantity: quantity.to_string(),
            delay,
            grid,
            oracle,
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        });
    }
}

pub fn run_oracle_check(cfg: &OracleCheckConfig) -> Result<OracleCheckReport> {
    check_delays(&cfg.delays)?;
    let c = cfg.constants;
    let grid = cfg.grid.build(c)?;
    cfg.slit.check_resolved(&grid)?;
    let psi = epr_source(grid, cfg.epr)?;
    let source = epr_covariance(cfg.epr, c.hbar);
    let selected = condition_on_slit(&psi, &cfg.slit)?;
    let mut rows = Rows(Vec::new());

    let pairs = [
        ("var_x1", X1, X1),
        ("var_p1", P1, P1),
        ("var_x2", X2, X2),
        ("var_p2", P2, P2),
        ("cov_x1_x2", X1, X2),
        ("cov_p1_p2", P1, P2),
        ("cov_x2_p2", X2, P2),
    ];
    for &delay in &cfg.delays {
        let g = phase_space_moments(&psi.free_evolve(delay)?)?;
        let o = evolve_covariance(&source, delay, c.mass);
        for (name, i, j) in pairs {
            let scale = (o.cov[i][i] * o.cov[j][j]).sqrt();
            rows.push(
                name,
                delay,
                g.cov[i][j],
                o.cov[i][j],
                scale,
                UNCONDITIONED_TOLERANCE,
            );
        }
    }

    for &delay in &cfg.delays {
        let d = selected.evolve(delay)?.dispersion()?;
        let o = condition_then_evolve(&source, &cfg.slit, delay, c.mass)?;
        let (std_x, std_p) = (o.var_x2.sqrt(), o.var_p2.sqrt());
        if delay == cfg.delays[0] {
            rows.push(
                "detection_probability",
                delay,
                selected.detection_probability,
                o.detection_probability,
                o.detection_probability,
                CONDITIONED_TOLERANCE,
            );
        }
        let tol = CONDITIONED_TOLERANCE;
        rows.push(
            "conditional_mean_x2",
            delay,
            d.mean_x,
            o.mean_x2,
            o.mean_x2.abs().max(std_x),
            tol,
        );
        rows.push("conditional_std_x2", delay, d.std_x, std_x, std_x, tol);
        rows.push("conditional_std_p2", delay, d.std_p, std_p, std_p, tol);
    }
    let rows = rows.0;
    let passed = rows.iter().all(|r| r.passed);
    Ok(OracleCheckReport { rows, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lattice_passes() {
        let cfg = OracleCheckConfig {
            constants: PhysicalConstants::default(),
            grid: GridSpec::default(),
            epr: EprParams::new(0.5, 10.0).unwrap(),
            slit: Aperture::tophat(2.0, 1.0).unwrap(),
            delays: vec![0.0, 1.0],
        };
        let r = run_oracle_check(&cfg).unwrap();
        assert!(r.passed, "{:?}", r.worst());
        assert_eq!(r.rows.len(), 7 * 2 + 1 + 3 * 2);
    }

    #[test]
    fn coarse_lattice_is_flagged() {
        let cfg = OracleCheckConfig {
            constants: PhysicalConstants::default(),
            grid: GridSpec {
                n: 128,
                ..GridSpec::default()
            },
            epr: EprParams::new(0.8, 10.0).unwrap(),
            slit: Aperture::tophat(2.0, 2.5).unwrap(),
            delays: vec![0.0],
        };
        let r = run_oracle_check(&cfg).unwrap();
        assert!(!r.passed);
    }
}
