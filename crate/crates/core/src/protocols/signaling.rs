//! Two-slit signaling protocol. The sender picks a wide or a narrow slit for
//! particle 1 block by block; the receiver estimates the spread of particle
//! 2 in each block and tries to recover the sender's choice.
//!
//! Under [`SignalingModel::M2Unconditional`] the receiver sees what quantum
//! mechanics predicts for all pairs. Under [`SignalingModel::M1`] each pair
//! whose particle 1 is detected is replaced by a collapse packet, and the
//! rest keep the untouched marginal.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{check_time, epr_source, GridSpec};
use crate::dynamics::{evolve_axis, spread_law};
use crate::error::{Error, Result};
use crate::measurement::{Aperture, JointSampler};
use crate::numerics::{Axis, PhysicalConstants, X1, X2};
use crate::oracle::{detection_probability, epr_covariance, evolve_covariance, normal_cdf, slit_raw_moments};
use crate::rng::stream_rng;
use crate::states::EprParams;

pub const MIN_BLOCKS: usize = 20;
pub const MIN_PAIRS_PER_BLOCK: usize = 100;
pub const MIN_WIDTH_RATIO: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalingModel {
    M1,
    M2Unconditional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalingConfig {
    pub constants: PhysicalConstants,
    pub grid: GridSpec,
    pub epr: EprParams,
    pub slit_high: Aperture,
    pub slit_low: Aperture,
    pub blocks: usize,
    pub pairs_per_block: usize,
    pub delay: f64,
    pub model: SignalingModel,
    pub seed: u64,
}

impl SignalingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.blocks < MIN_BLOCKS {
            return Err(Error::InvalidParameter {
                name: "blocks",
                value: self.blocks as f64,
                constraint: "at least 20 blocks are required",
            });
        }
        if self.pairs_per_block < MIN_PAIRS_PER_BLOCK {
            return Err(Error::InvalidParameter {
                name: "pairs_per_block",
                value: self.pairs_per_block as f64,
                constraint: "at least 100 pairs per block are required",
            });
        }
        let (a, b) = (self.slit_high.full_width(), self.slit_low.full_width());
        if a.max(b) < MIN_WIDTH_RATIO * a.min(b) {
            return Err(Error::InvalidParameter {
                name: "slit_low",
                value: b,
                constraint: "slit widths must differ by at least a factor of 2",
            });
        }
        check_time("delay", self.delay)?;
        let grid = self.grid.build(self.constants)?;
        self.slit_high.check_resolved(&grid)?;
        self.slit_low.check_resolved(&grid)
    }

    /// Slit used in block `b`: high on even blocks, low on odd ones.
    pub fn slit_for_block(&self, b: usize) -> (bool, &Aperture) {
        if b % 2 == 0 {
            (true, &self.slit_high)
        } else {
            (false, &self.slit_low)
        }
    }
}

/// Oracle forecast of the receiver's statistic under one sender choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPrediction {
    pub detection_probability: f64,
    /// Std of particle 2 the block-level sample std estimates.
    pub std_x2: f64,
    /// Large-sample standard error of the block sample std.
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockResult {
    pub high: bool,
    pub detected: usize,
    pub sample_std: f64,
    pub decoded_high: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalingReport {
    pub prediction_high: BlockPrediction,
    pub prediction_low: BlockPrediction,
    pub threshold: f64,
    pub predicted_accuracy: f64,
    /// `predicted_accuracy` minus three binomial standard errors over blocks.
    pub accuracy_floor: f64,
    pub accuracy: f64,
    /// `0.5 / sqrt(blocks)`, the standard error of a chance-level accuracy.
    pub chance_std_error: f64,
    pub welch_t: f64,
    pub p_value: f64,
    pub blocks: Vec<BlockResult>,
}

/// Raw moments `E[X^k]`, `k = 0..=4`, of `N(mean, var)`.
fn normal_raw_moments(mean: f64, var: f64) -> [f64; 5] {
    let (m, v) = (mean, var);
    [
        1.0,
        m,
        m * m + v,
        m.powi(3) + 3.0 * m * v,
        m.powi(4) + 6.0 * m * m * v + 3.0 * v * v,
    ]
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Raw moments of `A + B` for independent `A`, `B`.
fn sum_raw_moments(a: &[f64; 5], b: &[f64; 5]) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (k, o) in out.iter_mut().enumerate() {
        *o = (0..=k).map(|j| binomial(k, j) * a[j] * b[k - j]).sum();
    }
    out
}

/// Std of the distribution and the standard error of a sample std over
/// `n` draws, `sqrt((mu4 - sigma^4) / n) / (2 sigma)`.
fn std_and_error(raw: &[f64; 5], n: usize) -> (f64, f64) {
    let m = raw[1];
    let var = raw[2] - m * m;
    let mu4 = raw[4] - 4.0 * m * raw[3] + 6.0 * m * m * raw[2] - 3.0 * m.powi(4);
    let sigma = var.sqrt();
    (sigma, ((mu4 - var * var) / n as f64).sqrt() / (2.0 * sigma))
}

/// Forecast for a block sent with `slit`, from the Gaussian oracle.
pub fn predict_block(cfg: &SignalingConfig, slit: &Aperture) -> Result<BlockPrediction> {
    let c = cfg.constants;
    let source = epr_covariance(cfg.epr, c.hbar);
    let var_x1 = source.cov[X1][X1];
    let marginal_var = evolve_covariance(&source, cfg.delay, c.mass).cov[X2][X2];
    let marginal = normal_raw_moments(0.0, marginal_var);
    let p = detection_probability(0.0, var_x1, slit);
    let raw = match cfg.model {
        SignalingModel::M2Unconditional => marginal,
        SignalingModel::M1 => {
            let x1 = slit_raw_moments(0.0, var_x1, slit)?;
            let mirrored = [x1[0], -x1[1], x1[2], -x1[3], x1[4]];
            let width = spread_law(slit.full_width() / 2.0, cfg.delay, c.hbar, c.mass)?;
            let collapsed = sum_raw_moments(&mirrored, &normal_raw_moments(0.0, width * width));
            let mut mix = [0.0; 5];
            for k in 0..5 {
                mix[k] = p * collapsed[k] + (1.0 - p) * marginal[k];
            }
            mix
        }
    };
    let (std_x2, std_error) = std_and_error(&raw, cfg.pairs_per_block);
    Ok(BlockPrediction {
        detection_probability: p,
        std_x2,
        std_error,
    })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (
        mean,
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0),
    )
}

/// Welch's two-sample t statistic and two-sided p-value.
pub fn welch_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if !(se2 > 0.0) {
        return (0.0, 1.0);
    }
    let t = (ma - mb) / se2.sqrt();
    let dof = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let p = match StudentsT::new(0.0, 1.0, dof) {
        Ok(dist) => 2.0 * dist.sf(t.abs()),
        Err(_) => 1.0,
    };
    (t, p)
}

pub fn run_signaling_test(cfg: &SignalingConfig) -> Result<SignalingReport> {
    cfg.validate()?;
    let c = cfg.constants;
    let prediction_high = predict_block(cfg, &cfg.slit_high)?;
    let prediction_low = predict_block(cfg, &cfg.slit_low)?;
    let threshold = 0.5 * (prediction_high.std_x2 + prediction_low.std_x2);
    let high_is_narrow = prediction_high.std_x2 < prediction_low.std_x2;
    let decode = |s: f64| (s < threshold) == high_is_narrow;

    let hit = |p: &BlockPrediction, high: bool| {
        let z = (threshold - p.std_x2) / p.std_error;
        if (high && high_is_narrow) || (!high && !high_is_narrow) {
            normal_cdf(z)
        } else {
            1.0 - normal_cdf(z)
        }
    };
    let predicted_accuracy = 0.5 * (hit(&prediction_high, true) + hit(&prediction_low, false));
    let nb = cfg.blocks as f64;
    let accuracy_floor =
        predicted_accuracy - 3.0 * (predicted_accuracy * (1.0 - predicted_accuracy) / nb).sqrt();

    // Particle 1 stays at the measurement time; particle 2 flies on.
    let grid = cfg.grid.build(c)?;
    let psi = evolve_axis(&epr_source(grid, cfg.epr)?, Axis::Two, cfg.delay)?;
    let sampler = JointSampler::new(&psi)?;
    let width = |slit: &Aperture| spread_law(slit.full_width() / 2.0, cfg.delay, c.hbar, c.mass);
    let widths = [width(&cfg.slit_high)?, width(&cfg.slit_low)?];

    let blocks: Vec<BlockResult> = (0..cfg.blocks)
        .into_par_iter()
        .map(|b| {
            let (high, slit) = cfg.slit_for_block(b);
            let collapse_width = widths[usize::from(!high)];
            let mut rng = stream_rng(cfg.seed, b as u64);
            let mut detected = 0;
            let xs: Vec<f64> = (0..cfg.pairs_per_block)
                .map(|_| {
                    let (x1, x2) = sampler.sample(&mut rng);
                    let hit = rng.random::<f64>() < slit.transmission(x1);
                    detected += usize::from(hit);
                    match cfg.model {
                        SignalingModel::M2Unconditional => x2,
                        SignalingModel::M1 if hit => {
                            -x1 + collapse_width * rng.sample::<f64, _>(StandardNormal)
                        }
                        SignalingModel::M1 => sampler.sample_x2(&mut rng),
                    }
                })
                .collect();
            let sample_std = mean_var(&xs).1.sqrt();
            BlockResult {
                high,
                detected,
                sample_std,
                decoded_high: decode(sample_std),
            }
        })
        .collect();

    let accuracy = blocks.iter().filter(|b| b.decoded_high == b.high).count() as f64 / nb;
    let stds = |high: bool| -> Vec<f64> {
        blocks
            .iter()
            .filter(|b| b.high == high)
            .map(|b| b.sample_std)
            .collect()
    };
    let (welch_t, p_value) = welch_test(&stds(true), &stds(false));
    Ok(SignalingReport {
        prediction_high,
        prediction_low,
        threshold,
        predicted_accuracy,
        accuracy_floor,
        accuracy,
        chance_std_error: 0.5 / nb.sqrt(),
        welch_t,
        p_value,
        blocks,
    })
}
