//! CHSH correlations: deterministic local strategies against the singlet.
//!
//! Only deterministic strategies are enumerated. A mixed local strategy is a
//! convex combination of them, so its CHSH value cannot exceed theirs.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `E(a, b) = -cos(a - b)` for the spin singlet.
pub fn qm_singlet_correlation(angle_a: f64, angle_b: f64) -> f64 {
    -(angle_a - angle_b).cos()
}

/// `S = E11 + E12 + E21 - E22`.
pub fn chsh_value(e11: f64, e12: f64, e21: f64, e22: f64) -> Result<f64> {
    for e in [e11, e12, e21, e22] {
        if !(-1.0..=1.0).contains(&e) {
            return Err(Error::CorrelationRange(e));
        }
    }
    Ok(e11 + e12 + e21 - e22)
}

/// Pre-assigned `+-1` outcomes for Alice's and Bob's two settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LhvStrategy {
    pub a_outputs: [i8; 2],
    pub b_outputs: [i8; 2],
}

impl LhvStrategy {
    /// All 16 strategies, indexed by the bits of `0..16`.
    pub fn all() -> Vec<Self> {
        let sign = |bits: u8, k: u8| if bits >> k & 1 == 0 { 1 } else { -1 };
        (0u8..16)
            .map(|b| Self {
                a_outputs: [sign(b, 0), sign(b, 1)],
                b_outputs: [sign(b, 2), sign(b, 3)],
            })
            .collect()
    }

    pub fn correlation(&self, i: usize, j: usize) -> i32 {
        i32::from(self.a_outputs[i]) * i32::from(self.b_outputs[j])
    }

    /// CHSH value in exact integer arithmetic.
    pub fn chsh(&self) -> i32 {
        self.correlation(0, 0) + self.correlation(0, 1) + self.correlation(1, 0) - self.correlation(1, 1)
    }
}

/// Largest `|S|` over every deterministic strategy.
pub fn lhv_max_chsh() -> i32 {
    LhvStrategy::all()
        .iter()
        .map(|s| s.chsh().abs())
        .max()
        .unwrap_or(0)
}

/// Settings `(a1, a2, b1, b2)` in radians.
pub type ChshAngles = [f64; 4];

/// The four orderings of Alice's `{0, pi/2}` and Bob's `{pi/4, 3pi/4}`.
/// Since `S` singles out the `(a2, b2)` term, only one ordering is optimal.
pub fn standard_angle_sets() -> [ChshAngles; 4] {
    let (a, b) = ([0.0, FRAC_PI_2], [FRAC_PI_4, 3.0 * FRAC_PI_4]);
    [
        [a[0], a[1], b[0], b[1]],
        [a[0], a[1], b[1], b[0]],
        [a[1], a[0], b[0], b[1]],
        [a[1], a[0], b[1], b[0]],
    ]
}

/// Singlet CHSH value at the given settings.
pub fn qm_chsh(angles: ChshAngles) -> Result<f64> {
    let [a1, a2, b1, b2] = angles;
    let e = qm_singlet_correlation;
    chsh_value(e(a1, b1), e(a1, b2), e(a2, b1), e(a2, b2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    pub lhv_max_chsh: i32,
    pub lhv_strategies: usize,
    pub lhv_strategies_at_max: usize,
    pub qm_chsh: Vec<f64>,
    pub qm_max_abs_chsh: f64,
    pub tsirelson_bound: f64,
}

pub fn run_bell() -> Result<BellReport> {
    let strategies = LhvStrategy::all();
    let max = lhv_max_chsh();
    let qm = standard_angle_sets()
        .into_iter()
        .map(qm_chsh)
        .collect::<Result<Vec<_>>>()?;
    Ok(BellReport {
        lhv_max_chsh: max,
        lhv_strategies: strategies.len(),
        lhv_strategies_at_max: strategies.iter().filter(|s| s.chsh().abs() == max).count(),
        qm_max_abs_chsh: qm.iter().fold(0.0, |m, s| m.max(s.abs())),
        qm_chsh: qm,
        tsirelson_bound: 2.0 * std::f64::consts::SQRT_2,
    })
}
