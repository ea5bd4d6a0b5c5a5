//! Slit apertures on particle 1 and what they imply for particle 2: the exact
//! conditional ensemble, the instantaneous-collapse packet, discrete-state
//! reduction, Monte Carlo detection events, and the no-signaling audit.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_unchecked, FreeEvolve};
use crate::error::{positive, Error, Result};
use crate::numerics::{
    check_edge, marginal, moments, to_momentum, Axis, ComplexField1D, ComplexField2D, Density1D,
    DispersionReport, Grid1D, Representation,
};
use crate::rng::{stream_rng, StreamRng};
use crate::states::{discrete_peak, gaussian_packet, DiscreteEntangledSpec};

/// Smallest detection probability [`condition_on_slit`] will normalize by.
pub const MIN_DETECTION_PROBABILITY: f64 = 1e-12;

/// A tophat must cover at least this many lattice cells.
pub const TOPHAT_MIN_CELLS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureKind {
    /// Full transmission on `[center - width/2, center + width/2)`.
    Tophat,
    /// Transmission `exp(-(x - center)^2 / (2 width^2))`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    pub kind: ApertureKind,
    pub center: f64,
    pub width: f64,
}

impl Aperture {
    pub fn new(kind: ApertureKind, center: f64, width: f64) -> Result<Self> {
        positive("width", width)?;
        if !center.is_finite() {
            return Err(Error::InvalidParameter {
                name: "center",
                value: center,
                constraint: "must be finite",
            });
        }
        Ok(Self { kind, center, width })
    }

    pub fn tophat(center: f64, width: f64) -> Result<Self> {
        Self::new(ApertureKind::Tophat, center, width)
    }

    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        Self::new(ApertureKind::Gaussian, center, width)
    }

    /// The slit size `a` a detection localizes particle 1 to: the tophat
    /// width, or twice the std of a Gaussian aperture.
    pub fn full_width(&self) -> f64 {
        match self.kind {
            ApertureKind::Tophat => self.width,
            ApertureKind::Gaussian => 2.0 * self.width,
        }
    }

    pub fn transmission(&self, x: f64) -> f64 {
        match self.kind {
            ApertureKind::Tophat => {
                let half = self.width / 2.0;
                if x >= self.center - half && x < self.center + half {
                    1.0
                } else {
                    0.0
                }
            }
            ApertureKind::Gaussian => {
                let z = (x - self.center) / self.width;
                (-0.5 * z * z).exp()
            }
        }
    }

    /// Interval outside which the transmission is zero (tophat) or below
    /// `exp(-72)` (Gaussian).
    pub fn support(&self) -> (f64, f64) {
        let half = match self.kind {
            ApertureKind::Tophat => self.width / 2.0,
            ApertureKind::Gaussian => 12.0 * self.width,
        };
        (self.center - half, self.center + half)
    }

    pub fn check_resolved(&self, grid: &Grid1D) -> Result<()> {
        let (width, cells) = match self.kind {
            ApertureKind::Tophat => (self.width, TOPHAT_MIN_CELLS),
            ApertureKind::Gaussian => (self.width, 1.0),
        };
        if width < cells * grid.dx() {
            return Err(Error::UnderResolved {
                what: "aperture width",
                width,
                required: cells * grid.dx(),
                dx: grid.dx(),
            });
        }
        let (lo, hi) = self.support();
        if self.kind == ApertureKind::Tophat && (lo < grid.x_min() || hi > grid.x_max()) {
            return Err(Error::InvalidParameter {
                name: "center",
                value: self.center,
                constraint: "slit must lie inside the grid",
            });
        }
        Ok(())
    }

    /// Transmission of every lattice cell `[x_k - dx/2, x_k + dx/2)`: the
    /// covered fraction for a tophat, the pointwise value for a Gaussian.
    pub fn cell_transmission(&self, grid: &Grid1D) -> Vec<f64> {
        let dx = grid.dx();
        (0..grid.n())
            .map(|k| {
                let x = grid.x(k);
                match self.kind {
                    ApertureKind::Tophat => {
                        let (lo, hi) = self.support();
                        let overlap = (x + dx / 2.0).min(hi) - (x - dx / 2.0).max(lo);
                        (overlap / dx).clamp(0.0, 1.0)
                    }
                    ApertureKind::Gaussian => self.transmission(x),
                }
            })
            .collect()
    }
}

/// One pure branch of the particle-2 state, tagged with the particle-1
/// lattice position it was conditioned on.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleComponent {
    pub weight: f64,
    pub x1: f64,
    pub field: ComplexField1D,
}

/// Reduced state of particle 2 after a particle-1 outcome class: a mixture of
/// normalized column slices of the joint wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEnsemble {
    pub components: Vec<EnsembleComponent>,
    pub detection_probability: f64,
}

/// Mean and std of the pair residual `x1 + x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub mean: f64,
    pub std: f64,
}

impl ConditionalEnsemble {
    pub fn grid(&self) -> &Grid1D {
        self.components[0].field.grid()
    }

    pub fn weight_sum(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Evolves every branch freely by `t`. Wraparound is judged on the
    /// mixture: a far-tail branch may touch the edge as long as its weight
    /// keeps the mixed edge density below the limit.
    pub fn evolve(&self, t: f64) -> Result<Self> {
        let components = self
            .components
            .par_iter()
            .map(|c| {
                Ok(EnsembleComponent {
                    weight: c.weight,
                    x1: c.x1,
                    field: evolve_unchecked(&c.field, t)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let out = Self {
            components,
            detection_probability: self.detection_probability,
        };
        out.check_boundary()?;
        Ok(out)
    }

    /// Edge density of the mixed position density.
    pub fn boundary_density(&self) -> f64 {
        let (mut lo, mut hi) = (0.0, 0.0);
        for c in &self.components {
            let v = c.field.values();
            lo += c.weight * v[0].norm_sqr();
            hi += c.weight * v[v.len() - 1].norm_sqr();
        }
        f64::max(lo, hi) / self.weight_sum()
    }

    pub fn check_boundary(&self) -> Result<()> {
        check_edge(self.boundary_density())
    }

    pub fn position_density(&self) -> Result<Density1D> {
        let densities: Vec<Density1D> = self
            .components
            .iter()
            .map(|c| Density1D::from_field(&c.field))
            .collect();
        Density1D::mixture(self.components.iter().map(|c| c.weight).zip(&densities))
    }

    pub fn momentum_density(&self) -> Result<Density1D> {
        let densities = self
            .components
            .par_iter()
            .map(|c| Ok(Density1D::from_field(&to_momentum(&c.field)?)))
            .collect::<Result<Vec<_>>>()?;
        Density1D::mixture(self.components.iter().map(|c| c.weight).zip(&densities))
    }

    /// Moments of every pure branch.
    pub fn component_dispersions(&self) -> Result<Vec<DispersionReport>> {
        self.components.par_iter().map(|c| moments(&c.field)).collect()
    }

    /// Moments of the mixed state.
    pub fn dispersion(&self) -> Result<DispersionReport> {
        let parts = self.component_dispersions()?;
        let hbar = self.grid().hbar();
        Ok(DispersionReport::mixture(
            self.components.iter().map(|c| c.weight).zip(&parts),
            hbar,
        ))
    }

    /// Statistics of `x1 + x2` with `x1` at each branch's lattice position.
    pub fn residual_stats(&self) -> Result<ResidualStats> {
        let parts = self.component_dispersions()?;
        let (mut m, mut m2) = (0.0, 0.0);
        for (c, d) in self.components.iter().zip(&parts) {
            let r = c.x1 + d.mean_x;
            m += c.weight * r;
            m2 += c.weight * (d.std_x * d.std_x + r * r);
        }
        let w = self.weight_sum();
        let (m, m2) = (m / w, m2 / w);
        Ok(ResidualStats {
            mean: m,
            std: (m2 - m * m).max(0.0).sqrt(),
        })
    }

    /// Smallest `|<target|branch>|^2` over all branches.
    pub fn min_fidelity(&self, target: &ComplexField1D) -> Result<f64> {
        self.components
            .iter()
            .map(|c| target.fidelity(&c.field))
            .try_fold(f64::INFINITY, |acc, f| f.map(|f| acc.min(f)))
    }

    /// The branch with the largest weight.
    pub fn dominant(&self) -> &EnsembleComponent {
        self.components.iter().fold(
            &self.components[0],
            |best, c| if c.weight > best.weight { c } else { best },
        )
    }
}

fn require_position_field(psi: &ComplexField2D) -> Result<()> {
    for axis in [Axis::One, Axis::Two] {
        let actual = psi.representation(axis);
        if actual != Representation::Position {
            return Err(Error::Representation {
                expected: Representation::Position,
                actual,
            });
        }
    }
    Ok(())
}

/// Conditions particle 2 on particle 1 passing a transmission profile given
/// per lattice row of axis 1.
pub fn condition_with_transmission(
    psi: &ComplexField2D,
    transmission: &[f64],
) -> Result<ConditionalEnsemble> {
    require_position_field(psi)?;
    let g1 = *psi.grid(Axis::One);
    let g2 = *psi.grid(Axis::Two);
    if transmission.len() != g1.n() {
        return Err(Error::GridMismatch);
    }
    let dx1 = psi.spacing(Axis::One);
    let dx2 = psi.spacing(Axis::Two);
    let rows: Vec<usize> = (0..g1.n()).filter(|&i| transmission[i] > 0.0).collect();
    let built = rows
        .par_iter()
        .map(|&i| {
            let row = psi.row(i);
            let mass = row.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx2;
            if !(mass > f64::MIN_POSITIVE) {
                return Ok(None);
            }
            let scale = mass.sqrt().recip();
            let values: Vec<Complex64> = row.iter().map(|v| v * scale).collect();
            let field = ComplexField1D::new(g2, values, Representation::Position)?;
            Ok(Some((transmission[i] * dx1 * mass, g1.x(i), field)))
        })
        .collect::<Result<Vec<_>>>()?;
    let built: Vec<_> = built.into_iter().flatten().collect();
    let detection_probability: f64 = built.iter().map(|(w, _, _)| w).sum();
    if !(detection_probability >= MIN_DETECTION_PROBABILITY) || built.is_empty() {
        return Err(Error::NoDetection(detection_probability));
    }
    let components = built
        .into_iter()
        .map(|(w, x1, field)| EnsembleComponent {
            weight: w / detection_probability,
            x1,
            field,
        })
        .collect();
    Ok(ConditionalEnsemble {
        components,
        detection_probability,
    })
}

/// Exact reduced state of particle 2 given that particle 1 was detected
/// behind `slit`.
pub fn condition_on_slit(psi: &ComplexField2D, slit: &Aperture) -> Result<ConditionalEnsemble> {
    let g1 = psi.grid(Axis::One);
    slit.check_resolved(g1)?;
    condition_with_transmission(psi, &slit.cell_transmission(g1))
}

/// Reduced state of particle 2 given that particle 1 was stopped by the
/// screen around `slit`.
pub fn condition_on_blocked(psi: &ComplexField2D, slit: &Aperture) -> Result<ConditionalEnsemble> {
    let g1 = psi.grid(Axis::One);
    slit.check_resolved(g1)?;
    let t: Vec<f64> = slit.cell_transmission(g1).iter().map(|t| 1.0 - t).collect();
    condition_with_transmission(psi, &t)
}

/// Particle 2 with no selection on particle 1 (every row kept).
pub fn unconditional_ensemble(psi: &ComplexField2D) -> Result<ConditionalEnsemble> {
    condition_with_transmission(psi, &vec![1.0; psi.grid(Axis::One).n()])
}

/// The state particle 2 would have if a detection of particle 1 at
/// `x1_detected` collapsed it onto the correlated position `-x1_detected`:
/// a minimum-uncertainty packet of position std `a/2`, so that its momentum
/// std is exactly `hbar / a` for slit size `a`.
pub fn collapse_packet_m1(grid: Grid1D, x1_detected: f64, slit: &Aperture) -> Result<ComplexField1D> {
    gaussian_packet(grid, -x1_detected, 0.0, slit.full_width() / 2.0)
}

/// Outcome statistics and post-measurement states of a discrete entangled
/// superposition measured on particle 1.
#[derive(Debug, Clone)]
pub struct DiscreteReduction {
    grids: [Grid1D; 2],
    spec: DiscreteEntangledSpec,
    probabilities: Vec<f64>,
    cdf: Vec<f64>,
}

impl DiscreteReduction {
    pub fn new(psi: &ComplexField2D, spec: DiscreteEntangledSpec) -> Result<Self> {
        spec.validate()?;
        require_position_field(psi)?;
        let grids = *psi.grids();
        let raw = (0..spec.terms)
            .map(|j| Ok(discrete_peak(grids, &spec, j)?.inner(psi)?.norm_sqr()))
            .collect::<Result<Vec<f64>>>()?;
        let total: f64 = raw.iter().sum();
        let probabilities: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let mut acc = 0.0;
        let cdf = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            grids,
            spec,
            probabilities,
            cdf,
        })
    }

    /// Born probabilities of the peak outcomes.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sample_outcome(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.spec.terms - 1)
    }

    pub fn post_state(&self, j: usize) -> Result<ComplexField2D> {
        discrete_peak(self.grids, &self.spec, j)
    }

    pub fn reduce(&self, rng: &mut impl Rng) -> Result<(usize, ComplexField2D)> {
        let j = self.sample_outcome(rng);
        Ok((j, self.post_state(j)?))
    }

    /// `trials` outcomes drawn in fixed-size chunks, one random stream per chunk.
    pub fn sample_outcomes(&self, seed: u64, trials: usize) -> Vec<usize> {
        chunked(seed, trials, |rng, n| {
            (0..n).map(|_| self.sample_outcome(rng)).collect()
        })
    }
}

/// Measures particle 1 of a discrete entangled state once.
pub fn reduce_discrete(
    psi: &ComplexField2D,
    spec: DiscreteEntangledSpec,
    seed: u64,
) -> Result<(usize, ComplexField2D)> {
    DiscreteReduction::new(psi, spec)?.reduce(&mut stream_rng(seed, 0))
}

/// Samples drawn per random stream by the chunked Monte Carlo helpers.
pub const SAMPLES_PER_STREAM: usize = 4096;

fn chunked<T: Send>(
    seed: u64,
    count: usize,
    draw: impl Fn(&mut StreamRng, usize) -> Vec<T> + Sync,
) -> Vec<T> {
    let chunks = count.div_ceil(SAMPLES_PER_STREAM);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = SAMPLES_PER_STREAM.min(count - c * SAMPLES_PER_STREAM);
            draw(&mut stream_rng(seed, c as u64), n)
        })
        .collect();
    parts.into_iter().flatten().collect()
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if acc > 0.0 {
        cdf.iter_mut().for_each(|c| *c /= acc);
    }
    cdf
}

fn invert(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Inverse-CDF sampler for `|psi(x1, x2)|^2`: a row from the particle-1
/// marginal, then a column from that row. Each draw is spread uniformly
/// over its lattice cell.
#[derive(Debug, Clone)]
pub struct JointSampler {
    grids: [Grid1D; 2],
    row_cdf: Vec<f64>,
    column_cdfs: Vec<f64>,
    marginal2_cdf: Vec<f64>,
}

impl JointSampler {
    pub fn new(psi: &ComplexField2D) -> Result<Self> {
        require_position_field(psi)?;
        let grids = *psi.grids();
        let (n1, n2) = psi.shape();
        let row_cdf = cumulative((0..n1).map(|i| psi.row(i).iter().map(|v| v.norm_sqr()).sum()));
        let mut column_cdfs = vec![0.0; n1 * n2];
        column_cdfs.par_chunks_mut(n2).enumerate().for_each(|(i, out)| {
            out.copy_from_slice(&cumulative(psi.row(i).iter().map(|v| v.norm_sqr())));
        });
        let marginal2_cdf = cumulative(marginal(psi, Axis::Two).values.into_iter());
        Ok(Self {
            grids,
            row_cdf,
            column_cdfs,
            marginal2_cdf,
        })
    }

    fn place(grid: &Grid1D, k: usize, u: f64) -> f64 {
        grid.x(k) + (u - 0.5) * grid.dx()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> (f64, f64) {
        let n2 = self.grids[1].n();
        let i = invert(&self.row_cdf, rng.random());
        let j = invert(&self.column_cdfs[i * n2..(i + 1) * n2], rng.random());
        let x1 = Self::place(&self.grids[0], i, rng.random());
        let x2 = Self::place(&self.grids[1], j, rng.random());
        (x1, x2)
    }

    /// A particle-2 position from its marginal, ignoring particle 1.
    pub fn sample_x2(&self, rng: &mut impl Rng) -> f64 {
        let j = invert(&self.marginal2_cdf, rng.random());
        Self::place(&self.grids[1], j, rng.random())
    }

    pub fn sample_many(&self, seed: u64, count: usize) -> Vec<(f64, f64)> {
        chunked(seed, count, |rng, n| (0..n).map(|_| self.sample(rng)).collect())
    }
}

/// `count` detection events `(x1, x2)` drawn from `|psi|^2`.
pub fn sample_joint(psi: &ComplexField2D, seed: u64, count: usize) -> Result<Vec<(f64, f64)>> {
    Ok(JointSampler::new(psi)?.sample_many(seed, count))
}

/// L1 distance between particle 2's density at `delay` after a slit
/// measurement on particle 1 at time zero, summed over both outcomes
/// (detected and blocked), and its density when particle 1 is never
/// measured. Quantum mechanics says this is zero.
pub fn no_signaling_check(psi: &ComplexField2D, slit: &Aperture, delay: f64) -> Result<f64> {
    let detected = condition_on_slit(psi, slit)?.evolve(delay)?;
    let mut parts = vec![(detected.detection_probability, detected.position_density()?)];
    match condition_on_blocked(psi, slit) {
        Ok(blocked) => {
            let blocked = blocked.evolve(delay)?;
            parts.push((blocked.detection_probability, blocked.position_density()?));
        }
        Err(Error::NoDetection(_)) => {}
        Err(e) => return Err(e),
    }
    let reconstructed = Density1D::mixture(parts.iter().map(|(w, d)| (*w, d)))?;
    let untouched = marginal(&psi.free_evolve(delay)?, Axis::Two);
    reconstructed.l1_distance(&untouched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;
    use crate::states::{discrete_entangled, epr_pair, EprParams};

    #[test]
    fn cell_transmission_integrates_to_width() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        for &(c, a) in &[(2.0, 1.0), (0.0, 0.2 + 1e-9), (-3.3, 0.77)] {
            let slit = Aperture::tophat(c, a).unwrap();
            let total: f64 = slit.cell_transmission(&g).iter().sum::<f64>() * g.dx();
            assert!((total - a).abs() < 1e-12, "{total} vs {a}");
        }
    }

    #[test]
    fn aligned_tophat_matches_pointwise_sampling() {
        let g = make_grid(64, -4.0, 4.0).unwrap();
        // edges at -0.0625 and 0.9375 sit on cell boundaries
        let slit = Aperture::tophat(0.4375, 1.0).unwrap();
        for (k, t) in slit.cell_transmission(&g).into_iter().enumerate() {
            assert_eq!(t, slit.transmission(g.x(k)));
        }
    }

    #[test]
    fn aperture_guards() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        assert!(Aperture::tophat(0.0, 0.0).is_err());
        assert!(matches!(
            Aperture::tophat(0.0, 0.2).unwrap().check_resolved(&g),
            Err(Error::UnderResolved { .. })
        ));
        assert!(Aperture::tophat(39.9, 1.0).unwrap().check_resolved(&g).is_err());
    }

    #[test]
    fn empty_slit_region_is_an_error() {
        let g = make_grid(128, -20.0, 20.0).unwrap();
        let psi = epr_pair([g, g], EprParams::new(0.5, 1.0).unwrap()).unwrap();
        let far = Aperture::tophat(18.0, 2.0).unwrap();
        assert!(matches!(
            condition_on_slit(&psi, &far),
            Err(Error::NoDetection(_))
        ));
    }

    #[test]
    fn collapse_packet_saturates_bound() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        let slit = Aperture::tophat(2.0, 1.0).unwrap();
        let d = moments(&collapse_packet_m1(g, 2.0, &slit).unwrap()).unwrap();
        assert!((d.mean_x + 2.0).abs() < 1e-9);
        assert!((d.std_x - 0.5).abs() < 1e-9);
        assert!((d.std_p - 1.0).abs() < 1e-9);
        let g = make_grid(1024, -20.0, 20.0).unwrap();
        let narrow = Aperture::tophat(0.0, 0.2).unwrap();
        let d = moments(&collapse_packet_m1(g, 0.0, &narrow).unwrap()).unwrap();
        assert!((d.std_p - 5.0).abs() < 1e-8);
    }

    #[test]
    fn discrete_reduction_post_state_is_a_peak() {
        let g = make_grid(128, -16.0, 16.0).unwrap();
        let spec = DiscreteEntangledSpec::new(3, 4.0, 0.5).unwrap();
        let psi = discrete_entangled([g, g], spec).unwrap();
        let (j, post) = reduce_discrete(&psi, spec, 11).unwrap();
        let peak = discrete_peak([g, g], &spec, j).unwrap();
        assert!((post.inner(&peak).unwrap().norm_sqr() - 1.0).abs() < 1e-8);
        assert_eq!(reduce_discrete(&psi, spec, 11).unwrap().0, j);
    }

    #[test]
    fn sampler_is_seeded() {
        let g = make_grid(64, -8.0, 8.0).unwrap();
        let psi = epr_pair([g, g], EprParams::new(0.5, 2.0).unwrap()).unwrap();
        let a = sample_joint(&psi, 3, 5000).unwrap();
        assert_eq!(a, sample_joint(&psi, 3, 5000).unwrap());
        assert_ne!(a, sample_joint(&psi, 4, 5000).unwrap());
    }
}
