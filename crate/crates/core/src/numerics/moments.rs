use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{Axis, ComplexField1D, ComplexField2D, Representation};
use super::fourier::{both_axes, in_representation, transform_axis, Direction};
use super::grid::Grid1D;
use crate::error::{Error, Result};

/// Tolerance on `|norm - 1|` accepted by [`moments`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// First and second moments of a state in both representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub mean_x: f64,
    pub std_x: f64,
    pub mean_p: f64,
    pub std_p: f64,
    /// `std_x * std_p / hbar`
    pub product: f64,
}

impl DispersionReport {
    pub fn new(mean_x: f64, std_x: f64, mean_p: f64, std_p: f64, hbar: f64) -> Self {
        Self {
            mean_x,
            std_x,
            mean_p,
            std_p,
            product: std_x * std_p / hbar,
        }
    }

    /// Moments of the statistical mixture `sum_i w_i rho_i`; weights are
    /// renormalized to sum to one.
    pub fn mixture<'a>(items: impl IntoIterator<Item = (f64, &'a DispersionReport)>, hbar: f64) -> Self {
        let (mut w, mut mx, mut mx2, mut mp, mut mp2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (weight, d) in items {
            w += weight;
            mx += weight * d.mean_x;
            mx2 += weight * (d.std_x * d.std_x + d.mean_x * d.mean_x);
            mp += weight * d.mean_p;
            mp2 += weight * (d.std_p * d.std_p + d.mean_p * d.mean_p);
        }
        let (mx, mx2, mp, mp2) = (mx / w, mx2 / w, mp / w, mp2 / w);
        Self::new(
            mx,
            (mx2 - mx * mx).max(0.0).sqrt(),
            mp,
            (mp2 - mp * mp).max(0.0).sqrt(),
            hbar,
        )
    }
}

/// A real probability density sampled on one lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Density1D {
    pub grid: Grid1D,
    pub representation: Representation,
    pub values: Vec<f64>,
}

impl Density1D {
    pub fn from_field(f: &ComplexField1D) -> Self {
        Self {
            grid: *f.grid(),
            representation: f.representation(),
            values: f.density(),
        }
    }

    pub fn spacing(&self) -> f64 {
        self.representation.spacing(&self.grid)
    }

    pub fn coordinates(&self) -> Vec<f64> {
        self.representation.coordinates(&self.grid)
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing()
    }

    /// `(mean, std)` of the density, assumed normalized.
    pub fn mean_std(&self) -> (f64, f64) {
        density_mean_std(&self.coordinates(), &self.values, self.spacing())
    }

    /// `sum |a - b| * spacing`.
    pub fn l1_distance(&self, other: &Density1D) -> Result<f64> {
        if self.grid != other.grid || self.representation != other.representation {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.spacing())
    }

    /// Weighted sum of densities on a common lattice.
    pub fn mixture<'a>(items: impl IntoIterator<Item = (f64, &'a Density1D)>) -> Result<Density1D> {
        let mut out: Option<Density1D> = None;
        for (w, d) in items {
            match &mut out {
                None => {
                    out = Some(Density1D {
                        grid: d.grid,
                        representation: d.representation,
                        values: d.values.iter().map(|v| w * v).collect(),
                    })
                }
                Some(acc) => {
                    if acc.grid != d.grid || acc.representation != d.representation {
                        return Err(Error::GridMismatch);
                    }
                    acc.values
                        .iter_mut()
                        .zip(&d.values)
                        .for_each(|(a, v)| *a += w * v);
                }
            }
        }
        out.ok_or_else(|| Error::Config("empty mixture".into()))
    }
}

pub(crate) fn density_mean_std(coords: &[f64], density: &[f64], spacing: f64) -> (f64, f64) {
    let mass: f64 = density.iter().sum::<f64>() * spacing;
    let mean = coords.iter().zip(density).map(|(c, d)| c * d).sum::<f64>() * spacing / mass;
    let var = coords
        .iter()
        .zip(density)
        .map(|(c, d)| (c - mean) * (c - mean) * d)
        .sum::<f64>()
        * spacing
        / mass;
    (mean, var.max(0.0).sqrt())
}

/// Position and momentum moments of a normalized single-particle field.
pub fn moments(f: &ComplexField1D) -> Result<DispersionReport> {
    let norm = f.norm_sqr();
    if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Unnormalized(norm));
    }
    let pos = in_representation(f, Representation::Position)?;
    let mom = in_representation(f, Representation::Momentum)?;
    let (mean_x, std_x) = Density1D::from_field(&pos).mean_std();
    let (mean_p, std_p) = Density1D::from_field(&mom).mean_std();
    Ok(DispersionReport::new(
        mean_x,
        std_x,
        mean_p,
        std_p,
        f.grid().hbar(),
    ))
}

/// Density of one particle with the other traced out, in whatever
/// representation `axis` currently holds.
pub fn marginal(f: &ComplexField2D, axis: Axis) -> Density1D {
    let (n1, n2) = f.shape();
    let weight = f.spacing(axis.other());
    let values = match axis {
        Axis::One => (0..n1)
            .map(|i| f.row(i).iter().map(|v| v.norm_sqr()).sum::<f64>() * weight)
            .collect(),
        Axis::Two => {
            let mut acc = vec![0.0; n2];
            for i in 0..n1 {
                acc.iter_mut().zip(f.row(i)).for_each(|(a, v)| *a += v.norm_sqr());
            }
            acc.iter_mut().for_each(|a| *a *= weight);
            acc
        }
    };
    Density1D {
        grid: *f.grid(axis),
        representation: f.representation(axis),
        values,
    }
}

/// Mean vector and covariance matrix of `(x1, p1, x2, p2)`, with the
/// position-momentum entries symmetrized: `Re <x p>` minus the mean product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceMoments {
    pub mean: [f64; 4],
    pub cov: [[f64; 4]; 4],
}

/// Index of each phase-space coordinate in [`PhaseSpaceMoments`].
pub const X1: usize = 0;
pub const P1: usize = 1;
pub const X2: usize = 2;
pub const P2: usize = 3;

fn apply_momentum(f: &ComplexField2D, axis: Axis) -> Result<ComplexField2D> {
    let mut m = transform_axis(f, axis, Direction::ToMomentum)?;
    let g = *f.grid(axis);
    let (n1, n2) = m.shape();
    let values = m.values_mut();
    for i in 0..n1 {
        for j in 0..n2 {
            let k = match axis {
                Axis::One => i,
                Axis::Two => j,
            };
            values[i * n2 + j] *= g.p(k);
        }
    }
    transform_axis(&m, axis, Direction::ToPosition)
}

/// First and second phase-space moments of a normalized two-particle field.
pub fn phase_space_moments(f: &ComplexField2D) -> Result<PhaseSpaceMoments> {
    let psi = both_axes(f, Representation::Position)?;
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Unnormalized(norm));
    }
    let p1 = apply_momentum(&psi, Axis::One)?;
    let p2 = apply_momentum(&psi, Axis::Two)?;
    let [g1, g2] = *psi.grids();
    let (n1, n2) = psi.shape();
    let area = psi.cell_area();

    // upper triangle of Re <O_a O_b>, O = (x1, p1, x2, p2)
    let mut first = [0.0; 4];
    let mut raw = [[0.0; 4]; 4];
    for i in 0..n1 {
        let x1 = g1.x(i);
        for j in 0..n2 {
            let x2 = g2.x(j);
            let k = i * n2 + j;
            let v = psi.values()[k];
            let a = p1.values()[k];
            let b = p2.values()[k];
            let rho = v.norm_sqr();
            let vc = v.conj();
            let xp = |x: f64, w: Complex64| (vc * w).re * x;
            first[X1] += x1 * rho;
            first[X2] += x2 * rho;
            first[P1] += (vc * a).re;
            first[P2] += (vc * b).re;
            raw[X1][X1] += x1 * x1 * rho;
            raw[X2][X2] += x2 * x2 * rho;
            raw[X1][X2] += x1 * x2 * rho;
            raw[P1][P1] += a.norm_sqr();
            raw[P2][P2] += b.norm_sqr();
            raw[P1][P2] += (a.conj() * b).re;
            raw[X1][P1] += xp(x1, a);
            raw[X1][P2] += xp(x1, b);
            raw[P1][X2] += xp(x2, a);
            raw[X2][P2] += xp(x2, b);
        }
    }
    let mean = first.map(|m| m * area);
    let mut cov = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in a..4 {
            cov[a][b] = raw[a][b] * area - mean[a] * mean[b];
            cov[b][a] = cov[a][b];
        }
    }
    Ok(PhaseSpaceMoments { mean, cov })
}
