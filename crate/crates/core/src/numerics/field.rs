use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid1D;
use crate::error::{Error, Result};

/// Largest density tolerated on the outermost lattice points of a
/// position-space field before it counts as wrapping around.
pub const BOUNDARY_DENSITY_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Position,
    Momentum,
}

impl Representation {
    /// Lattice spacing used as the integration measure in this representation.
    pub fn spacing(self, grid: &Grid1D) -> f64 {
        match self {
            Representation::Position => grid.dx(),
            Representation::Momentum => grid.dp(),
        }
    }

    pub fn coordinate(self, grid: &Grid1D, k: usize) -> f64 {
        match self {
            Representation::Position => grid.x(k),
            Representation::Momentum => grid.p(k),
        }
    }

    pub fn coordinates(self, grid: &Grid1D) -> Vec<f64> {
        (0..grid.n()).map(|k| self.coordinate(grid, k)).collect()
    }
}

/// Particle axis of a two-particle field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    One,
    Two,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::One => 0,
            Axis::Two => 1,
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::One => Axis::Two,
            Axis::Two => Axis::One,
        }
    }
}

/// Single-particle wavefunction samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField1D {
    grid: Grid1D,
    values: Vec<Complex64>,
    repr: Representation,
}

impl ComplexField1D {
    pub fn new(grid: Grid1D, values: Vec<Complex64>, repr: Representation) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values, repr })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n()).map(|k| f(grid.x(k))).collect();
        Self {
            grid,
            values,
            repr: Representation::Position,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn spacing(&self) -> f64 {
        self.repr.spacing(&self.grid)
    }

    pub fn coordinates(&self) -> Vec<f64> {
        self.repr.coordinates(&self.grid)
    }

    /// Unweighted `|psi_k|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `sum |psi_k|^2 * spacing`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spacing()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Unnormalized(norm));
        }
        let scale = norm.sqrt().recip();
        self.values.iter_mut().for_each(|v| *v *= scale);
        Ok(self)
    }

    /// `<self|other>` with the lattice measure of the shared representation.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.repr != other.repr {
            return Err(Error::Representation {
                expected: self.repr,
                actual: other.repr,
            });
        }
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.spacing())
    }

    /// `|<self|other>|^2` for normalized fields.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Rejects position-space fields with appreciable density on the two
    /// outermost lattice points.
    pub fn check_boundary(&self) -> Result<()> {
        if self.repr != Representation::Position {
            return Ok(());
        }
        let n = self.values.len();
        let edge = self.values[0].norm_sqr().max(self.values[n - 1].norm_sqr());
        check_edge(edge)
    }
}

pub(crate) fn check_edge(edge: f64) -> Result<()> {
    if edge > BOUNDARY_DENSITY_LIMIT || !edge.is_finite() {
        Err(Error::BoundaryOverflow {
            density: edge,
            limit: BOUNDARY_DENSITY_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Two-particle wavefunction samples, row-major with particle 1 as the slow
/// index: `values[i1 * n2 + i2] = psi(x1_i1, x2_i2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    grids: [Grid1D; 2],
    values: Vec<Complex64>,
    reprs: [Representation; 2],
}

impl ComplexField2D {
    pub fn new(grids: [Grid1D; 2], values: Vec<Complex64>, reprs: [Representation; 2]) -> Result<Self> {
        if values.len() != grids[0].n() * grids[1].n() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grids, values, reprs })
    }

    pub fn from_fn(grids: [Grid1D; 2], f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        use rayon::prelude::*;
        let n2 = grids[1].n();
        let mut values = vec![Complex64::new(0.0, 0.0); grids[0].n() * n2];
        values.par_chunks_mut(n2).enumerate().for_each(|(i, row)| {
            let x1 = grids[0].x(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(x1, grids[1].x(j));
            }
        });
        Self {
            grids,
            values,
            reprs: [Representation::Position; 2],
        }
    }

    pub fn grids(&self) -> &[Grid1D; 2] {
        &self.grids
    }

    pub fn grid(&self, axis: Axis) -> &Grid1D {
        &self.grids[axis.index()]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn representation(&self, axis: Axis) -> Representation {
        self.reprs[axis.index()]
    }

    pub fn representations(&self) -> [Representation; 2] {
        self.reprs
    }

    pub(crate) fn set_representation(&mut self, axis: Axis, repr: Representation) {
        self.reprs[axis.index()] = repr;
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        self.reprs[axis.index()].spacing(&self.grids[axis.index()])
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.grids[0].n(), self.grids[1].n())
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing(Axis::One) * self.spacing(Axis::Two)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_area()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Unnormalized(norm));
        }
        let scale = norm.sqrt().recip();
        self.values.iter_mut().for_each(|v| *v *= scale);
        Ok(self)
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grids != other.grids {
            return Err(Error::GridMismatch);
        }
        if self.reprs != other.reprs {
            return Err(Error::Config("representation mismatch between fields".into()));
        }
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.cell_area())
    }

    /// Row `i1` of particle 1: the unnormalized particle-2 slice `psi(x1_i1, .)`.
    pub fn row(&self, i1: usize) -> &[Complex64] {
        let n2 = self.grids[1].n();
        &self.values[i1 * n2..(i1 + 1) * n2]
    }

    pub fn at(&self, i1: usize, i2: usize) -> Complex64 {
        self.values[i1 * self.grids[1].n() + i2]
    }

    /// Swaps the particle labels.
    pub fn transposed(&self) -> Self {
        let (n1, n2) = self.shape();
        Self {
            grids: [self.grids[1], self.grids[0]],
            values: transpose(&self.values, n1, n2),
            reprs: [self.reprs[1], self.reprs[0]],
        }
    }

    /// Largest density over the edge rows and columns of every axis held in
    /// the position representation.
    pub fn boundary_density(&self) -> f64 {
        let (n1, n2) = self.shape();
        let mut edge: f64 = 0.0;
        if self.reprs[1] == Representation::Position {
            for i in 0..n1 {
                edge = edge
                    .max(self.at(i, 0).norm_sqr())
                    .max(self.at(i, n2 - 1).norm_sqr());
            }
        }
        if self.reprs[0] == Representation::Position {
            for j in 0..n2 {
                edge = edge
                    .max(self.at(0, j).norm_sqr())
                    .max(self.at(n1 - 1, j).norm_sqr());
            }
        }
        edge
    }

    pub fn check_boundary(&self) -> Result<()> {
        check_edge(self.boundary_density())
    }
}

/// Out-of-place transpose of an `rows x cols` row-major buffer.
pub(crate) fn transpose<T: Copy + Send + Sync>(values: &[T], rows: usize, cols: usize) -> Vec<T> {
    use rayon::prelude::*;
    if values.is_empty() {
        return Vec::new();
    }
    let mut out = vec![values[0]; values.len()];
    out.par_chunks_mut(rows).enumerate().for_each(|(c, out_row)| {
        for (r, v) in out_row.iter_mut().enumerate() {
            *v = values[r * cols + c];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;

    #[test]
    fn transpose_round_trip() {
        let v: Vec<u32> = (0..12).collect();
        let t = transpose(&v, 3, 4);
        assert_eq!(t[1], 4);
        assert_eq!(transpose(&t, 4, 3), v);
    }

    #[test]
    fn boundary_guard_trips_on_wide_packets() {
        let g = make_grid(64, -4.0, 4.0).unwrap();
        let wide = ComplexField1D::from_fn(g, |x| Complex64::new((-x * x / 8.0).exp(), 0.0));
        assert!(matches!(
            wide.check_boundary(),
            Err(Error::BoundaryOverflow { .. })
        ));
        let narrow = ComplexField1D::from_fn(g, |x| Complex64::new((-x * x / 0.5).exp(), 0.0));
        assert!(narrow.check_boundary().is_ok());
    }

    #[test]
    fn normalization_and_fidelity() {
        let g = make_grid(128, -10.0, 10.0).unwrap();
        let f = ComplexField1D::from_fn(g, |x| Complex64::new((-x * x).exp(), 0.3 * x))
            .normalized()
            .unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-14);
        assert!((f.fidelity(&f).unwrap() - 1.0).abs() < 1e-14);
        let zero =
            ComplexField1D::new(g, vec![Complex64::new(0.0, 0.0); 128], Representation::Position).unwrap();
        assert!(zero.normalized().is_err());
    }
}
