//! Position <-> momentum transforms with the symmetric continuum normalization
//!
//! ```text
//! phi(p) = (2 pi hbar)^(-1/2) * integral dx exp(-i p x / hbar) psi(x)
//! ```
//!
//! discretized on the paired lattices of [`Grid1D`]. Because
//! `dx * dp * n = 2 pi hbar`, the discrete map is exactly unitary between the
//! `dx`-weighted and `dp`-weighted inner products.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::field::{transpose, Axis, ComplexField1D, ComplexField2D, Representation};
use super::grid::Grid1D;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToMomentum,
    ToPosition,
}

impl Direction {
    fn source(self) -> Representation {
        match self {
            Direction::ToMomentum => Representation::Position,
            Direction::ToPosition => Representation::Momentum,
        }
    }

    fn target(self) -> Representation {
        match self {
            Direction::ToMomentum => Representation::Momentum,
            Direction::ToPosition => Representation::Position,
        }
    }
}

/// Planned transform for one lattice; cheap to share between threads.
pub(crate) struct LatticeTransform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(-i p_j x_min / hbar) * dx / sqrt(2 pi hbar)`
    to_momentum: Vec<Complex64>,
    /// `exp(+i p_j x_min / hbar)`
    from_momentum: Vec<Complex64>,
    position_scale: f64,
}

impl LatticeTransform {
    pub(crate) fn new(grid: &Grid1D) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let root = (2.0 * PI * grid.hbar()).sqrt();
        let offset = grid.x_min() / grid.dx();
        let half = (n / 2) as f64;
        let phases: Vec<f64> = (0..n)
            .map(|j| (j as f64 - half) * 2.0 * PI / n as f64 * offset)
            .collect();
        let to_momentum = phases
            .iter()
            .map(|&a| Complex64::from_polar(grid.dx() / root, -a))
            .collect();
        let from_momentum = phases.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
        Self {
            forward,
            inverse,
            to_momentum,
            from_momentum,
            position_scale: grid.dp() / root,
        }
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    pub(crate) fn make_scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.scratch_len()]
    }

    pub(crate) fn to_momentum(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        alternate_signs(buf);
        self.forward.process_with_scratch(buf, scratch);
        for (v, w) in buf.iter_mut().zip(&self.to_momentum) {
            *v *= w;
        }
    }

    pub(crate) fn to_position(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        for (v, w) in buf.iter_mut().zip(&self.from_momentum) {
            *v *= w;
        }
        self.inverse.process_with_scratch(buf, scratch);
        let s = self.position_scale;
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= if k % 2 == 0 { s } else { -s };
        }
    }

    pub(crate) fn apply(&self, dir: Direction, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        match dir {
            Direction::ToMomentum => self.to_momentum(buf, scratch),
            Direction::ToPosition => self.to_position(buf, scratch),
        }
    }
}

fn alternate_signs(buf: &mut [Complex64]) {
    for v in buf.iter_mut().skip(1).step_by(2) {
        *v = -*v;
    }
}

/// Transforms a single-particle field into its dual representation.
pub fn fourier_transform(f: &ComplexField1D, dir: Direction) -> Result<ComplexField1D> {
    if f.representation() != dir.source() {
        return Err(Error::Representation {
            expected: dir.source(),
            actual: f.representation(),
        });
    }
    let plan = LatticeTransform::new(f.grid());
    let mut values = f.values().to_vec();
    let mut scratch = plan.make_scratch();
    plan.apply(dir, &mut values, &mut scratch);
    ComplexField1D::new(*f.grid(), values, dir.target())
}

pub fn to_momentum(f: &ComplexField1D) -> Result<ComplexField1D> {
    fourier_transform(f, Direction::ToMomentum)
}

pub fn to_position(f: &ComplexField1D) -> Result<ComplexField1D> {
    fourier_transform(f, Direction::ToPosition)
}

/// Returns the field in the requested representation, transforming only if needed.
pub fn in_representation(f: &ComplexField1D, repr: Representation) -> Result<ComplexField1D> {
    match (f.representation(), repr) {
        (a, b) if a == b => Ok(f.clone()),
        (_, Representation::Momentum) => to_momentum(f),
        (_, Representation::Position) => to_position(f),
    }
}

/// Applies `op` to every contiguous row of length `row_len`, in parallel.
/// Each row is processed independently, so the result does not depend on the
/// number of worker threads.
pub(crate) fn for_each_row(
    values: &mut [Complex64],
    row_len: usize,
    scratch_len: usize,
    op: impl Fn(&mut [Complex64], &mut [Complex64]) + Sync,
) {
    values.par_chunks_mut(row_len).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| op(row, scratch),
    );
}

/// Runs `op` over every 1D line of `field` along `axis`.
pub(crate) fn for_each_line(
    field: &mut ComplexField2D,
    axis: Axis,
    scratch_len: usize,
    op: impl Fn(&mut [Complex64], &mut [Complex64]) + Sync,
) {
    let (n1, n2) = field.shape();
    match axis {
        Axis::Two => for_each_row(field.values_mut(), n2, scratch_len, op),
        Axis::One => {
            let mut t = transpose(field.values(), n1, n2);
            for_each_row(&mut t, n1, scratch_len, op);
            field.values_mut().copy_from_slice(&transpose(&t, n2, n1));
        }
    }
}

/// Transforms one particle axis of a two-particle field.
pub fn transform_axis(f: &ComplexField2D, axis: Axis, dir: Direction) -> Result<ComplexField2D> {
    if f.representation(axis) != dir.source() {
        return Err(Error::Representation {
            expected: dir.source(),
            actual: f.representation(axis),
        });
    }
    let plan = LatticeTransform::new(f.grid(axis));
    let mut out = f.clone();
    for_each_line(&mut out, axis, plan.scratch_len(), |line, scratch| {
        plan.apply(dir, line, scratch)
    });
    out.set_representation(axis, dir.target());
    Ok(out)
}

/// Brings both axes into `repr`.
pub fn both_axes(f: &ComplexField2D, repr: Representation) -> Result<ComplexField2D> {
    let mut out = f.clone();
    for axis in [Axis::One, Axis::Two] {
        if out.representation(axis) != repr {
            let dir = match repr {
                Representation::Momentum => Direction::ToMomentum,
                Representation::Position => Direction::ToPosition,
            };
            out = transform_axis(&out, axis, dir)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;

    /// Direct O(n^2) evaluation of the continuum integral on the lattice.
    fn naive_momentum(f: &ComplexField1D) -> Vec<Complex64> {
        let g = f.grid();
        let root = (2.0 * PI * g.hbar()).sqrt();
        (0..g.n())
            .map(|j| {
                let p = g.p(j);
                f.values()
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * Complex64::from_polar(1.0, -p * g.x(k) / g.hbar()))
                    .sum::<Complex64>()
                    * (g.dx() / root)
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum() {
        let g = make_grid(64, -7.0, 9.0).unwrap();
        let f = ComplexField1D::from_fn(g, |x| Complex64::new((-(x - 1.0).powi(2)).exp(), 0.2 * x.sin()));
        let fast = to_momentum(&f).unwrap();
        for (a, b) in fast.values().iter().zip(naive_momentum(&f)) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn gaussian_maps_to_gaussian() {
        // phi(p) = (2/pi)^(1/4) sqrt(sigma) exp(-sigma^2 p^2) for sigma = 1, x0 = 0, hbar = 1
        let g = make_grid(256, -20.0, 20.0).unwrap();
        let f = ComplexField1D::from_fn(g, |x| {
            Complex64::new((2.0 * PI).powf(-0.25) * (-x * x / 4.0).exp(), 0.0)
        });
        let m = to_momentum(&f).unwrap();
        for (j, v) in m.values().iter().enumerate() {
            let p = g.p(j);
            let exact = (2.0 / PI).powf(0.25) * (-p * p).exp();
            assert!((v - Complex64::new(exact, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn direction_must_match_representation() {
        let g = make_grid(16, -1.0, 1.0).unwrap();
        let f = ComplexField1D::from_fn(g, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(to_position(&f), Err(Error::Representation { .. })));
    }

    #[test]
    fn axis_transform_matches_row_transform() {
        let g1 = make_grid(16, -4.0, 4.0).unwrap();
        let g2 = make_grid(32, -3.0, 5.0).unwrap();
        let f = ComplexField2D::from_fn([g1, g2], |a, b| {
            Complex64::new((-(a * a) - b * b / 2.0).exp(), a * b * 0.1)
        });
        let t = transform_axis(&f, Axis::Two, Direction::ToMomentum).unwrap();
        let row3 = ComplexField1D::new(g2, f.row(3).to_vec(), Representation::Position).unwrap();
        let expect = to_momentum(&row3).unwrap();
        for (a, b) in t.row(3).iter().zip(expect.values()) {
            assert!((a - b).norm() < 1e-14);
        }
        let back = both_axes(
            &both_axes(&f, Representation::Momentum).unwrap(),
            Representation::Position,
        )
        .unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
