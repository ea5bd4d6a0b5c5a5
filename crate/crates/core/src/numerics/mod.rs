//! Lattices, complex fields, Fourier transforms between the position and
//! momentum representations, and moment extraction.

mod field;
mod fourier;
mod grid;
mod moments;

pub(crate) use field::check_edge;
pub use field::{Axis, ComplexField1D, ComplexField2D, Representation, BOUNDARY_DENSITY_LIMIT};
pub use fourier::{
    both_axes, fourier_transform, in_representation, to_momentum, to_position, transform_axis, Direction,
};
pub(crate) use fourier::{for_each_line, LatticeTransform};
pub use grid::{make_grid, Grid1D, PhysicalConstants};
pub use moments::{
    marginal, moments, phase_space_moments, Density1D, DispersionReport, PhaseSpaceMoments,
    NORMALIZATION_TOLERANCE, P1, P2, X1, X2,
};
