//! Wavepacket simulation of two-particle position correlations: lattice
//! Fourier numerics, the regularized EPR pair, slit conditioning, free
//! evolution, a closed-form Gaussian oracle, the three measurement-model
//! protocols, and the CHSH comparison.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod dynamics;
pub mod error;
pub mod measurement;
pub mod numerics;
pub mod oracle;
pub mod protocols;
pub mod rng;
pub mod states;

pub use dynamics::{angular_width, spread_law, FreeEvolve, ParaxialGeometry};
pub use error::{Error, Result};
pub use measurement::{
    collapse_packet_m1, condition_on_slit, no_signaling_check, reduce_discrete, sample_joint, Aperture,
    ApertureKind, ConditionalEnsemble,
};
pub use numerics::{
    make_grid, moments, Axis, ComplexField1D, ComplexField2D, Density1D, DispersionReport, Grid1D,
    PhysicalConstants, Representation,
};
pub use states::{discrete_entangled, epr_pair, gaussian_packet, DiscreteEntangledSpec, EprParams};
