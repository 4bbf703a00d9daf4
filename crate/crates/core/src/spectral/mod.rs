//! Divergence-free Fourier representation of velocity fields on the torus
//! and the Stokes, Leray and advection operators acting on it.

mod bilinear;
mod field;
mod grid;
mod lattice;
mod snapshot;
mod transform;

pub use bilinear::{advect, bilinear};
pub use field::{Cutoff, SpectralField};
pub use grid::{leray_project, to_grid, to_spectral, GridVelocityField};
pub use lattice::{Lattice, WaveIndex};
pub use snapshot::{read_snapshot, write_snapshot};
