//! Spectral scalarization of vector fields on spherical domains.
//!
//! Fields live on a [`grid::SphericalGrid`]: Gauss–Legendre radial nodes times a
//! Gauss–Legendre/uniform angular grid, with complex orthonormal spherical
//! harmonics (Condon–Shortley phase) as the angular basis. On top of that:
//!
//! * [`operators`]: ∇, div, curl, `L = -r×∇`, `N = ∇×L`, `M = -r×L`, △⁻¹, L⁻²
//! * [`algebra`]: data-driven numerical verification of operator identities
//! * [`decompose`]: Helmholtz and Neumann–Debye decompositions with inversion
//! * [`multipole`]: charge, magnetic, transverse-electric and toroid moments of currents
//! * [`verify`]: the verification suites behind `vecscal verify`

pub mod algebra;
pub mod decompose;
pub mod error;
pub mod grid;
pub mod harmonics;
pub mod io;
pub mod multipole;
pub mod operators;
pub mod quadrature;
pub mod random;
pub mod sources;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{
    analyze_scalar, analyze_vector, integrate_volume, make_grid, synthesize_scalar, synthesize_vector, GridSpec,
    ScalarField, SphericalGrid, VectorField, C64,
};
pub use harmonics::{HarmonicIndex, VectorHarmonicIndex};
