//! Spherical-harmonic machinery for 3D Laplace potentials: local and
//! multipole expansions, the translation operators that re-center them,
//! and closed-form evaluators for the truncation error bounds those
//! translations obey.
//!
//! The crate is `no_std`-compatible (requires `alloc`); float math goes
//! through `libm` so results are identical with and without `std`.
//!
//! Conventions used throughout:
//!
//! * Spherical harmonics are orthonormal on the unit sphere, built from
//!   Ferrers associated Legendre functions with the Condon-Shortley
//!   phase, so `Y_n^{-m} = (-1)^m conj(Y_n^m)`.
//! * Regular solid harmonics `R_n^m(x) = |x|^n Y_n^m(x/|x|)` and
//!   irregular solid harmonics `I_n^m(x) = |x|^{-(n+1)} Y_n^m(x/|x|)`,
//!   both with unit L2 norm on the unit sphere.
//! * The point-source kernel is unit strength, `phi_s(x) = 1/|x - s|`,
//!   without a `1/(4 pi)` factor.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod math;

pub mod bounds;
pub mod error;
pub mod expansion;
pub mod quadrature;
pub mod special;
pub mod translation;
pub mod vec3;

pub use error::Error;
pub use expansion::{CoefficientTable, Expansion, ExpansionKind, PointSources};
pub use quadrature::SphereRule;
pub use special::HarmonicIndex;
pub use vec3::Vec3;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
