//! Error type shared by all modules.

use core::fmt;

/// Errors reported by expansion, quadrature, and bound evaluators.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A scalar argument lies outside the mathematical domain of the
    /// operation (e.g. `|t| > 1` for a Legendre evaluation).
    Domain(&'static str),
    /// A harmonic index with `|m| > n` or a degree beyond the supported
    /// range.
    Index { n: i64, m: i64 },
    /// Evaluation at (or too close to) a singular point, such as an
    /// irregular solid harmonic at the origin.
    Singularity(&'static str),
    /// A geometric precondition is violated (empty ball, intersecting
    /// validity regions, incompatible radii).
    Geometry(&'static str),
    /// An evaluation point lies outside an expansion's validity region.
    OutOfRegion { distance: f64, radius: f64 },
    /// An iteration failed to converge.
    Convergence(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::Index { n, m } => write!(f, "invalid harmonic index (n={n}, m={m})"),
            Error::Singularity(what) => write!(f, "singular evaluation: {what}"),
            Error::Geometry(what) => write!(f, "geometry error: {what}"),
            Error::OutOfRegion { distance, radius } => write!(
                f,
                "evaluation point at distance {distance} outside validity region (radius {radius})"
            ),
            Error::Convergence(what) => write!(f, "iteration failed to converge: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
