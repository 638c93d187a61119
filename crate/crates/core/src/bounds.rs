//! Closed-form evaluators for the truncation-error bounds obeyed by
//! the translation chains, the growth bounds for local expansions of
//! single solid harmonics, and the composite accuracy expression for
//! expansion-ball FMM targets.
//!
//! Powers are assembled in log space, so large orders underflow
//! gracefully to zero instead of producing garbage.

use core::f64::consts::PI;

use crate::error::Error;
use crate::math;
use crate::vec3::Vec3;
use crate::Result;

/// Geometry of a translation chain: separation `R` and ball radius `r`,
/// with an optional second stage `(R', r')` for the three-stage chain.
///
/// For the three-stage chain the center distance is overdetermined and
/// the compatibility relation `R' + r = R + r'` is enforced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainGeometry {
    outer: f64,
    inner: f64,
    second: Option<(f64, f64)>,
}

impl ChainGeometry {
    /// Single-stage geometry with `R > r > 0`.
    pub fn single(outer: f64, inner: f64) -> Result<Self> {
        check_pair(outer, inner)?;
        Ok(ChainGeometry { outer, inner, second: None })
    }

    /// Two-stage geometry from `R`, `r`, and the second-stage radius
    /// `r'`; the second-stage separation is fixed by compatibility,
    /// `R' = R + r' - r`, and `R' > r'` follows from `R > r`.
    pub fn two_stage(outer: f64, inner: f64, inner2: f64) -> Result<Self> {
        check_pair(outer, inner)?;
        if !inner2.is_finite() || inner2 <= 0.0 {
            return Err(Error::Geometry("second-stage radius must be positive"));
        }
        let outer2 = outer + inner2 - inner;
        Ok(ChainGeometry { outer, inner, second: Some((outer2, inner2)) })
    }

    /// Two-stage geometry with all four lengths given; fails unless
    /// `R' + r = R + r'` (within rounding) and both pairs are ordered.
    pub fn two_stage_explicit(outer: f64, inner: f64, outer2: f64, inner2: f64) -> Result<Self> {
        check_pair(outer, inner)?;
        check_pair(outer2, inner2)?;
        let lhs = outer2 + inner;
        let rhs = outer + inner2;
        if math::fabs(lhs - rhs) > 1e-12 * (lhs + rhs) {
            return Err(Error::Geometry("incompatible radii: R' + r must equal R + r'"));
        }
        Ok(ChainGeometry { outer, inner, second: Some((outer2, inner2)) })
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn second_stage(&self) -> Option<(f64, f64)> {
        self.second
    }

    /// Distance from the first center to the second, `R + r'`, defined
    /// only for the three-stage chain.
    pub fn center_distance(&self) -> Option<f64> {
        self.second.map(|(_, inner2)| self.outer + inner2)
    }
}

fn check_pair(outer: f64, inner: f64) -> Result<()> {
    if !outer.is_finite() || !inner.is_finite() || inner <= 0.0 || outer <= inner {
        return Err(Error::Geometry("separation must exceed ball radius, both positive"));
    }
    Ok(())
}

/// `(1/(R - r)) (r/R)^{p+1}` in log space; underflow clamps to 0.
fn geometric_term(outer: f64, inner: f64, p: u32) -> f64 {
    math::exp((p as f64 + 1.0) * (math::log(inner) - math::log(outer)) - math::log(outer - inner))
}

/// Truncation bound for source -> local(p) -> local(q), independent of
/// the final order `q`.
pub fn bound_chain_s2l2l(g: &ChainGeometry, p: u32) -> f64 {
    geometric_term(g.outer, g.inner, p)
}

/// Truncation bound for source -> multipole(p) -> local(q); the same
/// expression as the local chain.
pub fn bound_chain_s2m2l(g: &ChainGeometry, p: u32) -> f64 {
    geometric_term(g.outer, g.inner, p)
}

/// Truncation bound for source -> multipole(p) -> local(p) -> local(q):
/// the two single-stage terms added.
pub fn bound_chain_m2l2l(g: &ChainGeometry, p: u32) -> Result<f64> {
    let (outer2, inner2) = g
        .second
        .ok_or(Error::Geometry("three-stage bound requires a second stage"))?;
    Ok(geometric_term(g.outer, g.inner, p) + geometric_term(outer2, inner2, p))
}

/// Growth bound for the local expansion of a single regular solid
/// harmonic of degree `n` about `c`, evaluated at `t`:
/// `sqrt((2n+1)/(4 pi)) (|c| + |t - c|)^n`. Holds for every expansion
/// order.
pub fn bound_local_of_regular(n: u32, c: Vec3, t: Vec3) -> f64 {
    let base = c.norm() + (t - c).norm();
    let prefactor = math::sqrt((2.0 * n as f64 + 1.0) / (4.0 * PI));
    if n == 0 {
        return prefactor;
    }
    prefactor * math::exp(n as f64 * math::log(base))
}

/// Growth bound for the local expansion of a single irregular solid
/// harmonic of degree `n` about `c`, evaluated at `t` with
/// `|t - c| < |c|`: `sqrt((2n+1)/(4 pi)) (|c| - |t - c|)^{-(n+1)}`.
pub fn bound_local_of_irregular(n: u32, c: Vec3, t: Vec3) -> Result<f64> {
    let gap = c.norm() - (t - c).norm();
    if !gap.is_finite() || gap <= 0.0 {
        return Err(Error::Geometry("target must be closer to the center than the singularity"));
    }
    let prefactor = math::sqrt((2.0 * n as f64 + 1.0) / (4.0 * PI));
    Ok(prefactor * math::exp(-(n as f64 + 1.0) * math::log(gap)))
}

/// Inputs for the composite accuracy expression of an expansion-ball
/// FMM with target confinement factor `t_f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GigaqbxBoundInput {
    p: u32,
    t_f: f64,
    /// Sum of density-weighted quadrature weights (the theorem's `A`).
    pub density_weight_sum: f64,
    /// Unknown order-one constant (the theorem's `M`); defaults to 1.
    pub unknown_constant: f64,
    /// Minimum box radius in the tree (the theorem's `R`).
    pub min_box_radius: f64,
}

/// Upper limit of the valid target confinement range, `2 sqrt(3) - 2`.
pub const MAX_TARGET_CONFINEMENT: f64 = 1.464_101_615_137_754_5;

impl GigaqbxBoundInput {
    /// Requires `0 <= t_f < 2 sqrt(3) - 2`; the scale factors default
    /// to 1 and may be set directly on the returned value.
    pub fn new(p: u32, t_f: f64) -> Result<Self> {
        if !t_f.is_finite() || !(0.0..MAX_TARGET_CONFINEMENT).contains(&t_f) {
            return Err(Error::Domain("target confinement factor must lie in [0, 2 sqrt(3) - 2)"));
        }
        Ok(GigaqbxBoundInput {
            p,
            t_f,
            density_weight_sum: 1.0,
            unknown_constant: 1.0,
            min_box_radius: 1.0,
        })
    }

    pub fn order(&self) -> u32 {
        self.p
    }

    pub fn target_confinement(&self) -> f64 {
        self.t_f
    }
}

/// The accuracy expression
/// `(A M / R) max((1/(3 - sqrt 3)) (sqrt(3)/3)^{p+1},
/// (1/(6 - 2 sqrt 3 - sqrt 3 t_f)) (sqrt 3 (1 + t_f)/(6 - sqrt 3))^{p+1})`.
///
/// With the unknown constant left at its default of 1 this is an
/// expression evaluator, not a certified bound.
pub fn bound_gigaqbx(input: &GigaqbxBoundInput) -> f64 {
    let sqrt3 = math::sqrt(3.0);
    let e = input.p as f64 + 1.0;
    let first = math::exp(e * math::log(sqrt3 / 3.0) - math::log(3.0 - sqrt3));
    let second = math::exp(
        e * math::log(sqrt3 * (1.0 + input.t_f) / (6.0 - sqrt3))
            - math::log(6.0 - 2.0 * sqrt3 - sqrt3 * input.t_f),
    );
    input.density_weight_sum * input.unknown_constant / input.min_box_radius * first.max(second)
}

/// Leading-order asymptotic of the Fourier-Laplace Lebesgue constant,
/// `sqrt(8 p / pi)`. Meaningful for `p >= 1`.
pub fn lebesgue_asymptotic(p: u32) -> f64 {
    math::sqrt(8.0 * p as f64 / PI)
}
