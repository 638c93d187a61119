//! Coefficient-space translation operators built from the solid-
//! harmonic addition theorems, plus a quadrature-based re-expansion
//! that serves as their independent oracle.
//!
//! Both operators apply the relevant addition theorem to each source
//! basis function and collect terms, costing O(p^2 q^2). The scalar
//! factor attached to a (source, target) index pair combines two
//! binomials and three normalization constants; it is assembled in log
//! space so no factorial ever overflows.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Error;
use crate::expansion::{CoefficientTable, Expansion, ExpansionKind, REGION_TOL};
use crate::math;
use crate::quadrature::SphereRule;
use crate::special::{self, packed_index};
use crate::vec3::Vec3;
use crate::Result;

/// Relative gap left between a default m2l target radius and its
/// theoretical maximum, to keep evaluation off the convergence
/// boundary.
const M2L_RADIUS_GAP: f64 = 1e-9;

/// `ln A_n^m` for signed order `m`, from a log-factorial table.
#[inline]
fn log_norm(lf: &[f64], n: u32, m: i32) -> f64 {
    let n = n as i64;
    let m = m as i64;
    0.5 * (math::log((2 * n + 1) as f64 / (4.0 * PI)) + lf[(n - m) as usize] - lf[(n + m) as usize])
}

#[inline]
fn log_binom(lf: &[f64], a: i64, b: i64) -> f64 {
    lf[a as usize] - lf[b as usize] - lf[(a - b) as usize]
}

fn log_factorials(max: usize) -> Vec<f64> {
    (0..=max as u32).map(special::log_factorial).collect()
}

/// Translates a local expansion to a new center strictly inside its
/// ball, producing a local expansion of order `new_order` with validity
/// radius `src.radius - |shift|`.
///
/// For `new_order >= src.order()` this is an exact re-expansion of the
/// truncated series; smaller orders truncate.
pub fn l2l(src: &Expansion, new_center: Vec3, new_order: u32) -> Result<Expansion> {
    if src.kind() != ExpansionKind::Local {
        return Err(Error::Geometry("l2l requires a local expansion"));
    }
    let shift = new_center - src.center();
    let dist = shift.norm();
    if dist >= src.radius() {
        return Err(Error::Geometry("new center must lie strictly inside the source ball"));
    }
    let new_radius = src.radius() - dist;

    let p = src.order();
    let q = new_order;
    let reg = special::regular_solid_all(p, shift);
    let lf = log_factorials(2 * p as usize + 2);
    let coeffs = src.coefficients();

    let mut out = CoefficientTable::zeros(q);
    for nu in 0..=q.min(p) {
        for mu in -(nu as i32)..=(nu as i32) {
            let log_a_target = log_norm(&lf, nu, mu);
            let mut acc = Complex64::new(0.0, 0.0);
            for n in nu..=p {
                let gap = (n - nu) as i32;
                let m_lo = (mu - gap).max(-(n as i32));
                let m_hi = (mu + gap).min(n as i32);
                for m in m_lo..=m_hi {
                    let src_coeff = coeffs.at(n, m);
                    if src_coeff == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let factor = math::exp(
                        log_norm(&lf, n, m)
                            + log_binom(&lf, (n as i64) + (m as i64), (nu as i64) + (mu as i64))
                            - log_norm(&lf, n - nu, m - mu)
                            - log_a_target,
                    );
                    acc += src_coeff * reg[packed_index(n - nu, m - mu)] * factor;
                }
            }
            *out.at_mut(nu, mu) = acc;
        }
    }
    Expansion::new(ExpansionKind::Local, new_center, q, new_radius, out)
}

/// Translates a multipole expansion into a local expansion about a
/// center outside its ball, with the default validity radius
/// `(|shift| - src.radius) (1 - 1e-9)`.
pub fn m2l(src: &Expansion, new_center: Vec3, new_order: u32) -> Result<Expansion> {
    let dist = (new_center - src.center()).norm();
    if dist <= src.radius() {
        return Err(Error::Geometry("new center must lie outside the multipole ball"));
    }
    let radius = (dist - src.radius()) * (1.0 - M2L_RADIUS_GAP);
    m2l_with_radius(src, new_center, radius, new_order)
}

/// As [`m2l`] with a caller-chosen target radius. The target ball must
/// not intersect the multipole ball.
pub fn m2l_with_radius(
    src: &Expansion,
    new_center: Vec3,
    new_radius: f64,
    new_order: u32,
) -> Result<Expansion> {
    if src.kind() != ExpansionKind::Multipole {
        return Err(Error::Geometry("m2l requires a multipole expansion"));
    }
    let shift = new_center - src.center();
    let dist = shift.norm();
    if dist <= src.radius() {
        return Err(Error::Geometry("new center must lie outside the multipole ball"));
    }
    if !new_radius.is_finite()
        || new_radius <= 0.0
        || new_radius + src.radius() > dist * (1.0 + REGION_TOL)
    {
        return Err(Error::Geometry("target ball intersects the multipole ball"));
    }

    let p = src.order();
    let q = new_order;
    let irr = special::irregular_solid_all(p + q, shift)?;
    let lf = log_factorials((p + q) as usize * 2 + 2);
    let coeffs = src.coefficients();

    let mut out = CoefficientTable::zeros(q);
    for nu in 0..=q {
        for mu in -(nu as i32)..=(nu as i32) {
            let log_a_target = log_norm(&lf, nu, mu);
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..=p {
                for m in -(n as i32)..=(n as i32) {
                    let src_coeff = coeffs.at(n, m);
                    if src_coeff == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let factor = math::exp(
                        log_norm(&lf, n, m)
                            + log_binom(
                                &lf,
                                (n as i64) + (nu as i64) - (m as i64) + (mu as i64),
                                (n as i64) - (m as i64),
                            )
                            - log_norm(&lf, n + nu, m - mu)
                            - log_a_target,
                    );
                    let sign = if (nu as i32 + mu) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += src_coeff * irr[packed_index(n + nu, m - mu)] * (sign * factor);
                }
            }
            *out.at_mut(nu, mu) = acc;
        }
    }
    Expansion::new(ExpansionKind::Local, new_center, q, new_radius, out)
}

/// Re-expands `src` as a local expansion about `new_center` by forming
/// the coefficient integrals of the evaluated series over the sphere of
/// radius `new_radius`. Exact up to quadrature, and independent of the
/// coefficient-space translation path, so it serves as the oracle for
/// [`l2l`] and [`m2l`].
///
/// The evaluation sphere must lie inside `src`'s region of validity.
pub fn reexpand_via_quadrature(
    src: &Expansion,
    new_center: Vec3,
    new_radius: f64,
    new_order: u32,
    rule: &SphereRule,
) -> Result<Expansion> {
    check_reexpansion_sphere(src, new_center, new_radius)?;
    crate::expansion::local_from_function(
        |x| src.eval(x),
        new_center,
        new_radius,
        new_order,
        rule,
    )
}

/// [`reexpand_via_quadrature`] with the rule degree chosen by a
/// convergence self-check: starting from `2 * new_order + 16`, the
/// degree is doubled until doubling changes no coefficient by more than
/// `1e-12` relative to the table magnitude.
pub fn reexpand_adaptive(
    src: &Expansion,
    new_center: Vec3,
    new_radius: f64,
    new_order: u32,
) -> Result<Expansion> {
    check_reexpansion_sphere(src, new_center, new_radius)?;
    let form = |degree: u32| -> Result<Expansion> {
        let rule = SphereRule::with_degree(degree);
        crate::expansion::local_from_function(
            |x| src.eval(x),
            new_center,
            new_radius,
            new_order,
            rule_ref(&rule),
        )
    };
    let mut degree = 2 * new_order + 16;
    let mut coarse = form(degree)?;
    loop {
        let fine = form(2 * degree)?;
        let scale = fine.coefficients().max_abs().max(1e-300);
        let mut worst = 0.0f64;
        for (a, b) in coarse
            .coefficients()
            .entries()
            .iter()
            .zip(fine.coefficients().entries())
        {
            worst = worst.max((a - b).norm());
        }
        if worst <= 1e-12 * scale {
            return Ok(fine);
        }
        degree *= 2;
        if degree > 1024 {
            return Err(Error::Convergence("re-expansion quadrature did not stabilize"));
        }
        coarse = fine;
    }
}

// identity helper so the closure above borrows instead of moving
fn rule_ref(rule: &SphereRule) -> &SphereRule {
    rule
}

fn check_reexpansion_sphere(src: &Expansion, new_center: Vec3, new_radius: f64) -> Result<()> {
    if !new_radius.is_finite() || new_radius <= 0.0 {
        return Err(Error::Geometry("re-expansion radius must be positive"));
    }
    let dist = (new_center - src.center()).norm();
    match src.kind() {
        ExpansionKind::Local => {
            if dist + new_radius > src.radius() * (1.0 + REGION_TOL) {
                return Err(Error::Geometry("evaluation sphere exits the source ball"));
            }
        }
        ExpansionKind::Multipole => {
            if dist - new_radius < src.radius() * (1.0 - REGION_TOL) {
                return Err(Error::Geometry("evaluation sphere enters the multipole ball"));
            }
        }
    }
    Ok(())
}
