//! Legendre and associated Legendre functions, spherical and solid
//! harmonics, the Poisson kernel for the unit ball, and combinatorial
//! helpers.
//!
//! The spherical harmonics here are orthonormal on the sphere and use
//! Ferrers associated Legendre functions with the Condon-Shortley
//! phase. The addition-theorem tests pin this convention down; do not
//! change one without the other.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Error;
use crate::math;
use crate::vec3::Vec3;
use crate::Result;

/// `1 / sqrt(4 pi)`, the value of the constant harmonic `Y_0^0`.
pub const INV_SQRT_4PI: f64 = 0.282_094_791_773_878_14;

/// Tolerance for accepting a direction argument as a unit vector.
pub const UNIT_TOL: f64 = 1e-12;

const DOMAIN_TOL: f64 = 1e-12;

/// Degree/order pair `(n, m)` with `|m| <= n` enforced at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    n: u32,
    m: i32,
}

impl HarmonicIndex {
    pub fn new(n: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > n {
            return Err(Error::Index { n: n as i64, m: m as i64 });
        }
        Ok(HarmonicIndex { n, m })
    }

    /// The degree `n`.
    pub fn degree(self) -> u32 {
        self.n
    }

    /// The order `m`, with `-n <= m <= n`.
    pub fn order(self) -> i32 {
        self.m
    }
}

/// Legendre polynomial `P_n(t)` by the three-term recurrence.
///
/// Fails with a domain error if `|t| > 1 + 1e-12`; values within the
/// tolerance band are clamped to `[-1, 1]`.
pub fn legendre_p(n: u32, t: f64) -> Result<f64> {
    let t = clamp_to_unit_interval(t)?;
    let seq = legendre_sequence(n, t);
    Ok(seq[n as usize])
}

/// All of `P_0(t), ..., P_n(t)`. The argument must already be in `[-1, 1]`.
pub(crate) fn legendre_sequence(n: u32, t: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n as usize + 1);
    p.push(1.0);
    if n == 0 {
        return p;
    }
    p.push(t);
    for k in 2..=n as usize {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * t * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
        p.push(next);
    }
    p
}

fn clamp_to_unit_interval(t: f64) -> Result<f64> {
    if !t.is_finite() || math::fabs(t) > 1.0 + DOMAIN_TOL {
        return Err(Error::Domain("argument must lie in [-1, 1]"));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Ferrers associated Legendre function `P_n^m(t)` for `0 <= m <= n`,
/// Condon-Shortley phase included.
///
/// Seeded by the closed form of `P_m^m` and advanced by the recurrence
/// in the degree. Intermediate values stay within `f64` range for
/// `n <= 128`.
pub fn assoc_legendre(n: u32, m: u32, t: f64) -> Result<f64> {
    if m > n {
        return Err(Error::Index { n: n as i64, m: m as i64 });
    }
    if n > 128 {
        return Err(Error::Index { n: n as i64, m: m as i64 });
    }
    let t = clamp_to_unit_interval(t)?;
    let s = math::sqrt((1.0 - t) * (1.0 + t));

    // P_m^m = (-1)^m (2m-1)!! (1-t^2)^{m/2}
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    if n == m {
        return Ok(pmm);
    }
    // P_{m+1}^m = (2m+1) t P_m^m
    let mut prev = pmm;
    let mut curr = (2 * m + 1) as f64 * t * pmm;
    for k in (m + 2)..=n {
        let kf = k as f64;
        let mf = m as f64;
        let next = ((2.0 * kf - 1.0) * t * curr - (kf + mf - 1.0) * prev) / (kf - mf);
        prev = curr;
        curr = next;
    }
    Ok(curr)
}

/// Log-factorial `ln(n!)`.
pub(crate) fn log_factorial(n: u32) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Spherical-harmonic normalization constant
/// `sqrt((2n+1)/(4 pi) * (n-m)!/(n+m)!)`, computed in log space so the
/// factorial ratio never overflows (supported up to `n = 128`).
pub fn sph_norm_const(n: u32, m: i32) -> Result<f64> {
    if m.unsigned_abs() > n {
        return Err(Error::Index { n: n as i64, m: m as i64 });
    }
    if n > 128 {
        return Err(Error::Index { n: n as i64, m: m as i64 });
    }
    let nf = n as f64;
    let log_ratio = log_factorial(n - m.unsigned_abs()) - log_factorial(n + m.unsigned_abs());
    let log_ratio = if m >= 0 { log_ratio } else { -log_ratio };
    Ok(math::sqrt((2.0 * nf + 1.0) / (4.0 * PI)) * math::exp(0.5 * log_ratio))
}

/// Binomial coefficient as a real number.
///
/// Returns 0 for `k < 0` or `k > n`, the convention assumed by the
/// solid-harmonic addition-theorem sums. Exact (one correctly rounded
/// conversion) for `n <= 128`, log-space beyond that.
pub fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || k > n || n < 0 {
        return 0.0;
    }
    if n <= 128 {
        // Pascal's row: exact in u128 up to n = 128.
        let n = n as usize;
        let k = k as usize;
        let mut row: Vec<u128> = vec![1];
        for _ in 0..n {
            let mut next = Vec::with_capacity(row.len() + 1);
            next.push(1u128);
            for w in row.windows(2) {
                next.push(w[0] + w[1]);
            }
            next.push(1);
            row = next;
        }
        row[k] as f64
    } else {
        math::exp(log_factorial(n as u32) - log_factorial(k as u32) - log_factorial((n - k) as u32))
    }
}

/// Fully normalized associated Legendre values
/// `A_n^m P_n^m(t)` for all `0 <= m <= n <= p`, packed at index
/// `n(n+1)/2 + m`.
///
/// `t = cos(theta)` and `s = sin(theta) >= 0` are passed separately so
/// callers can supply `s = hypot(x, y)` of a unit vector, which is more
/// accurate near the poles than `sqrt(1 - t^2)`.
///
/// The recurrence keeps every intermediate O(1), so it is stable for
/// degrees far beyond the raw Ferrers recurrence.
pub(crate) fn normalized_assoc_all(p: u32, t: f64, s: f64) -> Vec<f64> {
    let size = ((p as usize + 1) * (p as usize + 2)) / 2;
    let mut out = vec![0.0; size];
    let idx = |n: usize, m: usize| n * (n + 1) / 2 + m;

    out[0] = INV_SQRT_4PI;
    for m in 1..=p as usize {
        let mf = m as f64;
        out[idx(m, m)] =
            -math::sqrt((2.0 * mf + 1.0) / (2.0 * mf)) * s * out[idx(m - 1, m - 1)];
    }
    for m in 0..p as usize {
        let mf = m as f64;
        out[idx(m + 1, m)] = math::sqrt(2.0 * mf + 3.0) * t * out[idx(m, m)];
    }
    for m in 0..=p as usize {
        for n in (m + 2)..=p as usize {
            let nf = n as f64;
            let mf = m as f64;
            let a = math::sqrt((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf));
            let b = math::sqrt(
                (2.0 * nf + 1.0) * (nf - 1.0 + mf) * (nf - 1.0 - mf)
                    / ((2.0 * nf - 3.0) * (nf * nf - mf * mf)),
            );
            out[idx(n, m)] = a * t * out[idx(n - 1, m)] - b * out[idx(n - 2, m)];
        }
    }
    out
}

/// Splits a unit vector into `cos(theta)`, `sin(theta)`, and the unit
/// complex number `e^{i phi}`. At the poles `phi` is taken as 0.
fn unit_angles(xi: Vec3) -> (f64, f64, Complex64) {
    let t = xi.z.clamp(-1.0, 1.0);
    let s = math::hypot(xi.x, xi.y);
    let e_iphi = if s > 0.0 {
        Complex64::new(xi.x / s, xi.y / s)
    } else {
        Complex64::new(1.0, 0.0)
    };
    (t, s, e_iphi)
}

fn checked_unit(xi: Vec3) -> Result<Vec3> {
    let n = xi.norm();
    if !n.is_finite() || math::fabs(n - 1.0) > UNIT_TOL {
        return Err(Error::Domain("direction must be a unit vector"));
    }
    // Renormalize so downstream trigonometry sees an exact unit vector.
    Ok(xi * (1.0 / n))
}

/// Table of `Y_n^m(xi)` for all `n <= p`, `-n <= m <= n`, packed at
/// index `n(n+1) + m`. `xi` must be exactly unit (callers renormalize).
pub(crate) fn sph_harm_all(p: u32, xi: Vec3) -> Vec<Complex64> {
    let (t, s, e_iphi) = unit_angles(xi);
    let norm = normalized_assoc_all(p, t, s);
    let tri = |n: usize, m: usize| n * (n + 1) / 2 + m;

    // e^{i m phi} for m = 0..=p
    let mut phases = Vec::with_capacity(p as usize + 1);
    phases.push(Complex64::new(1.0, 0.0));
    for m in 1..=p as usize {
        let prev = phases[m - 1];
        phases.push(prev * e_iphi);
    }

    let mut out = vec![Complex64::new(0.0, 0.0); (p as usize + 1) * (p as usize + 1)];
    for n in 0..=p as usize {
        for m in 0..=n {
            let y = phases[m] * norm[tri(n, m)];
            out[n * (n + 1) + m] = y;
            if m > 0 {
                // Y_n^{-m} = (-1)^m conj(Y_n^m)
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[n * (n + 1) - m] = y.conj() * sign;
            }
        }
    }
    out
}

/// Spherical harmonic `Y_n^m(xi)` for a unit direction `xi`.
///
/// Negative orders use the conjugation symmetry
/// `Y_n^{-m} = (-1)^m conj(Y_n^m)`.
pub fn sph_harm(idx: HarmonicIndex, xi: Vec3) -> Result<Complex64> {
    let xi = checked_unit(xi)?;
    let table = sph_harm_all(idx.n, xi);
    Ok(table[packed_index(idx.n, idx.m)])
}

/// Index of `(n, m)` in the packed triangular layout `n(n+1) + m`.
pub(crate) fn packed_index(n: u32, m: i32) -> usize {
    ((n * (n + 1)) as usize).wrapping_add_signed(m as isize)
}

/// Regular solid harmonic `R_n^m(x) = |x|^n Y_n^m(x/|x|)`, with
/// `R_0^0 = 1/sqrt(4 pi)` and `R_n^m(0) = 0` for `n > 0`.
pub fn regular_solid(idx: HarmonicIndex, x: Vec3) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        return if idx.n == 0 {
            Complex64::new(INV_SQRT_4PI, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let xi = x * (1.0 / r);
    let table = sph_harm_all(idx.n, xi);
    let y = table[packed_index(idx.n, idx.m)];
    y * math::powi(r, idx.n as i32)
}

/// Irregular solid harmonic `I_n^m(x) = |x|^{-(n+1)} Y_n^m(x/|x|)`,
/// singular at the origin.
pub fn irregular_solid(idx: HarmonicIndex, x: Vec3) -> Result<Complex64> {
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::Singularity("irregular solid harmonic at the origin"));
    }
    let xi = x * (1.0 / r);
    let table = sph_harm_all(idx.n, xi);
    let y = table[packed_index(idx.n, idx.m)];
    Ok(y * math::powi(r, -(idx.n as i32 + 1)))
}

/// Table of `R_n^m(x)` for all `n <= p`, packed at index `n(n+1) + m`.
pub(crate) fn regular_solid_all(p: u32, x: Vec3) -> Vec<Complex64> {
    let r = x.norm();
    if r == 0.0 {
        let mut out = vec![Complex64::new(0.0, 0.0); (p as usize + 1) * (p as usize + 1)];
        out[0] = Complex64::new(INV_SQRT_4PI, 0.0);
        return out;
    }
    let mut out = sph_harm_all(p, x * (1.0 / r));
    let mut radial = 1.0;
    for n in 0..=p as usize {
        for m in -(n as isize)..=(n as isize) {
            let i = (n * (n + 1)).wrapping_add_signed(m);
            out[i] *= radial;
        }
        radial *= r;
    }
    out
}

/// Table of `I_n^m(x)` for all `n <= p`, packed at index `n(n+1) + m`.
pub(crate) fn irregular_solid_all(p: u32, x: Vec3) -> Result<Vec<Complex64>> {
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::Singularity("irregular solid harmonic at the origin"));
    }
    let mut out = sph_harm_all(p, x * (1.0 / r));
    let inv = 1.0 / r;
    let mut radial = inv;
    for n in 0..=p as usize {
        for m in -(n as isize)..=(n as isize) {
            let i = (n * (n + 1)).wrapping_add_signed(m);
            out[i] *= radial;
        }
        radial *= inv;
    }
    Ok(out)
}

/// Poisson kernel for the unit ball,
/// `(1/(4 pi)) (1 - r^2) / (1 + r^2 - 2 r t)^{3/2}`.
pub fn poisson_kernel(r: f64, t: f64) -> Result<f64> {
    if !r.is_finite() || math::fabs(r) >= 1.0 {
        return Err(Error::Domain("radius must satisfy |r| < 1"));
    }
    let t = clamp_to_unit_interval(t)?;
    let denom = 1.0 + r * r - 2.0 * r * t;
    Ok((1.0 - r * r) / (4.0 * PI * denom * math::sqrt(denom)))
}

/// Truncated Legendre series of the Poisson kernel,
/// `(1/(4 pi)) sum_{n=0}^{terms} (2n+1) r^n P_n(t)`.
pub fn poisson_kernel_series(r: f64, t: f64, terms: u32) -> Result<f64> {
    if !r.is_finite() || math::fabs(r) >= 1.0 {
        return Err(Error::Domain("radius must satisfy |r| < 1"));
    }
    let t = clamp_to_unit_interval(t)?;
    let p = legendre_sequence(terms, t);
    let mut sum = 0.0;
    let mut rn = 1.0;
    for (n, pn) in p.iter().enumerate() {
        sum += (2 * n + 1) as f64 * rn * pn;
        rn *= r;
    }
    Ok(sum / (4.0 * PI))
}
