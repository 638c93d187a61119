//! Local and multipole expansions: triangular coefficient tables,
//! formation from point sources (exact coefficients via the Laplace
//! addition theorem) or from arbitrary boundary data (sphere
//! quadrature), evaluation, Fourier-Laplace projection, and the
//! Lebesgue constant of that projection.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Error;
use crate::math;
use crate::quadrature::{self, SphereRule};
use crate::special::{self, packed_index, HarmonicIndex};
use crate::vec3::Vec3;
use crate::Result;

/// Relative slack applied to validity-region membership tests, so that
/// points placed exactly on a ball boundary survive rounding.
pub(crate) const REGION_TOL: f64 = 1e-12;

/// `4 pi / (2n + 1)`, the factor the Laplace addition theorem attaches
/// to degree `n`.
pub(crate) fn laplace_factor(n: u32) -> f64 {
    4.0 * PI / (2.0 * n as f64 + 1.0)
}

/// Triangular table of complex coefficients indexed by `(n, m)` with
/// `0 <= n <= order`, `-n <= m <= n`, packed row-major at `n(n+1) + m`
/// into `(order+1)^2` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    order: u32,
    entries: Vec<Complex64>,
}

impl CoefficientTable {
    pub fn zeros(order: u32) -> Self {
        CoefficientTable {
            order,
            entries: vec![Complex64::new(0.0, 0.0); ((order + 1) * (order + 1)) as usize],
        }
    }

    /// Wraps packed entries; the length must be `(order+1)^2` and every
    /// entry finite.
    pub fn from_entries(order: u32, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != ((order + 1) * (order + 1)) as usize {
            return Err(Error::Domain("coefficient table has wrong length for its order"));
        }
        if entries.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
            return Err(Error::Domain("coefficient table contains non-finite entries"));
        }
        Ok(CoefficientTable { order, entries })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, idx: HarmonicIndex) -> Result<Complex64> {
        if idx.degree() > self.order {
            return Err(Error::Index { n: idx.degree() as i64, m: idx.order() as i64 });
        }
        Ok(self.entries[packed_index(idx.degree(), idx.order())])
    }

    pub fn set(&mut self, idx: HarmonicIndex, value: Complex64) -> Result<()> {
        if idx.degree() > self.order {
            return Err(Error::Index { n: idx.degree() as i64, m: idx.order() as i64 });
        }
        self.entries[packed_index(idx.degree(), idx.order())] = value;
        Ok(())
    }

    #[inline]
    pub(crate) fn at(&self, n: u32, m: i32) -> Complex64 {
        self.entries[packed_index(n, m)]
    }

    #[inline]
    pub(crate) fn at_mut(&mut self, n: u32, m: i32) -> &mut Complex64 {
        &mut self.entries[packed_index(n, m)]
    }

    /// Copy restricted (or zero-extended) to a new order.
    pub fn truncated(&self, new_order: u32) -> CoefficientTable {
        let mut out = CoefficientTable::zeros(new_order);
        for n in 0..=new_order.min(self.order) {
            for m in -(n as i32)..=(n as i32) {
                *out.at_mut(n, m) = self.at(n, m);
            }
        }
        out
    }

    pub fn scaled(&self, factor: Complex64) -> CoefficientTable {
        CoefficientTable {
            order: self.order,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    /// Entrywise sum; the orders must match.
    pub fn try_add(&self, other: &CoefficientTable) -> Result<CoefficientTable> {
        if self.order != other.order {
            return Err(Error::Domain("cannot add coefficient tables of different orders"));
        }
        Ok(CoefficientTable {
            order: self.order,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for e in &self.entries {
            let v = e.norm();
            if v > best {
                best = v;
            }
        }
        best
    }

    /// Largest violation of the conjugation symmetry
    /// `entry(n, -m) = (-1)^m conj(entry(n, m))` satisfied by tables of
    /// real-valued potentials.
    pub fn conjugation_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for n in 0..=self.order {
            for m in 1..=(n as i32) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let defect = (self.at(n, -m) - self.at(n, m).conj() * sign).norm();
                if defect > worst {
                    worst = defect;
                }
            }
        }
        worst
    }
}

/// Whether an expansion converges inside or outside its ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionKind {
    Local,
    Multipole,
}

/// A truncated solid-harmonic series with a center and a validity
/// radius: local expansions are valid on the closed ball, multipole
/// expansions outside the open ball.
#[derive(Clone, Debug)]
pub struct Expansion {
    kind: ExpansionKind,
    center: Vec3,
    order: u32,
    radius: f64,
    coefficients: CoefficientTable,
}

impl Expansion {
    pub fn new(
        kind: ExpansionKind,
        center: Vec3,
        order: u32,
        radius: f64,
        coefficients: CoefficientTable,
    ) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::Domain("expansion center must be finite"));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::Domain("validity radius must be positive and finite"));
        }
        if coefficients.order() != order {
            return Err(Error::Domain("coefficient table order does not match expansion order"));
        }
        Ok(Expansion { kind, center, order, radius, coefficients })
    }

    pub fn kind(&self) -> ExpansionKind {
        self.kind
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn coefficients(&self) -> &CoefficientTable {
        &self.coefficients
    }

    /// Same expansion with a caller-chosen validity radius. The caller
    /// is responsible for the radius being mathematically justified.
    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::Domain("validity radius must be positive and finite"));
        }
        self.radius = radius;
        Ok(self)
    }

    /// Same center and kind with the coefficient table truncated (or
    /// zero-extended) to `new_order`.
    pub fn truncated(&self, new_order: u32) -> Expansion {
        Expansion {
            kind: self.kind,
            center: self.center,
            order: new_order,
            radius: self.radius,
            coefficients: self.coefficients.truncated(new_order),
        }
    }

    /// Evaluates the truncated series at `x`.
    ///
    /// Points outside the validity region are rejected; a multipole
    /// expansion is singular at its own center.
    pub fn eval(&self, x: Vec3) -> Result<Complex64> {
        let offset = x - self.center;
        let d = offset.norm();
        match self.kind {
            ExpansionKind::Local => {
                if d > self.radius * (1.0 + REGION_TOL) {
                    return Err(Error::OutOfRegion { distance: d, radius: self.radius });
                }
                let basis = special::regular_solid_all(self.order, offset);
                Ok(contract(&self.coefficients, &basis))
            }
            ExpansionKind::Multipole => {
                if d == 0.0 {
                    return Err(Error::Singularity("multipole expansion at its center"));
                }
                if d < self.radius * (1.0 - REGION_TOL) {
                    return Err(Error::OutOfRegion { distance: d, radius: self.radius });
                }
                let basis = special::irregular_solid_all(self.order, offset)?;
                Ok(contract(&self.coefficients, &basis))
            }
        }
    }
}

fn contract(coeffs: &CoefficientTable, basis: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, b) in coeffs.entries().iter().zip(basis) {
        acc += c * b;
    }
    acc
}

/// Weighted point sources.
#[derive(Clone, Debug)]
pub struct PointSources {
    positions: Vec<Vec3>,
    weights: Vec<f64>,
}

impl PointSources {
    pub fn new(positions: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(Error::Domain("positions and weights must have equal length"));
        }
        if positions.iter().any(|p| !p.is_finite()) || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Domain("point sources must be finite"));
        }
        Ok(PointSources { positions, weights })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Unit-strength point potential `sum_i w_i / |target - s_i|`.
///
/// No `1/(4 pi)` factor is applied.
pub fn eval_point_potential(sources: &PointSources, target: Vec3) -> Result<f64> {
    let mut acc = 0.0;
    for (s, w) in sources.positions.iter().zip(&sources.weights) {
        let d = (target - *s).norm();
        if d == 0.0 {
            return Err(Error::Singularity("target coincides with a source"));
        }
        acc += w / d;
    }
    Ok(acc)
}

/// Local expansion of a single point source about `center`, with the
/// exact coefficients `L_n^m = w (4 pi/(2n+1)) conj(I_n^m(s - c))`.
///
/// The default validity radius is `0.999 |s - c|`; callers may override
/// it with [`Expansion::with_radius`] (any radius below `|s - c|` is
/// mathematically valid).
pub fn s2l(source: Vec3, weight: f64, center: Vec3, order: u32) -> Result<Expansion> {
    let offset = source - center;
    let d = offset.norm();
    if d == 0.0 {
        return Err(Error::Singularity("source coincides with expansion center"));
    }
    let irr = special::irregular_solid_all(order, offset)?;
    let mut table = CoefficientTable::zeros(order);
    for n in 0..=order {
        let f = weight * laplace_factor(n);
        for m in -(n as i32)..=(n as i32) {
            *table.at_mut(n, m) = irr[packed_index(n, m)].conj() * f;
        }
    }
    Expansion::new(ExpansionKind::Local, center, order, 0.999 * d, table)
}

/// Multipole expansion of a single point source about `center`, with
/// the exact coefficients `M_n^m = w (4 pi/(2n+1)) conj(R_n^m(s - c))`.
///
/// The default validity radius is `1.001 |s - c|` with a floor of
/// `1e-30`, so a source at the center yields a monopole valid
/// everywhere except the center itself.
pub fn s2m(source: Vec3, weight: f64, center: Vec3, order: u32) -> Expansion {
    let offset = source - center;
    let d = offset.norm();
    let reg = special::regular_solid_all(order, offset);
    let mut table = CoefficientTable::zeros(order);
    for n in 0..=order {
        let f = weight * laplace_factor(n);
        for m in -(n as i32)..=(n as i32) {
            *table.at_mut(n, m) = reg[packed_index(n, m)].conj() * f;
        }
    }
    let radius = (1.001 * d).max(1e-30);
    Expansion::new(ExpansionKind::Multipole, center, order, radius, table)
        .expect("radius is positive by construction")
}

/// Local expansion of arbitrary boundary data by quadrature:
/// `L_n^m = rho^{-n} integral f(c + rho xi) conj(Y_n^m(xi)) dS(xi)`.
///
/// The rule must be adequate for the harmonic content of `f` (see the
/// [`SphereRule`] constructors).
pub fn local_from_function<F>(
    mut f: F,
    center: Vec3,
    radius: f64,
    order: u32,
    rule: &SphereRule,
) -> Result<Expansion>
where
    F: FnMut(Vec3) -> Result<Complex64>,
{
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::Domain("expansion radius must be positive and finite"));
    }
    let moments = boundary_moments(&mut f, center, radius, order, rule)?;
    let mut table = CoefficientTable::zeros(order);
    let mut inv_rho_n = 1.0;
    for n in 0..=order {
        for m in -(n as i32)..=(n as i32) {
            *table.at_mut(n, m) = moments[packed_index(n, m)] * inv_rho_n;
        }
        inv_rho_n /= radius;
    }
    Expansion::new(ExpansionKind::Local, center, order, radius, table)
}

/// Multipole expansion of arbitrary boundary data by quadrature:
/// `M_n^m = rho^{n+1} integral f(c + rho xi) conj(Y_n^m(xi)) dS(xi)`.
pub fn multipole_from_function<F>(
    mut f: F,
    center: Vec3,
    radius: f64,
    order: u32,
    rule: &SphereRule,
) -> Result<Expansion>
where
    F: FnMut(Vec3) -> Result<Complex64>,
{
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::Domain("expansion radius must be positive and finite"));
    }
    let moments = boundary_moments(&mut f, center, radius, order, rule)?;
    let mut table = CoefficientTable::zeros(order);
    let mut rho_n1 = radius;
    for n in 0..=order {
        for m in -(n as i32)..=(n as i32) {
            *table.at_mut(n, m) = moments[packed_index(n, m)] * rho_n1;
        }
        rho_n1 *= radius;
    }
    Expansion::new(ExpansionKind::Multipole, center, order, radius, table)
}

/// `integral f(c + rho xi) conj(Y_n^m(xi)) dS(xi)` for all `(n, m)`.
fn boundary_moments<F>(
    f: &mut F,
    center: Vec3,
    radius: f64,
    order: u32,
    rule: &SphereRule,
) -> Result<Vec<Complex64>>
where
    F: FnMut(Vec3) -> Result<Complex64>,
{
    let tables = quadrature::harmonic_tables_at_nodes(rule, order);
    let size = ((order + 1) * (order + 1)) as usize;
    let mut moments = vec![Complex64::new(0.0, 0.0); size];
    for ((node, w), ys) in rule.nodes().iter().zip(rule.weights()).zip(&tables) {
        let fv = f(center + *node * radius)? * *w;
        for (acc, y) in moments.iter_mut().zip(ys) {
            *acc += fv * y.conj();
        }
    }
    Ok(moments)
}

/// Degree-`p` Fourier-Laplace partial sum of a function on the unit
/// sphere, with inner products realized by quadrature.
#[derive(Clone, Debug)]
pub struct FourierLaplaceSeries {
    coefficients: CoefficientTable,
}

impl FourierLaplaceSeries {
    pub fn coefficients(&self) -> &CoefficientTable {
        &self.coefficients
    }

    /// Evaluates the partial sum at a unit direction.
    pub fn eval(&self, xi: Vec3) -> Result<Complex64> {
        let n = xi.norm();
        if !n.is_finite() || math::fabs(n - 1.0) > special::UNIT_TOL {
            return Err(Error::Domain("direction must be a unit vector"));
        }
        let basis = special::sph_harm_all(self.coefficients.order(), xi * (1.0 / n));
        Ok(contract(&self.coefficients, &basis))
    }
}

/// Projects `f` onto spherical harmonics of degree at most `p`,
/// returning an evaluator for
/// `xi -> sum_{n<=p} sum_m <f, Y_n^m> Y_n^m(xi)`.
pub fn fourier_laplace_project<F>(
    mut f: F,
    p: u32,
    rule: &SphereRule,
) -> Result<FourierLaplaceSeries>
where
    F: FnMut(Vec3) -> Result<Complex64>,
{
    let moments = boundary_moments(&mut f, Vec3::ZERO, 1.0, p, rule)?;
    let coefficients = CoefficientTable::from_entries(p, moments)?;
    Ok(FourierLaplaceSeries { coefficients })
}

/// Lebesgue constant of the degree-`p` Fourier-Laplace projection,
/// `Lambda_p = 2 pi integral_{-1}^{1} |sum_{n<=p} (2n+1) P_n(t)/(4 pi)| dt`.
///
/// The zonal kernel reduces the operator norm to a 1D integral, which
/// is computed over panels uniform in `theta = acos(t)` (so panels are
/// much finer than the kernel's root spacing), splitting any panel with
/// a sign change at the root located by bisection. `panel_count` is a
/// lower bound on the number of panels; accuracy is far better than
/// 1e-8 relative for the orders of interest.
pub fn lebesgue_constant(p: u32, panel_count: u32) -> f64 {
    let kernel = |t: f64| -> f64 {
        let seq = special::legendre_sequence(p, t);
        let mut acc = 0.0;
        for (n, pn) in seq.iter().enumerate() {
            acc += (2 * n + 1) as f64 * pn;
        }
        acc / (4.0 * PI)
    };

    let n_panels = panel_count.max(64).max(8 * (p + 1)) as usize;
    // Panel boundaries t_k = cos(pi k / N), ascending in t.
    let mut bounds = Vec::with_capacity(n_panels + 1);
    for k in 0..=n_panels {
        bounds.push(-math::cos(PI * k as f64 / n_panels as f64));
    }
    bounds[0] = -1.0;
    bounds[n_panels] = 1.0;

    let (gl_x, gl_w) = quadrature::gauss_legendre_rule(24).expect("fixed-size rule");
    let integrate_abs = |a: f64, b: f64| -> f64 {
        // No sign change inside [a, b], so |integral| = integral of |K|.
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in gl_x.iter().zip(&gl_w) {
            acc += w * kernel(mid + half * x);
        }
        math::fabs(acc * half)
    };

    let mut total = 0.0;
    for win in bounds.windows(2) {
        let (a, b) = (win[0], win[1]);
        let (fa, fb) = (kernel(a), kernel(b));
        if fa * fb < 0.0 {
            // Bisect to the sign change and split the panel there.
            let (mut lo, mut hi) = (a, b);
            let mut flo = fa;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = kernel(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            let root = 0.5 * (lo + hi);
            total += integrate_abs(a, root) + integrate_abs(root, b);
        } else {
            total += integrate_abs(a, b);
        }
    }
    2.0 * PI * total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::INV_SQRT_4PI;

    fn idx(n: u32, m: i32) -> HarmonicIndex {
        HarmonicIndex::new(n, m).unwrap()
    }

    #[test]
    fn point_potential_simple_cases() {
        let one = PointSources::new(vec![Vec3::new(0.0, 0.0, 2.0)], vec![1.0]).unwrap();
        assert_eq!(eval_point_potential(&one, Vec3::ZERO).unwrap(), 0.5);

        let two = PointSources::new(
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert_eq!(eval_point_potential(&two, Vec3::ZERO).unwrap(), 2.0);

        assert!(eval_point_potential(&one, Vec3::new(0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn point_potential_matches_direct_loop() {
        // independent direct summation oracle
        let positions: Vec<Vec3> = (0..10)
            .map(|i| {
                let a = i as f64;
                Vec3::new((1.3 * a).sin() + 2.0, (0.7 * a).cos() - 3.0, 0.5 * a)
            })
            .collect();
        let weights: Vec<f64> = (0..10).map(|i| 1.0 + 0.3 * i as f64).collect();
        let target = Vec3::new(10.0, 4.0, -2.0);
        let mut expected = 0.0;
        for i in 0..10 {
            let dx = target.x - positions[i].x;
            let dy = target.y - positions[i].y;
            let dz = target.z - positions[i].z;
            expected += weights[i] / (dx * dx + dy * dy + dz * dz).sqrt();
        }
        let sources = PointSources::new(positions, weights).unwrap();
        assert_eq!(eval_point_potential(&sources, target).unwrap(), expected);
    }

    #[test]
    fn table_roundtrip_and_truncation() {
        let mut t = CoefficientTable::zeros(3);
        t.set(idx(2, -1), Complex64::new(1.5, -0.5)).unwrap();
        assert_eq!(t.get(idx(2, -1)).unwrap(), Complex64::new(1.5, -0.5));
        assert!(t.get(idx(4, 0)).is_err());
        let cut = t.truncated(1);
        assert_eq!(cut.order(), 1);
        assert_eq!(cut.entries().len(), 4);
        let grown = t.truncated(5);
        assert_eq!(grown.get(idx(2, -1)).unwrap(), Complex64::new(1.5, -0.5));
        assert_eq!(grown.get(idx(5, 5)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn s2l_z_axis_coefficients() {
        let dist = 3.0;
        let e = s2l(Vec3::new(0.0, 0.0, dist), 1.0, Vec3::ZERO, 8).unwrap();
        for n in 0..=8u32 {
            let want = (4.0 * PI / (2.0 * n as f64 + 1.0)).sqrt() * dist.powi(-(n as i32 + 1));
            let got = e.coefficients().get(idx(n, 0)).unwrap();
            assert!(
                (got.re - want).abs() < 1e-14 * want && got.im.abs() < 1e-16,
                "L_{n}^0 = {got}, want {want}"
            );
            for m in 1..=n as i32 {
                assert!(e.coefficients().get(idx(n, m)).unwrap().norm() < 1e-16);
                assert!(e.coefficients().get(idx(n, -m)).unwrap().norm() < 1e-16);
            }
        }
    }

    #[test]
    fn s2l_order_zero_is_monopole_value() {
        let source = Vec3::new(1.0, 2.0, -2.0); // distance 3 from center
        let center = Vec3::ZERO;
        let weight = 1.7;
        let e = s2l(source, weight, center, 0).unwrap();
        let at_center = e.eval(center).unwrap();
        assert!((at_center.re - weight / 3.0).abs() < 1e-14);
        assert!(at_center.im.abs() < 1e-16);
    }

    #[test]
    fn s2l_converges_to_kernel() {
        let source = Vec3::new(2.0, -1.0, 2.0); // distance 3
        let center = Vec3::ZERO;
        let e = s2l(source, 1.0, center, 25).unwrap();
        // targets at 0.4 * distance
        let targets = [
            Vec3::new(1.2, 0.0, 0.0),
            Vec3::new(0.0, -0.96, 0.72),
            Vec3::new(0.6, 0.6, -0.85),
        ];
        for t in targets {
            let exact = 1.0 / (t - source).norm();
            let got = e.eval(t).unwrap();
            assert!(
                (got.re - exact).abs() < 1e-9 * exact,
                "at {t:?}: {} vs {exact}",
                got.re
            );
            assert!(got.im.abs() < 1e-10 * (1.0 + got.re.abs()));
        }
        assert!(s2l(center, 1.0, center, 3).is_err());
    }

    #[test]
    fn s2m_monopole_exact_at_every_order() {
        let center = Vec3::new(0.5, -0.25, 1.0);
        for order in [0u32, 3, 10] {
            let e = s2m(center, 2.5, center, order);
            assert_eq!(e.coefficients().get(idx(0, 0)).unwrap().re, 2.5 * (4.0 * PI).sqrt());
            for n in 1..=order {
                for m in -(n as i32)..=(n as i32) {
                    assert_eq!(e.coefficients().get(idx(n, m)).unwrap().norm(), 0.0);
                }
            }
            let x = Vec3::new(3.0, 1.0, -2.0);
            let want = 2.5 / (x - center).norm();
            let got = e.eval(x).unwrap();
            assert!((got.re - want).abs() < 1e-14 * want && got.im.abs() < 1e-16);
        }
    }

    #[test]
    fn s2m_z_axis_coefficients() {
        let s = 0.8;
        let e = s2m(Vec3::new(0.0, 0.0, s), 1.0, Vec3::ZERO, 6);
        for n in 0..=6u32 {
            let want = (4.0 * PI / (2.0 * n as f64 + 1.0)).sqrt() * s.powi(n as i32);
            let got = e.coefficients().get(idx(n, 0)).unwrap();
            assert!((got.re - want).abs() < 1e-14 * want && got.im.abs() < 1e-16);
        }
    }

    #[test]
    fn s2m_converges_to_kernel() {
        let source = Vec3::new(0.3, 0.4, -0.5);
        let center = Vec3::ZERO;
        let d = source.norm();
        let e = s2m(source, 1.0, center, 25);
        let t = Vec3::new(1.5, -1.2, 1.8).hat().unwrap() * (2.5 * d);
        let exact = 1.0 / (t - source).norm();
        let got = e.eval(t).unwrap();
        assert!((got.re - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn formed_tables_have_conjugation_symmetry() {
        let e1 = s2l(Vec3::new(1.0, -2.0, 0.5), 1.3, Vec3::new(0.1, 0.1, 0.1), 10).unwrap();
        assert!(e1.coefficients().conjugation_defect() < 1e-11 * e1.coefficients().max_abs());
        let e2 = s2m(Vec3::new(0.2, 0.1, -0.3), -0.7, Vec3::ZERO, 10);
        assert!(e2.coefficients().conjugation_defect() < 1e-11 * (1.0 + e2.coefficients().max_abs()));
    }

    #[test]
    fn local_from_constant_function() {
        let rule = SphereRule::with_degree(8);
        let k = 2.25;
        let e = local_from_function(
            |_| Ok(Complex64::new(k, 0.0)),
            Vec3::new(1.0, 0.0, -1.0),
            0.7,
            4,
            &rule,
        )
        .unwrap();
        let want = k * (4.0 * PI).sqrt();
        assert!((e.coefficients().get(idx(0, 0)).unwrap().re - want).abs() < 1e-12 * want);
        for n in 1..=4u32 {
            for m in -(n as i32)..=(n as i32) {
                assert!(e.coefficients().get(idx(n, m)).unwrap().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn local_from_point_potential_matches_s2l() {
        let center = Vec3::new(0.2, -0.1, 0.4);
        let source = Vec3::new(3.0, 1.0, -2.0);
        let weight = 1.4;
        let order = 6;
        let rho = 0.8; // |s - c| is about 4, so content decays fast
        let rule = SphereRule::for_kernel_order(order);
        let via_quadrature = local_from_function(
            |x| Ok(Complex64::new(weight / (x - source).norm(), 0.0)),
            center,
            rho,
            order,
            &rule,
        )
        .unwrap();
        let exact = s2l(source, weight, center, order).unwrap();
        for n in 0..=order {
            for m in -(n as i32)..=(n as i32) {
                let a = via_quadrature.coefficients().get(idx(n, m)).unwrap();
                let b = exact.coefficients().get(idx(n, m)).unwrap();
                assert!(
                    (a - b).norm() < 1e-11 * (1.0 + b.norm()),
                    "L_{n}^{m}: {a} vs {b}"
                );
            }
        }
        // a real potential gives a conjugate-symmetric table even when
        // formed by quadrature
        let table = via_quadrature.coefficients();
        assert!(table.conjugation_defect() < 1e-11 * (1.0 + table.max_abs()));
    }

    #[test]
    fn local_from_regular_solid_is_unit_coefficient() {
        let center = Vec3::new(-0.5, 0.3, 0.2);
        let rho = 1.3;
        let order = 5;
        let rule = SphereRule::for_polynomial_order(order);
        let e = local_from_function(
            |x| Ok(special::regular_solid(idx(3, 2), x - center)),
            center,
            rho,
            order,
            &rule,
        )
        .unwrap();
        for n in 0..=order {
            for m in -(n as i32)..=(n as i32) {
                let got = e.coefficients().get(idx(n, m)).unwrap();
                let want = if (n, m) == (3, 2) { 1.0 } else { 0.0 };
                assert!(
                    (got - Complex64::new(want, 0.0)).norm() < 1e-12,
                    "L_{n}^{m} = {got}"
                );
            }
        }
    }

    #[test]
    fn multipole_from_irregular_solid_is_unit_coefficient() {
        let center = Vec3::new(0.4, 0.4, -0.1);
        let rho = 0.9;
        let order = 5;
        let rule = SphereRule::with_degree(2 * order + 24);
        let e = multipole_from_function(
            |x| special::irregular_solid(idx(2, 1), x - center),
            center,
            rho,
            order,
            &rule,
        )
        .unwrap();
        for n in 0..=order {
            for m in -(n as i32)..=(n as i32) {
                let got = e.coefficients().get(idx(n, m)).unwrap();
                let want = if (n, m) == (2, 1) { 1.0 } else { 0.0 };
                assert!((got - Complex64::new(want, 0.0)).norm() < 1e-11, "M_{n}^{m} = {got}");
            }
        }
    }

    #[test]
    fn multipole_from_interior_point_potential_matches_s2m() {
        let center = Vec3::ZERO;
        let source = Vec3::new(0.15, -0.1, 0.2);
        let order = 6;
        let rho = 1.1;
        let rule = SphereRule::with_degree(2 * order + 40);
        let via_quadrature = multipole_from_function(
            |x| Ok(Complex64::new(1.0 / (x - source).norm(), 0.0)),
            center,
            rho,
            order,
            &rule,
        )
        .unwrap();
        let exact = s2m(source, 1.0, center, order);
        for n in 0..=order {
            for m in -(n as i32)..=(n as i32) {
                let a = via_quadrature.coefficients().get(idx(n, m)).unwrap();
                let b = exact.coefficients().get(idx(n, m)).unwrap();
                assert!((a - b).norm() < 1e-11 * (1.0 + b.norm()), "M_{n}^{m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn multipole_from_zero_function_is_zero() {
        let rule = SphereRule::with_degree(6);
        let e = multipole_from_function(
            |_| Ok(Complex64::new(0.0, 0.0)),
            Vec3::ZERO,
            1.0,
            3,
            &rule,
        )
        .unwrap();
        assert_eq!(e.coefficients().max_abs(), 0.0);
    }

    #[test]
    fn eval_at_center_and_zero_table() {
        let mut table = CoefficientTable::zeros(4);
        table.set(idx(0, 0), Complex64::new(3.0, 1.0)).unwrap();
        table.set(idx(2, 1), Complex64::new(-1.0, 0.5)).unwrap();
        let e = Expansion::new(ExpansionKind::Local, Vec3::new(1.0, 1.0, 1.0), 4, 2.0, table)
            .unwrap();
        let got = e.eval(e.center()).unwrap();
        let want = Complex64::new(3.0, 1.0) * INV_SQRT_4PI;
        assert!((got - want).norm() < 1e-15);

        let zero = Expansion::new(
            ExpansionKind::Local,
            Vec3::ZERO,
            2,
            1.0,
            CoefficientTable::zeros(2),
        )
        .unwrap();
        assert_eq!(zero.eval(Vec3::new(0.3, 0.0, 0.1)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn eval_region_checks() {
        let local = s2l(Vec3::new(0.0, 0.0, 2.0), 1.0, Vec3::ZERO, 3).unwrap();
        assert!(matches!(
            local.eval(Vec3::new(0.0, 0.0, 2.1)),
            Err(Error::OutOfRegion { .. })
        ));
        // boundary points survive rounding
        let r = local.radius();
        assert!(local.eval(Vec3::new(r, 0.0, 0.0)).is_ok());

        let mp = s2m(Vec3::new(0.1, 0.0, 0.0), 1.0, Vec3::ZERO, 3);
        assert!(matches!(mp.eval(Vec3::new(0.05, 0.0, 0.0)), Err(Error::OutOfRegion { .. })));
        assert!(matches!(mp.eval(Vec3::ZERO), Err(Error::Singularity(_))));
    }

    #[test]
    fn projection_fixes_low_harmonics_and_kills_high() {
        use crate::special::sph_harm;
        let y31 = |xi: Vec3| sph_harm(idx(3, 1), xi);

        let rule = SphereRule::with_degree(10);
        let proj3 = fourier_laplace_project(y31, 3, &rule).unwrap();
        let proj2 = fourier_laplace_project(y31, 2, &rule).unwrap();
        let dirs = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.48, 0.6, 0.64).hat().unwrap(),
            Vec3::new(-0.2, 0.9, -0.3).hat().unwrap(),
        ];
        for xi in dirs {
            let exact = sph_harm(idx(3, 1), xi).unwrap();
            let got = proj3.eval(xi).unwrap();
            assert!((got - exact).norm() < 1e-11, "projection changed Y_3^1: {got} vs {exact}");
            assert!(proj2.eval(xi).unwrap().norm() < 1e-11);
        }
    }

    #[test]
    fn lebesgue_constant_known_values() {
        assert!((lebesgue_constant(0, 64) - 1.0).abs() < 1e-10);
        // analytic piecewise integral of |1 + 3t|/2 gives 5/3
        assert!((lebesgue_constant(1, 64) - 5.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn lebesgue_constant_asymptotic_regime() {
        let exact = lebesgue_constant(100, 64);
        let asym = (8.0 * 100.0 / PI).sqrt();
        assert!(
            (exact - asym).abs() < 0.15 * asym,
            "Lambda_100 = {exact}, asymptotic {asym}"
        );
    }
}
