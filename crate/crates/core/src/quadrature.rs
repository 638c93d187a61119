//! Gauss-Legendre quadrature on `[-1, 1]` and tensor-product rules on
//! the unit sphere that integrate spherical harmonics exactly up to a
//! requested degree.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Error;
use crate::math;
use crate::special;
use crate::vec3::Vec3;
use crate::Result;

/// Nodes and weights of the `count`-point Gauss-Legendre rule on
/// `[-1, 1]`, exact for polynomials of degree `2*count - 1`.
///
/// Nodes are the roots of `P_count`, found by Newton iteration from
/// Chebyshev initial guesses; the returned arrays are symmetric about 0
/// by construction.
pub fn gauss_legendre_rule(count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if count == 0 {
        return Err(Error::Domain("node count must be at least 1"));
    }
    let n = count;
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];

    // Legendre value and derivative at x.
    let eval = |x: f64| -> (f64, f64) {
        let mut p_prev = 1.0;
        let mut p_curr = x;
        if n == 1 {
            return (x, 1.0);
        }
        for k in 2..=n {
            let kf = k as f64;
            let next = ((2.0 * kf - 1.0) * x * p_curr - (kf - 1.0) * p_prev) / kf;
            p_prev = p_curr;
            p_curr = next;
        }
        let dp = n as f64 * (x * p_curr - p_prev) / (x * x - 1.0);
        (p_curr, dp)
    };

    // The roots are symmetric; solve for the non-negative half and mirror.
    for i in 0..n.div_ceil(2) {
        let mut x = math::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut converged = false;
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = eval(x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if math::fabs(dx) < 1e-15 {
                // one polishing step
                let (p, d) = eval(x);
                dp = d;
                x -= p / d;
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence("Gauss-Legendre Newton iteration"));
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = eval(0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    Ok((nodes, weights))
}

/// Quadrature rule on the unit sphere. All weights are positive, their
/// sum is `4 pi`, and spherical polynomials of total degree up to
/// `exactness_degree` are integrated exactly.
#[derive(Clone, Debug)]
pub struct SphereRule {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    exactness_degree: u32,
}

impl SphereRule {
    /// Tensor-product rule: `ceil((d+1)/2)` Gauss-Legendre points in
    /// `cos(theta)` crossed with `d+1` equispaced azimuths.
    pub fn with_degree(exactness_degree: u32) -> SphereRule {
        let d = exactness_degree as usize;
        let n_polar = (d + 2) / 2; // ceil((d+1)/2)
        let n_azimuth = d + 1;
        let (t_nodes, t_weights) = gauss_legendre_rule(n_polar)
            .expect("Gauss-Legendre iteration converges for all rule sizes used here");
        let azimuth_weight = 2.0 * PI / n_azimuth as f64;

        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (t, wt) in t_nodes.iter().zip(&t_weights) {
            let s = math::sqrt((1.0 - t) * (1.0 + t));
            for j in 0..n_azimuth {
                let phi = 2.0 * PI * j as f64 / n_azimuth as f64;
                nodes.push(Vec3::new(s * math::cos(phi), s * math::sin(phi), *t));
                weights.push(wt * azimuth_weight);
            }
        }
        SphereRule { nodes, weights, exactness_degree }
    }

    /// Rule adequate for forming an order-`p` expansion of an input
    /// that is itself a spherical polynomial of degree at most `p`.
    pub fn for_polynomial_order(p: u32) -> SphereRule {
        SphereRule::with_degree(2 * p)
    }

    /// Default rule for forming an order-`p` expansion of a smooth
    /// non-polynomial input (e.g. a restricted Laplace kernel). Callers
    /// that need certified digits should double the degree and compare.
    pub fn for_kernel_order(p: u32) -> SphereRule {
        SphereRule::with_degree(2 * p + 16)
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> u32 {
        self.exactness_degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(node_i)`, propagating evaluation failures from `f`.
    pub fn integrate<F>(&self, mut f: F) -> Result<Complex64>
    where
        F: FnMut(Vec3) -> Result<Complex64>,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (node, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(*node)? * *w;
        }
        Ok(acc)
    }
}

/// Spherical-harmonic tables at every node of a rule, packed per node
/// in the `n(n+1)+m` layout. Shared by the expansion-forming integrals.
pub(crate) fn harmonic_tables_at_nodes(rule: &SphereRule, order: u32) -> Vec<Vec<Complex64>> {
    rule.nodes().iter().map(|&xi| special::sph_harm_all(order, xi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{sph_harm, HarmonicIndex};

    #[test]
    fn gauss_legendre_small_rules() {
        let (x, w) = gauss_legendre_rule(1).unwrap();
        assert_eq!(x, alloc::vec![0.0]);
        assert_eq!(w, alloc::vec![2.0]);

        let (x, w) = gauss_legendre_rule(2).unwrap();
        let root = 1.0 / 3.0f64.sqrt();
        assert!((x[0] + root).abs() < 1e-15 && (x[1] - root).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);

        // degree-3 exactness of the 2-point rule: integral of t^2 is 2/3
        let quad: f64 = x.iter().zip(&w).map(|(t, w)| w * t * t).sum();
        assert!((quad - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_exactness_and_symmetry() {
        for count in [3usize, 8, 17, 64] {
            let (x, w) = gauss_legendre_rule(count).unwrap();
            assert!(w.iter().all(|&wi| wi > 0.0));
            for i in 0..count {
                assert!((x[i] + x[count - 1 - i]).abs() < 1e-15);
                assert!((w[i] - w[count - 1 - i]).abs() < 1e-15);
            }
            // exact for monomials up to degree 2*count - 1
            for k in (0..2 * count).step_by(2) {
                let quad: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(k as i32)).sum();
                let want = 2.0 / (k as f64 + 1.0);
                assert!(
                    (quad - want).abs() < 1e-13 * (1.0 + want),
                    "count {count}, degree {k}: {quad} vs {want}"
                );
            }
        }
    }

    #[test]
    fn sphere_rule_weight_sum_and_positivity() {
        for degree in [0u32, 1, 5, 12, 40] {
            let rule = SphereRule::with_degree(degree);
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 4.0 * PI).abs() < 1e-12, "degree {degree}: {total}");
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            let d = degree as usize;
            assert_eq!(rule.len(), (d + 2) / 2 * (d + 1));
            for node in rule.nodes() {
                assert!((node.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sphere_rule_kills_low_degree_harmonics() {
        let rule = SphereRule::with_degree(12);
        for n in 1..=12u32 {
            for m in -(n as i32)..=(n as i32) {
                let idx = HarmonicIndex::new(n, m).unwrap();
                let integral = rule.integrate(|xi| sph_harm(idx, xi)).unwrap();
                assert!(
                    integral.norm() < 1e-11,
                    "Y_{n}^{m} integrated to {integral}"
                );
            }
        }
        // the representative case is comfortably below even 1e-12
        let y53 = HarmonicIndex::new(5, 3).unwrap();
        let integral = rule.integrate(|xi| sph_harm(y53, xi)).unwrap();
        assert!(integral.norm() < 1e-12);
    }

    #[test]
    fn sphere_rule_orthonormality() {
        // For total degree a + b within the exactness degree the rule
        // reproduces the Kronecker delta.
        let rule = SphereRule::with_degree(12);
        let pairs = [
            ((5, 3), (5, 3), 1.0),
            ((6, 2), (6, 2), 1.0),
            ((2, 1), (2, 1), 1.0),
            ((2, 1), (3, 1), 0.0),
            ((4, -2), (4, 2), 0.0),
            ((5, 0), (6, 0), 0.0),
        ];
        for ((a, alpha), (b, beta), want) in pairs {
            let ia = HarmonicIndex::new(a, alpha).unwrap();
            let ib = HarmonicIndex::new(b, beta).unwrap();
            let integral = rule
                .integrate(|xi| Ok(sph_harm(ia, xi)? * sph_harm(ib, xi)?.conj()))
                .unwrap();
            assert!(
                (integral.re - want).abs() < 1e-11 && integral.im.abs() < 1e-11,
                "<Y_{a}^{alpha}, Y_{b}^{beta}> = {integral}, want {want}"
            );
        }
    }

    #[test]
    fn integrate_constant_is_sphere_area() {
        let rule = SphereRule::with_degree(0);
        let integral = rule.integrate(|_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert!((integral.re - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn integrate_propagates_failures() {
        let rule = SphereRule::with_degree(2);
        let result = rule.integrate(|_| Err(crate::Error::Domain("boom")));
        assert!(result.is_err());
    }
}
