//! Property suites behind `lexp verify`: the convention-locking
//! harmonic identities, translation idempotence, oracle equivalence,
//! the growth-lemma bounds, and the projection bound. Each suite is a
//! standalone function so the acceptance tests can run them at their
//! own case counts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use laplace_expansions::bounds::{bound_local_of_irregular, bound_local_of_regular};
use laplace_expansions::expansion::{
    lebesgue_constant, local_from_function, multipole_from_function, s2l, s2m,
};
use laplace_expansions::special::{binom, legendre_p, sph_harm, HarmonicIndex};
use laplace_expansions::translation::{l2l, m2l, reexpand_adaptive, reexpand_via_quadrature};
use laplace_expansions::{CoefficientTable, Expansion, ExpansionKind, SphereRule, Vec3};

use crate::experiments::{derive_seed, halton};

/// How much work a verify run does.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(anyhow::anyhow!("unknown level '{other}' (expected quick or full)")),
        }
    }
}

/// Result of one property suite.
#[derive(Clone, Debug)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub error: Option<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none()
    }
}

fn outcome(name: &'static str, cases: usize, result: Result<(), String>) -> PropertyOutcome {
    PropertyOutcome { name, cases, error: result.err() }
}

/// Runs every suite at the level's case counts.
pub fn run_all(level: Level, seed: u64) -> Vec<PropertyOutcome> {
    let full = level == Level::Full;
    let mut out = Vec::new();
    out.push(outcome(
        "addition-theorem",
        1000,
        addition_theorem(1000, 20, derive_seed(&[seed, 1])),
    ));
    out.push(outcome(
        "sum-of-squares-corollary",
        1000,
        norm_corollary(1000, 30, derive_seed(&[seed, 2])),
    ));
    let n = if full { 100 } else { 25 };
    out.push(outcome("l2l-idempotence", n, l2l_idempotence(n, derive_seed(&[seed, 3]))));
    let n = if full { 100 } else { 25 };
    out.push(outcome(
        "multipole-truncation-order",
        n,
        multipole_truncation_coherence(n, derive_seed(&[seed, 4])),
    ));
    let n = if full { 20 } else { 5 };
    out.push(outcome(
        "multipole-truncation-lemma",
        n,
        multipole_truncation_lemma(n, derive_seed(&[seed, 5])),
    ));
    let n = if full { 100 } else { 10 };
    out.push(outcome("oracle-equivalence", n, oracle_equivalence(n, derive_seed(&[seed, 6]))));
    let n = if full { 200 } else { 50 };
    out.push(outcome("lemma-regular-bound", n, lemma_regular_bound(n, derive_seed(&[seed, 7]))));
    out.push(outcome(
        "lemma-irregular-bound",
        n,
        lemma_irregular_bound(n, derive_seed(&[seed, 8])),
    ));
    let n = if full { 50 } else { 10 };
    out.push(outcome("projection-bound", n, projection_bound(n, derive_seed(&[seed, 9]))));
    if full {
        let cases = 61 * 61 * 61;
        out.push(outcome("binomial-lemma", cases, binomial_lemma_exhaustive()));
    } else {
        out.push(outcome(
            "binomial-lemma",
            2000,
            binomial_lemma_sampled(2000, derive_seed(&[seed, 10])),
        ));
    }
    out
}

fn unit_dir(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

fn harmonic_row(n: u32, xi: Vec3) -> Result<Vec<Complex64>, String> {
    (-(n as i32)..=(n as i32))
        .map(|m| {
            sph_harm(HarmonicIndex::new(n, m).map_err(|e| e.to_string())?, xi)
                .map_err(|e| e.to_string())
        })
        .collect()
}

/// `P_n(xi . eta) = (4 pi/(2n+1)) sum_m Y_n^m(xi) conj(Y_n^m(eta))`
/// over random degree/direction triples; tolerance 1e-11.
pub fn addition_theorem(cases: usize, max_degree: u32, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(0..=max_degree);
        let xi = unit_dir(&mut rng);
        let eta = unit_dir(&mut rng);
        let lhs = legendre_p(n, xi.dot(eta).clamp(-1.0, 1.0)).map_err(|e| e.to_string())?;
        let mut sum = Complex64::new(0.0, 0.0);
        for (a, b) in harmonic_row(n, xi)?.iter().zip(harmonic_row(n, eta)?) {
            sum += a * b.conj();
        }
        let rhs = sum * (4.0 * PI / (2.0 * n as f64 + 1.0));
        if (lhs - rhs.re).abs() > 1e-11 || rhs.im.abs() > 1e-11 {
            return Err(format!(
                "case {case}: n={n}, P_n(xi.eta)={lhs} but harmonic sum gives {rhs}"
            ));
        }
    }
    Ok(())
}

/// `sum_m |Y_n^m(xi)|^2 = (2n+1)/(4 pi)`; tolerance 1e-11.
pub fn norm_corollary(cases: usize, max_degree: u32, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(0..=max_degree);
        let xi = unit_dir(&mut rng);
        let sum: f64 = harmonic_row(n, xi)?.iter().map(|y| y.norm_sqr()).sum();
        let want = (2.0 * n as f64 + 1.0) / (4.0 * PI);
        if (sum - want).abs() > 1e-11 {
            return Err(format!("case {case}: n={n}, sum {sum} vs {want}"));
        }
    }
    Ok(())
}

fn eval_err(e: &Expansion, x: Vec3) -> Result<Complex64, String> {
    e.eval(x).map_err(|err| format!("eval at {x:?}: {err}"))
}

/// Translation idempotence, part (a): translating a local expansion a
/// second time at non-decreasing order never changes its values, and
/// when the first hop's order dominates the source order the
/// intermediate stop can be omitted entirely. Tolerance 1e-10
/// relative.
pub fn l2l_idempotence(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let p = rng.random_range(1..=8u32);
        let source = unit_dir(&mut rng) * rng.random_range(2.0..4.0);
        let e = s2l(source, 1.0, Vec3::ZERO, p).map_err(|e| e.to_string())?;
        let c1 = unit_dir(&mut rng) * rng.random_range(0.0..0.35 * e.radius());
        let q = p + rng.random_range(0..=3u32);
        let qp = q + rng.random_range(0..=3u32);
        let first = l2l(&e, c1, q).map_err(|e| e.to_string())?;
        let c2 = c1 + unit_dir(&mut rng) * rng.random_range(0.0..0.5 * first.radius());
        let chained = l2l(&first, c2, qp).map_err(|e| e.to_string())?;
        let direct = l2l(&e, c2, q).map_err(|e| e.to_string())?;

        // the second hop must not change values, and because q >= p
        // the intermediate stop is omissible
        let sample_radius = chained.radius().min(direct.radius()) * 0.98;
        for k in 0..20 {
            let x = c2 + unit_dir(&mut rng) * (sample_radius * (k as f64 + 0.5) / 20.0);
            let via_chain = eval_err(&chained, x)?;
            let via_first = eval_err(&first, x)?;
            let via_direct = eval_err(&direct, x)?;
            let scale = 1.0 + via_first.norm();
            if (via_chain - via_first).norm() > 1e-10 * scale {
                return Err(format!(
                    "case {case}: second hop changed values, {via_chain} vs {via_first}"
                ));
            }
            if (via_chain - via_direct).norm() > 1e-10 * scale {
                return Err(format!(
                    "case {case}: intermediate stop not omissible, {via_chain} vs {via_direct}"
                ));
            }
        }
    }
    Ok(())
}

/// Translation idempotence, part (b), coefficient identity at the m2l
/// level: the local coefficients produced by m2l do not depend on the
/// requested output order, so truncating a higher-order translation
/// reproduces the lower-order one. Tolerance 1e-11.
pub fn multipole_truncation_coherence(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let p = rng.random_range(1..=10u32);
        let p_low = rng.random_range(0..=p);
        let source = unit_dir(&mut rng) * rng.random_range(0.0..1.0);
        let mp = s2m(source, rng.random_range(-2.0..2.0), Vec3::ZERO, p);
        let c = unit_dir(&mut rng) * rng.random_range(2.5..5.0);
        let hi = m2l(&mp, c, p).map_err(|e| e.to_string())?;
        let lo = m2l(&mp, c, p_low).map_err(|e| e.to_string())?;
        let hi_cut = hi.coefficients().truncated(p_low);
        let scale = hi_cut.max_abs().max(1e-300);
        for (a, b) in hi_cut.entries().iter().zip(lo.coefficients().entries()) {
            if (a - b).norm() > 1e-11 * scale {
                return Err(format!("case {case}: truncated m2l coefficients differ, {a} vs {b}"));
            }
        }
    }
    Ok(())
}

/// Translation idempotence, part (b), as a statement about multipole
/// operators across centers: the order-p' multipole re-expansion (by
/// quadrature) of a p-truncated multipole equals the direct order-p'
/// multipole of the source, for p' <= p. The tail a deeper truncation
/// adds has no moments of degree <= p' at the new center.
///
/// The moment integrals are scaled by rho^{nu+1}, which amplifies the
/// quadrature's rounding floor, so the sphere radius stays moderate
/// and the stabilization threshold sits above that floor.
pub fn multipole_truncation_lemma(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let p = rng.random_range(2..=8u32);
        let p_low = rng.random_range(0..=p);
        let source = unit_dir(&mut rng) * rng.random_range(0.1..0.5);
        let mp = s2m(source, 1.0, Vec3::ZERO, p).with_radius(0.6).map_err(|e| e.to_string())?;
        let c2 = unit_dir(&mut rng) * rng.random_range(0.9..1.2);
        // quadrature sphere enclosing the old ball
        let rho = 1.7 * (c2.norm() + 0.6);

        let direct = s2m(source, 1.0, c2, p_low);
        let mut degree = 2 * p_low + 56;
        let mut prev: Option<Expansion> = None;
        loop {
            let rule = SphereRule::with_degree(degree);
            let formed =
                multipole_from_function(|x| mp.eval(x), c2, rho, p_low, &rule)
                    .map_err(|e| e.to_string())?;
            if let Some(last) = &prev {
                let scale = formed.coefficients().max_abs().max(1e-300);
                let drift = last
                    .coefficients()
                    .entries()
                    .iter()
                    .zip(formed.coefficients().entries())
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm()));
                if drift <= 5e-12 * scale {
                    let worst = formed
                        .coefficients()
                        .entries()
                        .iter()
                        .zip(direct.coefficients().entries())
                        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm()));
                    let scale = direct.coefficients().max_abs().max(1e-300);
                    if worst > 1e-11 * scale {
                        return Err(format!(
                            "case {case}: re-expanded multipole differs from direct by {worst} (scale {scale})"
                        ));
                    }
                    break;
                }
            }
            prev = Some(formed);
            degree *= 2;
            if degree > 1024 {
                return Err(format!("case {case}: multipole quadrature did not stabilize"));
            }
        }
    }
    Ok(())
}

/// l2l and m2l agree with the quadrature re-expansion oracle to 1e-10
/// relative on random geometries.
pub fn oracle_equivalence(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        // local -> local
        let p = rng.random_range(1..=12u32);
        let q = rng.random_range(1..=12u32);
        let source = unit_dir(&mut rng) * rng.random_range(2.0..4.0);
        let e = s2l(source, rng.random_range(0.5..2.0), Vec3::ZERO, p).map_err(|e| e.to_string())?;
        let c1 = unit_dir(&mut rng) * rng.random_range(0.1..0.4 * e.radius());
        let rho = 0.5 * (e.radius() - c1.norm());
        let direct = l2l(&e, c1, q).map_err(|e| e.to_string())?;
        let rule = SphereRule::for_polynomial_order(p + q);
        let oracle = reexpand_via_quadrature(&e, c1, rho, q, &rule).map_err(|e| e.to_string())?;
        let scale = oracle.coefficients().max_abs().max(1e-300);
        for (a, b) in direct
            .coefficients()
            .entries()
            .iter()
            .zip(oracle.coefficients().entries())
        {
            if (a - b).norm() > 1e-10 * scale {
                return Err(format!("case {case}: l2l vs oracle, {a} vs {b} (scale {scale})"));
            }
        }

        // multipole -> local
        let p = rng.random_range(1..=12u32);
        let q = rng.random_range(1..=12u32);
        let source = unit_dir(&mut rng) * rng.random_range(0.0..0.8);
        let mp = s2m(source, rng.random_range(0.5..2.0), Vec3::ZERO, p);
        let c = unit_dir(&mut rng) * rng.random_range(2.2..4.0);
        let rho = 0.45 * (c.norm() - mp.radius());
        let direct = m2l(&mp, c, q).map_err(|e| e.to_string())?;
        let oracle = reexpand_adaptive(&mp, c, rho, q).map_err(|e| e.to_string())?;
        let scale = oracle.coefficients().max_abs().max(1e-300);
        for (a, b) in direct
            .coefficients()
            .entries()
            .iter()
            .zip(oracle.coefficients().entries())
        {
            if (a - b).norm() > 1e-10 * scale {
                return Err(format!("case {case}: m2l vs oracle, {a} vs {b} (scale {scale})"));
            }
        }
    }
    Ok(())
}

fn pure_degree_expansion(n: u32, kind: ExpansionKind, radius: f64) -> Result<Expansion, String> {
    let mut table = CoefficientTable::zeros(n);
    table
        .set(HarmonicIndex::new(n, 0).map_err(|e| e.to_string())?, Complex64::new(1.0, 0.0))
        .map_err(|e| e.to_string())?;
    Expansion::new(kind, Vec3::ZERO, n, radius, table).map_err(|e| e.to_string())
}

/// `|L_p[R_n^0](t)| <= sqrt((2n+1)/(4 pi)) (|c| + |t-c|)^n` over random
/// hypothesis-satisfying configurations; slack 1e-9.
pub fn lemma_regular_bound(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(0..=20u32);
        let p = rng.random_range(0..=20u32);
        let c = unit_dir(&mut rng) * rng.random_range(0.1..2.5);
        let t = c + unit_dir(&mut rng) * rng.random_range(0.0..2.0);
        let radius = c.norm() + (t - c).norm() + 1.0;
        let e = pure_degree_expansion(n, ExpansionKind::Local, radius)?;
        let local = l2l(&e, c, p).map_err(|e| e.to_string())?;
        let value = eval_err(&local, t)?.norm();
        let bound = bound_local_of_regular(n, c, t);
        if value > bound * (1.0 + 1e-9) {
            return Err(format!("case {case}: n={n} p={p}, |L_p[R_n^0](t)| = {value} > {bound}"));
        }
    }
    Ok(())
}

/// `|L_p[I_n^0](t)| <= sqrt((2n+1)/(4 pi)) (|c| - |t-c|)^{-(n+1)}`;
/// slack 1e-9.
pub fn lemma_irregular_bound(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(0..=20u32);
        let p = rng.random_range(0..=20u32);
        let c = unit_dir(&mut rng) * rng.random_range(0.5..2.5);
        let t = c + unit_dir(&mut rng) * (rng.random_range(0.0..0.9) * c.norm());
        let mp = pure_degree_expansion(n, ExpansionKind::Multipole, 0.05 * c.norm())?;
        let local = m2l(&mp, c, p).map_err(|e| e.to_string())?;
        let value = eval_err(&local, t)?.norm();
        let bound = bound_local_of_irregular(n, c, t).map_err(|e| e.to_string())?;
        if value > bound * (1.0 + 1e-9) {
            return Err(format!("case {case}: n={n} p={p}, |L_p[I_n^0](t)| = {value} > {bound}"));
        }
    }
    Ok(())
}

/// Generic projection bound: for harmonic phi and a perturbed
/// harmonic phi~, the sampled sup of |L_q[phi] - L_q[phi~]| is at most
/// `Lambda_q` times the sampled sup of |phi - phi~| over the same
/// dense sample set, within relative slack 1e-6.
pub fn projection_bound(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boundary = SphereRule::with_degree(40);

    // dense sample set in the unit ball: boundary shells plus 512
    // quasi-random interior points
    let mut sample_points: Vec<Vec3> = Vec::new();
    for frac in [1.0, 0.85, 0.6, 0.35] {
        for node in boundary.nodes() {
            sample_points.push(*node * frac);
        }
    }
    for j in 1..=512u64 {
        let z = 2.0 * halton(j, 2) - 1.0;
        let phi = std::f64::consts::TAU * halton(j, 3);
        let rad = halton(j, 5).powf(1.0 / 3.0);
        let s = (1.0 - z * z).max(0.0).sqrt();
        sample_points.push(Vec3::new(s * phi.cos(), s * phi.sin(), z) * rad);
    }

    for case in 0..cases {
        let q = rng.random_range(1..=15u32);
        let n_src = rng.random_range(1..=4usize);
        let sources: Vec<(Vec3, f64)> = (0..n_src)
            .map(|_| {
                (unit_dir(&mut rng) * rng.random_range(1.5..3.0), rng.random_range(-2.0..2.0f64))
            })
            .collect();
        let phi = |x: Vec3| -> f64 {
            sources.iter().map(|(s, w)| w / (x - *s).norm()).sum()
        };

        // perturbation: a random harmonic polynomial of degree q + 5
        let pert_order = q + 5;
        let mut pert_table = CoefficientTable::zeros(pert_order);
        for n in 0..=pert_order {
            for m in 0..=(n as i32) {
                let re: f64 = rng.random_range(-1.0..1.0);
                let im: f64 = if m == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
                let v = Complex64::new(re, im) / ((n + 1) as f64);
                pert_table
                    .set(HarmonicIndex::new(n, m).map_err(|e| e.to_string())?, v)
                    .map_err(|e| e.to_string())?;
                if m > 0 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    pert_table
                        .set(
                            HarmonicIndex::new(n, -m).map_err(|e| e.to_string())?,
                            v.conj() * sign,
                        )
                        .map_err(|e| e.to_string())?;
                }
            }
        }
        let pert = Expansion::new(ExpansionKind::Local, Vec3::ZERO, pert_order, 1.0, pert_table)
            .map_err(|e| e.to_string())?;

        // scale the perturbation to ~1e-3 of phi on the sample set
        let sup_phi = sample_points.iter().fold(0.0f64, |acc, x| acc.max(phi(*x).abs()));
        let sup_pert_raw =
            sample_points.iter().try_fold(0.0f64, |acc, x| -> Result<f64, String> {
                Ok(acc.max(eval_err(&pert, *x)?.norm()))
            })?;
        let eps = 1e-3 * sup_phi / sup_pert_raw.max(1e-300);

        let rule = SphereRule::with_degree(2 * pert_order + 16);
        let l_phi = local_from_function(
            |x| Ok(Complex64::new(phi(x), 0.0)),
            Vec3::ZERO,
            1.0,
            q,
            &rule,
        )
        .map_err(|e| e.to_string())?;
        let l_phi_tilde = local_from_function(
            |x| Ok(Complex64::new(phi(x), 0.0) + pert.eval(x)? * eps),
            Vec3::ZERO,
            1.0,
            q,
            &rule,
        )
        .map_err(|e| e.to_string())?;

        let diff_table = l_phi_tilde
            .coefficients()
            .try_add(&l_phi.coefficients().scaled(Complex64::new(-1.0, 0.0)))
            .map_err(|e| e.to_string())?;
        let diff = Expansion::new(ExpansionKind::Local, Vec3::ZERO, q, 1.0, diff_table)
            .map_err(|e| e.to_string())?;

        let mut sup_l = 0.0f64;
        let mut sup_delta = 0.0f64;
        for x in &sample_points {
            sup_l = sup_l.max(eval_err(&diff, *x)?.norm());
            sup_delta = sup_delta.max((eval_err(&pert, *x)? * eps).norm());
        }
        let lambda = lebesgue_constant(q, 64);
        if sup_l > lambda * sup_delta * (1.0 + 1e-6) {
            return Err(format!(
                "case {case}: q={q}, sup |L_q[phi]-L_q[phi~]| = {sup_l} > Lambda_q {lambda} * {sup_delta}"
            ));
        }
    }
    Ok(())
}

fn pascal_triangle(max: usize) -> Vec<Vec<u128>> {
    let mut tri = vec![vec![1u128]];
    for n in 1..=max {
        let prev = &tri[n - 1];
        let mut row = vec![1u128; n + 1];
        for k in 1..n {
            row[k] = prev[k - 1] + prev[k];
        }
        tri.push(row);
    }
    tri
}

/// Exhaustive combinatorial-lemma sweep over 0 <= n, m, k <= 60.
pub fn binomial_lemma_exhaustive() -> Result<(), String> {
    let tri = pascal_triangle(120);
    let c = |n: usize, k: usize| -> f64 {
        if k > n { 0.0 } else { tri[n][k] as f64 }
    };
    for n in 0..=60usize {
        for m in 0..=60usize {
            for k in 0..=60usize {
                if n >= k && c(n + k, m) * c(n - k, m) > c(n, m) * c(n, m) {
                    return Err(format!("part (a) fails at n={n} m={m} k={k}"));
                }
                if m >= k && c(n, m + k) * c(n, m - k) > c(n, m) * c(n, m) {
                    return Err(format!("part (b) fails at n={n} m={m} k={k}"));
                }
            }
        }
    }
    Ok(())
}

/// Random subset of the combinatorial-lemma sweep, through the crate's
/// `binom`.
pub fn binomial_lemma_sampled(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(0..=60i64);
        let m = rng.random_range(0..=60i64);
        let k = rng.random_range(0..=60i64);
        if n >= k && binom(n + k, m) * binom(n - k, m) > binom(n, m) * binom(n, m) {
            return Err(format!("case {case}: part (a) fails at n={n} m={m} k={k}"));
        }
        if m >= k && binom(n, m + k) * binom(n, m - k) > binom(n, m) * binom(n, m) {
            return Err(format!("case {case}: part (b) fails at n={n} m={m} k={k}"));
        }
    }
    Ok(())
}
