//! Random-geometry sampling for the three translation chains and the
//! leading-constant estimate: each sampled scenario satisfies the
//! hypotheses of its chain's error bound exactly, the acceleration
//! error is measured by point evaluations over a target set in the
//! final ball, and the ratio error/bound is tracked per order cell.
//!
//! Determinism contract: every sample is generated from its own seed
//! derived from (run seed, chain, p, q, index), so reports are
//! byte-identical across runs and cells may be computed in any order.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use laplace_expansions::bounds::{
    bound_chain_m2l2l, bound_chain_s2l2l, bound_chain_s2m2l, ChainGeometry,
};
use laplace_expansions::expansion::{s2l, s2m};
use laplace_expansions::translation::{l2l, m2l};
use laplace_expansions::Vec3;

/// Samples whose bound is below this threshold are discarded from the
/// ratio statistics (and counted), to keep underflow out of divisions.
pub const BOUND_UNDERFLOW_GUARD: f64 = 1e-280;

/// The three translation chains covered by the error bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Chain {
    #[serde(rename = "S2L2L")]
    S2L2L,
    #[serde(rename = "S2M2L")]
    S2M2L,
    #[serde(rename = "M2L2L")]
    M2L2L,
}

impl Chain {
    pub fn all() -> [Chain; 3] {
        [Chain::S2L2L, Chain::S2M2L, Chain::M2L2L]
    }

    pub fn name(self) -> &'static str {
        match self {
            Chain::S2L2L => "S2L2L",
            Chain::S2M2L => "S2M2L",
            Chain::M2L2L => "M2L2L",
        }
    }

    fn id(self) -> u64 {
        match self {
            Chain::S2L2L => 1,
            Chain::S2M2L => 2,
            Chain::M2L2L => 3,
        }
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Chain {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S2L2L" => Ok(Chain::S2L2L),
            "S2M2L" => Ok(Chain::S2M2L),
            "M2L2L" => Ok(Chain::M2L2L),
            other => Err(anyhow!("unknown chain '{other}' (expected S2L2L, S2M2L, or M2L2L)")),
        }
    }
}

/// One random geometry for a translation chain, satisfying the
/// hypotheses of the matching error bound exactly.
#[derive(Clone, Debug)]
pub struct ScenarioSample {
    pub chain: Chain,
    pub geometry: ChainGeometry,
    pub source: Vec3,
    pub source_weight: f64,
    /// Expansion center `c`: the final center for the two-stage
    /// chains, the intermediate local center for M2L2L.
    pub center: Vec3,
    /// Final center `c'` of the three-stage chain.
    pub center2: Option<Vec3>,
    /// 64 quasi-random points in the final ball, half on its boundary.
    pub targets: Vec<Vec3>,
    /// Orders `(p, q)` this sample was measured at; `(0, 0)` until the
    /// measurement driver fills them in.
    pub orders: (u32, u32),
    pub seed: u64,
    pub size_scale: f64,
}

impl ScenarioSample {
    /// Final expansion center (`c` or `c'`).
    pub fn final_center(&self) -> Vec3 {
        self.center2.unwrap_or(self.center)
    }

    /// Radius of the ball the targets live in.
    pub fn target_ball_radius(&self) -> f64 {
        match self.chain {
            Chain::S2L2L => self.geometry.inner() - self.center.norm(),
            Chain::S2M2L => self.center.norm() - self.geometry.outer(),
            Chain::M2L2L => {
                let (_, inner2) = self.geometry.second_stage().expect("three-stage geometry");
                inner2 - (self.center - self.final_center()).norm()
            }
        }
    }

    /// Re-checks the geometric hypotheses of the matching bound.
    pub fn check_hypotheses(&self) -> Result<()> {
        const TOL: f64 = 1e-9;
        let g = &self.geometry;
        let scale = g.outer();
        let ball_radius = self.target_ball_radius();
        if ball_radius <= 0.0 {
            bail!("empty target ball");
        }
        match self.chain {
            Chain::S2L2L => {
                if self.source.norm() < g.outer() * (1.0 - TOL) {
                    bail!("source inside separation sphere");
                }
                if self.center.norm() > g.inner() * (1.0 + TOL) {
                    bail!("center outside inner ball");
                }
            }
            Chain::S2M2L => {
                if self.source.norm() > g.inner() * (1.0 + TOL) {
                    bail!("source outside inner ball");
                }
                if self.center.norm() < g.outer() * (1.0 - TOL) {
                    bail!("center inside separation sphere");
                }
            }
            Chain::M2L2L => {
                let (_, inner2) = g.second_stage().context("three-stage geometry required")?;
                let want = g.outer() + inner2;
                if (self.center.norm() - want).abs() > TOL * scale {
                    bail!("center distance violates compatibility relation");
                }
                if self.source.norm() > g.inner() * (1.0 + TOL) {
                    bail!("source outside inner ball");
                }
                let c2 = self.center2.context("three-stage chain requires a second center")?;
                if (c2 - self.center).norm() >= inner2 {
                    bail!("final center outside intermediate ball");
                }
            }
        }
        let fc = self.final_center();
        for t in &self.targets {
            if (*t - fc).norm() > ball_radius * (1.0 + TOL) {
                bail!("target outside final ball");
            }
        }
        Ok(())
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed derivation; order of parts matters.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h = 0x51_7C_C1_B7_27_22_0A_95u64;
    for &p in parts {
        h = splitmix(h ^ p);
    }
    h
}

fn unit_dir(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

pub(crate) fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// 64 quasi-random targets in the closed ball: 32 on the boundary
/// sphere (Fibonacci lattice) and 32 in the interior (Halton in
/// direction and radius). Deterministic in (center, radius).
fn target_set(center: Vec3, radius: f64) -> Vec<Vec3> {
    let mut targets = Vec::with_capacity(64);
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    for i in 0..32u32 {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / 32.0;
        let s = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * i as f64;
        targets.push(center + Vec3::new(s * phi.cos(), s * phi.sin(), z) * radius);
    }
    for j in 1..=32u64 {
        let z = 2.0 * halton(j, 2) - 1.0;
        let phi = std::f64::consts::TAU * halton(j, 3);
        let rad = radius * halton(j, 5).powf(1.0 / 3.0);
        let s = (1.0 - z * z).max(0.0).sqrt();
        targets.push(center + Vec3::new(s * phi.cos(), s * phi.sin(), z) * rad);
    }
    targets
}

/// Draws one scenario for `chain`. The separation is uniform in
/// `[1.5, 4] * size_scale`, the inner radius uniform in `[0.5, 0.9]`
/// of the separation, directions uniform on the sphere, magnitudes
/// uniform in their admissible intervals. Identical seeds produce
/// bitwise-identical samples.
pub fn sample_scenario(chain: Chain, rng_seed: u64, size_scale: f64) -> Result<ScenarioSample> {
    for attempt in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[rng_seed, attempt]));
        let sample = draw_scenario(chain, &mut rng, rng_seed, size_scale)?;
        if sample.check_hypotheses().is_ok() {
            return Ok(sample);
        }
    }
    bail!("rejection resampling failed after 1000 attempts for seed {rng_seed}")
}

fn draw_scenario(
    chain: Chain,
    rng: &mut ChaCha8Rng,
    seed: u64,
    size_scale: f64,
) -> Result<ScenarioSample> {
    let outer: f64 = rng.random_range(1.5..4.0) * size_scale;
    let inner: f64 = rng.random_range(0.5..0.9) * outer;

    let (geometry, source, center, center2) = match chain {
        Chain::S2L2L => {
            let source = unit_dir(rng) * rng.random_range(outer..2.0 * outer);
            let center = unit_dir(rng) * rng.random_range(0.0..0.9 * inner);
            (ChainGeometry::single(outer, inner)?, source, center, None)
        }
        Chain::S2M2L => {
            let source = unit_dir(rng) * rng.random_range(0.0..inner);
            let center = unit_dir(rng) * rng.random_range(outer..2.0 * outer);
            (ChainGeometry::single(outer, inner)?, source, center, None)
        }
        Chain::M2L2L => {
            let inner2: f64 = rng.random_range(0.5..0.9) * outer;
            let geometry = ChainGeometry::two_stage(outer, inner, inner2)?;
            let source = unit_dir(rng) * rng.random_range(0.0..inner);
            let center = unit_dir(rng) * (outer + inner2);
            let center2 = center + unit_dir(rng) * rng.random_range(0.0..0.9 * inner2);
            (geometry, source, center, Some(center2))
        }
    };

    let mut sample = ScenarioSample {
        chain,
        geometry,
        source,
        source_weight: 1.0,
        center,
        center2,
        targets: Vec::new(),
        orders: (0, 0),
        seed,
        size_scale,
    };
    sample.targets = target_set(sample.final_center(), sample.target_ball_radius());
    Ok(sample)
}

/// The bound the sample's chain obeys; independent of `q`.
pub fn bound_for(sample: &ScenarioSample, p: u32) -> f64 {
    match sample.chain {
        Chain::S2L2L => bound_chain_s2l2l(&sample.geometry, p),
        Chain::S2M2L => bound_chain_s2m2l(&sample.geometry, p),
        Chain::M2L2L => {
            bound_chain_m2l2l(&sample.geometry, p).expect("sampler built a two-stage geometry")
        }
    }
}

/// Builds the reference expansion (exact coefficients straight from
/// the source) and the chain approximation at orders `(p, q)`.
pub fn build_expansions(
    sample: &ScenarioSample,
    p: u32,
    q: u32,
) -> Result<(laplace_expansions::Expansion, laplace_expansions::Expansion)> {
    let w = sample.source_weight;
    let reference = s2l(sample.source, w, sample.final_center(), q)
        .context("reference expansion")?;
    let chain = match sample.chain {
        Chain::S2L2L => {
            let at_origin = s2l(sample.source, w, Vec3::ZERO, p).context("s2l stage")?;
            l2l(&at_origin, sample.center, q).context("l2l stage")?
        }
        Chain::S2M2L => {
            let at_origin = s2m(sample.source, w, Vec3::ZERO, p);
            m2l(&at_origin, sample.center, q).context("m2l stage")?
        }
        Chain::M2L2L => {
            let at_origin = s2m(sample.source, w, Vec3::ZERO, p);
            let mid = m2l(&at_origin, sample.center, p).context("m2l stage")?;
            l2l(&mid, sample.center2.context("three-stage chain")?, q)
                .context("final l2l stage")?
        }
    };
    Ok((reference, chain))
}

/// Acceleration error of the sample's translation chain at orders
/// `(p, q)`: the maximum absolute difference between the reference and
/// chain expansions over the target set.
pub fn measure_error(sample: &ScenarioSample, p: u32, q: u32) -> Result<f64> {
    let (reference, chain) = build_expansions(sample, p, q)?;
    let mut worst = 0.0f64;
    for t in &sample.targets {
        let a = reference.eval(*t).with_context(|| format!("reference eval at {t:?}"))?;
        let b = chain.eval(*t).with_context(|| format!("chain eval at {t:?}"))?;
        worst = worst.max((a - b).norm());
    }
    Ok(worst)
}

/// Per-cell ratio statistics of a constant estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub p: u32,
    pub q: u32,
    pub samples: u32,
    pub discarded: u32,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Reference to the sample attaining the reported maximum ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstSample {
    pub p: u32,
    pub q: u32,
    pub sample_index: u32,
    pub sample_seed: u64,
    pub ratio: f64,
    pub error: f64,
    pub bound: f64,
}

/// Leading-constant estimate for one chain over an order grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub chain: Chain,
    pub orders: Vec<u32>,
    pub samples_per_cell: u32,
    pub seed: u64,
    pub size_scale: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub worst_sample: Option<WorstSample>,
    pub cells: Vec<CellStats>,
}

/// Estimates the leading constant of the chain's bound: for every
/// `(p, q)` in `orders x orders`, draws `samples_per_cell` scenarios
/// and records the max and mean of measured error / bound. Cells are
/// seeded independently from (seed, chain, p, q), so the report is a
/// pure function of its inputs.
pub fn estimate_constant(
    chain: Chain,
    orders: &[u32],
    samples_per_cell: u32,
    seed: u64,
    size_scale: f64,
) -> Result<ConstantReport> {
    if orders.is_empty() {
        bail!("order set must not be empty");
    }
    if samples_per_cell == 0 {
        bail!("samples_per_cell must be at least 1");
    }
    let mut sorted_orders = orders.to_vec();
    sorted_orders.sort_unstable();
    sorted_orders.dedup();

    let mut cells = Vec::new();
    let mut worst: Option<WorstSample> = None;
    let mut ratio_sum = 0.0;
    let mut ratio_count = 0u64;

    for &p in &sorted_orders {
        for &q in &sorted_orders {
            let cell_seed = derive_seed(&[seed, chain.id(), p as u64, q as u64]);
            let mut cell_max = 0.0f64;
            let mut cell_sum = 0.0f64;
            let mut kept = 0u32;
            let mut discarded = 0u32;
            for index in 0..samples_per_cell {
                let sample_seed = derive_seed(&[cell_seed, index as u64]);
                let mut sample = sample_scenario(chain, sample_seed, size_scale)?;
                sample.orders = (p, q);
                let bound = bound_for(&sample, p);
                if bound < BOUND_UNDERFLOW_GUARD {
                    discarded += 1;
                    continue;
                }
                let error = measure_error(&sample, p, q)?;
                let ratio = error / bound;
                cell_sum += ratio;
                kept += 1;
                if ratio > cell_max {
                    cell_max = ratio;
                }
                if worst.as_ref().is_none_or(|w| ratio > w.ratio) {
                    worst = Some(WorstSample {
                        p,
                        q,
                        sample_index: index,
                        sample_seed,
                        ratio,
                        error,
                        bound,
                    });
                }
            }
            ratio_sum += cell_sum;
            ratio_count += kept as u64;
            cells.push(CellStats {
                p,
                q,
                samples: kept,
                discarded,
                max_ratio: cell_max,
                mean_ratio: if kept > 0 { cell_sum / kept as f64 } else { 0.0 },
            });
        }
    }

    let max_ratio = cells.iter().fold(0.0f64, |acc, c| acc.max(c.max_ratio));
    let mean_ratio = if ratio_count > 0 { ratio_sum / ratio_count as f64 } else { 0.0 };
    Ok(ConstantReport {
        chain,
        orders: sorted_orders,
        samples_per_cell,
        seed,
        size_scale,
        max_ratio,
        mean_ratio,
        worst_sample: worst,
        cells,
    })
}
