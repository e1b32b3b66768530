use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

use super::oned::gauss_legendre;

pub const DEFAULT_SEED: u64 = 0x5EED;

/// Weighted direction set on `S^{n-1}`.
///
/// Nodes are stored flat, `n` coordinates per node.
#[derive(Debug, Clone)]
pub struct SphereRule {
    n: usize,
    level: u32,
    seed: u64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub(crate) fn from_parts(n: usize, level: u32, seed: u64, nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(nodes.len(), n * weights.len());
        SphereRule {
            n,
            level,
            seed,
            nodes,
            weights,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.n)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Surface area of `S^{n-1}`, `2π^{n/2}/Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma(half)
}

/// Level used when callers do not choose one.
pub fn default_level(n: usize) -> u32 {
    match n {
        1 => 0,
        2 => 10,
        _ => 6,
    }
}

/// Deterministic direction set for dimension `n`.
///
/// * `n = 1`: `{−1, +1}` with unit weights.
/// * `n = 2`: `2^level` equally spaced angles, weights `2π / 2^level`.
/// * `n = 3`: `2^level` Gauss–Legendre nodes in `z` times `2^{level+1}`
///   longitudes.
/// * `n ≥ 4`: `4^level` Halton points with a seeded Cranley–Patterson shift,
///   pushed through the inverse normal CDF and normalized; equal weights.
pub fn sphere_rule(n: usize, level: u32, seed: u64) -> SphereRule {
    assert!(n >= 1, "dimension must be positive");
    match n {
        1 => SphereRule::from_parts(1, level, seed, vec![-1.0, 1.0], vec![1.0, 1.0]),
        2 => circle_rule(level, seed),
        3 => product_rule(level, seed),
        _ => halton_rule(n, level, seed),
    }
}

fn circle_rule(level: u32, seed: u64) -> SphereRule {
    let m = 1usize << level;
    let step = std::f64::consts::TAU / m as f64;
    let mut nodes = Vec::with_capacity(2 * m);
    for j in 0..m {
        let th = step * j as f64;
        nodes.push(th.cos());
        nodes.push(th.sin());
    }
    SphereRule::from_parts(2, level, seed, nodes, vec![step; m])
}

fn product_rule(level: u32, seed: u64) -> SphereRule {
    let nz = 1usize << level;
    let nphi = 2 * nz;
    let dphi = std::f64::consts::TAU / nphi as f64;
    let mut nodes = Vec::with_capacity(3 * nz * nphi);
    let mut weights = Vec::with_capacity(nz * nphi);
    for (z, wz) in gauss_legendre(nz) {
        let rho = (1.0 - z * z).max(0.0).sqrt();
        for k in 0..nphi {
            let phi = dphi * (k as f64 + 0.5);
            nodes.extend_from_slice(&[rho * phi.cos(), rho * phi.sin(), z]);
            weights.push(wz * dphi);
        }
    }
    SphereRule::from_parts(3, level, seed, nodes, weights)
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

fn halton_rule(n: usize, level: u32, seed: u64) -> SphereRule {
    assert!(n <= PRIMES.len(), "dimension {n} exceeds supported Halton bases");
    let count = 1usize << (2 * level);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut nodes = Vec::with_capacity(n * count);
    let mut point = vec![0.0; n];
    for i in 0..count {
        for (k, slot) in point.iter_mut().enumerate() {
            let u = (radical_inverse(i as u64 + 1, PRIMES[k]) + shift[k]).fract();
            *slot = normal.inverse_cdf(u.clamp(1e-15, 1.0 - 1e-15));
        }
        crate::poly::normalize(&mut point);
        nodes.extend_from_slice(&point);
    }
    let w = sphere_area(n) / count as f64;
    SphereRule::from_parts(n, level, seed, nodes, vec![w; count])
}
