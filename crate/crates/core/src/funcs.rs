//! Catalog of log-concave functions with closed-form super-level sets, and
//! the level-set bodies `H_t(f)` / `Ĥ_t(f)` sampled direction by direction.
//!
//! Super-level sets are parametrized by `s = log(1/λ) ≥ 0`. In direction `u`
//! the body `⋃_λ (log(t/λ))^{−p} K_λ(f)` has radial function
//!
//! ```text
//! radius_t(u) = sup_{s ≥ 0} r_s(u) / (log t + s)^p,     p = 1 (H_t) or 1/d (Ĥ_t)
//! ```
//!
//! where `r_s` is the radial function of `K_{e^{−s}}(f)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{normalize, HomogPoly};
use crate::search::{count_violations, golden_max};

/// Which majorization problem a level-set body belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `f ≤ t·exp(−g^{1/d})`, body `H_t(f)`.
    P1,
    /// `f ≤ t·exp(−g)`, body `Ĥ_t(f)`.
    P2,
}

impl Mode {
    /// Exponent `p` of `log(t/λ)` in the body's definition.
    pub fn power(self, d: u32) -> f64 {
        match self {
            Mode::P1 => 1.0,
            Mode::P2 => 1.0 / d as f64,
        }
    }
}

/// Convex body with the origin in its interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodySpec", into = "BodySpec")]
pub enum Body {
    Ball { radius: f64, n: usize },
    Polytope { vertices: Vec<Vec<f64>>, facets: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum BodySpec {
    Ball { ball: f64, n: usize },
    Polytope { vertices: Vec<Vec<f64>> },
}

impl TryFrom<BodySpec> for Body {
    type Error = Error;

    fn try_from(spec: BodySpec) -> Result<Body> {
        match spec {
            BodySpec::Ball { ball, n } => Body::ball(ball, n),
            BodySpec::Polytope { vertices } => Body::polytope(vertices),
        }
    }
}

impl From<Body> for BodySpec {
    fn from(b: Body) -> BodySpec {
        match b {
            Body::Ball { radius, n } => BodySpec::Ball { ball: radius, n },
            Body::Polytope { vertices, .. } => BodySpec::Polytope { vertices },
        }
    }
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::with_capacity(k), &mut out);
    out
}

impl Body {
    pub fn ball(radius: f64, n: usize) -> Result<Body> {
        if !(radius > 0.0 && radius.is_finite()) || n == 0 {
            return Err(Error::InvalidParameter(format!("ball needs radius > 0 and n ≥ 1, got {radius}, {n}")));
        }
        Ok(Body::Ball { radius, n })
    }

    /// `conv(vertices)`; facets `{x : a·x = 1}` are found by brute force over
    /// `n`-subsets of vertices. Requires the origin in the interior.
    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Body> {
        let n = vertices.first().map(|v| v.len()).unwrap_or(0);
        if n == 0 || vertices.len() <= n {
            return Err(Error::InvalidParameter("polytope needs at least n + 1 vertices in ℝⁿ".into()));
        }
        if vertices.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: vertices.iter().map(|v| v.len()).find(|&l| l != n).unwrap_or(0),
            });
        }
        let mut facets: Vec<Vec<f64>> = Vec::new();
        for subset in combinations(vertices.len(), n) {
            let m = DMatrix::from_fn(n, n, |i, j| vertices[subset[i]][j]);
            let Some(a) = m.lu().solve(&DVector::from_element(n, 1.0)) else {
                continue;
            };
            if !a.iter().all(|x| x.is_finite()) {
                continue;
            }
            let a: Vec<f64> = a.iter().copied().collect();
            let supporting = vertices
                .iter()
                .all(|v| v.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>() <= 1.0 + 1e-9);
            let fresh = facets
                .iter()
                .all(|f| f.iter().zip(&a).map(|(x, y)| (x - y).abs()).sum::<f64>() > 1e-9);
            if supporting && fresh {
                facets.push(a);
            }
        }
        let body = Body::Polytope { vertices, facets };
        // origin interior ⇔ the gauge is positive in every direction
        let mut probe = directions(n, 64);
        probe.extend(axes(n));
        if probe.iter().any(|u| body.gauge(u) <= 1e-12) {
            return Err(Error::InvalidParameter("origin must lie in the interior of the polytope".into()));
        }
        Ok(body)
    }

    pub fn n(&self) -> usize {
        match self {
            Body::Ball { n, .. } => *n,
            Body::Polytope { vertices, .. } => vertices[0].len(),
        }
    }

    /// Minkowski gauge `‖x‖_K`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        match self {
            Body::Ball { radius, .. } => x.iter().map(|v| v * v).sum::<f64>().sqrt() / radius,
            Body::Polytope { facets, .. } => facets
                .iter()
                .map(|a| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// Radial function `r_K(u) = 1/‖u‖_K`.
    pub fn radial(&self, u: &[f64]) -> f64 {
        1.0 / self.gauge(u)
    }
}

/// A function `f : ℝⁿ → [0, 1]` with `f(0) = ‖f‖_∞ = 1` from the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum LogConcaveFn {
    /// `χ_K`.
    #[serde(alias = "indicator_ball", alias = "indicator_polytope")]
    Indicator { body: Body },
    /// `exp(−‖x‖_K^α)`, `α ≥ 1`.
    ExpGaugePow { body: Body, alpha: f64 },
    /// `1` on `K`, `exp(1 − ‖x‖_K)` outside.
    Plateau { body: Body },
    /// `(1 − ‖(x₁,…,x_{n−1},0)‖_∞)·χ_{[0,1]ⁿ}`: `Ĥ₁` is unbounded with
    /// finite volume.
    RidgeBox { n: usize },
    /// Indicator of the shells `k ≤ |x| ≤ k + 2^{−k}`. Integrable but
    /// neither log-concave nor star-shaped; rejected by [`LogConcaveFn::validate`].
    ShellIndicator { n: usize },
    /// `1` on `K`, `‖x‖_K^{−α}` outside, `α > n`. Quasi-concave but not
    /// log-concave, so every `H_t` is all of `ℝⁿ`; rejected by
    /// [`LogConcaveFn::validate`].
    QuasiConcaveTail { body: Body, alpha: f64 },
}

impl LogConcaveFn {
    pub fn n(&self) -> usize {
        match self {
            LogConcaveFn::Indicator { body }
            | LogConcaveFn::ExpGaugePow { body, .. }
            | LogConcaveFn::Plateau { body }
            | LogConcaveFn::QuasiConcaveTail { body, .. } => body.n(),
            LogConcaveFn::RidgeBox { n } | LogConcaveFn::ShellIndicator { n } => *n,
        }
    }

    /// Checks parameters and that `f` is one of the log-concave members.
    pub fn validate(&self) -> Result<()> {
        match self {
            LogConcaveFn::ExpGaugePow { alpha, .. } if !(*alpha >= 1.0) => Err(Error::InvalidParameter(format!(
                "exp_gauge_pow needs alpha ≥ 1, got {alpha}"
            ))),
            LogConcaveFn::RidgeBox { n } if *n < 2 => Err(Error::InvalidParameter("ridge_box needs n ≥ 2".into())),
            LogConcaveFn::ShellIndicator { .. } => Err(Error::NotAdmissible(
                "shell indicator is not log-concave and f(0) = 0; no homogeneous majorant has finite volume".into(),
            )),
            LogConcaveFn::QuasiConcaveTail { alpha, body } => {
                if !(*alpha > body.n() as f64) {
                    return Err(Error::InvalidParameter(format!("quasi_concave_tail needs alpha > n, got {alpha}")));
                }
                Err(Error::NotAdmissible(
                    "quasi-concave tail is not log-concave; every H_t(f) is all of ℝⁿ".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            LogConcaveFn::Indicator { body } => {
                if body.gauge(x) <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LogConcaveFn::ExpGaugePow { body, alpha } => (-body.gauge(x).powf(*alpha)).exp(),
            LogConcaveFn::Plateau { body } => {
                let k = body.gauge(x);
                if k <= 1.0 {
                    1.0
                } else {
                    (1.0 - k).exp()
                }
            }
            LogConcaveFn::RidgeBox { n } => {
                if x.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                    return 0.0;
                }
                1.0 - x[..n - 1].iter().fold(0.0, |m: f64, &v| m.max(v))
            }
            LogConcaveFn::ShellIndicator { .. } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let k = r.floor();
                if k >= 1.0 && k <= 60.0 && r <= k + 0.5f64.powi(k as i32) {
                    1.0
                } else {
                    0.0
                }
            }
            LogConcaveFn::QuasiConcaveTail { body, alpha } => {
                let k = body.gauge(x);
                if k <= 1.0 {
                    1.0
                } else {
                    k.powf(-alpha)
                }
            }
        }
    }

    /// Radial function of `K_λ(f)` with `λ = e^{−s}`.
    pub fn radial_s(&self, s: f64, u: &[f64]) -> f64 {
        match self {
            LogConcaveFn::Indicator { body } => body.radial(u),
            LogConcaveFn::ExpGaugePow { body, alpha } => s.powf(1.0 / alpha) * body.radial(u),
            LogConcaveFn::Plateau { body } => (1.0 + s) * body.radial(u),
            LogConcaveFn::RidgeBox { n } => {
                if u.iter().any(|&c| c < 0.0) {
                    return 0.0;
                }
                let side = -(-s).exp_m1();
                let mut r = f64::INFINITY;
                for (i, &c) in u.iter().enumerate() {
                    if c > 0.0 {
                        let bound = if i + 1 < *n { side } else { 1.0 };
                        r = r.min(bound / c);
                    }
                }
                r
            }
            LogConcaveFn::ShellIndicator { .. } => 0.0,
            LogConcaveFn::QuasiConcaveTail { body, alpha } => (s / alpha).exp() * body.radial(u),
        }
    }

    /// Radial function of `K_λ(f) = {x : f(x) ≥ λ}`, `λ ∈ (0, 1)`.
    pub fn superlevel_radial(&self, lambda: f64, u: &[f64]) -> Result<f64> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParameter(format!("λ must lie in (0, 1), got {lambda}")));
        }
        if u.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: u.len(),
            });
        }
        Ok(self.radial_s(-lambda.ln(), u))
    }
}

/// Coordinate directions `±e_i`.
pub fn axes(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            out.push(e);
        }
    }
    out
}

/// About `count` well-spread unit vectors: equally spaced angles (n = 2),
/// a Fibonacci lattice (n = 3), or the first nodes of the Halton rule.
pub fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|j| {
                let th = std::f64::consts::TAU * j as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|j| {
                    let z = 1.0 - (2.0 * j as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * j as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut level = 1;
            while (1usize << (2 * level)) < count {
                level += 1;
            }
            let rule = crate::quad::sphere_rule(n, level, crate::quad::DEFAULT_SEED);
            rule.nodes().take(count).map(|u| u.to_vec()).collect()
        }
    }
}

/// Directions used for level-set clouds: [`directions`] plus `±e_i` for
/// `n ≥ 3` (for `n = 2` the axes are already present when `count` is a
/// multiple of 4).
pub fn cloud_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs = directions(n, count);
    if n >= 3 {
        dirs.extend(axes(n));
    }
    dirs
}

/// `{0} ∪` a geometric grid of `count` points on `[lo, hi]`.
pub fn s_grid(lo: f64, hi: f64, count: usize, with_zero: bool) -> Vec<f64> {
    let mut grid = Vec::with_capacity(count + 1);
    if with_zero {
        grid.push(0.0);
    }
    let (a, b) = (lo.ln(), hi.ln());
    for i in 0..count {
        let frac = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
        grid.push((a + frac * (b - a)).exp());
    }
    grid
}

pub const S_LO: f64 = 1e-6;
pub const S_HI: f64 = 1e12;
const RADIUS_CAP: f64 = 1e9;

/// Per-direction supremum of `r_s(u)/(log t + s)^p`.
#[derive(Debug, Clone, Copy)]
pub struct RadialSup {
    pub radius: f64,
    pub argmax_s: f64,
    pub violations: usize,
}

fn body_value(f: &LogConcaveFn, u: &[f64], log_t: f64, p: f64, s: f64) -> f64 {
    let r = f.radial_s(s, u);
    if r == 0.0 {
        return 0.0;
    }
    let denom = (log_t + s).powf(p);
    if denom == 0.0 {
        return f64::INFINITY;
    }
    r / denom
}

/// Grid maximum, golden-section refinement between the neighbours of the
/// grid argmax, and tail probes when the argmax sits at an end of the grid:
/// growth by 2× or more over six further decades counts as unbounded.
pub fn radial_sup(f: &LogConcaveFn, u: &[f64], log_t: f64, p: f64, grid: &[f64]) -> RadialSup {
    let vals: Vec<f64> = grid.iter().map(|&s| body_value(f, u, log_t, p, s)).collect();
    let (k, &best) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if best == 0.0 {
        return RadialSup {
            radius: 0.0,
            argmax_s: grid[k],
            violations: 0,
        };
    }
    let trace: Vec<(f64, f64)> = grid.iter().copied().zip(vals.iter().copied()).collect();
    let violations = count_violations(&trace, true);
    if !best.is_finite() {
        return RadialSup {
            radius: f64::INFINITY,
            argmax_s: grid[k],
            violations,
        };
    }

    let last = grid.len() - 1;
    if k == last {
        let far = body_value(f, u, log_t, p, grid[last] * 1e6);
        if far >= 2.0 * best || !far.is_finite() {
            return RadialSup {
                radius: f64::INFINITY,
                argmax_s: grid[last],
                violations,
            };
        }
    }
    if k == 0 && grid[0] > 0.0 {
        let near = body_value(f, u, log_t, p, grid[0] * 1e-6);
        if near >= 2.0 * best || !near.is_finite() {
            return RadialSup {
                radius: f64::INFINITY,
                argmax_s: grid[0],
                violations,
            };
        }
    }

    let lo = if k == 0 { grid[0] } else { grid[k - 1] };
    let hi = if k == last { grid[last] } else { grid[k + 1] };
    let refined = golden_max(|s| body_value(f, u, log_t, p, s), lo, hi, 1e-12 * hi.max(1.0), 200);
    let (radius, argmax_s) = if refined.fx > best {
        (refined.fx, refined.x)
    } else {
        (best, grid[k])
    };
    RadialSup {
        radius: if radius > RADIUS_CAP { f64::INFINITY } else { radius },
        argmax_s,
        violations,
    }
}

/// Direction-indexed sample of `H_t(f)` (P1) or `Ĥ_t(f)` (P2).
#[derive(Debug, Clone, Serialize)]
pub struct LevelSetCloud {
    pub mode: Mode,
    pub t: f64,
    pub d: u32,
    pub directions: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    /// The `s = log(1/λ)` grid.
    pub lambda_grid: Vec<f64>,
    /// Refined maximizing `s` per direction.
    pub argmax_s: Vec<f64>,
    /// Total grid unimodality violations over all directions.
    pub unimodality_violations: usize,
}

impl LevelSetCloud {
    pub fn is_bounded(&self) -> bool {
        self.radii.iter().all(|r| r.is_finite())
    }

    /// `radius·u` for every direction with a finite positive radius.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.directions
            .iter()
            .zip(&self.radii)
            .filter(|(_, r)| r.is_finite() && **r > 0.0)
            .map(|(u, r)| u.iter().map(|c| c * r).collect())
            .collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }
}

/// Samples the level-set body for `t ≥ 1` on `n_dirs` directions (plus axes
/// for `n ≥ 3`) and an `s` grid of `n_lambda` geometric points on
/// `[1e−6, 1e12]`, with `s = 0` included when `t > 1`.
pub fn build_cloud(f: &LogConcaveFn, t: f64, mode: Mode, d: u32, n_dirs: usize, n_lambda: usize) -> Result<LevelSetCloud> {
    build_cloud_on(f, t, mode, d, cloud_directions(f.n(), n_dirs), n_lambda)
}

/// [`build_cloud`] over caller-chosen directions.
pub fn build_cloud_on(
    f: &LogConcaveFn,
    t: f64,
    mode: Mode,
    d: u32,
    directions: Vec<Vec<f64>>,
    n_lambda: usize,
) -> Result<LevelSetCloud> {
    if !(t >= 1.0) {
        return Err(Error::InvalidParameter(format!("t must be ≥ 1, got {t}")));
    }
    if n_lambda < 3 {
        return Err(Error::InvalidParameter("n_lambda must be at least 3".into()));
    }
    if let Some(u) = directions.iter().find(|u| u.len() != f.n()) {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: u.len(),
        });
    }
    let log_t = t.ln();
    let p = mode.power(d);
    let grid = s_grid(S_LO, S_HI, n_lambda, log_t > 0.0);
    let sups: Vec<RadialSup> = directions
        .par_iter()
        .map(|u| radial_sup(f, u, log_t, p, &grid))
        .collect();
    Ok(LevelSetCloud {
        mode,
        t,
        d,
        radii: sups.iter().map(|s| s.radius).collect(),
        argmax_s: sups.iter().map(|s| s.argmax_s).collect(),
        unimodality_violations: sups.iter().map(|s| s.violations).sum(),
        directions,
        lambda_grid: grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Boundedness {
    Bounded { max_radius: f64 },
    UnboundedSuspected { direction: Vec<f64>, trace: Vec<(f64, f64)> },
}

/// Heuristic test of whether `Ĥ₁(f)` is bounded.
///
/// Compares the `t = 1` radii on `s ∈ [1e−6, 1e12]` (100 points) with those
/// on `s ∈ [1e−12, 1e24]` (200 points). A direction whose radius grows by 2×
/// or exceeds `1e6` is reported with its `(s, r_s/s^{1/d})` trace.
pub fn check_hat_boundedness(f: &LogConcaveFn, d: u32) -> Boundedness {
    let dirs = cloud_directions(f.n(), 256);
    let p = 1.0 / d as f64;
    let coarse = s_grid(1e-6, 1e12, 100, false);
    let fine = s_grid(1e-12, 1e24, 200, false);
    let raw = |u: &[f64], grid: &[f64]| {
        grid.iter()
            .map(|&s| body_value(f, u, 0.0, p, s))
            .fold(0.0, f64::max)
    };
    let mut worst: Option<(f64, usize)> = None;
    let mut max_radius: f64 = 0.0;
    for (i, u) in dirs.iter().enumerate() {
        let a = raw(u, &coarse);
        let b = raw(u, &fine);
        max_radius = max_radius.max(b);
        let growth = if a > 0.0 { b / a } else if b > 0.0 { f64::INFINITY } else { 1.0 };
        if growth >= 2.0 || b > 1e6 {
            let score = if growth.is_finite() { growth.max(b) } else { f64::INFINITY };
            if worst.is_none_or(|(w, _)| score > w) {
                worst = Some((score, i));
            }
        }
    }
    match worst {
        None => Boundedness::Bounded { max_radius },
        Some((_, i)) => {
            let u = dirs[i].clone();
            let trace = fine.iter().map(|&s| (s, body_value(f, &u, 0.0, p, s))).collect();
            Boundedness::UnboundedSuspected { direction: u, trace }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MajorizationReport {
    pub holds: bool,
    /// `max (f(x) − majorant(x))` over the samples.
    pub worst_violation: f64,
    pub witness: Vec<f64>,
}

/// The majorant `t·exp(−g^{1/d})` (P1) or `t·exp(−g)` (P2).
pub fn majorant(t: f64, g: &HomogPoly, mode: Mode, x: &[f64]) -> f64 {
    let gv = g.eval_unchecked(x).max(0.0);
    match mode {
        Mode::P1 => t * (-gv.powf(1.0 / g.d() as f64)).exp(),
        Mode::P2 => t * (-gv).exp(),
    }
}

const LEVELS: [f64; 12] = [0.0, 0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 40.0];

/// Samples `f ≤ majorant` with slack `1e−9`.
///
/// Random samples take a seeded direction `u`, a level `s` log-uniform in
/// `[1e−6, 40]` and a scale `ξ ∈ [0, 2]`, giving `x = ξ·r_s(u)·u`. The
/// boundaries of the super-level sets (`ξ = 1`, and `ξ` just inside) on a
/// fixed direction set and level list are always included.
pub fn check_majorization(
    f: &LogConcaveFn,
    t: f64,
    g: &HomogPoly,
    mode: Mode,
    samples: usize,
    seed: u64,
) -> Result<MajorizationReport> {
    let n = f.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.n() });
    }
    let mut points: Vec<Vec<f64>> = Vec::new();
    let push = |u: &[f64], s: f64, xi: f64, points: &mut Vec<Vec<f64>>| {
        let r = f.radial_s(s, u);
        if r.is_finite() {
            points.push(u.iter().map(|c| c * r * xi).collect());
        }
    };
    for u in cloud_directions(n, 64) {
        for &s in &LEVELS {
            push(&u, s, 1.0, &mut points);
            push(&u, s, 1.0 - 1e-9, &mut points);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut u: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        normalize(&mut u);
        let s = (S_LO.ln() + rng.gen::<f64>() * (40f64.ln() - S_LO.ln())).exp();
        let xi = 2.0 * rng.gen::<f64>();
        push(&u, s, xi, &mut points);
    }
    let mut worst = f64::NEG_INFINITY;
    let mut witness = vec![0.0; n];
    for x in points {
        let v = f.eval_unchecked(&x) - majorant(t, g, mode, &x);
        if v > worst {
            worst = v;
            witness = x;
        }
    }
    Ok(MajorizationReport {
        holds: worst <= 1e-9,
        worst_violation: worst,
        witness,
    })
}

/// Smallest `log t` with `f ≤ majorant(t, g)`:
/// `sup_{u,s} (g(u)·r_s(u)^d − s)` (P2) or `sup_{u,s} (g(u)^{1/d}·r_s(u) − s)` (P1),
/// over the boundaries of the super-level sets.
pub fn minimal_log_scale(f: &LogConcaveFn, g: &HomogPoly, mode: Mode, n_dirs: usize) -> f64 {
    let d = g.d() as f64;
    let grid = s_grid(1e-8, 1e6, 400, true);
    let dirs = cloud_directions(f.n(), n_dirs);
    let per_dir: Vec<f64> = dirs
        .par_iter()
        .map(|u| {
            let gu = g.eval_unchecked(u).max(0.0);
            let value = |s: f64| {
                let r = f.radial_s(s, u);
                if r == 0.0 {
                    return -s;
                }
                match mode {
                    Mode::P2 => gu * r.powf(d) - s,
                    Mode::P1 => gu.powf(1.0 / d) * r - s,
                }
            };
            let vals: Vec<f64> = grid.iter().map(|&s| value(s)).collect();
            let (k, &best) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
            if !best.is_finite() {
                return best;
            }
            let lo = if k == 0 { grid[0] } else { grid[k - 1] };
            let hi = grid[(k + 1).min(grid.len() - 1)];
            golden_max(value, lo, hi, 1e-14 * hi.max(1.0), 200).fx.max(best)
        })
        .collect();
    per_dir.into_iter().fold(f64::NEG_INFINITY, f64::max).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::euclid_power_poly;
    use std::f64::consts::E;

    fn disk() -> Body {
        Body::ball(1.0, 2).unwrap()
    }

    #[test]
    fn eval_examples() {
        let plateau = LogConcaveFn::Plateau { body: disk() };
        assert!((plateau.eval(&[2.0, 0.0]).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let ind = LogConcaveFn::Indicator { body: disk() };
        assert_eq!(ind.eval(&[2.0, 0.0]).unwrap(), 0.0);
        for f in [
            plateau,
            ind,
            LogConcaveFn::ExpGaugePow { body: disk(), alpha: 2.0 },
            LogConcaveFn::RidgeBox { n: 2 },
        ] {
            assert_eq!(f.eval(&[0.0, 0.0]).unwrap(), 1.0);
        }
    }

    #[test]
    fn superlevel_examples() {
        let u = [0.6, 0.8];
        let lam = (-1.0f64).exp();
        let f = LogConcaveFn::ExpGaugePow { body: disk(), alpha: 2.0 };
        assert!((f.superlevel_radial(lam, &u).unwrap() - 1.0).abs() < 1e-15);
        let f = LogConcaveFn::Indicator { body: disk() };
        assert_eq!(f.superlevel_radial(0.3, &u).unwrap(), 1.0);
        let f = LogConcaveFn::Plateau { body: disk() };
        assert!((f.superlevel_radial(lam, &u).unwrap() - 2.0).abs() < 1e-15);
        assert!(f.superlevel_radial(1.0, &u).is_err());
    }

    #[test]
    fn polytope_gauge_matches_square() {
        let sq = Body::polytope(vec![
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
        ])
        .unwrap();
        if let Body::Polytope { facets, .. } = &sq {
            assert_eq!(facets.len(), 4);
        }
        assert!((sq.gauge(&[0.5, -0.25]) - 0.5).abs() < 1e-15);
        assert!((sq.radial(&[0.6, 0.8]) - 1.25).abs() < 1e-14);
        let off = Body::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(off.is_err());
    }

    #[test]
    fn body_json_round_trip() {
        let text = r#"{"variant":"exp_gauge_pow","body":{"ball":1.0,"n":2},"alpha":2.0}"#;
        let f: LogConcaveFn = serde_json::from_str(text).unwrap();
        assert_eq!(f, LogConcaveFn::ExpGaugePow { body: disk(), alpha: 2.0 });
        let back = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<LogConcaveFn>(&back).unwrap(), f);
        let poly = r#"{"variant":"indicator","body":{"vertices":[[1,0],[0,1],[-1,0],[0,-1]]}}"#;
        let f: LogConcaveFn = serde_json::from_str(poly).unwrap();
        assert!((f.radial_s(0.0, &[1.0, 0.0]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cloud_closed_forms() {
        let ind = LogConcaveFn::Indicator { body: disk() };
        let c = build_cloud(&ind, E, Mode::P1, 2, 64, 200).unwrap();
        assert!(c.radii.iter().all(|r| (r - 1.0).abs() < 1e-9), "{:?}", &c.radii[..4]);

        let gauss = LogConcaveFn::ExpGaugePow { body: disk(), alpha: 2.0 };
        let c = build_cloud(&gauss, E, Mode::P1, 2, 64, 200).unwrap();
        assert!(c.radii.iter().all(|r| (r - 0.5).abs() < 1e-9));
        assert_eq!(c.unimodality_violations, 0);

        let quartic = LogConcaveFn::ExpGaugePow { body: disk(), alpha: 4.0 };
        let c = build_cloud(&quartic, 0.5f64.exp(), Mode::P2, 2, 64, 200).unwrap();
        let want = 2f64.powf(-0.25);
        assert!(c.radii.iter().all(|r| (r - want).abs() < 1e-9));
    }

    #[test]
    fn unbounded_t1_clouds() {
        let ind = LogConcaveFn::Indicator { body: disk() };
        let c = build_cloud(&ind, 1.0, Mode::P2, 2, 16, 100).unwrap();
        assert!(!c.is_bounded());
        let c = build_cloud(&ind, 1.0, Mode::P1, 2, 16, 100).unwrap();
        assert!(!c.is_bounded());
        let gauss = LogConcaveFn::ExpGaugePow { body: disk(), alpha: 2.0 };
        let c = build_cloud(&gauss, 1.0, Mode::P2, 2, 16, 100).unwrap();
        assert!(c.is_bounded());
        assert!(c.radii.iter().all(|r| (r - 1.0).abs() < 1e-9));
    }

    #[test]
    fn hat_boundedness_examples() {
        let ind = LogConcaveFn::Indicator { body: disk() };
        assert!(matches!(check_hat_boundedness(&ind, 2), Boundedness::UnboundedSuspected { .. }));
        match check_hat_boundedness(&LogConcaveFn::RidgeBox { n: 3 }, 4) {
            Boundedness::UnboundedSuspected { direction, .. } => {
                assert_eq!(direction, vec![0.0, 0.0, 1.0]);
            }
            other => panic!("{other:?}"),
        }
        let gauss = LogConcaveFn::ExpGaugePow { body: disk(), alpha: 2.0 };
        assert!(matches!(check_hat_boundedness(&gauss, 2), Boundedness::Bounded { .. }));
        // exp(−‖x‖) with d = 2: s/s^{1/2} grows without bound as s → ∞
        let lap = LogConcaveFn::ExpGaugePow { body: disk(), alpha: 1.0 };
        assert!(matches!(check_hat_boundedness(&lap, 2), Boundedness::UnboundedSuspected { .. }));
    }

    #[test]
    fn majorization_examples() {
        let ind = LogConcaveFn::Indicator { body: disk() };
        let g = euclid_power_poly(2, 2).unwrap().scale(4.0);
        assert!(check_majorization(&ind, E * E, &g, Mode::P1, 2000, 1).unwrap().holds);

        let quartic = LogConcaveFn::ExpGaugePow { body: disk(), alpha: 4.0 };
        let g = euclid_power_poly(2, 2).unwrap().scale(2f64.sqrt());
        let rep = check_majorization(&quartic, 0.5f64.exp(), &g, Mode::P2, 2000, 1).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(rep.worst_violation > -1e-9);

        let g = euclid_power_poly(2, 2).unwrap().scale(0.25);
        let rep = check_majorization(&ind, 1.0, &g, Mode::P1, 200, 1).unwrap();
        assert!(!rep.holds);
        assert!((rep.worst_violation - (1.0 - (-0.5f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn minimal_scale_examples() {
        let quartic = LogConcaveFn::ExpGaugePow { body: disk(), alpha: 4.0 };
        let g = euclid_power_poly(2, 2).unwrap().scale(2f64.sqrt());
        let lt = minimal_log_scale(&quartic, &g, Mode::P2, 64);
        assert!((lt - 0.5).abs() < 1e-10, "{lt}");
        let ind = LogConcaveFn::Indicator { body: disk() };
        let g = euclid_power_poly(2, 2).unwrap().scale(4.0);
        assert!((minimal_log_scale(&ind, &g, Mode::P1, 64) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejection_fixtures() {
        let shell = LogConcaveFn::ShellIndicator { n: 2 };
        assert!(matches!(shell.validate(), Err(Error::NotAdmissible(_))));
        assert_eq!(shell.eval(&[1.2, 0.0]).unwrap(), 1.0);
        assert_eq!(shell.eval(&[0.0, 0.0]).unwrap(), 0.0);
        let tail = LogConcaveFn::QuasiConcaveTail { body: disk(), alpha: 3.0 };
        assert!(matches!(tail.validate(), Err(Error::NotAdmissible(_))));
        let c = build_cloud(&tail, E, Mode::P1, 2, 16, 100).unwrap();
        assert!(!c.is_bounded());
        assert!(LogConcaveFn::ExpGaugePow { body: disk(), alpha: 0.5 }.validate().is_err());
    }
}
