//! Contact-point certificates for Problem 2 solutions.
//!
//! A pair `(t, g)` with `f ≤ t·e^{−g}` is optimal when there are touch points
//! `xᵢ` (`f(xᵢ) = t·e^{−g(xᵢ)}`) and weights `λᵢ > 0` with
//!
//! ```text
//! Σ λᵢ = t ∫ e^{−g},     Σ λᵢ xᵢ^α = t ∫ x^α e^{−g}   for |α| = d.
//! ```
//!
//! Touch points are located direction by direction: on the ray through `u`
//! the majorant gap at the boundary of `{f ≥ e^{−s}}` is
//! `log t + s − g(u)·r_s(u)^d`, minimized over `s` and then locally over `u`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcs::{cloud_directions, s_grid, LogConcaveFn};
use crate::linalg::{caratheodory_prune, nnls};
use crate::poly::{normalize, HomogPoly};
use crate::quad::{Integrator, SphereRule};
use crate::search::golden_max;

pub const TOUCH_TOL: f64 = 1e-8;
pub const DEDUP_DIST: f64 = 1e-4;
pub const CERTIFY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    Certified,
    Refuted { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Largest row defect of the moment system over `t ∫ e^{−g}`.
    pub moment_residual: f64,
    /// `|f(xᵢ) − t·e^{−g(xᵢ)}|` per point.
    pub touch_residuals: Vec<f64>,
    /// Smallest majorant gap `log t − g(x) − log f(x)` found.
    pub min_gap: f64,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// `sup_s (g(u)·r_s(u)^d − s)` and its maximizer.
fn excess(f: &LogConcaveFn, g: &HomogPoly, u: &[f64], grid: &[f64]) -> (f64, f64) {
    let gu = g.eval_unchecked(u);
    let d = g.d() as i32;
    let value = |s: f64| {
        let r = f.radial_s(s, u);
        if r == 0.0 {
            -s
        } else {
            gu * r.powi(d) - s
        }
    };
    let vals: Vec<f64> = grid.iter().map(|&s| value(s)).collect();
    let (k, &best) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if !best.is_finite() {
        return (best, grid[k]);
    }
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let r = golden_max(value, lo, hi, 1e-14 * hi.max(1.0), 200);
    if r.fx > best {
        (r.fx, r.x)
    } else {
        (best, grid[k])
    }
}

/// Orthonormal basis of the complement of the unit vector `u`.
fn tangent_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        for b in std::iter::once(u).chain(out.iter().map(|v| v.as_slice())) {
            let p: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
            e.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            e.iter_mut().for_each(|x| *x /= norm);
            out.push(e);
        }
        if out.len() == n - 1 {
            break;
        }
    }
    out
}

/// Compass search on the sphere maximizing the excess from `u`.
fn refine_direction(f: &LogConcaveFn, g: &HomogPoly, u: &[f64], step: f64, grid: &[f64]) -> (Vec<f64>, f64, f64) {
    let mut u = u.to_vec();
    let (mut best, mut s_best) = excess(f, g, &u, grid);
    let mut h = step;
    while h > 1e-11 {
        let frame = tangent_basis(&u);
        let mut improved = false;
        for e in &frame {
            for sign in [1.0, -1.0] {
                let mut v: Vec<f64> = u.iter().zip(e).map(|(a, b)| a + sign * h * b).collect();
                normalize(&mut v);
                let (val, s) = excess(f, g, &v, grid);
                if val > best {
                    best = val;
                    s_best = s;
                    u = v;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (u, best, s_best)
}

/// Touch-point search directions used by [`build_certificate`].
pub fn default_seeds(n: usize) -> usize {
    match n {
        1 => 2,
        2 => 720,
        3 => 2000,
        _ => 4000,
    }
}

struct Touch {
    x: Vec<f64>,
    gap: f64,
}

fn touch_candidates(f: &LogConcaveFn, t: f64, g: &HomogPoly, seeds: usize) -> Vec<Touch> {
    let n = f.n();
    let log_t = t.ln();
    let grid = s_grid(1e-8, 1e6, 400, true);
    let dirs = cloud_directions(n, seeds);
    let step = if n == 1 { 0.0 } else { (4.0 / seeds as f64).powf(1.0 / (n - 1) as f64) };
    dirs.par_iter()
        .map(|u| {
            let (mut e, mut s) = excess(f, g, u, &grid);
            let mut u = u.clone();
            let gap = log_t - e;
            if gap > TOUCH_TOL && gap < 1e-3 && n > 1 {
                (u, e, s) = refine_direction(f, g, &u, step, &grid);
            }
            let r = f.radial_s(s, &u);
            Touch {
                x: u.iter().map(|c| c * r).collect(),
                gap: log_t - e,
            }
        })
        .collect()
}

/// Points where `f` touches `t·e^{−g}` within [`TOUCH_TOL`], searched from
/// `seeds` directions and deduplicated at distance [`DEDUP_DIST`].
pub fn find_touch_points(f: &LogConcaveFn, t: f64, g: &HomogPoly, seeds: usize) -> Result<Vec<Vec<f64>>> {
    check_pair(f, t, g)?;
    let cands = touch_candidates(f, t, g, seeds);
    Ok(select(&cands))
}

fn select(cands: &[Touch]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in cands {
        if c.gap.abs() > TOUCH_TOL || c.x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let close = out
            .iter()
            .any(|p| p.iter().zip(&c.x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < DEDUP_DIST);
        if !close {
            out.push(c.x.clone());
        }
    }
    out
}

fn check_pair(f: &LogConcaveFn, t: f64, g: &HomogPoly) -> Result<()> {
    f.validate()?;
    if g.n() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: g.n(),
        });
    }
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be ≥ 1, got {t}")));
    }
    Ok(())
}

/// Assembles and solves the weighted moment system over the touch points.
///
/// The verdict is `Certified` when the fitted weights reproduce
/// `t ∫ e^{−g}` and `t ∫ x^α e^{−g}` to [`CERTIFY_TOL`] relative to
/// `t ∫ e^{−g}`, with at most `h_d(n) + 1` points after pruning.
pub fn build_certificate(f: &LogConcaveFn, t: f64, g: &HomogPoly, rule: &SphereRule) -> Result<Certificate> {
    build_certificate_with(f, t, g, rule, default_seeds(f.n()))
}

pub fn build_certificate_with(f: &LogConcaveFn, t: f64, g: &HomogPoly, rule: &SphereRule, seeds: usize) -> Result<Certificate> {
    check_pair(f, t, g)?;
    let cands = touch_candidates(f, t, g, seeds);
    let min_gap = cands.iter().map(|c| c.gap).fold(f64::INFINITY, f64::min);
    let refute = |reason: String, min_gap: f64| Certificate {
        points: Vec::new(),
        weights: Vec::new(),
        moment_residual: 1.0,
        touch_residuals: Vec::new(),
        min_gap,
        verdict: Verdict::Refuted { reason },
    };
    if min_gap < -TOUCH_TOL {
        return Ok(refute(format!("f exceeds t·e^(−g): gap {min_gap:.3e}"), min_gap));
    }
    let integ = match Integrator::new(g, rule) {
        Ok(i) if !i.singular() => i,
        Ok(_) => return Ok(refute("g vanishes on the sphere; not an interior form".into(), min_gap)),
        Err(e) => return Ok(refute(format!("g is not admissible: {e}"), min_gap)),
    };
    let points = select(&cands);
    if points.is_empty() {
        return Ok(refute(format!("no touch points; smallest gap {min_gap:.3e}"), min_gap));
    }
    let w = t * integ.exp_integral()?;
    let md = integ.moments(g.d())?;
    let rows = md.len() + 1;
    let mut b = DVector::zeros(rows);
    b[0] = w;
    for (i, m) in md.iter().enumerate() {
        b[i + 1] = t * m;
    }
    let basis = g.basis();
    let cols: Vec<Vec<f64>> = points.iter().map(|x| basis.monomials(x)).collect();
    let a = DMatrix::from_fn(rows, cols.len(), |i, j| if i == 0 { 1.0 } else { cols[j][i - 1] });
    let fit = nnls(&a, &b);
    let pruned = caratheodory_prune(&a, &fit.x);
    let defect = &a * DVector::from_column_slice(&pruned) - &b;
    let moment_residual = defect.amax() / w;

    let mut kept = Vec::new();
    let mut weights = Vec::new();
    for (x, &lam) in points.iter().zip(&pruned) {
        if lam > 0.0 {
            kept.push(x.clone());
            weights.push(lam);
        }
    }
    let touch_residuals: Vec<f64> = kept
        .iter()
        .map(|x| {
            let inside: Vec<f64> = x.iter().map(|v| v * (1.0 - 1e-12)).collect();
            let fx = f.eval_unchecked(x).max(f.eval_unchecked(&inside));
            (fx - t * (-g.eval_unchecked(x)).exp()).abs()
        })
        .collect();
    let worst_touch = touch_residuals.iter().copied().fold(0.0, f64::max);
    let verdict = if kept.len() > rows {
        Verdict::Refuted {
            reason: format!("{} weights exceed the bound {rows}", kept.len()),
        }
    } else if moment_residual > CERTIFY_TOL {
        Verdict::Refuted {
            reason: format!("moment residual {moment_residual:.3e} exceeds {CERTIFY_TOL:.0e}"),
        }
    } else if worst_touch > 1e-6 * t {
        Verdict::Refuted {
            reason: format!("touch residual {worst_touch:.3e}"),
        }
    } else {
        Verdict::Certified
    };
    Ok(Certificate {
        points: kept,
        weights,
        moment_residual,
        touch_residuals,
        min_gap,
        verdict,
    })
}
