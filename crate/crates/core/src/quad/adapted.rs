//! Direction sets for polynomials that vanish somewhere on the sphere.
//!
//! Around every zero direction `w` a smooth bump `χ` splits the sphere into
//! a cap, integrated in geodesic polar coordinates `(ρ, ψ)` with the graded
//! substitution `ρ = r₀ τ^q`, and the rest, integrated by the base rule with
//! weights multiplied by `1 − Σχ`. The grading turns the algebraic blow-up of
//! `g^{−(n+k)/d}` at `w` into a smooth integrand in `τ`.

use crate::poly::{dot, normalize, HomogPoly};

use super::oned::gauss_legendre_on;
use super::rule::SphereRule;

/// Zero direction together with the local vanishing order of `g` there.
#[derive(Debug, Clone)]
pub struct ZeroDirection {
    pub direction: Vec<f64>,
    pub order: f64,
}

fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

/// Cap indicator: 1 inside `r0/2`, 0 beyond `r0`, C^∞ in between.
fn bump(rho: f64, r0: f64) -> f64 {
    1.0 - smooth_step((rho - 0.5 * r0) / (0.5 * r0))
}

fn geodesic(u: &[f64], w: &[f64]) -> f64 {
    dot(u, w).clamp(-1.0, 1.0).acos()
}

/// Adds antipodes and removes near-duplicates; `g` is even so zeros come in
/// antipodal pairs.
pub fn symmetrize(witnesses: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for w in witnesses {
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        for cand in [w.clone(), neg] {
            if out.iter().all(|o| geodesic(o, &cand) > 1e-3) {
                out.push(cand);
            }
        }
    }
    out
}

fn cap_radius(zeros: &[Vec<f64>]) -> f64 {
    let mut min_angle = f64::INFINITY;
    for i in 0..zeros.len() {
        for j in i + 1..zeros.len() {
            min_angle = min_angle.min(geodesic(&zeros[i], &zeros[j]));
        }
    }
    (0.45 * min_angle).min(0.6)
}

/// Orthonormal basis of the tangent plane at `w` (n = 3).
fn tangent_frame(w: &[f64]) -> ([f64; 3], [f64; 3]) {
    let pick = if w[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let p = dot(&pick, w);
    let mut e1 = [pick[0] - p * w[0], pick[1] - p * w[1], pick[2] - p * w[2]];
    normalize(&mut e1);
    let e2 = [
        w[1] * e1[2] - w[2] * e1[1],
        w[2] * e1[0] - w[0] * e1[2],
        w[0] * e1[1] - w[1] * e1[0],
    ];
    (e1, e2)
}

fn polar_point(w: &[f64], frame: Option<&([f64; 3], [f64; 3])>, rho: f64, psi: f64) -> Vec<f64> {
    match frame {
        None => {
            // n = 2: rotate w by the signed angle rho
            let (s, c) = rho.sin_cos();
            vec![c * w[0] - s * w[1], s * w[0] + c * w[1]]
        }
        Some((e1, e2)) => {
            let (s, c) = rho.sin_cos();
            let (sp, cp) = psi.sin_cos();
            let mut u: Vec<f64> = (0..3).map(|i| c * w[i] + s * (cp * e1[i] + sp * e2[i])).collect();
            normalize(&mut u);
            u
        }
    }
}

/// Estimates the vanishing order `p` in `g(u) ≈ c·ρ^p` near `w` as the
/// smallest slope of `log g` against `log ρ` over a ring of directions.
fn vanishing_order(g: &HomogPoly, w: &[f64]) -> f64 {
    let n = g.n();
    let (r1, r2) = (1e-3, 2e-3);
    let frame = (n == 3).then(|| tangent_frame(w));
    let dirs: Vec<f64> = if n == 2 {
        vec![1.0, -1.0]
    } else {
        (0..16).map(|k| std::f64::consts::TAU * k as f64 / 16.0).collect()
    };
    let mut order = f64::INFINITY;
    for psi in dirs {
        let (a, b) = if n == 2 {
            (
                polar_point(w, None, psi * r1, 0.0),
                polar_point(w, None, psi * r2, 0.0),
            )
        } else {
            (
                polar_point(w, frame.as_ref(), r1, psi),
                polar_point(w, frame.as_ref(), r2, psi),
            )
        };
        let (ga, gb) = (g.eval_unchecked(&a).abs(), g.eval_unchecked(&b).abs());
        if ga > 0.0 && gb > 0.0 {
            order = order.min((gb / ga).ln() / 2f64.ln());
        }
    }
    order
}

/// Newton iteration on the tangential gradient, started from a sampled
/// minimizer. Sampling plus descent locates a double zero only to about
/// `√ε`; the gradient vanishes linearly there, so Newton recovers it to
/// rounding level. Falls back to the start if the iteration does not help.
fn polish_zero(g: &HomogPoly, start: &[f64]) -> Vec<f64> {
    let n = g.n();
    let frame = |u: &[f64]| -> Vec<Vec<f64>> {
        if n == 2 {
            vec![vec![-u[1], u[0]]]
        } else {
            let (e1, e2) = tangent_frame(u);
            vec![e1.to_vec(), e2.to_vec()]
        }
    };
    let tangential = |u: &[f64], basis: &[Vec<f64>]| -> Vec<f64> {
        let grad = g.gradient(u);
        basis.iter().map(|e| dot(e, &grad)).collect()
    };
    let moved = |u: &[f64], basis: &[Vec<f64>], eps: &[f64]| -> Vec<f64> {
        let mut v = u.to_vec();
        for (e, t) in basis.iter().zip(eps) {
            for i in 0..n {
                v[i] += t * e[i];
            }
        }
        normalize(&mut v);
        v
    };
    let mut u = start.to_vec();
    let mut best = (g.eval_unchecked(&u).abs(), u.clone());
    for _ in 0..12 {
        let basis = frame(&u);
        let m = basis.len();
        let r = tangential(&u, &basis);
        let h = 1e-5;
        let mut jac = vec![vec![0.0; m]; m];
        for j in 0..m {
            let mut ep = vec![0.0; m];
            ep[j] = h;
            let mut em = vec![0.0; m];
            em[j] = -h;
            let rp = tangential(&moved(&u, &basis, &ep), &basis);
            let rm = tangential(&moved(&u, &basis, &em), &basis);
            for i in 0..m {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let step = if m == 1 {
            if jac[0][0] == 0.0 {
                break;
            }
            vec![-r[0] / jac[0][0]]
        } else {
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det.abs() <= 1e-14 * (jac[0][0].abs() + jac[1][1].abs()).powi(2) {
                break;
            }
            vec![
                -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
            ]
        };
        if step.iter().map(|s| s * s).sum::<f64>().sqrt() > 1e-2 {
            break;
        }
        u = moved(&u, &basis, &step);
        let v = g.eval_unchecked(&u).abs();
        if v <= best.0 {
            best = (v, u.clone());
        }
    }
    best.1
}

/// Zero directions of `g` with their vanishing orders.
pub fn zero_directions(g: &HomogPoly, witnesses: &[Vec<f64>]) -> Vec<ZeroDirection> {
    let polished: Vec<Vec<f64>> = witnesses.iter().map(|w| polish_zero(g, w)).collect();
    symmetrize(&polished)
        .into_iter()
        .map(|w| ZeroDirection {
            order: vanishing_order(g, &w),
            direction: w,
        })
        .collect()
}

/// Stand-in for `g` at a patch node closer to its zero than `PROXY_RADIUS`:
/// there rounding dominates `g(u)`, so the node uses the local power law
/// `g(u) ≈ g(reference) · (ρ/ρ_s)^p` fitted on the same ray instead.
#[derive(Debug, Clone)]
pub struct Proxy {
    pub reference: Vec<f64>,
    pub factor: f64,
}

const PROXY_RADIUS: f64 = 1e-5;

/// Adapted direction set; `proxies[i]` overrides the evaluation of `g` at
/// node `i` when present.
#[derive(Debug, Clone)]
pub struct AdaptedRule {
    pub rule: SphereRule,
    pub proxies: Vec<Option<Proxy>>,
}

struct PatchBuilder<'a> {
    g: &'a HomogPoly,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    proxies: Vec<Option<Proxy>>,
}

impl PatchBuilder<'_> {
    /// Adds the graded nodes of one ray `ρ ↦ point(ρ)`, `ρ ∈ (0, r0]`, with
    /// extra weight `w(ρ)` (the area element and the ψ step).
    fn ray<P, W>(&mut self, r0: f64, q: f64, taus: &[(f64, f64)], point: P, extra: W)
    where
        P: Fn(f64) -> Vec<f64>,
        W: Fn(f64) -> f64,
    {
        let reference = point(PROXY_RADIUS);
        let g_ref = self.g.eval_unchecked(&reference).abs();
        let g_ref2 = self.g.eval_unchecked(&point(2.0 * PROXY_RADIUS)).abs();
        let order = if g_ref > 0.0 && g_ref2 > 0.0 {
            Some(((g_ref2 / g_ref).ln() / 2f64.ln()).round())
        } else {
            None
        };
        for &(tau, wt) in taus {
            let rho = r0 * tau.powf(q);
            let w = wt * r0 * q * tau.powf(q - 1.0) * extra(rho) * bump(rho, r0);
            if w <= 0.0 {
                continue;
            }
            let proxy = if rho < PROXY_RADIUS {
                match order {
                    Some(p) => Some(Proxy {
                        reference: reference.clone(),
                        factor: (rho / PROXY_RADIUS).powf(p),
                    }),
                    None => continue,
                }
            } else {
                None
            };
            self.nodes.extend_from_slice(&point(rho));
            self.weights.push(w);
            self.proxies.push(proxy);
        }
    }
}

/// Gauss–Legendre nodes on `[0, 1]` split where the cap bump starts to fall,
/// so each piece sees a smooth integrand.
fn graded_taus(m: usize, q: f64) -> Vec<(f64, f64)> {
    let split = 0.5f64.powf(1.0 / q);
    let mut taus = gauss_legendre_on(m, 0.0, split);
    taus.extend(gauss_legendre_on(m, split, 1.0));
    taus
}

/// Base rule reweighted by `1 − Σχ`, plus one graded polar patch per zero.
pub fn adapted_rule(g: &HomogPoly, base: &SphereRule, zeros: &[ZeroDirection]) -> AdaptedRule {
    let n = base.n();
    assert!(n == 2 || n == 3, "adapted rules exist for n = 2, 3");
    let dirs: Vec<Vec<f64>> = zeros.iter().map(|z| z.direction.clone()).collect();
    let r0 = cap_radius(&dirs);
    let level = base.level();

    let mut b = PatchBuilder {
        g,
        nodes: Vec::new(),
        weights: Vec::new(),
        proxies: Vec::new(),
    };
    for i in 0..base.len() {
        let u = base.node(i);
        let cover: f64 = dirs.iter().map(|w| bump(geodesic(u, w), r0)).sum();
        let w = base.weight(i) * (1.0 - cover);
        if w > 0.0 {
            b.nodes.extend_from_slice(u);
            b.weights.push(w);
            b.proxies.push(None);
        }
    }

    if n == 2 {
        let q = 6.0;
        let taus = graded_taus(((1usize << level) / 16).clamp(24, 128), q);
        for w in &dirs {
            for side in [-1.0, 1.0] {
                b.ray(r0, q, &taus, |rho| polar_point(w, None, side * rho, 0.0), |_| 1.0);
            }
        }
    } else {
        let q = 4.0;
        let taus = graded_taus((1usize << level.saturating_sub(1)).max(24), q);
        let m_psi = (1usize << level).max(32);
        let dpsi = std::f64::consts::TAU / m_psi as f64;
        for w in &dirs {
            let frame = tangent_frame(w);
            for k in 0..m_psi {
                let psi = dpsi * (k as f64 + 0.5);
                b.ray(
                    r0,
                    q,
                    &taus,
                    |rho| polar_point(w, Some(&frame), rho, psi),
                    |rho| rho.sin() * dpsi,
                );
            }
        }
    }
    AdaptedRule {
        rule: SphereRule::from_parts(n, level, base.seed(), b.nodes, b.weights),
        proxies: b.proxies,
    }
}
