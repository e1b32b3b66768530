//! Minimal-volume sublevel enclosures of finite point clouds.
//!
//! Minimizes `w(g) = ∫ e^{−g} = Γ(n/d+1)·|G₁(g)|` over degree-`d` forms `g`
//! with `g(y) ≤ 1` on every point of the cloud, by log-barrier path
//! following. The barrier problem
//!
//! ```text
//! F_μ(c) = w(c) − μ Σ_j log(1 − a_j·c),   a_j = (y_j^α)_α
//! ```
//!
//! is solved by damped Newton steps. `∇w = −(∫x^α e^{−g})_α` and
//! `∇²w = (∫x^{α+β} e^{−g})_{α,β}` both come from sphere quadrature.
//! On the central path `μ/s_j` are dual weights with
//! `∫x^α e^{−g} = Σ_j (μ/s_j) y_j^α`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::linalg::{caratheodory_prune, nnls};
use crate::poly::{Basis, HomogPoly};
use crate::quad::{Integrator, SphereRule};

const MU_SHRINK: f64 = 0.2;
const MAX_RESTARTS: usize = 3;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct EnclosureProblem {
    pub points: Vec<Vec<f64>>,
    pub d: u32,
    pub tol: f64,
    pub rule: SphereRule,
}

#[derive(Debug, Clone)]
pub struct EnclosureOptions {
    /// Strictly feasible starting form; `c·Σxᵢ^d` when absent.
    pub init: Option<HomogPoly>,
    /// Newton steps allowed per barrier parameter.
    pub max_newton: usize,
    pub active_tol: f64,
}

impl Default for EnclosureOptions {
    fn default() -> Self {
        EnclosureOptions {
            init: None,
            max_newton: 60,
            active_tol: 1e-6,
        }
    }
}

/// One barrier stage.
#[derive(Debug, Clone, Serialize)]
pub struct BarrierStep {
    pub mu: f64,
    pub newton_steps: usize,
    /// `∫ e^{−g}` at the end of the stage.
    pub objective: f64,
    /// Squared Newton decrement at the end of the stage.
    pub decrement: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnclosureSolution {
    pub g_star: HomogPoly,
    /// `|G₁(g_star)|`.
    pub volume: f64,
    pub contacts: Vec<Vec<f64>>,
    /// Positive weights of `contacts`, `∫x^α e^{−g} ≈ Σ λᵢ yᵢ^α`.
    pub weights: Vec<f64>,
    /// Barrier multipliers `μ/s_j`, one per input point.
    pub dual_weights: Vec<f64>,
    /// `‖∇w + Σ_j λ_j a_j‖ / ‖∇w‖` with the barrier multipliers.
    pub kkt_residual: f64,
    /// Relative residual of the contact-weight moment fit.
    pub contact_residual: f64,
    /// `max_j g(y_j) − 1`.
    pub max_violation: f64,
    pub iterations: usize,
    pub trace: Vec<BarrierStep>,
}

/// Solves the enclosure problem with default options.
pub fn solve_enclosure(p: &EnclosureProblem) -> Result<EnclosureSolution> {
    solve_enclosure_with(p, &EnclosureOptions::default())
}

pub fn solve_enclosure_with(p: &EnclosureProblem, opts: &EnclosureOptions) -> Result<EnclosureSolution> {
    let n = p.rule.n();
    validate(p, n)?;
    let basis = Basis::shared(n, p.d);
    let len = basis.len();
    let rows: Vec<Vec<f64>> = p.points.iter().map(|y| basis.monomials(y)).collect();
    let solver = Barrier::new(p, n, &rows);

    let mut c = match &opts.init {
        Some(g0) => {
            if g0.n() != n || g0.d() != p.d {
                return Err(Error::ShapeMismatch {
                    n0: n,
                    d0: p.d,
                    n1: g0.n(),
                    d1: g0.d(),
                });
            }
            let c = g0.coeffs().to_vec();
            if solver.slacks(&c).is_none() || solver.w(&c).is_none() {
                return Err(Error::InvalidParameter(
                    "initial form must be strictly feasible and positive on the sphere".into(),
                ));
            }
            c
        }
        None => default_start(p, &basis),
    };

    let w0 = solver.w(&c).expect("default start is positive definite");
    let m = p.points.len() as f64;
    let mut mu = w0 / m;
    let mut shrink = MU_SHRINK;
    let mut restarts = 0;
    let mut trace = Vec::new();
    let mut failures = Vec::new();
    let mut iterations = 0;
    let (mut last_c, mut last_mu) = (c.clone(), mu);
    loop {
        match solver.center(&c, mu, opts.max_newton) {
            Ok(stage) => {
                iterations += stage.steps;
                c = stage.c;
                trace.push(BarrierStep {
                    mu,
                    newton_steps: stage.steps,
                    objective: stage.w,
                    decrement: stage.decrement,
                });
                if mu * m <= p.tol * stage.w {
                    break;
                }
                last_c = c.clone();
                last_mu = mu;
                mu *= shrink;
            }
            Err(reason) => {
                failures.push(format!("mu = {mu:.3e}: {reason}"));
                restarts += 1;
                if restarts > MAX_RESTARTS {
                    return Err(Error::NewtonFailure {
                        reason: "barrier stage did not converge".into(),
                        trace: failures,
                    });
                }
                shrink = shrink.sqrt();
                c = last_c.clone();
                mu = last_mu * shrink;
            }
        }
        if c.iter().any(|v| !v.is_finite()) || c.iter().fold(0.0f64, |a, v| a.max(v.abs())) > 1e12 {
            return Err(Error::DegeneratePoints(
                "coefficients diverge: the cloud does not bound any sublevel set of finite volume".into(),
            ));
        }
    }

    let g_star = HomogPoly::new(n, p.d, c.clone())?;
    let s = solver.slacks_raw(&c);
    let dual_weights: Vec<f64> = s.iter().map(|&sj| mu / sj).collect();
    let integ = Integrator::unchecked(&g_star, &p.rule);
    let w = integ.exp_integral()?;
    let md = integ.moments(p.d)?;
    let mut resid = md.iter().map(|v| -v).collect::<Vec<_>>();
    for (row, lam) in rows.iter().zip(&dual_weights) {
        for (r, a) in resid.iter_mut().zip(row) {
            *r += lam * a;
        }
    }
    let kkt_residual = norm(&resid) / norm(&md);
    let max_violation = rows.iter().map(|a| dot(a, &c) - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let (contacts, weights, contact_residual) = fit_contacts(&g_star, &p.points, opts.active_tol, &md)?;
    debug_assert_eq!(md.len(), len);

    Ok(EnclosureSolution {
        volume: w / gamma(n as f64 / p.d as f64 + 1.0),
        g_star,
        contacts,
        weights,
        dual_weights,
        kkt_residual,
        contact_residual,
        max_violation,
        iterations,
        trace,
    })
}

fn validate(p: &EnclosureProblem, n: usize) -> Result<()> {
    if p.d == 0 || p.d % 2 == 1 {
        return Err(Error::OddDegree(p.d));
    }
    if !(p.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", p.tol)));
    }
    if p.points.is_empty() {
        return Err(Error::DegeneratePoints("empty point cloud".into()));
    }
    for y in &p.points {
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite point coordinate".into()));
        }
    }
    let y = DMatrix::from_fn(n, p.points.len(), |i, j| p.points[j][i]);
    let sv = y.singular_values();
    let top = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-10 * top).count();
    if top == 0.0 || rank < n {
        return Err(Error::DegeneratePoints(format!(
            "points span a subspace of dimension {rank} < {n}"
        )));
    }
    Ok(())
}

fn default_start(p: &EnclosureProblem, basis: &Basis) -> Vec<f64> {
    let d = p.d as i32;
    let worst = p
        .points
        .iter()
        .map(|y| y.iter().map(|v| v.powi(d)).sum::<f64>())
        .fold(0.0f64, f64::max);
    let scale = 0.5 / worst;
    basis
        .exponents()
        .iter()
        .map(|a| {
            let e = a.exponents();
            if e.iter().filter(|&&k| k > 0).count() == 1 {
                scale
            } else {
                0.0
            }
        })
        .collect()
}

struct Stage {
    c: Vec<f64>,
    steps: usize,
    w: f64,
    decrement: f64,
}

struct Barrier<'a> {
    p: &'a EnclosureProblem,
    n: usize,
    d: u32,
    rows: &'a [Vec<f64>],
    /// Position of `α+β` in the degree-`2d` basis, row-major over `(α, β)`.
    hess_index: Vec<usize>,
    len: usize,
}

impl<'a> Barrier<'a> {
    fn new(p: &'a EnclosureProblem, n: usize, rows: &'a [Vec<f64>]) -> Self {
        let basis = Basis::shared(n, p.d);
        let double = Basis::shared(n, 2 * p.d);
        let len = basis.len();
        let mut hess_index = Vec::with_capacity(len * len);
        for a in basis.exponents() {
            for b in basis.exponents() {
                hess_index.push(double.position(&a.add(b)).expect("sum lies in the doubled basis"));
            }
        }
        Barrier {
            p,
            n,
            d: p.d,
            rows,
            hess_index,
            len,
        }
    }

    fn poly(&self, c: &[f64]) -> HomogPoly {
        HomogPoly::new(self.n, self.d, c.to_vec()).expect("coefficient length matches basis")
    }

    fn slacks_raw(&self, c: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|a| 1.0 - dot(a, c)).collect()
    }

    fn slacks(&self, c: &[f64]) -> Option<Vec<f64>> {
        let s = self.slacks_raw(c);
        s.iter().all(|&v| v > 0.0).then_some(s)
    }

    /// `∫ e^{−g}`, or `None` when `g` is not positive on every node.
    fn w(&self, c: &[f64]) -> Option<f64> {
        let g = self.poly(c);
        if self.p.rule.nodes().any(|u| !(g.eval_unchecked(u) > 0.0)) {
            return None;
        }
        let w = Integrator::unchecked(&g, &self.p.rule).exp_integral().ok()?;
        w.is_finite().then_some(w)
    }

    fn merit(&self, c: &[f64], mu: f64) -> Option<(f64, f64)> {
        let s = self.slacks(c)?;
        let w = self.w(c)?;
        Some((w - mu * s.iter().map(|v| v.ln()).sum::<f64>(), w))
    }

    fn newton_system(&self, c: &[f64], mu: f64, s: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let g = self.poly(c);
        let integ = Integrator::unchecked(&g, &self.p.rule);
        let md = integ.moments(self.d)?;
        let m2d = integ.moments(2 * self.d)?;
        let len = self.len;
        let mut grad = DVector::from_iterator(len, md.iter().map(|v| -v));
        let mut hess = DMatrix::from_fn(len, len, |i, j| m2d[self.hess_index[i * len + j]]);
        for (a, &sj) in self.rows.iter().zip(s) {
            let gs = mu / sj;
            let hs = mu / (sj * sj);
            for i in 0..len {
                grad[i] += gs * a[i];
                let ai = hs * a[i];
                for j in 0..len {
                    hess[(i, j)] += ai * a[j];
                }
            }
        }
        Ok((grad, hess))
    }

    /// Damped Newton on `F_μ` from a strictly feasible `c`.
    fn center(&self, c0: &[f64], mu: f64, max_newton: usize) -> std::result::Result<Stage, String> {
        let mut c = c0.to_vec();
        let (mut f, mut w) = self.merit(&c, mu).ok_or("start is infeasible")?;
        let mut steps = 0;
        let mut previous = f64::INFINITY;
        loop {
            let s = self.slacks(&c).ok_or("iterate left the feasible set")?;
            let (grad, hess) = self.newton_system(&c, mu, &s).map_err(|e| e.to_string())?;
            let dir = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => hess
                    .lu()
                    .solve(&(-&grad))
                    .ok_or("singular Newton system")?,
            };
            let decrement = -grad.dot(&dir);
            if decrement <= 1e-10 * mu || decrement <= 1e-24 * w {
                return Ok(Stage { c, steps, w, decrement });
            }
            // slack rounding bounds the attainable decrement once the
            // quadratic phase stalls
            if decrement <= 1e-6 * mu && decrement > 0.25 * previous {
                return Ok(Stage { c, steps, w, decrement });
            }
            previous = decrement;
            if steps >= max_newton {
                return Err(format!("no convergence after {steps} Newton steps, decrement {decrement:.3e}"));
            }
            steps += 1;
            let mut t = 1.0;
            let accepted = loop {
                let trial: Vec<f64> = c.iter().zip(dir.iter()).map(|(ci, di)| ci + t * di).collect();
                if let Some((ft, wt)) = self.merit(&trial, mu) {
                    // full steps inside the quadratic region, where the merit
                    // decrease can fall below its rounding error
                    if ft <= f - ARMIJO * t * decrement || (t == 1.0 && decrement <= 0.1 * mu) {
                        break Some((trial, ft, wt));
                    }
                }
                t *= 0.5;
                if t < 1e-14 {
                    break None;
                }
            };
            match accepted {
                Some((trial, ft, wt)) => {
                    c = trial;
                    f = ft;
                    w = wt;
                }
                // rounding floor on the merit function
                None if decrement <= 1e-6 * mu => return Ok(Stage { c, steps, w, decrement }),
                None => return Err(format!("line search failed, decrement {decrement:.3e}")),
            }
        }
    }
}

/// Active points of `points` under `g` and nonnegative weights reproducing
/// the degree-`d` moments of `e^{−g}`, pruned to at most `h_d(n)` points.
pub fn extract_contacts(
    g: &HomogPoly,
    points: &[Vec<f64>],
    active_tol: f64,
    rule: &SphereRule,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let md = Integrator::new(g, rule)?.moments(g.d())?;
    let (c, w, _) = fit_contacts(g, points, active_tol, &md)?;
    Ok((c, w))
}

fn fit_contacts(
    g: &HomogPoly,
    points: &[Vec<f64>],
    active_tol: f64,
    md: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<f64>, f64)> {
    let active: Vec<&Vec<f64>> = points
        .iter()
        .filter(|y| g.eval_unchecked(y) >= 1.0 - active_tol)
        .collect();
    let b = DVector::from_column_slice(md);
    let bnorm = b.norm();
    if active.is_empty() {
        return Err(Error::CertificationFailed { residual: 1.0 });
    }
    let basis = g.basis();
    let cols: Vec<Vec<f64>> = active.iter().map(|y| basis.monomials(y)).collect();
    let a = DMatrix::from_fn(md.len(), cols.len(), |i, j| cols[j][i]);
    let fit = nnls(&a, &b);
    if fit.residual > 1e-3 * bnorm {
        return Err(Error::CertificationFailed {
            residual: fit.residual / bnorm,
        });
    }
    let pruned = caratheodory_prune(&a, &fit.x);
    let residual = (&a * DVector::from_column_slice(&pruned) - &b).norm() / bnorm;
    let mut contacts = Vec::new();
    let mut weights = Vec::new();
    for (y, &lam) in active.iter().zip(&pruned) {
        if lam > 0.0 {
            contacts.push((*y).clone());
            weights.push(lam);
        }
    }
    Ok((contacts, weights, residual))
}

/// `max_α |∫x^α e^{−g} − Σλᵢyᵢ^α| / ∫e^{−g}` over the degree-`d` basis,
/// together with the trace defect `|(n/d)∫e^{−g} − Σλᵢ g(yᵢ)| / ∫e^{−g}`;
/// returns the larger of the two.
pub fn verify_set_touching(g: &HomogPoly, contacts: &[Vec<f64>], weights: &[f64], rule: &SphereRule) -> Result<f64> {
    if contacts.len() != weights.len() {
        return Err(Error::InvalidParameter(format!(
            "{} contacts but {} weights",
            contacts.len(),
            weights.len()
        )));
    }
    let integ = Integrator::new(g, rule)?;
    let w = integ.exp_integral()?;
    let mut md = integ.moments(g.d())?;
    for (y, &lam) in contacts.iter().zip(weights) {
        if y.len() != g.n() {
            return Err(Error::DimensionMismatch {
                expected: g.n(),
                got: y.len(),
            });
        }
        for (m, a) in md.iter_mut().zip(g.basis().monomials(y)) {
            *m -= lam * a;
        }
    }
    let moment = md.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) / w;
    let trace_sum: f64 = contacts.iter().zip(weights).map(|(y, &lam)| lam * g.eval_unchecked(y)).sum();
    let trace = (g.n() as f64 / g.d() as f64 * w - trace_sum).abs() / w;
    Ok(moment.max(trace))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::euclid_power_poly;
    use crate::quad::{default_level, sphere_rule, DEFAULT_SEED};
    use std::f64::consts::PI;

    fn problem(points: Vec<Vec<f64>>, d: u32) -> EnclosureProblem {
        let n = points[0].len();
        EnclosureProblem {
            points,
            d,
            tol: 1e-10,
            rule: sphere_rule(n, default_level(n), DEFAULT_SEED),
        }
    }

    fn square() -> Vec<Vec<f64>> {
        vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]
    }

    fn circle(count: usize) -> Vec<Vec<f64>> {
        (0..count)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    }

    #[test]
    fn square_cloud() {
        let p = problem(square(), 2);
        let sol = solve_enclosure(&p).unwrap();
        assert!((sol.volume - 2.0 * PI).abs() < 1e-6, "volume {}", sol.volume);
        let c = sol.g_star.coeffs();
        assert!((c[0] - 0.5).abs() < 1e-6 && c[1].abs() < 1e-6 && (c[2] - 0.5).abs() < 1e-6, "{c:?}");
        for lam in &sol.dual_weights {
            assert!((lam - PI / 2.0).abs() < 1e-5, "dual weight {lam}");
        }
        assert!(sol.kkt_residual < 1e-6);
        assert!(sol.max_violation <= p.tol);
        assert!(sol.contacts.len() <= 3 && !sol.contacts.is_empty());
        let r = verify_set_touching(&sol.g_star, &sol.contacts, &sol.weights, &p.rule).unwrap();
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn circle_cloud_matches_euclidean_power() {
        for d in [2, 4] {
            let p = problem(circle(256), d);
            let sol = solve_enclosure(&p).unwrap();
            assert!((sol.volume - PI).abs() < 0.01 * PI, "d = {d}: {}", sol.volume);
            let e = euclid_power_poly(2, d).unwrap();
            for (a, b) in sol.g_star.coeffs().iter().zip(e.coeffs()) {
                assert!((a - b).abs() < 1e-3, "d = {d}: {:?}", sol.g_star.coeffs());
            }
            assert!(sol.contacts.len() <= Basis::shared(2, d).len());
            let tr: f64 = sol.weights.iter().sum();
            assert!((tr - 2.0 / d as f64 * sol.volume * gamma(2.0 / d as f64 + 1.0)).abs() < 1e-3 * tr);
        }
    }

    #[test]
    fn one_dimensional() {
        let p = problem(vec![vec![1.0], vec![-1.0]], 4);
        let sol = solve_enclosure(&p).unwrap();
        assert!((sol.g_star.coeffs()[0] - 1.0).abs() < 1e-8);
        assert!((sol.volume - 2.0).abs() < 1e-8);
        let tr: f64 = sol.weights.iter().sum();
        assert!((tr - 0.25 * gamma(1.25) * 2.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_degenerate_cloud() {
        let p = problem(vec![vec![1.0, 1.0], vec![-2.0, -2.0]], 2);
        assert!(matches!(solve_enclosure(&p), Err(Error::DegeneratePoints(_))));
    }

    #[test]
    fn touching_residual_examples() {
        let rule = sphere_rule(2, 10, DEFAULT_SEED);
        let g = euclid_power_poly(2, 2).unwrap();
        assert!((verify_set_touching(&g, &[], &[], &rule).unwrap() - 1.0).abs() < 1e-12);
        let half = g.scale(0.5);
        let w = vec![PI / 2.0 * 1.1; 4];
        let r = verify_set_touching(&half, &square(), &w, &rule).unwrap();
        assert!((r - 0.1).abs() < 1e-9, "{r}");
    }
}
