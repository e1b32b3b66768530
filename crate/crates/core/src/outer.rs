//! One-dimensional searches over the scale `t` of the majorant.
//!
//! For each `t` the level-set body `H_t(f)` (P1) or `Ĥ_t(f)` (P2) is sampled
//! and enclosed by the minimal-volume sublevel set `G₁(g_t)`; `v(t) = |G₁(g_t)|`.
//! Problem 1 minimizes `φ(t) = t·v(t)` on `[1, eⁿ]`, Problem 2 minimizes
//! `φ̂(t) = t·Γ(n/d+1)·v̂(t)` on `[1, e^{n/d}]`.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::enclosure::{solve_enclosure, EnclosureProblem};
use crate::error::{Error, Result};
use crate::funcs::{build_cloud, check_hat_boundedness, check_majorization, Boundedness, LogConcaveFn, MajorizationReport, Mode};
use crate::poly::HomogPoly;
use crate::quad::{default_level, sphere_rule, SphereRule, DEFAULT_SEED};
use crate::search::golden_min;

#[derive(Debug, Clone)]
pub struct OuterOptions {
    pub n_dirs: usize,
    pub n_lambda: usize,
    /// Final bracket width in `log t`.
    pub t_tol: f64,
    pub enclosure_tol: f64,
    /// Points of the Problem 1 grid on `log t ∈ [0, n]`.
    pub grid_points: usize,
    /// Sphere rule for the enclosure integrals; the default rule for `n`
    /// when absent.
    pub rule: Option<SphereRule>,
    pub seed: u64,
    /// Random samples for the final majorization check.
    pub majorization_samples: usize,
}

impl Default for OuterOptions {
    fn default() -> Self {
        OuterOptions {
            n_dirs: 256,
            n_lambda: 200,
            t_tol: 1e-6,
            enclosure_tol: 1e-10,
            grid_points: 33,
            rule: None,
            seed: DEFAULT_SEED,
            majorization_samples: 4000,
        }
    }
}

impl OuterOptions {
    fn rule_for(&self, n: usize) -> SphereRule {
        match &self.rule {
            Some(r) if r.n() == n => r.clone(),
            _ => sphere_rule(n, default_level(n), self.seed),
        }
    }
}

/// `v(t)` and the enclosing form; `g` is `None` when the body is unbounded.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub t: f64,
    pub v: f64,
    pub g: Option<HomogPoly>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TracePoint {
    pub t: f64,
    pub v: f64,
    /// `t·v(t)`.
    pub phi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OuterSolution {
    pub mode: Mode,
    pub d: u32,
    pub t_star: f64,
    pub g_star: HomogPoly,
    /// `v(t_star) = |G₁(g_star)|`.
    pub v: f64,
    /// `t_star · v(t_star)`.
    pub phi: f64,
    /// `t·n!·|G₁(g)|` (P1) or `t·Γ(n/d+1)·|G₁(g)|` (P2).
    pub objective: f64,
    /// `"global-candidate"` for Problem 1, `"unique"` for Problem 2.
    pub label: String,
    /// Grid-detected local minima of `φ` (P1 only), as `t` values.
    pub local_minima: Vec<f64>,
    /// Final golden-section bracket in `log t`.
    pub bracket: (f64, f64),
    /// Unimodality violations among the golden-section evaluations.
    pub violations: usize,
    /// Boundedness of `Ĥ₁(f)` (P2 only).
    pub hat_boundedness: Option<Boundedness>,
    pub majorization: MajorizationReport,
    pub trace: Vec<TracePoint>,
}

/// Evaluates `v(t)`; `+∞` when the sampled body is unbounded.
pub fn eval_v(f: &LogConcaveFn, t: f64, mode: Mode, d: u32, opts: &OuterOptions) -> Result<Evaluation> {
    eval_with_rule(f, t, mode, d, opts, &opts.rule_for(f.n()))
}

fn eval_with_rule(f: &LogConcaveFn, t: f64, mode: Mode, d: u32, opts: &OuterOptions, rule: &SphereRule) -> Result<Evaluation> {
    f.validate()?;
    let cloud = build_cloud(f, t, mode, d, opts.n_dirs, opts.n_lambda)?;
    if !cloud.is_bounded() {
        return Ok(Evaluation {
            t,
            v: f64::INFINITY,
            g: None,
        });
    }
    let problem = EnclosureProblem {
        points: cloud.points(),
        d,
        tol: opts.enclosure_tol,
        rule: rule.clone(),
    };
    let sol = solve_enclosure(&problem)?;
    Ok(Evaluation {
        t,
        v: sol.volume,
        g: Some(sol.g_star),
    })
}

fn normalization(mode: Mode, n: usize, d: u32) -> f64 {
    match mode {
        Mode::P1 => (1..=n).map(|i| i as f64).product(),
        Mode::P2 => gamma(n as f64 / d as f64 + 1.0),
    }
}

/// Memoizing evaluator of `φ(e^L)` that turns errors into `+∞` and keeps the
/// first error for the caller.
struct Objective<'a> {
    f: &'a LogConcaveFn,
    mode: Mode,
    d: u32,
    opts: &'a OuterOptions,
    rule: SphereRule,
    evals: RefCell<Vec<Evaluation>>,
    error: RefCell<Option<Error>>,
}

impl<'a> Objective<'a> {
    fn new(f: &'a LogConcaveFn, mode: Mode, d: u32, opts: &'a OuterOptions) -> Self {
        Objective {
            f,
            mode,
            d,
            opts,
            rule: opts.rule_for(f.n()),
            evals: RefCell::new(Vec::new()),
            error: RefCell::new(None),
        }
    }

    fn phi(e: &Evaluation) -> f64 {
        if e.v.is_finite() {
            e.t * e.v
        } else {
            f64::INFINITY
        }
    }

    fn record(&self, e: Result<Evaluation>) -> f64 {
        match e {
            Ok(e) => {
                let p = Self::phi(&e);
                self.evals.borrow_mut().push(e);
                p
            }
            Err(err) => {
                self.error.borrow_mut().get_or_insert(err);
                f64::INFINITY
            }
        }
    }

    fn at_log(&self, log_t: f64) -> f64 {
        let t = log_t.exp();
        self.record(eval_with_rule(self.f, t, self.mode, self.d, self.opts, &self.rule))
    }

    /// Evaluates all `log t` values concurrently, in input order.
    fn at_logs(&self, logs: &[f64]) -> Vec<f64> {
        let (f, mode, d, opts, rule) = (self.f, self.mode, self.d, self.opts, &self.rule);
        let results: Vec<Result<Evaluation>> = logs
            .par_iter()
            .map(|&l| eval_with_rule(f, l.exp(), mode, d, opts, rule))
            .collect();
        results.into_iter().map(|r| self.record(r)).collect()
    }

    fn finish(self, bracket: (f64, f64), violations: usize, local_minima: Vec<f64>, label: &str) -> Result<OuterSolution> {
        if let Some(err) = self.error.into_inner() {
            return Err(err);
        }
        let mut evals = self.evals.into_inner();
        evals.sort_by(|a, b| a.t.total_cmp(&b.t));
        evals.dedup_by(|a, b| a.t == b.t);
        let best = evals
            .iter()
            .filter(|e| e.g.is_some())
            .min_by(|a, b| Self::phi(a).total_cmp(&Self::phi(b)))
            .ok_or_else(|| Error::NotAdmissible("the level-set body is unbounded for every sampled t".into()))?
            .clone();
        let n = self.f.n();
        let g_star = best.g.clone().expect("filtered on bounded evaluations");
        let majorization = check_majorization(self.f, best.t, &g_star, self.mode, self.opts.majorization_samples, self.opts.seed)?;
        let trace = evals
            .iter()
            .map(|e| TracePoint {
                t: e.t,
                v: e.v,
                phi: Self::phi(e),
            })
            .collect();
        Ok(OuterSolution {
            mode: self.mode,
            d: self.d,
            t_star: best.t,
            v: best.v,
            phi: best.t * best.v,
            objective: best.t * best.v * normalization(self.mode, n, self.d),
            g_star,
            label: label.into(),
            local_minima,
            bracket,
            violations,
            hat_boundedness: None,
            majorization,
            trace,
        })
    }
}

fn check_inputs(f: &LogConcaveFn, d: u32, opts: &OuterOptions) -> Result<()> {
    f.validate()?;
    if d == 0 || d % 2 == 1 {
        return Err(Error::OddDegree(d));
    }
    if !(opts.t_tol > 0.0 && opts.enclosure_tol > 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    if opts.grid_points < 3 {
        return Err(Error::InvalidParameter("grid_points must be at least 3".into()));
    }
    Ok(())
}

/// Minimizes `φ(t) = t·v(t)` over `[1, eⁿ]`: a uniform grid in `log t`,
/// then golden-section refinement between the neighbours of the best grid
/// point. Every grid point no larger than its neighbours is reported as a
/// local minimum.
pub fn solve_problem1(f: &LogConcaveFn, d: u32, opts: &OuterOptions) -> Result<OuterSolution> {
    check_inputs(f, d, opts)?;
    let n = f.n() as f64;
    let obj = Objective::new(f, Mode::P1, d, opts);
    let k = opts.grid_points;
    let logs: Vec<f64> = (0..k).map(|i| n * i as f64 / (k - 1) as f64).collect();
    let phis = obj.at_logs(&logs);
    if let Some(err) = obj.error.borrow_mut().take() {
        return Err(err);
    }
    let local_minima: Vec<f64> = (0..k)
        .filter(|&i| {
            phis[i].is_finite()
                && (i == 0 || phis[i] <= phis[i - 1])
                && (i + 1 == k || phis[i] <= phis[i + 1])
        })
        .map(|i| logs[i].exp())
        .collect();
    let best = (0..k).min_by(|&a, &b| phis[a].total_cmp(&phis[b])).expect("non-empty grid");
    let lo = logs[best.saturating_sub(1)];
    let hi = logs[(best + 1).min(k - 1)];
    let refined = golden_min(|l| obj.at_log(l), lo, hi, opts.t_tol, 200);
    obj.finish(refined.bracket, refined.violations, local_minima, "global-candidate")
}

/// Minimizes `φ̂(e^r)` over `r ∈ [0, n/d]` by golden-section search, with
/// both endpoints also evaluated.
pub fn solve_problem2(f: &LogConcaveFn, d: u32, opts: &OuterOptions) -> Result<OuterSolution> {
    check_inputs(f, d, opts)?;
    let hat = check_hat_boundedness(f, d);
    let obj = Objective::new(f, Mode::P2, d, opts);
    let r_max = f.n() as f64 / d as f64;
    obj.at_logs(&[0.0, r_max]);
    let refined = golden_min(|r| obj.at_log(r), 0.0, r_max, opts.t_tol, 200);
    let mut sol = obj.finish(refined.bracket, refined.violations, Vec::new(), "unique")?;
    sol.hat_boundedness = Some(hat);
    Ok(sol)
}

/// `(log(t_θ/a))^d − [(1−θ)(log(t₀/a))^d + θ(log(t₁/a))^d]` with
/// `(log t_θ)^d = (1−θ)(log t₀)^d + θ(log t₁)^d`.
pub fn ineq_logconvex_gap(t0: f64, t1: f64, theta: f64, a: f64, d: f64) -> Result<f64> {
    if !(t0 >= 1.0 && t1 >= 1.0) {
        return Err(Error::InvalidParameter(format!("need t0, t1 ≥ 1, got {t0}, {t1}")));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("θ must lie in [0, 1], got {theta}")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!("a must lie in (0, 1], got {a}")));
    }
    if !(d >= 1.0) {
        return Err(Error::InvalidParameter(format!("d must be ≥ 1, got {d}")));
    }
    let (l0, l1) = (t0.ln(), t1.ln());
    let l_theta = ((1.0 - theta) * l0.powf(d) + theta * l1.powf(d)).powf(1.0 / d);
    let la = -a.ln();
    let lhs = (1.0 - theta) * (l0 + la).powf(d) + theta * (l1 + la).powf(d);
    Ok((l_theta + la).powf(d) - lhs)
}

/// Whether the interpolation inequality holds up to `1e−12`.
pub fn ineq_logconvex_check(t0: f64, t1: f64, theta: f64, a: f64, d: f64) -> Result<bool> {
    let gap = ineq_logconvex_gap(t0, t1, theta, a, d)?;
    Ok(gap >= -1e-12 * (1.0 + gap.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::Body;
    use std::f64::consts::{E, PI};

    fn ball() -> Body {
        Body::ball(1.0, 2).unwrap()
    }

    #[test]
    fn v_of_indicator_at_e() {
        let f = LogConcaveFn::Indicator { body: ball() };
        let e = eval_v(&f, E, Mode::P1, 2, &OuterOptions::default()).unwrap();
        assert!((e.v - PI).abs() < 1e-6, "{}", e.v);
        let unbounded = eval_v(&f, 1.0, Mode::P1, 2, &OuterOptions::default()).unwrap();
        assert!(unbounded.v.is_infinite() && unbounded.g.is_none());
    }

    #[test]
    fn v_of_quartic_exponential() {
        let f = LogConcaveFn::ExpGaugePow { body: ball(), alpha: 4.0 };
        let e = eval_v(&f, 0.5f64.exp(), Mode::P2, 2, &OuterOptions::default()).unwrap();
        assert!((e.v - PI / 2f64.sqrt()).abs() < 1e-6, "{}", e.v);
        let g = e.g.unwrap();
        assert!((g.coeffs()[0] - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn problem1_gaussian() {
        let f = LogConcaveFn::ExpGaugePow { body: ball(), alpha: 2.0 };
        let sol = solve_problem1(&f, 2, &OuterOptions::default()).unwrap();
        assert!((sol.t_star.ln() - 1.0).abs() < 1e-2, "t* = {}", sol.t_star);
        assert!((sol.phi - E * PI / 4.0).abs() < 0.02 * E * PI / 4.0);
        assert!(sol.majorization.holds, "{:?}", sol.majorization);
    }

    #[test]
    fn problem2_one_dimensional_gaussian_needs_no_scale() {
        let f = LogConcaveFn::ExpGaugePow {
            body: Body::ball(1.0, 1).unwrap(),
            alpha: 2.0,
        };
        let sol = solve_problem2(&f, 2, &OuterOptions::default()).unwrap();
        assert!((sol.t_star - 1.0).abs() < 1e-4, "t = {}", sol.t_star);
        assert!((sol.g_star.coeffs()[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn interpolation_inequality() {
        for &(t0, t1, th, a) in &[(1.0, 5.0, 0.3, 0.2), (2.0, 7.0, 0.5, 0.9)] {
            assert!(ineq_logconvex_gap(t0, t1, th, a, 1.0).unwrap().abs() < 1e-12);
        }
        assert!(ineq_logconvex_gap(1.5, 9.0, 0.4, 1.0, 3.0).unwrap().abs() < 1e-12);
        let gap = ineq_logconvex_gap(1.0, E * E, 0.5, (-1f64).exp(), 2.0).unwrap();
        assert!(gap > 0.5, "{gap}");
        assert!(ineq_logconvex_check(1.0, E * E, 0.5, (-1f64).exp(), 2.0).unwrap());
        assert!(ineq_logconvex_gap(0.5, 2.0, 0.5, 0.5, 2.0).is_err());
    }
}
