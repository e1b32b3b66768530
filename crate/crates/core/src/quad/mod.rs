//! Moment integrals `∫ x^α e^{−g(x)} dx` by spherical-radial reduction.
//!
//! With `x = s·u` the radial integral is closed form:
//!
//! ```text
//! ∫_{ℝⁿ} x^α e^{−g(x)} dx = Γ((n+k)/d)/d · ∫_{S^{n−1}} u^α g(u)^{−(n+k)/d} dσ(u),   k = |α|
//! ```
//!
//! so only a sphere quadrature remains. Polynomials that vanish on the sphere
//! get an adapted direction set (see [`adapted`]) in `n = 2, 3` and node
//! capping in `n ≥ 4`; such results carry `singular = true`.

pub mod adapted;
pub mod oned;
mod rule;

use std::borrow::Cow;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::poly::{classify_with_rule, Basis, HomogPoly, MultiIndex, SphereClassification};

pub use rule::{default_level, sphere_area, sphere_rule, SphereRule, DEFAULT_SEED};

use adapted::ZeroDirection;

const CHUNK: usize = 512;
const CLASSIFY_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moment {
    pub value: f64,
    pub singular: bool,
}

/// Moments of one total degree, indexed by the canonical basis of that degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVector {
    pub degree: u32,
    pub values: Vec<f64>,
    pub singular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeReport {
    pub vol_m1: f64,
    pub vol_md: f64,
    pub agree: bool,
    pub singular: bool,
}

/// `g` paired with the direction set its integrals are taken over.
pub struct Integrator<'a> {
    g: &'a HomogPoly,
    rule: Cow<'a, SphereRule>,
    zeros: Vec<ZeroDirection>,
    proxies: Vec<Option<adapted::Proxy>>,
    floor: Option<f64>,
}

impl<'a> Integrator<'a> {
    /// Classifies `g` on the sphere first. Negative somewhere is an error;
    /// vanishing somewhere switches to the adapted rule (`n ≤ 3`) or node
    /// capping (`n ≥ 4`).
    pub fn new(g: &'a HomogPoly, rule: &'a SphereRule) -> Result<Self> {
        check_rule(g, rule)?;
        let report = classify_with_rule(g, rule, CLASSIFY_ITERS);
        match report.classification {
            SphereClassification::PositiveOnSphere { .. } => Ok(Self::unchecked(g, rule)),
            SphereClassification::NegativeSomewhere { witness, .. } => Err(Error::Divergent { witness }),
            SphereClassification::VanishesOnSphere { witnesses, .. } => match g.n() {
                1 => Err(Error::Divergent {
                    witness: vec![1.0],
                }),
                2 | 3 => {
                    let zeros = adapted::zero_directions(g, &witnesses);
                    let adapted = adapted::adapted_rule(g, rule, &zeros);
                    Ok(Integrator {
                        g,
                        rule: Cow::Owned(adapted.rule),
                        zeros,
                        proxies: adapted.proxies,
                        floor: None,
                    })
                }
                _ => Ok(Integrator {
                    g,
                    rule: Cow::Borrowed(rule),
                    zeros: Vec::new(),
                    proxies: Vec::new(),
                    floor: Some(1e-14 * g.max_abs_coeff()),
                }),
            },
        }
    }

    /// Skips classification; the caller guarantees `g > 0` on the nodes.
    pub fn unchecked(g: &'a HomogPoly, rule: &'a SphereRule) -> Self {
        Integrator {
            g,
            rule: Cow::Borrowed(rule),
            zeros: Vec::new(),
            proxies: Vec::new(),
            floor: None,
        }
    }

    pub fn singular(&self) -> bool {
        !self.zeros.is_empty() || self.floor.is_some_and(|f| self.rule.nodes().any(|u| self.g.eval_unchecked(u) <= f))
    }

    pub fn rule(&self) -> &SphereRule {
        &self.rule
    }

    /// Errors when some zero direction makes the degree-`k` moments diverge:
    /// near a zero of order `p` the integrand behaves like `ρ^{−p(n+k)/d}`
    /// against the `ρ^{n−2} dρ` area element.
    fn check_integrable(&self, k: u32) -> Result<()> {
        let n = self.g.n() as f64;
        let d = self.g.d() as f64;
        for z in &self.zeros {
            if z.order * (n + k as f64) / d >= n - 1.0 - 1e-3 {
                return Err(Error::Divergent {
                    witness: z.direction.clone(),
                });
            }
        }
        Ok(())
    }

    fn g_node(&self, i: usize) -> f64 {
        if let Some(Some(p)) = self.proxies.get(i) {
            return self.g.eval_unchecked(&p.reference).abs() * p.factor;
        }
        self.g_at(self.rule.node(i))
    }

    fn g_at(&self, u: &[f64]) -> f64 {
        let v = self.g.eval_unchecked(u);
        match self.floor {
            Some(f) if v <= f => f,
            // rounding can push g just below zero next to a zero direction
            _ if !self.zeros.is_empty() => v.abs(),
            _ => v,
        }
    }

    /// `Σ_i w_i · u_i^α · h(g(u_i))` for every `α` of degree `k`, summed in a
    /// fixed chunk order so the result does not depend on thread count.
    fn sphere_sums<H>(&self, k: u32, h: H) -> Vec<f64>
    where
        H: Fn(f64) -> f64 + Sync,
    {
        let basis = Basis::shared(self.g.n(), k);
        let len = basis.len();
        let rule = &*self.rule;
        let partials: Vec<Vec<f64>> = (0..rule.len())
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|idx| {
                let mut acc = vec![0.0; len];
                let mut mono = vec![0.0; len];
                for &i in idx {
                    let u = rule.node(i);
                    let scale = rule.weight(i) * h(self.g_node(i));
                    basis.monomials_into(u, &mut mono);
                    for (a, m) in acc.iter_mut().zip(&mono) {
                        *a += scale * m;
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![0.0; len];
        for p in partials {
            for (t, v) in total.iter_mut().zip(p) {
                *t += v;
            }
        }
        total
    }

    /// `∫ x^α e^{−g}` for every `α` of degree `k`, in basis order.
    pub fn moments(&self, k: u32) -> Result<Vec<f64>> {
        self.check_integrable(k)?;
        let n = self.g.n() as f64;
        let d = self.g.d() as f64;
        let e = (n + k as f64) / d;
        let c = gamma(e) / d;
        Ok(self.sphere_sums(k, |gv| gv.powf(-e)).into_iter().map(|s| c * s).collect())
    }

    /// `∫ e^{−g}`.
    pub fn exp_integral(&self) -> Result<f64> {
        Ok(self.moments(0)?[0])
    }
}

fn check_rule(g: &HomogPoly, rule: &SphereRule) -> Result<()> {
    if g.n() != rule.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: rule.n(),
        });
    }
    Ok(())
}

/// `∫_{ℝⁿ} x^α e^{−g(x)} dx`.
pub fn radial_moment(g: &HomogPoly, alpha: &MultiIndex, rule: &SphereRule) -> Result<Moment> {
    if alpha.dim() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: alpha.dim(),
        });
    }
    let integ = Integrator::new(g, rule)?;
    let k = alpha.degree();
    let pos = Basis::shared(g.n(), k).position(alpha).expect("alpha in its own basis");
    Ok(Moment {
        value: integ.moments(k)?[pos],
        singular: integ.singular(),
    })
}

/// All moments `∫ x^α e^{−g}` with `|α| = k`.
pub fn moment_vector(g: &HomogPoly, k: u32, rule: &SphereRule) -> Result<MomentVector> {
    let integ = Integrator::new(g, rule)?;
    Ok(MomentVector {
        degree: k,
        values: integ.moments(k)?,
        singular: integ.singular(),
    })
}

/// The moment map `Φ_α(g) = ∫ x^α e^{−g} / Γ(n/d + 1)` over the degree-`d`
/// basis. It is minus the gradient of `g ↦ |G₁(g)|`.
pub fn phi_map(g: &HomogPoly, rule: &SphereRule) -> Result<MomentVector> {
    let mut mv = moment_vector(g, g.d(), rule)?;
    let norm = gamma(g.n() as f64 / g.d() as f64 + 1.0);
    mv.values.iter_mut().for_each(|v| *v /= norm);
    Ok(mv)
}

/// `|G₁(g)|` by two routes.
///
/// `vol_m1 = ∫e^{−g} / Γ(n/d+1)` uses the closed-form radial factor.
/// `vol_md = ∫e^{−g^{1/d}} / n!` integrates `r^{n−1} e^{−r}` numerically and
/// sums the sublevel radial function `ρ(u) = g(u)^{−1/d}` to the power `n`.
pub fn volume_sublevel(g: &HomogPoly, rule: &SphereRule) -> Result<VolumeReport> {
    let integ = Integrator::new(g, rule)?;
    let n = g.n();
    let nf = n as f64;
    let df = g.d() as f64;
    let vol_m1 = integ.exp_integral()? / gamma(nf / df + 1.0);

    let radial = oned::power_exp_integral(nf - 1.0, 1.0);
    let n_fact: f64 = (1..=n).map(|i| i as f64).product();
    let rho_sum = integ.sphere_sums(0, |gv| gv.powf(1.0 / df).recip().powi(n as i32))[0];
    let vol_md = radial * rho_sum / n_fact;

    let tol = if n <= 3 { 1e-6 } else { 1e-2 };
    Ok(VolumeReport {
        vol_m1,
        vol_md,
        agree: (vol_m1 - vol_md).abs() <= tol * vol_m1,
        singular: integ.singular(),
    })
}

/// Relative residual of
///
/// ```text
/// ∫ x^α g^r e^{−g^{1/m}} dx = ((n+k)/d) · m · Γ(m((n+k)/d + r)) · ∫_{G₁(g)} x^α dx.
/// ```
///
/// The left side reduces to `J · ∫_S u^α g^{−(n+k)/d}` with
/// `J = ∫₀^∞ σ^{n+k−1+dr} e^{−σ^{d/m}} dσ` integrated numerically; the right
/// side integrates `x^α` over the star body with radial function
/// `g^{−1/d}`. The difference is normalized by the same expression with
/// `|u^α|`, so odd moments that vanish by symmetry give a finite residual.
pub fn identity_r_residual(g: &HomogPoly, alpha: &MultiIndex, r: f64, m: f64, rule: &SphereRule) -> Result<f64> {
    let n = g.n() as f64;
    let d = g.d() as f64;
    let k = alpha.degree() as f64;
    if alpha.dim() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: alpha.dim(),
        });
    }
    if !(m > 0.0) || (n + k) / d + r <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need m > 0 and (n+k)/d + r > 0, got m = {m}, r = {r}"
        )));
    }
    let integ = Integrator::new(g, rule)?;
    integ.check_integrable(alpha.degree() + (d * r.max(0.0)) as u32)?;
    let e = (n + k) / d;
    let pos = Basis::shared(g.n(), alpha.degree()).position(alpha).expect("alpha in basis");

    let s = integ.sphere_sums(alpha.degree(), |gv| gv.powf(-e))[pos];
    let j = oned::power_exp_integral(n + k - 1.0 + d * r, d / m);
    let lhs = j * s;

    let body = integ.sphere_sums(alpha.degree(), |gv| gv.powf(-1.0 / d).powf(n + k) / (n + k))[pos];
    let rhs = e * m * gamma(m * (e + r)) * body;

    let rule_ref = integ.rule();
    let mut scale = 0.0;
    for i in 0..rule_ref.len() {
        let u = rule_ref.node(i);
        scale += rule_ref.weight(i) * alpha.monomial(u).abs() * integ.g_node(i).powf(-e);
    }
    scale *= j;
    if scale == 0.0 {
        return Ok((lhs - rhs).abs());
    }
    Ok((lhs - rhs).abs() / scale)
}

/// `|T − Σλ| / T` with `T = (n/d) Γ(n/d+1) |G₁(g)| = ∫ g e^{−g}`.
pub fn trace_residual(g: &HomogPoly, weights: &[f64], rule: &SphereRule) -> Result<f64> {
    let integ = Integrator::new(g, rule)?;
    let n = g.n() as f64;
    let d = g.d() as f64;
    let target = n / d * integ.exp_integral()?;
    let sum: f64 = weights.iter().sum();
    Ok((target - sum).abs() / target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::euclid_power_poly;
    use std::f64::consts::PI;

    fn rule(n: usize) -> SphereRule {
        sphere_rule(n, default_level(n), DEFAULT_SEED)
    }

    #[test]
    fn gaussian_moments() {
        let g = euclid_power_poly(2, 2).unwrap();
        let m = radial_moment(&g, &MultiIndex::new(vec![0, 0]), &rule(2)).unwrap();
        assert!((m.value - PI).abs() < 1e-13);
        assert!(!m.singular);

        let g1 = euclid_power_poly(1, 2).unwrap();
        let m = radial_moment(&g1, &MultiIndex::new(vec![2]), &rule(1)).unwrap();
        assert!((m.value - PI.sqrt() / 2.0).abs() < 1e-14);

        let g4 = euclid_power_poly(2, 4).unwrap();
        let m = radial_moment(&g4, &MultiIndex::new(vec![0, 0]), &rule(2)).unwrap();
        assert!((m.value - PI.powf(1.5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn volume_examples() {
        let v = volume_sublevel(&euclid_power_poly(2, 2).unwrap(), &rule(2)).unwrap();
        assert!((v.vol_m1 - PI).abs() < 1e-12 && (v.vol_md - PI).abs() < 1e-12 && v.agree);
        for d in [2, 4, 6] {
            let v = volume_sublevel(&euclid_power_poly(1, d).unwrap(), &rule(1)).unwrap();
            assert!((v.vol_m1 - 2.0).abs() < 1e-12 && (v.vol_md - 2.0).abs() < 1e-12);
        }
        let v = volume_sublevel(&euclid_power_poly(3, 4).unwrap(), &rule(3)).unwrap();
        assert!((v.vol_m1 - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn phi_examples() {
        let phi = phi_map(&euclid_power_poly(2, 2).unwrap(), &rule(2)).unwrap();
        for (got, want) in phi.values.iter().zip([PI / 2.0, 0.0, PI / 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let x4 = euclid_power_poly(1, 4).unwrap();
        let phi = phi_map(&x4, &rule(1)).unwrap();
        // ∫ x⁴ e^{−x⁴} = Γ(5/4)/2 on each half line
        let want = 2.0 * gamma(1.25) / 4.0 / gamma(1.25);
        assert!((phi.values[0] - want).abs() < 1e-13);
    }

    #[test]
    fn identity_examples() {
        let g1 = euclid_power_poly(1, 2).unwrap();
        let res = identity_r_residual(&g1, &MultiIndex::new(vec![2]), 0.0, 1.0, &rule(1)).unwrap();
        assert!(res < 1e-12, "{res}");
        let g2 = euclid_power_poly(2, 2).unwrap();
        let res = identity_r_residual(&g2, &MultiIndex::new(vec![0, 0]), 1.0, 1.0, &rule(2)).unwrap();
        assert!(res < 1e-12, "{res}");
        assert!(identity_r_residual(&g2, &MultiIndex::new(vec![0, 0]), -2.0, 1.0, &rule(2)).is_err());
    }

    #[test]
    fn trace_examples() {
        let half = euclid_power_poly(2, 2).unwrap().scale(0.5);
        assert!(trace_residual(&half, &[PI / 2.0; 4], &rule(2)).unwrap() < 1e-12);
        let g = euclid_power_poly(2, 2).unwrap();
        assert!(trace_residual(&g, &[PI], &rule(2)).unwrap() < 1e-12);
        assert!((trace_residual(&g, &[2.0 * PI], &rule(2)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_polynomial_diverges() {
        let g = HomogPoly::from_terms(2, 2, &[(vec![2, 0], 1.0), (vec![0, 2], -1.0)]).unwrap();
        assert!(matches!(volume_sublevel(&g, &rule(2)), Err(Error::Divergent { .. })));
    }

    #[test]
    fn singular_sextic_has_finite_volume() {
        let g = HomogPoly::from_terms(
            2,
            6,
            &[(vec![6, 0], 1.0), (vec![4, 2], -1.0), (vec![2, 4], -1.0), (vec![0, 6], 1.0)],
        )
        .unwrap();
        // |G₁| = (1/2)∫ cos(2θ)^{−2/3} dθ = 2 ∫₀^{π/2} cos(φ)^{−2/3} dφ = B(1/2, 1/6)
        let want = gamma(0.5) * gamma(1.0 / 6.0) / gamma(2.0 / 3.0);
        for level in [8, 10] {
            let v = volume_sublevel(&g, &sphere_rule(2, level, DEFAULT_SEED)).unwrap();
            assert!(v.singular);
            assert!((v.vol_m1 - want).abs() < 1e-6 * want, "level {level}: {} vs {want}", v.vol_m1);
            assert!(v.agree);
        }
        assert!(matches!(phi_map(&g, &rule(2)), Err(Error::Divergent { .. })));
    }
}
