//! Homogeneous polynomials over the graded monomial basis.
//!
//! A degree-`d` form in `n` variables is stored densely as a coefficient
//! vector indexed by [`Basis`], whose order is lexicographically descending on
//! the exponent tuples: for `n = 2, d = 2` that is `x², xy, y²`. Every other
//! module indexes moments, gradients and Hessians in this same order.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::SphereRule;

/// Exponent tuple `(α₁, …, αₙ)` of the monomial `x^α`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Componentwise sum `α + β`.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `x^α`, computed by repeated multiplication.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All exponent tuples of total degree `k` in `n` variables, lexicographically
/// descending. Any `k ≥ 0` is accepted; see [`enumerate_basis`] for the
/// even-degree entry point.
pub fn monomial_exponents(n: usize, k: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if n == 1 {
            prefix.push(k);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=k).rev() {
            prefix.push(first);
            rec(n - 1, k - first, prefix, out);
            prefix.pop();
        }
    }
    assert!(n >= 1, "dimension must be positive");
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// The canonical degree-`d` basis. Rejects odd or zero `d`.
pub fn enumerate_basis(n: usize, d: u32) -> Result<Vec<MultiIndex>> {
    check_degree(d)?;
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(monomial_exponents(n, d))
}

/// `C(n + k - 1, k)`, the number of degree-`k` monomials in `n` variables.
pub fn basis_len(n: usize, k: u32) -> usize {
    let k = k as usize;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n + i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

fn check_degree(d: u32) -> Result<()> {
    if d < 2 || d % 2 != 0 {
        Err(Error::OddDegree(d))
    } else {
        Ok(())
    }
}

/// Canonical basis together with its reverse lookup table.
#[derive(Debug)]
pub struct Basis {
    n: usize,
    degree: u32,
    exps: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl Basis {
    /// Shared, memoized basis for `(n, degree)`.
    pub fn shared(n: usize, degree: u32) -> Arc<Basis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<Basis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard
            .entry((n, degree))
            .or_insert_with(|| {
                let exps = monomial_exponents(n, degree);
                let position = exps.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
                Arc::new(Basis {
                    n,
                    degree,
                    exps,
                    position,
                })
            })
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[MultiIndex] {
        &self.exps
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }

    /// Writes every basis monomial evaluated at `x` into `out`.
    ///
    /// Powers `x_i^e` are tabulated once per call, so each monomial costs
    /// `n - 1` multiplications.
    pub fn monomials_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let stride = self.degree as usize + 1;
        let mut pow = vec![1.0; n * stride];
        for i in 0..n {
            for e in 1..stride {
                pow[i * stride + e] = pow[i * stride + e - 1] * x[i];
            }
        }
        for (slot, alpha) in out.iter_mut().zip(&self.exps) {
            let mut m = 1.0;
            for (i, &e) in alpha.0.iter().enumerate() {
                m *= pow[i * stride + e as usize];
            }
            *slot = m;
        }
    }

    pub fn monomials(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.monomials_into(x, &mut out);
        out
    }
}

/// Homogeneous polynomial of even degree `d ≥ 2` in `n` variables.
#[derive(Clone)]
pub struct HomogPoly {
    basis: Arc<Basis>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for HomogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogPoly")
            .field("n", &self.n())
            .field("d", &self.d())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for HomogPoly {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n() && self.d() == other.d() && self.coeffs == other.coeffs
    }
}

impl HomogPoly {
    pub fn new(n: usize, d: u32, coeffs: Vec<f64>) -> Result<Self> {
        check_degree(d)?;
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let basis = Basis::shared(n, d);
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        Ok(HomogPoly { basis, coeffs })
    }

    pub fn zero(n: usize, d: u32) -> Result<Self> {
        check_degree(d)?;
        let len = basis_len(n, d);
        Self::new(n, d, vec![0.0; len])
    }

    /// Builds a polynomial from `(α, coefficient)` pairs in any order.
    /// Missing monomials are zero; a repeated `α` is an error.
    pub fn from_terms(n: usize, d: u32, terms: &[(Vec<u32>, f64)]) -> Result<Self> {
        let mut g = Self::zero(n, d)?;
        let mut seen = vec![false; g.coeffs.len()];
        for (alpha, c) in terms {
            let idx = MultiIndex(alpha.clone());
            if idx.dim() != n || idx.degree() != d {
                return Err(Error::InvalidTerm {
                    alpha: alpha.clone(),
                    reason: format!("expected {n} exponents summing to {d}"),
                });
            }
            let pos = g.basis.position(&idx).expect("valid exponent is in basis");
            if seen[pos] {
                return Err(Error::InvalidTerm {
                    alpha: alpha.clone(),
                    reason: "duplicate exponent".into(),
                });
            }
            seen[pos] = true;
            g.coeffs[pos] = *c;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.basis.n
    }

    pub fn d(&self) -> u32 {
        self.basis.degree
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &[u32]) -> Option<f64> {
        self.basis
            .position(&MultiIndex(alpha.to_vec()))
            .map(|i| self.coeffs[i])
    }

    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coeffs.len(),
                got: coeffs.len(),
            });
        }
        Ok(HomogPoly {
            basis: self.basis.clone(),
            coeffs,
        })
    }

    /// Largest coefficient magnitude; the norm used for all scale-relative
    /// tolerances on polynomials.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
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
        let mut mono = vec![0.0; self.coeffs.len()];
        self.basis.monomials_into(x, &mut mono);
        dot(&mono, &self.coeffs)
    }

    /// Gradient `∂g/∂x_i`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut grad = vec![0.0; n];
        for (alpha, &c) in self.basis.exps.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            for i in 0..n {
                let e = alpha.0[i];
                if e == 0 {
                    continue;
                }
                let mut term = c * e as f64;
                for (j, &ej) in alpha.0.iter().enumerate() {
                    let p = if j == i { ej - 1 } else { ej };
                    term *= x[j].powi(p as i32);
                }
                grad[i] += term;
            }
        }
        grad
    }

    pub fn scale(&self, s: f64) -> HomogPoly {
        HomogPoly {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| s * c).collect(),
        }
    }

    /// Polynomial with coordinates relabelled: `h(x) = g(x_{perm[0]}, …)`,
    /// i.e. the monomial `x^α` of `g` maps to `x^β` with `β[perm[i]] = α[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<HomogPoly> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut out = vec![0.0; self.coeffs.len()];
        for (alpha, &c) in self.basis.exps.iter().zip(&self.coeffs) {
            let mut beta = vec![0u32; n];
            for i in 0..n {
                beta[perm[i]] = alpha.0[i];
            }
            let pos = self
                .basis
                .position(&MultiIndex(beta))
                .ok_or_else(|| Error::InvalidParameter("not a permutation".into()))?;
            out[pos] = c;
        }
        self.with_coeffs(out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coefficientwise `a·g0 + b·g1`.
pub fn lincomb(a: f64, g0: &HomogPoly, b: f64, g1: &HomogPoly) -> Result<HomogPoly> {
    if g0.n() != g1.n() || g0.d() != g1.d() {
        return Err(Error::ShapeMismatch {
            n0: g0.n(),
            d0: g0.d(),
            n1: g1.n(),
            d1: g1.d(),
        });
    }
    let coeffs = g0
        .coeffs
        .iter()
        .zip(&g1.coeffs)
        .map(|(x, y)| a * x + b * y)
        .collect();
    g0.with_coeffs(coeffs)
}

/// Multinomial expansion of `‖x‖₂^d = (x₁² + … + xₙ²)^{d/2}`.
pub fn euclid_power_poly(n: usize, d: u32) -> Result<HomogPoly> {
    check_degree(d)?;
    let half = d / 2;
    let mut g = HomogPoly::zero(n, d)?;
    let fact = |k: u32| (1..=k).fold(1.0f64, |acc, i| acc * i as f64);
    for beta in monomial_exponents(n, half) {
        let coeff = fact(half) / beta.0.iter().map(|&b| fact(b)).product::<f64>();
        let alpha = MultiIndex(beta.0.iter().map(|b| 2 * b).collect());
        let pos = g.basis.position(&alpha).expect("doubled exponent in basis");
        g.coeffs[pos] += coeff;
    }
    Ok(g)
}

/// JSON wire form: `{"n": 2, "d": 2, "terms": [{"alpha": [2, 0], "coeff": 1.0}, …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyJson {
    pub n: usize,
    pub d: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<u32>,
    pub coeff: f64,
}

impl From<&HomogPoly> for PolyJson {
    fn from(g: &HomogPoly) -> Self {
        PolyJson {
            n: g.n(),
            d: g.d(),
            terms: g
                .basis
                .exps
                .iter()
                .zip(&g.coeffs)
                .map(|(a, &c)| TermJson {
                    alpha: a.0.clone(),
                    coeff: c,
                })
                .collect(),
        }
    }
}

impl TryFrom<PolyJson> for HomogPoly {
    type Error = Error;

    fn try_from(p: PolyJson) -> Result<Self> {
        let terms: Vec<(Vec<u32>, f64)> = p.terms.into_iter().map(|t| (t.alpha, t.coeff)).collect();
        HomogPoly::from_terms(p.n, p.d, &terms)
    }
}

impl Serialize for HomogPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HomogPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        HomogPoly::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Outcome of the numerical positivity test on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum SphereClassification {
    PositiveOnSphere { min: f64, argmin: Vec<f64> },
    VanishesOnSphere { min: f64, witnesses: Vec<Vec<f64>> },
    NegativeSomewhere { min: f64, witness: Vec<f64> },
}

/// Classification plus the tolerance it was decided with. Always heuristic:
/// it is a sampled-and-refined minimum, not a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct SphereReport {
    pub classification: SphereClassification,
    pub pos_tol: f64,
    pub heuristic: bool,
}

impl SphereReport {
    pub fn min(&self) -> f64 {
        match &self.classification {
            SphereClassification::PositiveOnSphere { min, .. }
            | SphereClassification::VanishesOnSphere { min, .. }
            | SphereClassification::NegativeSomewhere { min, .. } => *min,
        }
    }
}

const CLASSIFY_STARTS: usize = 24;
const WITNESS_SEPARATION: f64 = 1e-3;

/// Decides whether `g` is positive, vanishing somewhere, or negative
/// somewhere on `S^{n-1}`.
///
/// `g` is sampled on the nodes of `sphere_rule(n, rule_level)`; the smallest
/// samples seed a projected-gradient descent on the sphere. The refined
/// minimum `m` is compared with `pos_tol = 1e-9 · max|g_α|`.
pub fn classify_on_sphere(g: &HomogPoly, rule_level: u32, refine_iters: usize) -> SphereReport {
    let rule = crate::quad::sphere_rule(g.n(), rule_level, crate::quad::DEFAULT_SEED);
    classify_with_rule(g, &rule, refine_iters)
}

pub(crate) fn classify_with_rule(g: &HomogPoly, rule: &SphereRule, refine_iters: usize) -> SphereReport {
    let n = g.n();
    let scale = g.max_abs_coeff();
    let pos_tol = 1e-9 * scale;
    if scale == 0.0 {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        return SphereReport {
            classification: SphereClassification::VanishesOnSphere {
                min: 0.0,
                witnesses: vec![e],
            },
            pos_tol,
            heuristic: true,
        };
    }

    let mut samples: Vec<(f64, usize)> = (0..rule.len())
        .map(|i| (g.eval_unchecked(rule.node(i)), i))
        .collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut refined: Vec<(f64, Vec<f64>)> = samples
        .iter()
        .take(CLASSIFY_STARTS)
        .map(|&(_, i)| {
            let (u, v) = refine_on_sphere(g, rule.node(i), refine_iters);
            (v, u)
        })
        .collect();
    refined.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (m, argmin) = refined[0].clone();
    let classification = if m < -pos_tol {
        SphereClassification::NegativeSomewhere {
            min: m,
            witness: argmin,
        }
    } else if m <= pos_tol {
        let mut witnesses: Vec<Vec<f64>> = Vec::new();
        for (v, u) in &refined {
            if v.abs() > pos_tol {
                continue;
            }
            let fresh = witnesses
                .iter()
                .all(|w| w.iter().zip(u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() > WITNESS_SEPARATION);
            if fresh {
                witnesses.push(u.clone());
            }
        }
        SphereClassification::VanishesOnSphere { min: m, witnesses }
    } else {
        SphereClassification::PositiveOnSphere { min: m, argmin }
    };
    SphereReport {
        classification,
        pos_tol,
        heuristic: true,
    }
}

/// Projected gradient descent on the sphere with Armijo backtracking and
/// renormalization as the retraction.
pub(crate) fn refine_on_sphere(g: &HomogPoly, start: &[f64], iters: usize) -> (Vec<f64>, f64) {
    let mut u = start.to_vec();
    let mut val = g.eval_unchecked(&u);
    let scale = g.max_abs_coeff().max(f64::MIN_POSITIVE);
    let mut step = 1.0 / (scale * g.d() as f64);
    for _ in 0..iters {
        let grad = g.gradient(&u);
        let radial = dot(&grad, &u);
        let tangent: Vec<f64> = grad.iter().zip(&u).map(|(gi, ui)| gi - radial * ui).collect();
        let tn2 = dot(&tangent, &tangent);
        if tn2.sqrt() <= 1e-15 * scale {
            break;
        }
        let mut eta = step;
        let mut accepted = false;
        while eta > 1e-30 {
            let mut cand: Vec<f64> = u.iter().zip(&tangent).map(|(ui, ti)| ui - eta * ti).collect();
            normalize(&mut cand);
            let cv = g.eval_unchecked(&cand);
            if cv <= val - 1e-4 * eta * tn2 {
                u = cand;
                val = cv;
                accepted = true;
                step = eta * 2.0;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (u, val)
}

pub(crate) fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coupled_quartic(t: f64) -> HomogPoly {
        // x⁴ + y⁴ + z⁴ − t·x²yz
        HomogPoly::from_terms(
            3,
            4,
            &[
                (vec![4, 0, 0], 1.0),
                (vec![0, 4, 0], 1.0),
                (vec![0, 0, 4], 1.0),
                (vec![2, 1, 1], -t),
            ],
        )
        .unwrap()
    }

    fn sextic_cross() -> HomogPoly {
        // (x² − y²)²(x² + y²) = x⁶ − x⁴y² − x²y⁴ + y⁶
        HomogPoly::from_terms(
            2,
            6,
            &[
                (vec![6, 0], 1.0),
                (vec![4, 2], -1.0),
                (vec![2, 4], -1.0),
                (vec![0, 6], 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn basis_examples() {
        let b = enumerate_basis(2, 2).unwrap();
        let want: Vec<MultiIndex> = vec![
            MultiIndex::new(vec![2, 0]),
            MultiIndex::new(vec![1, 1]),
            MultiIndex::new(vec![0, 2]),
        ];
        assert_eq!(b, want);
        assert_eq!(enumerate_basis(1, 4).unwrap(), vec![MultiIndex::new(vec![4])]);
        assert_eq!(enumerate_basis(3, 2).unwrap().len(), 6);
        assert!(matches!(enumerate_basis(2, 3), Err(Error::OddDegree(3))));
        assert!(matches!(enumerate_basis(2, 0), Err(Error::OddDegree(0))));
    }

    #[test]
    fn basis_len_matches_binomial() {
        for n in 1..=5 {
            for d in [2u32, 4, 6, 8] {
                assert_eq!(enumerate_basis(n, d).unwrap().len(), basis_len(n, d));
            }
        }
        assert_eq!(basis_len(4, 8), 165);
    }

    #[test]
    fn basis_positions_round_trip() {
        for n in 1..=4 {
            for d in [2u32, 4, 6] {
                let basis = Basis::shared(n, d);
                for (i, a) in basis.exponents().iter().enumerate() {
                    assert_eq!(basis.position(a), Some(i));
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        let g = HomogPoly::from_terms(
            3,
            4,
            &[
                (vec![4, 0, 0], 1.0),
                (vec![0, 4, 0], 1.0),
                (vec![0, 0, 4], 1.0),
                (vec![2, 1, 1], -2.0 * 2f64.sqrt()),
            ],
        )
        .unwrap();
        let v = g.eval(&[2f64.powf(0.25), 1.0, 1.0]).unwrap();
        assert!(v.abs() < 1e-14, "{v}");

        let disk = euclid_power_poly(2, 2).unwrap();
        assert_eq!(disk.eval(&[0.0, 0.0]).unwrap(), 0.0);

        assert_eq!(sextic_cross().eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(disk.eval(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lincomb_examples() {
        let x4 = HomogPoly::from_terms(2, 4, &[(vec![4, 0], 1.0)]).unwrap();
        let y4 = HomogPoly::from_terms(2, 4, &[(vec![0, 4], 1.0)]).unwrap();
        assert_eq!(lincomb(1.0, &x4, 0.0, &x4).unwrap(), x4);
        let half = lincomb(0.5, &x4, 0.5, &y4).unwrap();
        assert_eq!(half.coeff(&[4, 0]), Some(0.5));
        assert_eq!(half.coeff(&[0, 4]), Some(0.5));
        assert_eq!(half.coeff(&[2, 2]), Some(0.0));
        let x2 = HomogPoly::from_terms(2, 2, &[(vec![2, 0], 1.0)]).unwrap();
        assert!(lincomb(1.0, &x2, -1.0, &x2).unwrap().coeffs().iter().all(|&c| c == 0.0));
        assert!(matches!(lincomb(1.0, &x2, 1.0, &x4), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn euclid_power_examples() {
        let g = euclid_power_poly(2, 4).unwrap();
        assert_eq!(g.coeffs(), &[1.0, 0.0, 2.0, 0.0, 1.0]);
        let g = euclid_power_poly(1, 6).unwrap();
        assert_eq!(g.coeffs(), &[1.0]);
        let g = euclid_power_poly(3, 2).unwrap();
        assert_eq!(g.coeff(&[2, 0, 0]), Some(1.0));
        assert_eq!(g.coeff(&[0, 1, 1]), Some(0.0));
        assert_eq!(g.coeff(&[0, 0, 2]), Some(1.0));
        assert!(euclid_power_poly(2, 3).is_err());
    }

    #[test]
    fn from_terms_rejects_duplicates_and_bad_degree() {
        let dup = HomogPoly::from_terms(2, 2, &[(vec![2, 0], 1.0), (vec![2, 0], 2.0)]);
        assert!(matches!(dup, Err(Error::InvalidTerm { .. })));
        let bad = HomogPoly::from_terms(2, 2, &[(vec![3, 0], 1.0)]);
        assert!(matches!(bad, Err(Error::InvalidTerm { .. })));
    }

    #[test]
    fn json_terms_canonicalize() {
        let text = r#"{"n":2,"d":2,"terms":[{"alpha":[0,2],"coeff":3.0},{"alpha":[2,0],"coeff":1.0}]}"#;
        let g: HomogPoly = serde_json::from_str(text).unwrap();
        assert_eq!(g.coeffs(), &[1.0, 0.0, 3.0]);
        let back = serde_json::to_string(&g).unwrap();
        let again: HomogPoly = serde_json::from_str(&back).unwrap();
        assert_eq!(g, again);
        let dup = r#"{"n":2,"d":2,"terms":[{"alpha":[2,0],"coeff":1.0},{"alpha":[2,0],"coeff":1.0}]}"#;
        assert!(serde_json::from_str::<HomogPoly>(dup).is_err());
    }

    #[test]
    fn classify_positive_quartic() {
        let g = HomogPoly::from_terms(2, 4, &[(vec![4, 0], 1.0), (vec![0, 4], 1.0)]).unwrap();
        let r = classify_on_sphere(&g, 6, 200);
        match r.classification {
            SphereClassification::PositiveOnSphere { min, argmin } => {
                assert!((min - 0.5).abs() < 1e-12, "{min}");
                assert!((argmin[0].abs() - argmin[1].abs()).abs() < 1e-6);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(r.heuristic);
    }

    #[test]
    fn classify_fixture_quartics() {
        let neg = classify_on_sphere(&coupled_quartic(3.0), 5, 300);
        match neg.classification {
            SphereClassification::NegativeSomewhere { witness, min } => {
                assert!(min < 0.0);
                let g = coupled_quartic(3.0);
                assert!(g.eval(&witness).unwrap() < 0.0);
                let norm: f64 = witness.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }

        let zero = classify_on_sphere(&coupled_quartic(2.0 * 2f64.sqrt()), 5, 500);
        assert!(
            matches!(zero.classification, SphereClassification::VanishesOnSphere { .. }),
            "{zero:?}"
        );

        let cross = classify_on_sphere(&sextic_cross(), 6, 300);
        match cross.classification {
            SphereClassification::VanishesOnSphere { witnesses, .. } => {
                assert_eq!(witnesses.len(), 4, "{witnesses:?}");
                for w in witnesses {
                    assert!((w[0].abs() - w[1].abs()).abs() < 1e-6);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn classify_euclid_powers() {
        for n in 1..=4 {
            for d in [2u32, 4, 6, 8] {
                let g = euclid_power_poly(n, d).unwrap();
                let r = classify_on_sphere(&g, 4, 100);
                match r.classification {
                    SphereClassification::PositiveOnSphere { min, .. } => {
                        assert!((min - 1.0).abs() < 1e-9, "n={n} d={d} min={min}")
                    }
                    other => panic!("n={n} d={d}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = coupled_quartic(1.3);
        let x = [0.3, -0.7, 1.1];
        let grad = g.gradient(&x);
        for i in 0..3 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (g.eval(&xp).unwrap() - g.eval(&xm).unwrap()) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-7, "{i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn permute_vars_relabels() {
        let g = HomogPoly::from_terms(2, 4, &[(vec![4, 0], 1.0), (vec![1, 3], 2.0)]).unwrap();
        let h = g.permute_vars(&[1, 0]).unwrap();
        assert_eq!(h.coeff(&[0, 4]), Some(1.0));
        assert_eq!(h.coeff(&[3, 1]), Some(2.0));
        let x = [0.4, -1.3];
        assert!((g.eval(&x).unwrap() - h.eval(&[x[1], x[0]]).unwrap()).abs() < 1e-14);
    }
}
