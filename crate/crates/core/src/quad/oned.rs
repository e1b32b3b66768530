//! One-dimensional rules used by the sphere rules and the identity checks.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Gauss–Legendre `(node, weight)` pairs on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let m = NonZeroUsize::new(m).expect("rule size must be positive");
    let mut pairs = GaussLegendre::new(m).as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Gauss–Legendre pairs mapped to `[a, b]`.
pub fn gauss_legendre_on(m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    gauss_legendre(m)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Exp-sinh double-exponential quadrature of `∫₀^∞ f`.
///
/// The substitution `x = exp(π/2 · sinh τ)` maps the half line to ℝ and
/// makes algebraic endpoint singularities and exponential tails decay
/// double-exponentially, so a trapezoid rule in `τ` converges quickly. The
/// step is halved until two successive sums agree to `rel_tol`. Non-finite
/// integrand values (overflow far out on the tails) count as zero.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> f64 {
    const T_MAX: f64 = 6.5;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let term = |tau: f64| {
        let x = (half_pi * tau.sinh()).exp();
        if !(x.is_finite() && x > 0.0) {
            return 0.0;
        }
        let v = f(x) * half_pi * tau.cosh() * x;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };

    let mut h = 0.5;
    let steps = (T_MAX / h) as i64;
    let mut sum: f64 = (-steps..=steps).map(|k| term(k as f64 * h)).sum();
    let mut estimate = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        let steps = (T_MAX / h) as i64;
        let odd: f64 = (-steps..=steps)
            .filter(|k| k % 2 != 0)
            .map(|k| term(k as f64 * h))
            .sum();
        sum += odd;
        let next = sum * h;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// `∫₀^∞ σ^p exp(−σ^q) dσ` by [`exp_sinh`], evaluated in log space.
pub fn power_exp_integral(p: f64, q: f64) -> f64 {
    exp_sinh(
        |s| {
            let ls = s.ln();
            (p * ls - (q * ls).exp()).exp()
        },
        1e-14,
    )
}
