use proptest::prelude::*;

use logpoly::enclosure::{solve_enclosure, solve_enclosure_with, EnclosureOptions, EnclosureProblem};
use logpoly::linalg::nnls;
use logpoly::outer::ineq_logconvex_check;
use logpoly::poly::{euclid_power_poly, lincomb};
use logpoly::quad::{default_level, phi_map, sphere_rule, volume_sublevel, SphereRule, DEFAULT_SEED};
use logpoly::HomogPoly;
use nalgebra::{DMatrix, DVector};

fn rule(n: usize) -> SphereRule {
    sphere_rule(n, default_level(n), DEFAULT_SEED)
}

fn any_poly(n: usize, d: u32) -> impl Strategy<Value = HomogPoly> {
    let len = euclid_power_poly(n, d).unwrap().coeffs().len();
    prop::collection::vec(-2.0f64..2.0, len).prop_map(move |c| euclid_power_poly(n, d).unwrap().with_coeffs(c).unwrap())
}

/// `s·‖x‖^d` plus a perturbation of coefficient mass below `0.4·s`.
fn positive_poly(n: usize, d: u32) -> impl Strategy<Value = HomogPoly> {
    let len = euclid_power_poly(n, d).unwrap().coeffs().len();
    (0.5f64..2.0, 0.0f64..0.4, prop::collection::vec(-1.0f64..1.0, len)).prop_map(move |(s, budget, raw)| {
        let base = euclid_power_poly(n, d).unwrap();
        let mass: f64 = raw.iter().map(|c| c.abs()).sum::<f64>().max(1e-12);
        let coeffs = base
            .coeffs()
            .iter()
            .zip(&raw)
            .map(|(b, r)| s * b + budget * s * r / mass)
            .collect();
        base.with_coeffs(coeffs).unwrap()
    })
}

fn shape() -> impl Strategy<Value = (usize, u32)> {
    (2usize..=3, prop::sample::select(vec![2u32, 4, 6]))
}

fn cloud(min: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec((0.2f64..2.0, 0.0f64..std::f64::consts::TAU), min..max)
        .prop_map(|v| v.into_iter().map(|(r, a)| vec![r * a.cos(), r * a.sin()]).collect())
}

fn enclose(points: Vec<Vec<f64>>, d: u32) -> EnclosureProblem {
    EnclosureProblem {
        points,
        d,
        tol: 1e-10,
        rule: rule(2),
    }
}

fn close(a: &HomogPoly, b: &HomogPoly, tol: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_is_homogeneous(
        g in shape().prop_flat_map(|(n, d)| any_poly(n, d)),
        lambda in -3.0f64..3.0,
        x in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let d = g.d();
        let x = &x[..g.n()];
        let lx: Vec<f64> = x.iter().map(|c| lambda * c).collect();
        let lhs = g.eval(&lx).unwrap();
        let rhs = lambda.powi(d as i32) * g.eval(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn evaluation_is_linear_in_coefficients(
        g in any_poly(3, 4),
        h in any_poly(3, 4),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        x in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let lhs = lincomb(a, &g, b, &h).unwrap().eval(&x).unwrap();
        let rhs = a * g.eval(&x).unwrap() + b * h.eval(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn json_round_trip_is_exact(g in any_poly(3, 4)) {
        let text = serde_json::to_string(&g).unwrap();
        let back: HomogPoly = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.coeffs(), g.coeffs());
    }

    #[test]
    fn permuted_variables_evaluate_consistently(
        g in any_poly(3, 4),
        perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
        x in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let h = g.permute_vars(&perm).unwrap();
        // h(y) = g(x) when y[perm[i]] = x[i]
        let mut y = vec![0.0; 3];
        for i in 0..3 {
            y[perm[i]] = x[i];
        }
        let (a, b) = (h.eval(&y).unwrap(), g.eval(&x).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn inequality_holds_on_random_inputs(
        l0 in 0.0f64..5.0,
        l1 in 0.0f64..5.0,
        theta in 0.0f64..=1.0,
        a in 1e-4f64..=1.0,
        d in 1.0f64..10.0,
    ) {
        prop_assert!(ineq_logconvex_check(l0.exp(), l1.exp(), theta, a, d).unwrap());
    }

    #[test]
    fn nnls_is_feasible_and_no_worse_than_zero(
        entries in prop::collection::vec(-1.0f64..1.0, 24),
        rhs in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let a = DMatrix::from_vec(6, 4, entries);
        let b = DVector::from_vec(rhs);
        let sol = nnls(&a, &b);
        prop_assert!(sol.x.iter().all(|v| *v >= 0.0));
        prop_assert!(sol.residual <= b.norm() + 1e-12);
        // Dual feasibility: the gradient Aᵀ(b − Ax) is ≤ 0 off the support.
        let x = DVector::from_vec(sol.x.clone());
        let w = a.transpose() * (&b - &a * &x);
        for (xi, wi) in sol.x.iter().zip(w.iter()) {
            prop_assert!(*xi > 0.0 || *wi <= 1e-9, "w = {wi} at a zero coordinate");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn volume_routes_agree(g in shape().prop_flat_map(|(n, d)| positive_poly(n, d))) {
        let v = volume_sublevel(&g, &rule(g.n())).unwrap();
        prop_assert!((v.vol_m1 - v.vol_md).abs() <= 1e-6 * v.vol_m1, "{} vs {}", v.vol_m1, v.vol_md);
    }

    #[test]
    fn volume_gradient_is_minus_phi(
        g in positive_poly(2, 4),
        h in any_poly(2, 4),
    ) {
        let r = rule(2);
        let eps = 1e-5;
        let vol = |s: f64| volume_sublevel(&lincomb(1.0, &g, s, &h).unwrap(), &r).unwrap().vol_m1;
        let fd = (vol(eps) - vol(-eps)) / (2.0 * eps);
        let phi = phi_map(&g, &r).unwrap().values;
        let dot: f64 = phi.iter().zip(h.coeffs()).map(|(p, c)| p * c).sum();
        let scale: f64 = phi.iter().zip(h.coeffs()).map(|(p, c)| (p * c).abs()).sum();
        prop_assert!((fd + dot).abs() <= 1e-5 * scale, "{fd} vs {}", -dot);
    }

    #[test]
    fn enclosure_is_feasible(points in cloud(8, 30), d in prop::sample::select(vec![2u32, 4])) {
        let p = enclose(points, d);
        let sol = solve_enclosure(&p).unwrap();
        for y in &p.points {
            prop_assert!(sol.g_star.eval(y).unwrap() <= 1.0 + 1e-8);
        }
        // Stationarity with multipliers fitted on the active set. A point with
        // zero slack and zero multiplier converges like √μ, so the bound is √tol.
        prop_assert!(sol.contact_residual < 1e-5, "contact fit {}", sol.contact_residual);
        prop_assert!(sol.kkt_residual < 1e-3, "kkt {}", sol.kkt_residual);
    }

    #[test]
    fn growing_the_cloud_never_shrinks_the_volume(
        points in cloud(8, 20),
        extra in cloud(1, 6),
        d in prop::sample::select(vec![2u32, 4]),
    ) {
        let small = solve_enclosure(&enclose(points.clone(), d)).unwrap();
        let mut more = points;
        more.extend(extra);
        let big = solve_enclosure(&enclose(more, d)).unwrap();
        prop_assert!(big.volume >= small.volume * (1.0 - 1e-8), "{} < {}", big.volume, small.volume);
    }

    #[test]
    fn point_order_does_not_matter(
        points in cloud(8, 20).prop_shuffle(),
        d in prop::sample::select(vec![2u32, 4]),
    ) {
        let a = solve_enclosure(&enclose(points.clone(), d)).unwrap();
        let mut reversed = points;
        reversed.reverse();
        let b = solve_enclosure(&enclose(reversed, d)).unwrap();
        prop_assert!(close(&a.g_star, &b.g_star, 1e-8), "{:?} vs {:?}", a.g_star.coeffs(), b.g_star.coeffs());
    }

    #[test]
    fn swapping_coordinates_swaps_the_solution(points in cloud(8, 20), d in prop::sample::select(vec![2u32, 4])) {
        let a = solve_enclosure(&enclose(points.clone(), d)).unwrap();
        let swapped: Vec<Vec<f64>> = points.iter().map(|p| vec![p[1], p[0]]).collect();
        let b = solve_enclosure(&enclose(swapped, d)).unwrap();
        let a_swapped = a.g_star.permute_vars(&[1, 0]).unwrap();
        prop_assert!(close(&a_swapped, &b.g_star, 1e-8), "{:?} vs {:?}", a_swapped.coeffs(), b.g_star.coeffs());
    }

    #[test]
    fn scaling_the_cloud_scales_the_volume(points in cloud(8, 20), s in 0.3f64..3.0) {
        let a = solve_enclosure(&enclose(points.clone(), 2)).unwrap();
        let scaled: Vec<Vec<f64>> = points.iter().map(|p| vec![s * p[0], s * p[1]]).collect();
        let b = solve_enclosure(&enclose(scaled, 2)).unwrap();
        prop_assert!((b.volume - s * s * a.volume).abs() <= 1e-6 * b.volume);
    }

    #[test]
    fn different_starts_reach_the_same_form(
        points in cloud(8, 20),
        start in positive_poly(2, 4),
    ) {
        let p = enclose(points, 4);
        let a = solve_enclosure(&p).unwrap();
        let peak = p.points.iter().map(|y| start.eval(y).unwrap()).fold(0.0, f64::max);
        let opts = EnclosureOptions {
            init: Some(start.scale(0.5 / peak)),
            ..EnclosureOptions::default()
        };
        let b = solve_enclosure_with(&p, &opts).unwrap();
        prop_assert!((a.volume - b.volume).abs() <= 1e-8 * a.volume);
        prop_assert!(close(&a.g_star, &b.g_star, 1e-5), "{:?} vs {:?}", a.g_star.coeffs(), b.g_star.coeffs());
    }
}
