use std::f64::consts::{E, PI, SQRT_2};

use serde::Serialize;
use serde_json::{json, Value};

use logpoly::funcs::{check_hat_boundedness, Body};
use logpoly::outer::{solve_problem1, solve_problem2, OuterOptions};
use logpoly::poly::classify_on_sphere;
use logpoly::quad::default_level;
use logpoly::{HomogPoly, LogConcaveFn};

use crate::{ExamplesArgs, Failure, Output, Which};

#[derive(Debug, Serialize)]
struct Row {
    example: String,
    quantity: String,
    computed: Value,
    expected: Value,
    rel_error: Option<f64>,
    tolerance: Option<f64>,
    pass: bool,
}

fn numeric(example: &str, quantity: &str, computed: f64, expected: f64, tol: f64) -> Row {
    let rel = (computed - expected).abs() / expected.abs();
    Row {
        example: example.into(),
        quantity: quantity.into(),
        computed: computed.into(),
        expected: expected.into(),
        rel_error: Some(rel),
        tolerance: Some(tol),
        pass: rel <= tol,
    }
}

fn kind(example: &str, quantity: &str, computed: &str, expected: &str) -> Row {
    Row {
        example: example.into(),
        quantity: quantity.into(),
        computed: computed.into(),
        expected: expected.into(),
        rel_error: None,
        tolerance: None,
        pass: computed == expected,
    }
}

fn kind_of<T: Serialize>(x: &T) -> String {
    serde_json::to_value(x).expect("serializes")["kind"]
        .as_str()
        .unwrap_or("unknown")
        .to_string()
}

fn ball(n: usize) -> Body {
    Body::ball(1.0, n).expect("unit ball")
}

fn examples1(opts: &OuterOptions, rows: &mut Vec<Row>) -> Result<(), Failure> {
    let cases = [
        ("indicator of the unit disc, d = 2", LogConcaveFn::Indicator { body: ball(2) }, E * E, (E / 2.0).powi(2) * PI),
        (
            "exp(-|x|^2), d = 2",
            LogConcaveFn::ExpGaugePow { body: ball(2), alpha: 2.0 },
            E,
            E * PI / 4.0,
        ),
        ("plateau over the unit disc, d = 2", LogConcaveFn::Plateau { body: ball(2) }, E, E * PI),
    ];
    for (name, f, t, phi) in cases {
        let sol = solve_problem1(&f, 2, opts)?;
        rows.push(numeric(name, "t*", sol.t_star, t, 1e-3));
        rows.push(numeric(name, "t*·|G1(g*)|", sol.phi, phi, 2e-2));
    }
    Ok(())
}

fn final_example(opts: &OuterOptions, rows: &mut Vec<Row>) -> Result<(), Failure> {
    let n = 2.0;
    let dp = 2.0;
    for alpha in [4.0, 6.0] {
        let f = LogConcaveFn::ExpGaugePow { body: ball(2), alpha };
        let sol = solve_problem2(&f, 2, opts)?;
        let name = format!("exp(-|x|^{alpha}), d' = 2");
        let t2 = (n * (1.0 / dp - 1.0 / alpha)).exp();
        let objective = PI * (n / (E * alpha)).powf(n / alpha) / (n / (E * dp)).powf(n / dp);
        rows.push(numeric(&name, "t2", sol.t_star, t2, 1e-4));
        rows.push(numeric(&name, "objective", sol.objective, objective, 1e-3));
        if alpha == 4.0 {
            rows.push(numeric(&name, "g2 coefficient of x^2", sol.g_star.coeffs()[0], SQRT_2, 1e-4));
        }
    }
    Ok(())
}

fn fixtures(rows: &mut Vec<Row>) -> Result<(), Failure> {
    let s2 = SQRT_2;
    let polys: [(&str, usize, u32, Vec<(Vec<u32>, f64)>, &str); 4] = [
        (
            "x^4+y^4+z^4-2*sqrt(2)*x^2*y*z",
            3,
            4,
            vec![(vec![4, 0, 0], 1.0), (vec![0, 4, 0], 1.0), (vec![0, 0, 4], 1.0), (vec![2, 1, 1], -2.0 * s2)],
            "VanishesOnSphere",
        ),
        (
            "(x^2-y^2)^2*(x^2+y^2)",
            2,
            6,
            vec![(vec![6, 0], 1.0), (vec![4, 2], -1.0), (vec![2, 4], -1.0), (vec![0, 6], 1.0)],
            "VanishesOnSphere",
        ),
        (
            "x^4+y^4+z^4-3*x^2*y*z",
            3,
            4,
            vec![(vec![4, 0, 0], 1.0), (vec![0, 4, 0], 1.0), (vec![0, 0, 4], 1.0), (vec![2, 1, 1], -3.0)],
            "NegativeSomewhere",
        ),
        ("x^2+y^2", 2, 2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0)], "PositiveOnSphere"),
    ];
    for (name, n, d, terms, expected) in polys {
        let g = HomogPoly::from_terms(n, d, &terms)?;
        let report = classify_on_sphere(&g, default_level(n), 200);
        rows.push(kind(name, "sphere classification", &kind_of(&report.classification), expected));
    }
    let ridge = LogConcaveFn::RidgeBox { n: 3 };
    rows.push(kind(
        "ridge box, n = 3, d = 2",
        "boundedness of the t = 1 body",
        &kind_of(&check_hat_boundedness(&ridge, 2)),
        "UnboundedSuspected",
    ));
    let rejected = [
        ("shell indicator, n = 2", LogConcaveFn::ShellIndicator { n: 2 }),
        (
            "quasi-concave tail, n = 2",
            LogConcaveFn::QuasiConcaveTail { body: ball(2), alpha: 3.0 },
        ),
    ];
    for (name, f) in rejected {
        let got = match f.validate() {
            Err(logpoly::Error::NotAdmissible(_)) => "NotAdmissible",
            Err(_) => "InvalidParameter",
            Ok(()) => "Accepted",
        };
        rows.push(kind(name, "admissibility", got, "NotAdmissible"));
    }
    Ok(())
}

pub fn run(a: &ExamplesArgs, seed: u64) -> Result<Output, Failure> {
    let opts = OuterOptions {
        seed,
        ..OuterOptions::default()
    };
    let mut rows = Vec::new();
    if matches!(a.which, Which::All | Which::Examples1) {
        examples1(&opts, &mut rows)?;
    }
    if matches!(a.which, Which::All | Which::Final) {
        final_example(&opts, &mut rows)?;
    }
    if matches!(a.which, Which::All | Which::Fixtures) {
        fixtures(&mut rows)?;
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(Output {
        config: json!({ "which": a.which }),
        result: json!({ "rows": rows, "all_pass": all_pass }),
        failed: !all_pass,
    })
}
