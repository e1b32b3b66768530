use serde::Serialize;
use serde_json::{json, Value};

use logpoly::certify::{build_certificate_with, default_seeds};
use logpoly::enclosure::{solve_enclosure_with, verify_set_touching, EnclosureOptions, EnclosureProblem};
use logpoly::outer::{solve_problem1, solve_problem2, OuterOptions};
use logpoly::poly::{enumerate_basis, monomial_exponents, MultiIndex};
use logpoly::quad::{default_level, identity_r_residual, moment_vector, phi_map, sphere_rule, volume_sublevel, SphereRule};
use logpoly::{HomogPoly, LogConcaveFn, Mode};

use crate::io::{read_json, read_points, write_trace_csv};
use crate::{CertifyArgs, EncloseArgs, Failure, IdentityArgs, MomentsArgs, Output, PolyArgs, SolveArgs};

fn rule(n: usize, level: Option<u32>, seed: u64) -> SphereRule {
    sphere_rule(n, level.unwrap_or_else(|| default_level(n)), seed)
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("--{name} must be positive, got {v}")))
    }
}

/// Args echo with the resolved quadrature level.
fn config<A: Serialize>(args: &A, level: u32) -> Value {
    let mut v = serde_json::to_value(args).expect("args serialize");
    v["level"] = level.into();
    v
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

pub fn enclose(a: &EncloseArgs, seed: u64) -> Result<Output, Failure> {
    positive("tol", a.tol)?;
    positive("active-tol", a.active_tol)?;
    let points = read_points(&a.points)?;
    let n = points[0].len();
    let rule = rule(n, a.level, seed);
    let problem = EnclosureProblem {
        points,
        d: a.degree,
        tol: a.tol,
        rule,
    };
    let opts = EnclosureOptions {
        active_tol: a.active_tol,
        ..EnclosureOptions::default()
    };
    let sol = solve_enclosure_with(&problem, &opts)?;
    let touching = verify_set_touching(&sol.g_star, &sol.contacts, &sol.weights, &problem.rule)?;
    let mut result = to_value(&sol);
    result["set_touching_residual"] = touching.into();
    Ok(Output {
        config: config(a, problem.rule.level()),
        result,
        failed: false,
    })
}

pub fn solve(a: &SolveArgs, mode: Mode, seed: u64) -> Result<Output, Failure> {
    positive("ttol", a.ttol)?;
    positive("enclosure-tol", a.enclosure_tol)?;
    let f: LogConcaveFn = read_json(&a.f)?;
    let rule = rule(f.n(), a.level, seed);
    let level = rule.level();
    let opts = OuterOptions {
        n_dirs: a.dirs,
        n_lambda: a.lambdas,
        t_tol: a.ttol,
        enclosure_tol: a.enclosure_tol,
        grid_points: a.grid,
        rule: Some(rule),
        seed,
        ..OuterOptions::default()
    };
    let sol = match mode {
        Mode::P1 => solve_problem1(&f, a.degree, &opts)?,
        Mode::P2 => solve_problem2(&f, a.degree, &opts)?,
    };
    if let Some(path) = &a.plot_csv {
        let rows: Vec<(f64, f64, f64)> = sol.trace.iter().map(|p| (p.t, p.v, p.phi)).collect();
        write_trace_csv(path, &rows)?;
    }
    let mut cfg = config(a, level);
    cfg["function"] = to_value(&f);
    Ok(Output {
        config: cfg,
        result: to_value(&sol),
        failed: false,
    })
}

pub fn certify(a: &CertifyArgs, seed: u64) -> Result<Output, Failure> {
    let f: LogConcaveFn = read_json(&a.f)?;
    let g: HomogPoly = read_json(&a.g)?;
    let rule = rule(g.n(), a.level, seed);
    let seeds = a.seeds.unwrap_or_else(|| default_seeds(f.n()));
    let cert = build_certificate_with(&f, a.t, &g, &rule, seeds)?;
    let mut cfg = config(a, rule.level());
    cfg["seeds"] = seeds.into();
    Ok(Output {
        config: cfg,
        result: to_value(&cert),
        failed: false,
    })
}

pub fn volume(a: &PolyArgs, seed: u64) -> Result<Output, Failure> {
    let g: HomogPoly = read_json(&a.g)?;
    let rule = rule(g.n(), a.level, seed);
    let report = volume_sublevel(&g, &rule)?;
    Ok(Output {
        config: config(a, rule.level()),
        result: to_value(&report),
        failed: false,
    })
}

pub fn moments(a: &MomentsArgs, seed: u64) -> Result<Output, Failure> {
    let g: HomogPoly = read_json(&a.g)?;
    let rule = rule(g.n(), a.level, seed);
    let k = a.k.unwrap_or(g.d());
    if a.phi && k != g.d() {
        return Err(Failure::Input("--phi reports degree-d moments; drop --k".into()));
    }
    let mv = if a.phi { phi_map(&g, &rule)? } else { moment_vector(&g, k, &rule)? };
    let exps: Vec<Vec<u32>> = monomial_exponents(g.n(), k).iter().map(|m| m.exponents().to_vec()).collect();
    Ok(Output {
        config: config(a, rule.level()),
        result: json!({
            "degree": k,
            "normalized": a.phi,
            "basis": exps,
            "values": mv.values,
            "singular": mv.singular,
        }),
        failed: false,
    })
}

fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| Failure::Input(format!("--{flag}: cannot parse {p:?}"))))
        .collect()
}

pub fn identity_check(a: &IdentityArgs, seed: u64) -> Result<Output, Failure> {
    let g: HomogPoly = read_json(&a.g)?;
    let rule = rule(g.n(), a.level, seed);
    let alphas: Vec<MultiIndex> = match &a.alpha {
        Some(s) => vec![MultiIndex::new(parse_list::<u32>("alpha", s)?)],
        None => enumerate_basis(g.n(), g.d())?,
    };
    let rs: Vec<f64> = parse_list("r", &a.r)?;
    let ms: Vec<f64> = match &a.m {
        Some(s) => parse_list("m", s)?,
        None => vec![1.0, g.d() as f64],
    };
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for alpha in &alphas {
        for &r in &rs {
            for &m in &ms {
                let res = identity_r_residual(&g, alpha, r, m, &rule)?;
                worst = worst.max(res);
                rows.push(json!({ "alpha": alpha.exponents(), "r": r, "m": m, "residual": res }));
            }
        }
    }
    Ok(Output {
        config: config(a, rule.level()),
        result: json!({ "rows": rows, "max_residual": worst }),
        failed: false,
    })
}
