//! Golden-section search for unimodal scalar functions.

use serde::Serialize;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Serialize)]
pub struct GoldenResult {
    pub x: f64,
    pub fx: f64,
    /// Every `(x, f(x))` evaluated, in evaluation order.
    pub trace: Vec<(f64, f64)>,
    /// Final bracket.
    pub bracket: (f64, f64),
    /// Number of sorted evaluation triples whose middle value exceeds both
    /// neighbours; zero for a unimodal function.
    pub violations: usize,
}

/// Minimizes `f` on `[a, b]` until the bracket is narrower than `tol`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> GoldenResult {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut trace = Vec::new();
    let mut eval = |x: f64, trace: &mut Vec<(f64, f64)>| {
        let v = f(x);
        trace.push((x, v));
        v
    };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = eval(x1, &mut trace);
    let mut f2 = eval(x2, &mut trace);
    let mut iter = 0;
    while hi - lo > tol && iter < max_iter {
        iter += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval(x1, &mut trace);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval(x2, &mut trace);
        }
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let violations = count_violations(&trace, false);
    GoldenResult {
        x,
        fx,
        trace,
        bracket: (lo, hi),
        violations,
    }
}

/// Maximizes `f` on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> GoldenResult {
    let mut r = golden_min(|x| -f(x), a, b, tol, max_iter);
    r.fx = -r.fx;
    r.trace.iter_mut().for_each(|p| p.1 = -p.1);
    r.violations = count_violations(&r.trace, true);
    r
}

/// Counts interior local maxima (for minimization) or minima (for
/// maximization) among the sorted evaluations, ignoring differences below
/// a relative `1e-12`.
pub fn count_violations(trace: &[(f64, f64)], maximize: bool) -> usize {
    let mut pts: Vec<(f64, f64)> = trace.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    let sign = if maximize { -1.0 } else { 1.0 };
    pts.windows(3)
        .filter(|w| {
            let (a, m, c) = (sign * w[0].1, sign * w[1].1, sign * w[2].1);
            let slack = 1e-12 * (a.abs() + m.abs() + c.abs());
            m > a + slack && m > c + slack
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let r = golden_min(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-10, 200);
        assert!((r.x - 0.3).abs() < 1e-7);
        assert!((r.fx - 1.0).abs() < 1e-15);
        assert_eq!(r.violations, 0);
        assert!(r.bracket.1 - r.bracket.0 <= 1e-10);
    }

    #[test]
    fn finds_maximum() {
        let r = golden_max(|s: f64| s.sqrt() / (1.0 + s), 0.0, 10.0, 1e-12, 200);
        assert!((r.x - 1.0).abs() < 1e-6);
        assert!((r.fx - 0.5).abs() < 1e-12);
    }

    #[test]
    fn flags_non_unimodal_traces() {
        let trace = [(0.0, 1.0), (1.0, 2.0), (2.0, 1.0), (3.0, 0.5)];
        assert_eq!(count_violations(&trace, false), 1);
        assert_eq!(count_violations(&trace, true), 0);
    }
}
