//! Nonnegative least squares and Carathéodory pruning of conic combinations.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Solution of `min ‖A x − b‖₂` subject to `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct Nnls {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Lawson–Hanson active-set NNLS.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Nnls {
    let (m, k) = a.shape();
    assert_eq!(b.len(), m, "rhs length must match the row count");
    let tol = 1e-12 * a.abs().max().max(1.0) * b.amax().max(1.0) * (m.max(k) as f64);
    let mut x = DVector::<f64>::zeros(k);
    let mut passive = vec![false; k];
    let mut iterations = 0;
    let max_iter = 3 * k + 30;

    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
        let sub = DMatrix::from_fn(m, idx.len(), |i, j| a[(i, idx[j])]);
        let z_sub = sub
            .svd(true, true)
            .solve(b, 1e-14)
            .expect("SVD with both factors computed");
        let mut z = DVector::zeros(k);
        for (j, &col) in idx.iter().enumerate() {
            z[col] = z_sub[j];
        }
        z
    };

    loop {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        if iterations >= max_iter {
            break;
        }
        iterations += 1;
        passive[j] = true;
        loop {
            let z = solve_passive(&passive);
            if (0..k).filter(|&i| passive[i]).all(|i| z[i] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in 0..k {
                if passive[i] && z[i] <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - z[i]));
                }
            }
            x += (z - &x) * alpha;
            for i in 0..k {
                if passive[i] && x[i] <= 1e-15 * x.amax().max(1.0) {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    let residual = (a * &x - b).norm();
    Nnls {
        x: x.iter().copied().collect(),
        residual,
        iterations,
    }
}

/// Reduces a nonnegative combination `A x` to one supported on at most
/// `rows(A)` columns without changing `A x` (up to rounding).
///
/// While the support exceeds the row count, a null vector `z` of `rows + 1`
/// support columns is taken from the smallest eigenvector of `A_Sᵀ A_S`, and
/// `x` moves along `−z` until a weight hits zero.
pub fn caratheodory_prune(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let m = a.nrows();
    let mut x = x.to_vec();
    let zero_tol = 1e-14 * x.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    loop {
        let support: Vec<usize> = (0..x.len()).filter(|&j| x[j] > zero_tol).collect();
        for (j, v) in x.iter_mut().enumerate() {
            if !support.contains(&j) {
                *v = 0.0;
            }
        }
        if support.len() <= m {
            return x;
        }
        let cols = &support[..m + 1];
        let sub = DMatrix::from_fn(m, m + 1, |i, j| a[(i, cols[j])]);
        let gram = sub.transpose() * &sub;
        let eig = SymmetricEigen::new(gram);
        let (imin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let mut z: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
        if z.iter().all(|&v| v <= 0.0) {
            z.iter_mut().for_each(|v| *v = -*v);
        }
        let mut theta = f64::INFINITY;
        let mut hit = 0;
        for (j, &zj) in z.iter().enumerate() {
            if zj > 0.0 {
                let r = x[cols[j]] / zj;
                if r < theta {
                    theta = r;
                    hit = j;
                }
            }
        }
        for (j, &zj) in z.iter().enumerate() {
            x[cols[j]] -= theta * zj;
        }
        x[cols[hit]] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_matches_unconstrained_when_positive() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[1.0, 2.0, 3.0]);
        let sol = nnls(&a, &b);
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 2.0).abs() < 1e-12);
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn nnls_clamps_negative_components() {
        // unconstrained optimum is (−1, 1); constrained one drops x₀
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_row_slice(&[-1.0, 1.0]);
        let sol = nnls(&a, &b);
        assert_eq!(sol.x[0], 0.0);
        assert!((sol.x[1] - 1.0).abs() < 1e-12);
        assert!((sol.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nnls_kkt_conditions_hold() {
        let a = DMatrix::from_row_slice(3, 4, &[1.0, 2.0, 0.5, -1.0, 0.3, -0.7, 1.1, 2.0, 1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[0.2, -1.0, 0.5]);
        let sol = nnls(&a, &b);
        let x = DVector::from_vec(sol.x.clone());
        let w = a.transpose() * (b - &a * &x);
        for j in 0..4 {
            assert!(x[j] >= 0.0);
            assert!(w[j] <= 1e-10, "dual feasibility at {j}: {}", w[j]);
            if x[j] > 0.0 {
                assert!(w[j].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pruning_keeps_combination() {
        // five points on a line in homogeneous form: rows (1, t)
        let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
        let a = DMatrix::from_fn(2, 5, |i, j| if i == 0 { 1.0 } else { ts[j] });
        let x = vec![0.2; 5];
        let before = &a * DVector::from_vec(x.clone());
        let pruned = caratheodory_prune(&a, &x);
        let after = &a * DVector::from_vec(pruned.clone());
        assert!(pruned.iter().filter(|&&v| v > 0.0).count() <= 2);
        assert!(pruned.iter().all(|&v| v >= 0.0));
        assert!((before - after).norm() < 1e-12);
    }
}
