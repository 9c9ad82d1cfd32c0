//! Shift-invert Lanczos for the smallest eigenpairs of A v = λ B v with
//! A ⪰ 0 and B ≻ 0, both sparse. The operator (A + δB)^{-1} B is iterated in
//! the B-inner product with full reorthogonalization; eigenvalues map back
//! through λ = 1/θ - δ.

use super::EigenError;
use crate::sparse::{BandedCholesky, SparseSymMatrix};
use nalgebra::{DMatrix, SymmetricEigen};

pub struct SparsePairs {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

pub fn smallest_eigenpairs_sparse(
    a: &SparseSymMatrix,
    b: &SparseSymMatrix,
    want: usize,
    tol: f64,
) -> Result<SparsePairs, EigenError> {
    let n = a.dim();
    if b.dim() != n {
        return Err(EigenError::DimensionMismatch {
            context: format!("pencil dims {} vs {}", n, b.dim()),
        });
    }
    let tr_a: f64 = a.diagonal().iter().sum();
    let tr_b: f64 = b.diagonal().iter().sum();
    let delta = (1e-5 * tr_a / tr_b).max(1e-300);

    let shifted = {
        let mut t: Vec<(usize, usize, f64)> = a.entries().to_vec();
        t.extend(b.entries().iter().map(|&(i, j, v)| (i, j, delta * v)));
        SparseSymMatrix::from_triplets(n, t)?
    };
    let factor = BandedCholesky::factor(&shifted, 0.0)?;

    let mut m = (2 * want + 16).clamp(20, n);
    loop {
        let pairs = lanczos_run(a, b, &factor, delta, want, m, n)?;
        let worst = pairs
            .residuals
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        if worst <= tol || m >= n {
            if worst > tol {
                return Err(EigenError::ConvergenceFailure {
                    achieved: worst,
                    tol,
                });
            }
            return Ok(pairs);
        }
        let next = (2 * m).min(n);
        if next == m || m >= 600 {
            return Err(EigenError::ConvergenceFailure {
                achieved: worst,
                tol,
            });
        }
        m = next;
    }
}

fn lanczos_run(
    a: &SparseSymMatrix,
    b: &SparseSymMatrix,
    factor: &BandedCholesky,
    delta: f64,
    want: usize,
    m: usize,
    n: usize,
) -> Result<SparsePairs, EigenError> {
    let b_dot = |x: &[f64], y: &[f64]| -> f64 {
        let by = b.matvec(y);
        x.iter().zip(&by).map(|(p, q)| p * q).sum()
    };

    // deterministic start vector
    let mut v: Vec<f64> = (0..n)
        .map(|i| (0.7 * i as f64 + 0.3).sin() + 0.5 * (1.3 * i as f64).cos())
        .collect();
    let norm = b_dot(&v, &v).sqrt();
    for x in &mut v {
        *x /= norm;
    }

    let mut basis: Vec<Vec<f64>> = vec![v.clone()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    for j in 0..m {
        let vj = basis[j].clone();
        let mut w = factor.solve(&b.matvec(&vj));
        let aj = b_dot(&w, &vj);
        alpha.push(aj);
        for (wi, vi) in w.iter_mut().zip(&vj) {
            *wi -= aj * vi;
        }
        if j > 0 {
            let bj = beta[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= bj * vi;
            }
        }
        // full reorthogonalization in the B-inner product
        for prev in &basis {
            let c = b_dot(&w, prev);
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= c * pi;
            }
        }
        let bj = b_dot(&w, &w).sqrt();
        if !bj.is_finite() {
            return Err(EigenError::ConvergenceFailure {
                achieved: f64::INFINITY,
                tol: 0.0,
            });
        }
        if bj < 1e-13 || j + 1 == m {
            break;
        }
        beta.push(bj);
        for wi in &mut w {
            *wi /= bj;
        }
        basis.push(w);
    }

    let steps = alpha.len();
    let mut t = DMatrix::<f64>::zeros(steps, steps);
    for i in 0..steps {
        t[(i, i)] = alpha[i];
        if i + 1 < steps {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..steps).collect();
    // largest θ first → smallest λ
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());

    let take = want.min(steps);
    let mut eigenvalues = Vec::with_capacity(take);
    let mut eigenvectors = Vec::with_capacity(take);
    let mut residuals = Vec::with_capacity(take);
    for &idx in order.iter().take(take) {
        let theta = eig.eigenvalues[idx];
        if theta <= 0.0 {
            continue;
        }
        let lambda = 1.0 / theta - delta;
        let s = eig.eigenvectors.column(idx);
        let mut y = vec![0.0; n];
        for (j, basis_j) in basis.iter().enumerate() {
            let c = s[j];
            for (yi, bi) in y.iter_mut().zip(basis_j) {
                *yi += c * bi;
            }
        }
        let ynorm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        for yi in &mut y {
            *yi /= ynorm;
        }
        let ay = a.matvec(&y);
        let by = b.matvec(&y);
        let res = ay
            .iter()
            .zip(&by)
            .map(|(p, q)| (p - lambda * q).powi(2))
            .sum::<f64>()
            .sqrt();
        eigenvalues.push(lambda);
        eigenvectors.push(y);
        residuals.push(res);
    }

    // ascending λ
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    idx.sort_by(|&x, &y| eigenvalues[x].partial_cmp(&eigenvalues[y]).unwrap());
    Ok(SparsePairs {
        eigenvalues: idx.iter().map(|&i| eigenvalues[i]).collect(),
        eigenvectors: idx.iter().map(|&i| eigenvectors[i].clone()).collect(),
        residuals: idx.iter().map(|&i| residuals[i]).collect(),
    })
}
