//! Symmetric sparse matrices in coordinate format, with the direct solver
//! machinery used by the eigensolver: reverse Cuthill-McKee reordering and a
//! banded Cholesky factorization.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix entry out of range: ({row}, {col}) in a {dim}x{dim} matrix")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("matrix is not positive definite (pivot {pivot:.3e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
}

/// Symmetric sparse matrix. Entries are stored once, on the upper triangle
/// (`row <= col`), sorted and duplicate-merged.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSymMatrix {
    /// Build from triplets. Entries are symmetrized onto the upper triangle
    /// and duplicates are accumulated.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, SparseError> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(SparseError::IndexOutOfRange {
                    row: r,
                    col: c,
                    dim,
                });
            }
            if !v.is_finite() {
                return Err(SparseError::NonFiniteEntry { row: r, col: c });
            }
            let (i, j) = if r <= c { (r, c) } else { (c, r) };
            entries.push((i, j, v));
        }
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0.0);
        Ok(Self {
            dim,
            entries: merged,
        })
    }

    /// Diagonal matrix from a vector.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let entries = diag
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, i, v))
            .collect();
        Self {
            dim: diag.len(),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Stored (upper-triangle) entries.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(i, j, v) in &self.entries {
            if i == j {
                d[i] = v;
            }
        }
        d
    }

    /// y = A x, expanding symmetric storage.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "matvec dimension mismatch");
        let mut y = vec![0.0; self.dim];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// u' A v.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), self.dim);
        assert_eq!(v.len(), self.dim);
        let mut s = 0.0;
        for &(i, j, a) in &self.entries {
            if i == j {
                s += a * u[i] * v[i];
            } else {
                s += a * (u[i] * v[j] + u[j] * v[i]);
            }
        }
        s
    }

    /// u' A u.
    pub fn quad_form(&self, u: &[f64]) -> f64 {
        self.bilinear(u, u)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let ones = vec![1.0; self.dim];
        self.matvec(&ones)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
            if i != j {
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Principal submatrix on `keep` (indices must be sorted, unique).
    pub fn restrict(&self, keep: &[usize]) -> SparseSymMatrix {
        let mut pos = vec![usize::MAX; self.dim];
        for (p, &v) in keep.iter().enumerate() {
            pos[v] = p;
        }
        let entries = self
            .entries
            .iter()
            .filter_map(|&(i, j, v)| {
                let (pi, pj) = (pos[i], pos[j]);
                (pi != usize::MAX && pj != usize::MAX).then(|| {
                    let (a, b) = if pi <= pj { (pi, pj) } else { (pj, pi) };
                    (a, b, v)
                })
            })
            .collect();
        SparseSymMatrix {
            dim: keep.len(),
            entries,
        }
    }

    /// Scale all entries in place.
    pub fn scale(&mut self, t: f64) {
        for e in &mut self.entries {
            e.2 *= t;
        }
    }

    /// Adjacency of the sparsity pattern (off-diagonal), both directions.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.dim];
        for &(i, j, _) in &self.entries {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Coordinate-format text dump (`row col value` per line), symmetric
    /// entries expanded. For debugging.
    pub fn write_coordinate_text(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "% symmetric {} {} {}", self.dim, self.dim, self.nnz())?;
        for &(i, j, v) in &self.entries {
            writeln!(w, "{} {} {:.17e}", i, j, v)?;
            if i != j {
                writeln!(w, "{} {} {:.17e}", j, i, v)?;
            }
        }
        Ok(())
    }
}

/// Reverse Cuthill-McKee ordering of the pattern graph. Returns `perm` with
/// `perm[new] = old`. Disconnected graphs are handled component by component.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let degree = |v: usize| adj[v].len();

    while order.len() < n {
        // Pseudo-peripheral start: minimum degree in the component, then one
        // extra BFS sweep to push it towards the periphery.
        let start0 = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree(v), v))
            .unwrap();
        let start = {
            let mut last = start0;
            let mut seen = vec![false; n];
            let mut queue = std::collections::VecDeque::from([start0]);
            seen[start0] = true;
            while let Some(v) = queue.pop_front() {
                last = v;
                let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&u| !seen[u]).collect();
                nb.sort_unstable_by_key(|&u| (degree(u), u));
                for u in nb {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
            last
        };

        let mut queue = std::collections::VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            nb.sort_unstable_by_key(|&u| (degree(u), u));
            for u in nb {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Banded Cholesky factorization of a symmetric positive definite matrix,
/// after an RCM reordering to compress the bandwidth.
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    /// Lower factor, row-major, band[i * (bw+1) + d] = L[i, i-d], d = 0..=bw.
    band: Vec<f64>,
}

impl BandedCholesky {
    /// Factor `A + shift*I`. Fails if a pivot is not strictly positive.
    pub fn factor(a: &SparseSymMatrix, shift: f64) -> Result<Self, SparseError> {
        let n = a.dim();
        let adj = a.adjacency();
        let perm = reverse_cuthill_mckee(&adj);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut bw = 0usize;
        for &(i, j, _) in a.entries() {
            bw = bw.max(iperm[i].abs_diff(iperm[j]));
        }
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for &(i, j, v) in a.entries() {
            let (pi, pj) = (iperm[i], iperm[j]);
            let (hi, lo) = if pi >= pj { (pi, pj) } else { (pj, pi) };
            band[hi * w + (hi - lo)] += v;
        }
        for i in 0..n {
            band[i * w] += shift;
        }

        // Row-oriented banded Cholesky, O(n * bw^2).
        for i in 0..n {
            let kmin = i.saturating_sub(bw);
            for k in kmin..i {
                let mut s = band[i * w + (i - k)];
                let mmin = kmin.max(k.saturating_sub(bw));
                for m in mmin..k {
                    s -= band[i * w + (i - m)] * band[k * w + (k - m)];
                }
                band[i * w + (i - k)] = s / band[k * w];
            }
            let mut s = band[i * w];
            for m in kmin..i {
                let l = band[i * w + (i - m)];
                s -= l * l;
            }
            if s <= 0.0 || !s.is_finite() {
                return Err(SparseError::NotPositiveDefinite { row: i, pivot: s });
            }
            band[i * w] = s.sqrt();
        }

        Ok(Self {
            n,
            bw,
            perm,
            band,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "solve dimension mismatch");
        let w = self.bw + 1;
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut s = b[self.perm[i]];
            let kmin = i.saturating_sub(self.bw);
            for k in kmin..i {
                s -= self.band[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.band[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            let kmax = (i + self.bw).min(self.n - 1);
            for k in (i + 1)..=kmax {
                s -= self.band[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.band[i * w];
        }
        let mut x = vec![0.0; self.n];
        for i in 0..self.n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triplets_merge_and_symmetrize() {
        let a = SparseSymMatrix::from_triplets(3, vec![(0, 1, 1.0), (1, 0, 2.0), (2, 2, 4.0)])
            .unwrap();
        assert_eq!(a.nnz(), 2);
        let d = a.to_dense();
        assert_eq!(d[(0, 1)], 3.0);
        assert_eq!(d[(1, 0)], 3.0);
        assert_eq!(d[(2, 2)], 4.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = SparseSymMatrix::from_triplets(
            3,
            vec![(0, 0, 2.0), (0, 1, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 2, 2.0)],
        )
        .unwrap();
        let x = vec![1.0, 2.0, 3.0];
        let y = a.matvec(&x);
        let xv = nalgebra::DVector::from_vec(x.clone());
        let yd = a.to_dense() * &xv;
        for i in 0..3 {
            assert_relative_eq!(y[i], yd[i], epsilon = 1e-14);
        }
        assert_relative_eq!(a.quad_form(&x), yd.dot(&xv), epsilon = 1e-14);
    }

    #[test]
    fn out_of_range_rejected() {
        let r = SparseSymMatrix::from_triplets(2, vec![(0, 5, 1.0)]);
        assert!(matches!(r, Err(SparseError::IndexOutOfRange { .. })));
    }

    #[test]
    fn banded_cholesky_solves_tridiagonal() {
        // 1D Laplacian with Dirichlet ends: strictly PD.
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        let a = SparseSymMatrix::from_triplets(n, t).unwrap();
        let chol = BandedCholesky::factor(&a, 0.0).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = chol.solve(&b);
        let r = a.matvec(&x);
        for i in 0..n {
            assert_relative_eq!(r[i], b[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn banded_cholesky_rejects_indefinite() {
        let a =
            SparseSymMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        assert!(matches!(
            BandedCholesky::factor(&a, 0.0),
            Err(SparseError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn rcm_compresses_grid_bandwidth() {
        // 2D grid graph numbered badly; RCM should give bandwidth near the
        // short side.
        let (nx, ny) = (20, 5);
        let idx = |i: usize, j: usize| i * ny + j;
        let mut t = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                t.push((idx(i, j), idx(i, j), 4.0));
                if i + 1 < nx {
                    t.push((idx(i, j), idx(i + 1, j), -1.0));
                }
                if j + 1 < ny {
                    t.push((idx(i, j), idx(i, j + 1), -1.0));
                }
            }
        }
        // scramble with a worst-case-ish numbering: transpose ordering
        let a = SparseSymMatrix::from_triplets(nx * ny, t).unwrap();
        let chol = BandedCholesky::factor(&a, 0.0).unwrap();
        assert!(chol.bandwidth() <= 2 * ny + 2, "bw = {}", chol.bandwidth());
    }
}
