//! Discrete Dirichlet-to-Neumann operator: the Schur complement of the
//! stiffness matrix onto boundary vertices, S = K_bb - K_bi K_ii^{-1} K_ib.
//! Applying S to boundary data realizes the minimal Dirichlet energy over
//! all interior extensions.

use super::EigenError;
use crate::sparse::{BandedCholesky, SparseError, SparseSymMatrix};
use nalgebra::DMatrix;

/// Dense symmetric DtN matrix over the boundary vertex set.
#[derive(Debug, Clone)]
pub struct DtnMatrix {
    /// Global vertex ids of the boundary, sorted ascending; row/column `p`
    /// of `matrix` corresponds to `boundary[p]`.
    pub boundary: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

/// DtN matrix together with the interior factorization, so harmonic
/// extensions of boundary data can be evaluated afterwards.
pub struct DtnReduction {
    pub dtn: DtnMatrix,
    interior: Vec<usize>,
    factor: Option<BandedCholesky>,
    /// K_ib by boundary column: (interior position, value) pairs.
    k_ib_cols: Vec<Vec<(usize, f64)>>,
    full_dim: usize,
}

/// Relative diagonal shift guarding the interior Cholesky against
/// near-degenerate elements.
const INTERIOR_SHIFT_REL: f64 = 1e-12;

pub fn dtn_matrix(
    stiffness: &SparseSymMatrix,
    boundary: &[usize],
) -> Result<DtnReduction, EigenError> {
    let n = stiffness.dim();
    let mut boundary = boundary.to_vec();
    boundary.sort_unstable();
    boundary.dedup();
    if boundary.iter().any(|&v| v >= n) {
        return Err(EigenError::DimensionMismatch {
            context: "boundary index exceeds matrix dimension".into(),
        });
    }
    let mut bpos = vec![usize::MAX; n];
    for (p, &v) in boundary.iter().enumerate() {
        bpos[v] = p;
    }
    let interior: Vec<usize> = (0..n).filter(|&v| bpos[v] == usize::MAX).collect();
    let mut ipos = vec![usize::MAX; n];
    for (p, &v) in interior.iter().enumerate() {
        ipos[v] = p;
    }

    let nb = boundary.len();
    let mut s = DMatrix::<f64>::zeros(nb, nb);
    for &(a, b, v) in stiffness.entries() {
        if bpos[a] != usize::MAX && bpos[b] != usize::MAX {
            s[(bpos[a], bpos[b])] += v;
            if a != b {
                s[(bpos[b], bpos[a])] += v;
            }
        }
    }

    if interior.is_empty() {
        return Ok(DtnReduction {
            dtn: DtnMatrix { boundary, matrix: s },
            interior,
            factor: None,
            k_ib_cols: vec![Vec::new(); nb],
            full_dim: n,
        });
    }

    let k_ii = stiffness.restrict(&interior);
    let trace: f64 = k_ii.diagonal().iter().sum();
    let shift = INTERIOR_SHIFT_REL * trace / interior.len() as f64;
    let factor = BandedCholesky::factor(&k_ii, shift).map_err(|e| match e {
        SparseError::NotPositiveDefinite { .. } => EigenError::SingularInteriorBlock,
        other => EigenError::Sparse(other),
    })?;

    let mut k_ib_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
    for &(a, b, v) in stiffness.entries() {
        if ipos[a] != usize::MAX && bpos[b] != usize::MAX {
            k_ib_cols[bpos[b]].push((ipos[a], v));
        } else if bpos[a] != usize::MAX && ipos[b] != usize::MAX {
            k_ib_cols[bpos[a]].push((ipos[b], v));
        }
    }

    // S = K_bb - K_bi K_ii^{-1} K_ib, one interior solve per boundary column.
    let ni = interior.len();
    for j in 0..nb {
        if k_ib_cols[j].is_empty() {
            continue;
        }
        let mut rhs = vec![0.0; ni];
        for &(p, v) in &k_ib_cols[j] {
            rhs[p] += v;
        }
        let x = factor.solve(&rhs);
        for i in 0..nb {
            let mut dot = 0.0;
            for &(p, v) in &k_ib_cols[i] {
                dot += v * x[p];
            }
            s[(i, j)] -= dot;
        }
    }
    // enforce symmetry lost to roundoff
    for i in 0..nb {
        for j in (i + 1)..nb {
            let m = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = m;
            s[(j, i)] = m;
        }
    }

    Ok(DtnReduction {
        dtn: DtnMatrix { boundary, matrix: s },
        interior,
        factor: Some(factor),
        k_ib_cols,
        full_dim: n,
    })
}

impl DtnReduction {
    /// Harmonic extension of boundary data `g` (indexed like
    /// `dtn.boundary`) to all mesh vertices.
    pub fn harmonic_extension(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.dtn.boundary.len());
        let mut u = vec![0.0; self.full_dim];
        for (p, &v) in self.dtn.boundary.iter().enumerate() {
            u[v] = g[p];
        }
        if let Some(factor) = &self.factor {
            let ni = self.interior.len();
            let mut rhs = vec![0.0; ni];
            for (j, col) in self.k_ib_cols.iter().enumerate() {
                for &(p, v) in col {
                    rhs[p] -= v * g[j];
                }
            }
            let x = factor.solve(&rhs);
            for (p, &v) in self.interior.iter().enumerate() {
                u[v] = x[p];
            }
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble_stiffness;
    use crate::mesh::shapes;
    use approx::assert_relative_eq;

    #[test]
    fn no_interior_gives_k_bb() {
        // single triangle: all vertices on the boundary
        let m = crate::mesh::SimplicialMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![0, 1, 2],
        )
        .unwrap();
        let k = assemble_stiffness(&m).unwrap();
        let red = dtn_matrix(&k, &[0, 1, 2]).unwrap();
        let kd = k.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(red.dtn.matrix[(i, j)], kd[(i, j)], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn constants_in_kernel() {
        let m = shapes::disk(1.0, 0.25).unwrap();
        let k = assemble_stiffness(&m).unwrap();
        let b = m.boundary_vertices();
        let red = dtn_matrix(&k, &b).unwrap();
        let ones = nalgebra::DVector::from_element(b.len(), 1.0);
        let r = &red.dtn.matrix * ones;
        let scale = red.dtn.matrix.amax();
        for v in r.iter() {
            assert!(v.abs() <= 1e-9 * scale.max(1.0), "S*1 entry {v}");
        }
    }

    #[test]
    fn energy_identity() {
        // g'Sg equals the Dirichlet energy of the harmonic extension, which
        // minimizes u'Ku over extensions; check against the direct solve.
        let m = shapes::disk(1.0, 0.3).unwrap();
        let k = assemble_stiffness(&m).unwrap();
        let b = m.boundary_vertices();
        let red = dtn_matrix(&k, &b).unwrap();
        let g: Vec<f64> = (0..b.len()).map(|i| (i as f64 * 0.9).cos()).collect();
        let gv = nalgebra::DVector::from_vec(g.clone());
        let energy_schur = (&red.dtn.matrix * &gv).dot(&gv);
        let u = red.harmonic_extension(&g);
        let energy_direct = k.quad_form(&u);
        assert_relative_eq!(energy_schur, energy_direct, max_relative = 1e-9);

        // any other extension has larger energy
        let mut worse = u.clone();
        for (i, w) in worse.iter_mut().enumerate() {
            if !b.contains(&i) {
                *w += 0.1 * ((i as f64).sin());
            }
        }
        assert!(k.quad_form(&worse) >= energy_direct);
    }
}
