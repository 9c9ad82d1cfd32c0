//! Generalized symmetric eigensolvers, the discrete Dirichlet-to-Neumann
//! reduction and the Steklov/Laplace spectrum front ends.
//!
//! Steklov path: Schur-complement the stiffness matrix onto the boundary
//! (one dimension lower), then solve the dense pencil (S, B_bb). Laplace
//! path: dense transform for small meshes, shift-invert Lanczos above.

mod dtn;
mod lanczos;

pub use dtn::{dtn_matrix, DtnMatrix, DtnReduction};
pub use lanczos::smallest_eigenpairs_sparse;

use crate::fem::{self, FemError, MassScheme, VertexFunction};
use crate::mesh::{MeshError, SimplicialMesh};
use crate::sparse::{SparseError, SparseSymMatrix};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("eigensolver failed to converge (residual {achieved:.3e}, tol {tol:.3e})")]
    ConvergenceFailure { achieved: f64, tol: f64 },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("interior block is singular (disconnected interior or degenerate mesh)")]
    SingularInteriorBlock,
    #[error("mesh has a boundary; the Laplace path needs a closed mesh")]
    HasBoundary,
    #[error("mesh is closed; the Steklov path needs a boundary")]
    EmptyBoundary,
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralKind {
    Steklov,
    Laplace,
    Pencil,
}

/// Ascending eigenvalues with eigenvectors and residual norms.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub kind: SpectralKind,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<VertexFunction>,
    pub residuals: Vec<f64>,
    pub k_requested: usize,
    pub mesh_fingerprint: Option<String>,
}

impl SpectralResult {
    /// σ_k / λ_k by index; index 0 is the first (≈ zero) eigenvalue.
    pub fn value(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    /// Group eigenvalue indices into multiplicity clusters using a relative
    /// gap threshold.
    pub fn multiplicity_clusters(&self, rel_gap: f64) -> Vec<Vec<usize>> {
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (i, &ev) in self.eigenvalues.iter().enumerate() {
            match clusters.last_mut() {
                Some(c) => {
                    let prev = self.eigenvalues[*c.last().unwrap()];
                    let scale = prev.abs().max(ev.abs()).max(1e-300);
                    if (ev - prev).abs() <= rel_gap * scale {
                        c.push(i);
                    } else {
                        clusters.push(vec![i]);
                    }
                }
                None => clusters.push(vec![i]),
            }
        }
        clusters
    }

    /// JSON summary: kind, eigenvalues, residuals, mesh fingerprint.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "k_requested": self.k_requested,
            "eigenvalues": self.eigenvalues,
            "residuals": self.residuals,
            "mesh_fingerprint": self.mesh_fingerprint,
        })
    }
}

/// Problems at or below this dimension use the dense path.
const DENSE_LIMIT: usize = 900;
/// Relative threshold for treating a B-eigenvalue as zero.
const B_KERNEL_REL: f64 = 1e-12;

/// Smallest k+1 eigenpairs of A v = θ B v restricted to the
/// B-nondegenerate subspace. A must be symmetric PSD; B symmetric PSD with
/// A positive definite on ker B.
pub fn solve_generalized(
    a: &SparseSymMatrix,
    b: &SparseSymMatrix,
    k: usize,
    tol: f64,
) -> Result<SpectralResult, EigenError> {
    if a.dim() != b.dim() {
        return Err(EigenError::DimensionMismatch {
            context: format!("A is {}x{0}, B is {1}x{1}", a.dim(), b.dim()),
        });
    }
    let n = a.dim();
    let want = (k + 1).min(n);
    let (eigenvalues, vectors, residuals) = if n <= DENSE_LIMIT {
        let (ev, vecs) = dense_generalized(&a.to_dense(), &b.to_dense(), want)?;
        let res = residuals_of(a, b, &ev, &vecs);
        (ev, vecs, res)
    } else {
        let pairs = smallest_eigenpairs_sparse(a, b, want, tol)?;
        (pairs.eigenvalues, pairs.eigenvectors, pairs.residuals)
    };
    let worst = residuals.iter().cloned().fold(0.0f64, f64::max);
    if worst > tol {
        return Err(EigenError::ConvergenceFailure {
            achieved: worst,
            tol,
        });
    }
    Ok(SpectralResult {
        kind: SpectralKind::Pencil,
        eigenvalues,
        eigenvectors: vectors.into_iter().map(VertexFunction::new).collect(),
        residuals,
        k_requested: k,
        mesh_fingerprint: None,
    })
}

fn residuals_of(
    a: &SparseSymMatrix,
    b: &SparseSymMatrix,
    evs: &[f64],
    vecs: &[Vec<f64>],
) -> Vec<f64> {
    evs.iter()
        .zip(vecs)
        .map(|(&ev, v)| {
            let av = a.matvec(v);
            let bv = b.matvec(v);
            let num: f64 = av
                .iter()
                .zip(&bv)
                .map(|(p, q)| (p - ev * q).powi(2))
                .sum::<f64>()
                .sqrt();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            num / nv
        })
        .collect()
}

/// Dense solve of the pencil (A, B), eliminating ker B through a Schur
/// complement (A must be positive definite there).
fn dense_generalized(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    want: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
    let n = a.nrows();
    let eig_b = SymmetricEigen::new(b.clone());
    let bmax = eig_b
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let thresh = bmax * B_KERNEL_REL;
    let pos: Vec<usize> = (0..n).filter(|&i| eig_b.eigenvalues[i] > thresh).collect();
    let null: Vec<usize> = (0..n).filter(|&i| eig_b.eigenvalues[i] <= thresh).collect();
    if pos.is_empty() {
        return Err(EigenError::DimensionMismatch {
            context: "B has no positive eigenvalues".into(),
        });
    }

    let q_pos = eig_b.eigenvectors.select_columns(pos.iter());
    let lam_half_inv =
        DVector::from_iterator(pos.len(), pos.iter().map(|&i| 1.0 / eig_b.eigenvalues[i].sqrt()));

    // Reduce A onto the positive subspace, folding in the kernel by a Schur
    // complement when ker B is nontrivial.
    let (s_red, null_coupling) = if null.is_empty() {
        (q_pos.transpose() * a * &q_pos, None)
    } else {
        let q_null = eig_b.eigenvectors.select_columns(null.iter());
        let a_pp = q_pos.transpose() * a * &q_pos;
        let a_pn = q_pos.transpose() * a * &q_null;
        let a_nn = q_null.transpose() * a * &q_null;
        let chol = a_nn
            .cholesky()
            .ok_or(EigenError::SingularInteriorBlock)?;
        let x = chol.solve(&a_pn.transpose()); // A_nn^{-1} A_np
        let s = &a_pp - &a_pn * &x;
        (s, Some((q_null, x)))
    };

    // Whiten with Λ_+^{-1/2} and solve the standard symmetric problem.
    let np = pos.len();
    let mut c = s_red;
    for i in 0..np {
        for j in 0..np {
            c[(i, j)] *= lam_half_inv[i] * lam_half_inv[j];
        }
    }
    // symmetrize roundoff
    for i in 0..np {
        for j in (i + 1)..np {
            let m = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = m;
            c[(j, i)] = m;
        }
    }
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..np).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());

    let take = want.min(np);
    let mut evs = Vec::with_capacity(take);
    let mut vecs = Vec::with_capacity(take);
    for &idx in order.iter().take(take) {
        evs.push(eig.eigenvalues[idx]);
        let y = eig.eigenvectors.column(idx);
        let u_pos = DVector::from_iterator(np, (0..np).map(|i| lam_half_inv[i] * y[i]));
        let mut v = &q_pos * &u_pos;
        if let Some((q_null, x)) = &null_coupling {
            let u_null = -(x * &u_pos);
            v += q_null * u_null;
        }
        vecs.push(v.iter().cloned().collect());
    }
    Ok((evs, vecs))
}

/// Largest eigenvalue of the pencil (A, B) projected onto the span of the
/// given functions (Rayleigh-Ritz). The span must be B-nondegenerate; the
/// result is an exact discrete upper bound for σ_{m-1} when m functions are
/// supplied.
pub fn rayleigh_ritz_max(
    a: &SparseSymMatrix,
    b: &SparseSymMatrix,
    functions: &[VertexFunction],
) -> Result<f64, EigenError> {
    let m = functions.len();
    if m == 0 {
        return Err(EigenError::DimensionMismatch {
            context: "empty trial span".into(),
        });
    }
    let mut gram_a = DMatrix::zeros(m, m);
    let mut gram_b = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let va = a.bilinear(functions[i].as_slice(), functions[j].as_slice());
            let vb = b.bilinear(functions[i].as_slice(), functions[j].as_slice());
            gram_a[(i, j)] = va;
            gram_a[(j, i)] = va;
            gram_b[(i, j)] = vb;
            gram_b[(j, i)] = vb;
        }
    }
    if gram_b.clone().cholesky().is_none() {
        return Err(EigenError::DimensionMismatch {
            context: "trial span is B-degenerate".into(),
        });
    }
    let (evs, _) = dense_generalized(&gram_a, &gram_b, m)?;
    evs.last()
        .cloned()
        .ok_or(EigenError::DimensionMismatch {
            context: "no Ritz values".into(),
        })
}

/// Steklov spectrum via the dense DtN operator: eigenvalues of
/// S v = σ B_bb v with the lumped boundary mass.
pub fn steklov_spectrum(
    mesh: &SimplicialMesh,
    k: usize,
    tol: f64,
) -> Result<SpectralResult, EigenError> {
    if mesh.is_closed() {
        return Err(EigenError::EmptyBoundary);
    }
    let stiffness = fem::assemble_stiffness(mesh)?;
    let boundary_mass = fem::assemble_boundary_mass(mesh, None, MassScheme::Lumped)?;
    let boundary = mesh.boundary_vertices();
    let reduction = dtn_matrix(&stiffness, &boundary)?;

    let nb = boundary.len();
    let mass_diag = boundary_mass.diagonal();
    let d: Vec<f64> = boundary.iter().map(|&v| mass_diag[v]).collect();
    if d.iter().any(|&x| x <= 0.0) {
        return Err(EigenError::DimensionMismatch {
            context: "boundary mass has a nonpositive diagonal entry".into(),
        });
    }

    let mut c = reduction.dtn.matrix.clone();
    let dinv: Vec<f64> = d.iter().map(|&x| 1.0 / x.sqrt()).collect();
    for i in 0..nb {
        for j in 0..nb {
            c[(i, j)] *= dinv[i] * dinv[j];
        }
    }
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..nb).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());

    let want = (k + 1).min(nb);
    let mut eigenvalues = Vec::with_capacity(want);
    let mut eigenvectors = Vec::with_capacity(want);
    let mut residuals = Vec::with_capacity(want);
    for &idx in order.iter().take(want) {
        let sigma = eig.eigenvalues[idx];
        let y = eig.eigenvectors.column(idx);
        let g: Vec<f64> = (0..nb).map(|i| dinv[i] * y[i]).collect();
        let gv = DVector::from_vec(g.clone());
        let sg = &reduction.dtn.matrix * &gv;
        let res = (0..nb)
            .map(|i| (sg[i] - sigma * d[i] * g[i]).powi(2))
            .sum::<f64>()
            .sqrt()
            / gv.norm();
        if res > tol {
            return Err(EigenError::ConvergenceFailure {
                achieved: res,
                tol,
            });
        }
        eigenvalues.push(sigma);
        residuals.push(res);
        eigenvectors.push(VertexFunction::new(reduction.harmonic_extension(&g)));
    }

    Ok(SpectralResult {
        kind: SpectralKind::Steklov,
        eigenvalues,
        eigenvectors,
        residuals,
        k_requested: k,
        mesh_fingerprint: Some(mesh.fingerprint()),
    })
}

/// Laplace spectrum of a closed mesh: eigenvalues of K v = λ M v.
pub fn laplace_spectrum(
    mesh: &SimplicialMesh,
    k: usize,
    tol: f64,
) -> Result<SpectralResult, EigenError> {
    if !mesh.is_closed() {
        return Err(EigenError::HasBoundary);
    }
    let stiffness = fem::assemble_stiffness(mesh)?;
    let mass = fem::assemble_mass(mesh, MassScheme::Lumped)?;
    let mut result = solve_generalized(&stiffness, &mass, k, tol)?;
    result.kind = SpectralKind::Laplace;
    result.mesh_fingerprint = Some(mesh.fingerprint());
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::mesh::shapes;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn diagonal_pencil() {
        let a = SparseSymMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let b = SparseSymMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let r = solve_generalized(&a, &b, 1, 1e-8).unwrap();
        assert_relative_eq!(r.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.eigenvalues[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn path_graph_laplacian() {
        // 3-node path Laplacian: eigenvalues {0, 1, 3}
        let a = SparseSymMatrix::from_triplets(
            3,
            vec![
                (0, 0, 1.0),
                (1, 1, 2.0),
                (2, 2, 1.0),
                (0, 1, -1.0),
                (1, 2, -1.0),
            ],
        )
        .unwrap();
        let b = SparseSymMatrix::from_diagonal(&[1.0, 1.0, 1.0]);
        let r = solve_generalized(&a, &b, 2, 1e-8).unwrap();
        assert_relative_eq!(r.eigenvalues[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(r.eigenvalues[1], 1.0, epsilon = 1e-10);
        assert_relative_eq!(r.eigenvalues[2], 3.0, epsilon = 1e-10);
    }

    #[test]
    fn disk_steklov_matches_separation_of_variables() {
        let m = shapes::disk(1.0, 0.1).unwrap();
        let r = steklov_spectrum(&m, 6, 1e-8).unwrap();
        let oracle = analytic::disk_steklov(6);
        assert!(r.eigenvalues[0].abs() < 1e-8);
        for i in 1..=6 {
            assert_relative_eq!(r.eigenvalues[i], oracle[i], max_relative = 0.02);
        }
        // exact double multiplicities survive clustering
        let clusters = r.multiplicity_clusters(1e-2);
        assert_eq!(clusters[1].len(), 2);
    }

    #[test]
    fn steklov_scaling_homogeneity() {
        let m = shapes::disk(1.0, 0.15).unwrap();
        let r1 = steklov_spectrum(&m, 4, 1e-8).unwrap();
        let m2 = m.scaled(2.0).unwrap();
        let r2 = steklov_spectrum(&m2, 4, 1e-8).unwrap();
        for i in 1..=4 {
            assert_relative_eq!(r2.eigenvalues[i] * 2.0, r1.eigenvalues[i], max_relative = 1e-9);
        }
    }

    #[test]
    fn annulus_steklov_matches_analytic() {
        let m = shapes::annulus(0.5, 1.0, 0.05).unwrap();
        let r = steklov_spectrum(&m, 6, 1e-8).unwrap();
        let oracle = analytic::annulus_steklov(0.5, 1.0, 7);
        for i in 1..=5 {
            assert_relative_eq!(r.eigenvalues[i], oracle[i], max_relative = 0.02);
        }
    }

    #[test]
    fn circle_laplace_fourier() {
        let m = shapes::circle(1.0, 1.0 / 360.0).unwrap();
        let r = laplace_spectrum(&m, 4, 1e-8).unwrap();
        let tau = 2.0 * PI;
        assert!(r.eigenvalues[0].abs() < 1e-8);
        for (i, expect) in [tau * tau, tau * tau, 4.0 * tau * tau, 4.0 * tau * tau]
            .iter()
            .enumerate()
        {
            assert_relative_eq!(r.eigenvalues[i + 1], *expect, max_relative = 0.02);
        }
    }

    #[test]
    fn sphere_laplace_harmonics() {
        let m = shapes::icosphere(0.09).unwrap();
        let r = laplace_spectrum(&m, 4, 1e-7).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-7);
        for i in 1..=3 {
            assert_relative_eq!(r.eigenvalues[i], 2.0, max_relative = 0.03);
        }
        assert_relative_eq!(r.eigenvalues[4], 6.0, max_relative = 0.03);
    }

    #[test]
    fn torus_laplace_fourier() {
        let m = shapes::product_torus(10.0, 2.0 * PI, 0.2).unwrap();
        let r = laplace_spectrum(&m, 2, 1e-7).unwrap();
        let expect = (2.0 * PI / 10.0).powi(2);
        assert!(r.eigenvalues[0].abs() < 1e-7);
        assert_relative_eq!(r.eigenvalues[1], expect, max_relative = 0.03);
        assert_relative_eq!(r.eigenvalues[2], expect, max_relative = 0.03);
    }

    #[test]
    fn laplace_rejects_boundary() {
        let m = shapes::disk(1.0, 0.2).unwrap();
        assert!(matches!(
            laplace_spectrum(&m, 2, 1e-8),
            Err(EigenError::HasBoundary)
        ));
        let c = shapes::circle(1.0, 0.05).unwrap();
        assert!(matches!(
            steklov_spectrum(&c, 2, 1e-8),
            Err(EigenError::EmptyBoundary)
        ));
    }

    #[test]
    fn dtn_path_agrees_with_full_pencil() {
        // small disk: both routes to the Steklov spectrum agree to 1e-8
        let m = shapes::disk(1.0, 0.35).unwrap();
        assert!(m.num_vertices() <= 500);
        let k = fem::assemble_stiffness(&m).unwrap();
        let b = fem::assemble_boundary_mass(&m, None, MassScheme::Lumped).unwrap();
        let full = solve_generalized(&k, &b, 5, 1e-8).unwrap();
        let dtn = steklov_spectrum(&m, 5, 1e-8).unwrap();
        for i in 0..=5 {
            assert_relative_eq!(full.eigenvalues[i], dtn.eigenvalues[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn minmax_upper_bound_from_trial_vectors() {
        // Rayleigh-Ritz on any (j+1)-dim trial span bounds σ_j from above.
        let m = shapes::disk(1.0, 0.2).unwrap();
        let k = fem::assemble_stiffness(&m).unwrap();
        let b = fem::assemble_boundary_mass(&m, None, MassScheme::Lumped).unwrap();
        let spec = steklov_spectrum(&m, 3, 1e-8).unwrap();
        // trial vectors: first coordinates as crude functions
        let n = m.num_vertices();
        let trials: Vec<Vec<f64>> = vec![
            vec![1.0; n],
            m.vertices().iter().map(|p| p[0]).collect(),
            m.vertices().iter().map(|p| p[1]).collect(),
            m.vertices().iter().map(|p| p[0] * p[1]).collect(),
        ];
        let dim = trials.len();
        let mut kk = DMatrix::zeros(dim, dim);
        let mut bb = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                kk[(i, j)] = k.bilinear(&trials[i], &trials[j]);
                bb[(i, j)] = b.bilinear(&trials[i], &trials[j]);
            }
        }
        let (evs, _) = dense_generalized(&kk, &bb, dim).unwrap();
        let theta_max = evs.last().cloned().unwrap();
        assert!(
            spec.eigenvalues[3] <= theta_max * (1.0 + 1e-9),
            "sigma_3 = {} > ritz max {}",
            spec.eigenvalues[3],
            theta_max
        );
    }
}
