//! Piecewise-linear finite element assembly: Dirichlet energy (stiffness),
//! volume mass and boundary mass matrices, and the Rayleigh-Steklov quotient
//! u'Ku / u'Bu.
//!
//! 1D and 2D assembly is intrinsic (edge lengths only; cotangent formula in
//! 2D), 3D uses per-tetrahedron shape-function gradients.

use crate::mesh::SimplicialMesh;
use crate::sparse::{SparseError, SparseSymMatrix};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("degenerate simplex {cell} (measure {measure:.3e})")]
    DegenerateSimplex { cell: usize, measure: f64 },
    #[error("mesh has no boundary faces (after filtering)")]
    EmptyBoundary,
    #[error("boundary norm of the function is zero")]
    ZeroBoundaryNorm,
    #[error("vertex function has length {got}, mesh has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Real-valued function sampled at mesh vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    pub values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            values: vec![value; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Mass matrix discretization scheme. Lumped is the default throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassScheme {
    #[default]
    Lumped,
    Consistent,
}

const DEGENERATE_TOL: f64 = 1e-300;

/// Stiffness matrix K discretizing the Dirichlet energy: u'Ku equals the
/// integral of |grad u|^2 for the piecewise-linear interpolant. Symmetric
/// PSD with constants in the kernel.
pub fn assemble_stiffness(mesh: &SimplicialMesh) -> Result<SparseSymMatrix, FemError> {
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    match mesh.dim() {
        1 => {
            for c in 0..mesh.num_cells() {
                let cell = mesh.cell(c);
                let l = mesh.edge_length(cell[0], cell[1]);
                if l <= DEGENERATE_TOL {
                    return Err(FemError::DegenerateSimplex { cell: c, measure: l });
                }
                let w = 1.0 / l;
                triplets.push((cell[0], cell[0], w));
                triplets.push((cell[1], cell[1], w));
                triplets.push((cell[0], cell[1], -w));
            }
        }
        2 => {
            for c in 0..mesh.num_cells() {
                let cell = mesh.cell(c);
                let area = mesh.cell_volume(c);
                if area <= DEGENERATE_TOL {
                    return Err(FemError::DegenerateSimplex { cell: c, measure: area });
                }
                // cot(angle at vertex k) = (l_i^2 + l_j^2 - l_k^2) / (4 area),
                // where l_k is the edge opposite vertex k.
                let l = [
                    mesh.edge_length(cell[1], cell[2]),
                    mesh.edge_length(cell[0], cell[2]),
                    mesh.edge_length(cell[0], cell[1]),
                ];
                for k in 0..3 {
                    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                    let cot =
                        (l[i] * l[i] + l[j] * l[j] - l[k] * l[k]) / (4.0 * area);
                    let w = 0.5 * cot;
                    // edge (i, j) is opposite vertex k
                    triplets.push((cell[i], cell[j], -w));
                    triplets.push((cell[i], cell[i], w));
                    triplets.push((cell[j], cell[j], w));
                }
            }
        }
        3 => {
            for c in 0..mesh.num_cells() {
                let cell = mesh.cell(c);
                let vol = mesh.cell_volume(c);
                if vol <= DEGENERATE_TOL {
                    return Err(FemError::DegenerateSimplex { cell: c, measure: vol });
                }
                let grads = tet_gradients(mesh, cell, vol);
                for i in 0..4 {
                    for j in i..4 {
                        let dot: f64 = (0..3).map(|d| grads[i][d] * grads[j][d]).sum();
                        triplets.push((cell[i], cell[j], dot * vol));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(SparseSymMatrix::from_triplets(mesh.num_vertices(), triplets)?)
}

/// Gradients of the four linear shape functions on a tetrahedron.
fn tet_gradients(mesh: &SimplicialMesh, cell: &[usize], vol: f64) -> [[f64; 3]; 4] {
    let p: Vec<[f64; 3]> = cell.iter().map(|&v| mesh.vertices()[v]).collect();
    let mut grads = [[0.0; 3]; 4];
    for i in 0..4 {
        // Opposite face (the other three vertices); grad phi_i is the inward
        // normal scaled by face area / (3 vol).
        let o: Vec<[f64; 3]> = (0..4).filter(|&k| k != i).map(|k| p[k]).collect();
        let u = [o[1][0] - o[0][0], o[1][1] - o[0][1], o[1][2] - o[0][2]];
        let v = [o[2][0] - o[0][0], o[2][1] - o[0][1], o[2][2] - o[0][2]];
        let mut n = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        // orient towards vertex i
        let d: f64 = (0..3).map(|k| n[k] * (p[i][k] - o[0][k])).sum();
        if d < 0.0 {
            for nk in &mut n {
                *nk = -*nk;
            }
        }
        for k in 0..3 {
            grads[i][k] = n[k] / (6.0 * vol);
        }
    }
    grads
}

/// Volume mass matrix M; symmetric positive definite with 1'M1 = |M|.
pub fn assemble_mass(mesh: &SimplicialMesh, scheme: MassScheme) -> Result<SparseSymMatrix, FemError> {
    let arity = mesh.dim() + 1;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let vol = mesh.cell_volume(c);
        if vol <= DEGENERATE_TOL {
            return Err(FemError::DegenerateSimplex { cell: c, measure: vol });
        }
        simplex_mass(cell, vol, arity, scheme, &mut triplets);
    }
    Ok(SparseSymMatrix::from_triplets(mesh.num_vertices(), triplets)?)
}

fn simplex_mass(
    cell: &[usize],
    measure: f64,
    arity: usize,
    scheme: MassScheme,
    triplets: &mut Vec<(usize, usize, f64)>,
) {
    match scheme {
        MassScheme::Lumped => {
            let share = measure / arity as f64;
            for &v in cell {
                triplets.push((v, v, share));
            }
        }
        MassScheme::Consistent => {
            // P1 mass on a d-simplex: measure/((d+1)(d+2)) * (1 + delta_ij)
            let base = measure / ((arity * (arity + 1)) as f64);
            for i in 0..arity {
                for j in i..arity {
                    let w = if i == j { 2.0 * base } else { base };
                    triplets.push((cell[i], cell[j], w));
                }
            }
        }
    }
}

/// Boundary mass matrix B, supported on boundary vertices; 1'B1 = |Σ| (or
/// the filtered components' measure). `filter` selects component labels.
pub fn assemble_boundary_mass(
    mesh: &SimplicialMesh,
    filter: Option<&BTreeSet<usize>>,
    scheme: MassScheme,
) -> Result<SparseSymMatrix, FemError> {
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut any = false;
    for f in 0..mesh.num_boundary_faces() {
        if let Some(labels) = filter {
            if !labels.contains(&mesh.boundary_face_label(f)) {
                continue;
            }
        }
        any = true;
        let face = mesh.boundary_face(f);
        let measure = mesh.boundary_face_measure(f);
        simplex_mass(face, measure, face.len(), scheme, &mut triplets);
    }
    if !any {
        return Err(FemError::EmptyBoundary);
    }
    Ok(SparseSymMatrix::from_triplets(mesh.num_vertices(), triplets)?)
}

/// Rayleigh-Steklov quotient u'Ku / u'Bu.
pub fn rayleigh_quotient(
    stiffness: &SparseSymMatrix,
    boundary_mass: &SparseSymMatrix,
    u: &VertexFunction,
) -> Result<f64, FemError> {
    if u.len() != stiffness.dim() {
        return Err(FemError::LengthMismatch {
            expected: stiffness.dim(),
            got: u.len(),
        });
    }
    let denom = boundary_mass.quad_form(u.as_slice());
    if denom <= 0.0 {
        return Err(FemError::ZeroBoundaryNorm);
    }
    Ok(stiffness.quad_form(u.as_slice()) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{self, SimplicialMesh};
    use approx::assert_relative_eq;

    fn unit_right_triangle() -> SimplicialMesh {
        SimplicialMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![0, 1, 2],
        )
        .unwrap()
    }

    fn unit_square() -> SimplicialMesh {
        mesh::shapes::rectangle(1.0, 1.0, 0.2).unwrap()
    }

    #[test]
    fn single_triangle_cotangent_matrix() {
        let k = assemble_stiffness(&unit_right_triangle()).unwrap();
        let d = k.to_dense();
        // cot at the right angle is 0, cot at the 45-degree corners is 1
        assert_relative_eq!(d[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(d[(0, 1)], -0.5, epsilon = 1e-14);
        assert_relative_eq!(d[(1, 2)], 0.0, epsilon = 1e-14);
        for s in k.row_sums() {
            assert_relative_eq!(s, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn constants_in_stiffness_kernel() {
        let m = unit_square();
        let k = assemble_stiffness(&m).unwrap();
        let ones = VertexFunction::constant(m.num_vertices(), 3.0);
        assert_relative_eq!(k.quad_form(ones.as_slice()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_function_energy_is_exact() {
        // u = x on the unit square: integral of |grad u|^2 = area = 1.
        let m = unit_square();
        let k = assemble_stiffness(&m).unwrap();
        let u: Vec<f64> = m.vertices().iter().map(|p| p[0]).collect();
        assert_relative_eq!(k.quad_form(&u), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lumped_mass_of_triangle() {
        let m = unit_right_triangle();
        let mm = assemble_mass(&m, MassScheme::Lumped).unwrap();
        let d = mm.diagonal();
        for v in d {
            assert_relative_eq!(v, 1.0 / 6.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn mass_totals_agree_between_schemes() {
        let m = mesh::shapes::disk(1.0, 0.15).unwrap();
        let lumped = assemble_mass(&m, MassScheme::Lumped).unwrap();
        let consistent = assemble_mass(&m, MassScheme::Consistent).unwrap();
        let ones = vec![1.0; m.num_vertices()];
        assert_relative_eq!(lumped.quad_form(&ones), m.volume(), max_relative = 1e-12);
        assert_relative_eq!(
            consistent.quad_form(&ones),
            m.volume(),
            max_relative = 1e-12
        );
        // both SPD: positive quadratic form on a generic vector
        let x: Vec<f64> = (0..m.num_vertices()).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        assert!(lumped.quad_form(&x) > 0.0);
        assert!(consistent.quad_form(&x) > 0.0);
    }

    #[test]
    fn boundary_mass_perimeter_and_support() {
        let m = unit_square();
        let b = assemble_boundary_mass(&m, None, MassScheme::Lumped).unwrap();
        let ones = vec![1.0; m.num_vertices()];
        assert_relative_eq!(b.quad_form(&ones), 4.0, epsilon = 1e-12);
        // interior rows identically zero
        let boundary: std::collections::BTreeSet<usize> =
            m.boundary_vertices().into_iter().collect();
        for &(i, j, v) in b.entries() {
            assert!(boundary.contains(&i) && boundary.contains(&j) && v != 0.0);
        }
    }

    #[test]
    fn boundary_mass_component_filter() {
        let m = mesh::shapes::annulus(0.5, 1.0, 0.05).unwrap();
        // label 1 is the outer circle (larger measure)
        let filter: BTreeSet<usize> = [1usize].into_iter().collect();
        let b = assemble_boundary_mass(&m, Some(&filter), MassScheme::Lumped).unwrap();
        let ones = vec![1.0; m.num_vertices()];
        assert_relative_eq!(
            b.quad_form(&ones),
            2.0 * std::f64::consts::PI,
            max_relative = 0.02
        );
        let empty: BTreeSet<usize> = [7usize].into_iter().collect();
        assert!(matches!(
            assemble_boundary_mass(&m, Some(&empty), MassScheme::Lumped),
            Err(FemError::EmptyBoundary)
        ));
    }

    #[test]
    fn rayleigh_quotient_cases() {
        let m = unit_square();
        let k = assemble_stiffness(&m).unwrap();
        let b = assemble_boundary_mass(&m, None, MassScheme::Lumped).unwrap();
        let c = VertexFunction::constant(m.num_vertices(), 2.0);
        assert_relative_eq!(rayleigh_quotient(&k, &b, &c).unwrap(), 0.0, epsilon = 1e-14);

        // vanish on the boundary, nonzero inside
        let boundary: BTreeSet<usize> = m.boundary_vertices().into_iter().collect();
        let u: Vec<f64> = (0..m.num_vertices())
            .map(|i| if boundary.contains(&i) { 0.0 } else { 1.0 })
            .collect();
        assert!(matches!(
            rayleigh_quotient(&k, &b, &VertexFunction::new(u)),
            Err(FemError::ZeroBoundaryNorm)
        ));
    }

    #[test]
    fn stiffness_scale_invariance_2d() {
        let m = mesh::shapes::disk(1.0, 0.2).unwrap();
        let s = m.scaled(2.0).unwrap();
        let k1 = assemble_stiffness(&m).unwrap();
        let k2 = assemble_stiffness(&s).unwrap();
        let x: Vec<f64> = (0..m.num_vertices()).map(|i| (i as f64 * 0.7).sin()).collect();
        assert_relative_eq!(k1.quad_form(&x), k2.quad_form(&x), max_relative = 1e-12);
        // M scales by t^2, B by t
        let m1 = assemble_mass(&m, MassScheme::Lumped).unwrap();
        let m2 = assemble_mass(&s, MassScheme::Lumped).unwrap();
        assert_relative_eq!(4.0 * m1.quad_form(&x), m2.quad_form(&x), max_relative = 1e-12);
        let b1 = assemble_boundary_mass(&m, None, MassScheme::Lumped).unwrap();
        let b2 = assemble_boundary_mass(&s, None, MassScheme::Lumped).unwrap();
        assert_relative_eq!(2.0 * b1.quad_form(&x), b2.quad_form(&x), max_relative = 1e-12);
    }

    #[test]
    fn stiffness_scaling_3d() {
        let m = SimplicialMesh::new(
            3,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
            vec![0, 1, 2, 3],
        )
        .unwrap();
        let s = m.scaled(2.0).unwrap();
        let k1 = assemble_stiffness(&m).unwrap();
        let k2 = assemble_stiffness(&s).unwrap();
        let x = vec![0.3, -1.0, 2.0, 0.5];
        // K scales by t in 3D
        assert_relative_eq!(2.0 * k1.quad_form(&x), k2.quad_form(&x), max_relative = 1e-12);
        // linear function u = x has energy vol * 1
        let u: Vec<f64> = m.vertices().iter().map(|p| p[0]).collect();
        assert_relative_eq!(k1.quad_form(&u), m.volume(), max_relative = 1e-12);
        for r in k1.row_sums() {
            assert_relative_eq!(r, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn quadratic_form_gradient_matches_finite_differences() {
        let m = mesh::shapes::disk(1.0, 0.3).unwrap();
        let k = assemble_stiffness(&m).unwrap();
        let n = m.num_vertices();
        let u: Vec<f64> = (0..n).map(|i| ((i * 29 % 11) as f64) / 11.0).collect();
        let w: Vec<f64> = (0..n).map(|i| ((i * 17 % 7) as f64) / 7.0 - 0.4).collect();
        // directional derivative of u -> u'Ku along w is 2 w'Ku
        let analytic = 2.0 * k.bilinear(&w, &u);
        let eps = 1e-6;
        let up: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + eps * b).collect();
        let um: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - eps * b).collect();
        let fd = (k.quad_form(&up) - k.quad_form(&um)) / (2.0 * eps);
        assert_relative_eq!(analytic, fd, max_relative = 1e-6);
    }
}
