//! Constructive trial-function certificates for the min-max principle:
//! families of plateau/linear-decay cutoffs with disjoint supports whose
//! worst Rayleigh quotient upper-bounds the discrete σ_k exactly.

use super::BoundsError;
use super::{BoundDirection, BoundOptions, BoundOutcome, BoundReport, InequalityId};
use crate::eigen::{rayleigh_ritz_max, SpectralResult};
use crate::fem::{rayleigh_quotient, VertexFunction};
use crate::mesh::SimplicialMesh;
use crate::metric::{
    multi_source_distances, separated_family, DistanceOracle, FiniteMetricMeasureSpace,
    MetricInvariantReport,
};
use crate::sparse::SparseSymMatrix;
use std::collections::BTreeMap;

/// Which proof's construction to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialFlavor {
    /// Separated centers on one boundary component, plateau 1 on
    /// B^M(x_i, δ/16k) decaying linearly to 0 at radius δ/8k.
    DiamProof,
    /// Separated family A_i on the boundary sample, f = max(0, 1 - d_M(·,A_i)/r).
    GeneralProof,
}

/// Family of trial functions with pairwise disjoint supports.
#[derive(Debug, Clone)]
pub struct TrialFamily {
    pub k: usize,
    pub functions: Vec<VertexFunction>,
    /// Seed vertices of each function (one center for DiamProof, the first
    /// subset vertex for GeneralProof).
    pub centers: Vec<usize>,
    /// Outer cutoff radius actually used.
    pub radius: f64,
    pub inner_radius: f64,
    pub rayleigh_quotients: Vec<f64>,
    pub support_volumes: Vec<f64>,
    /// No cell touches two supports; makes max_i R(f_i) an exact discrete
    /// certificate.
    pub cell_disjoint: bool,
}

/// Build a trial family on boundary component `component`.
pub fn build_trial_family(
    mesh: &SimplicialMesh,
    oracle: &DistanceOracle,
    inv: &MetricInvariantReport,
    component: usize,
    k: usize,
    flavor: TrialFlavor,
    stiffness: &SparseSymMatrix,
    boundary_mass: &SparseSymMatrix,
) -> Result<TrialFamily, BoundsError> {
    if k == 0 {
        return Err(BoundsError::InvalidParameter("k must be ≥ 1".into()));
    }
    let comp = inv
        .components
        .iter()
        .find(|c| c.label == component)
        .ok_or_else(|| BoundsError::MissingInvariant(format!("component {component}")))?;
    let members: Vec<usize> = (0..oracle.len())
        .filter(|&i| oracle.sample_component[i] == component)
        .collect();

    match flavor {
        TrialFlavor::DiamProof => {
            let delta = comp.diam_extrinsic;
            let need = 2 * k + 2;
            let min_sep = delta / (4.0 * k as f64);
            let centers = separated_centers(oracle, &members, need)?;
            // verify the pairwise separation the construction relies on
            for i in 0..centers.len() {
                for j in (i + 1)..centers.len() {
                    if oracle.d(centers[i], centers[j]) < min_sep {
                        return Err(BoundsError::SeparationInfeasible(format!(
                            "could not find {need} centers at pairwise distance ≥ {min_sep:.4}"
                        )));
                    }
                }
            }
            let r_in = delta / (16.0 * k as f64);
            // shrink the outer radius by half a cell diameter so no cell can
            // couple two supports (centers are ≥ 2 * nominal radius apart)
            let r_out = delta / (8.0 * k as f64) - mesh.max_cell_diameter() / 2.0 - 1e-12 * delta;
            if r_out <= r_in {
                return Err(BoundsError::SeparationInfeasible(format!(
                    "mesh too coarse for k = {k}: outer radius {r_out:.4} ≤ inner {r_in:.4}"
                )));
            }
            let mut family = Vec::new();
            for &c in &centers {
                let dist = oracle.distances_from(c);
                let values: Vec<f64> = dist
                    .iter()
                    .map(|&d| ((r_out - d) / (r_out - r_in)).clamp(0.0, 1.0))
                    .collect();
                family.push((oracle.sample[c], VertexFunction::new(values)));
            }
            assemble_family(
                mesh,
                family,
                k,
                r_out,
                r_in,
                stiffness,
                boundary_mass,
            )
        }
        TrialFlavor::GeneralProof => {
            let n = if mesh.is_closed() {
                mesh.dim()
            } else {
                mesh.dim() - 1
            } as f64;
            let big_k = 2 * k + 2;
            let n_pack = comp.packing_extrinsic.max(1);
            let c2 = 8.0
                * comp.growth
                * comp.distortion.powf(n)
                * (n_pack * n_pack) as f64;
            let r = (comp.measure / (c2 * big_k as f64)).powf(1.0 / n);

            // extrinsic metric restricted to this component's sample, with
            // boundary mass assigned to the nearest member sample
            let weights: Vec<f64> = {
                let masses = mesh
                    .boundary_vertex_weights(component)
                    .map_err(crate::metric::MetricError::from)?;
                let mut w = vec![0.0; members.len()];
                for (&v, &m) in &masses {
                    let mut best = (f64::INFINITY, usize::MAX);
                    for (pos, &i) in members.iter().enumerate() {
                        let d = oracle.distances_from(i)[v];
                        if d < best.0 {
                            best = (d, pos);
                        }
                    }
                    if best.1 != usize::MAX {
                        w[best.1] += m;
                    }
                }
                w
            };
            let dist: Vec<Vec<f64>> = members
                .iter()
                .map(|&i| members.iter().map(|&j| oracle.d(i, j)).collect())
                .collect();
            let space = FiniteMetricMeasureSpace::new(dist, weights)?;
            let fam = separated_family(&space, big_k, n_pack, r)?;

            let mut family = Vec::new();
            for subset in &fam.subsets {
                let sources: Vec<usize> =
                    subset.iter().map(|&i| oracle.sample[members[i]]).collect();
                let d = multi_source_distances(mesh, &sources);
                let values: Vec<f64> =
                    d.iter().map(|&x| (1.0 - x / r).max(0.0)).collect();
                family.push((sources[0], VertexFunction::new(values)));
            }
            assemble_family(mesh, family, k, r, 0.0, stiffness, boundary_mass)
        }
    }
}

/// Pick `need` well-separated sample points by farthest-point selection in
/// the sampled metric, starting from the smallest vertex id.
fn separated_centers(
    oracle: &DistanceOracle,
    members: &[usize],
    need: usize,
) -> Result<Vec<usize>, BoundsError> {
    if members.len() < need {
        return Err(BoundsError::SeparationInfeasible(format!(
            "component sample has {} points, need {need}",
            members.len()
        )));
    }
    let start = members
        .iter()
        .copied()
        .min_by_key(|&i| oracle.sample[i])
        .unwrap();
    let mut selected = vec![start];
    while selected.len() < need {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for &m in members {
            if selected.contains(&m) {
                continue;
            }
            let d = selected
                .iter()
                .map(|&s| oracle.d(s, m))
                .fold(f64::INFINITY, f64::min);
            if d > best.0 || (d == best.0 && oracle.sample[m] < oracle.sample.get(best.1).copied().unwrap_or(usize::MAX)) {
                best = (d, m);
            }
        }
        if best.1 == usize::MAX {
            return Err(BoundsError::SeparationInfeasible(
                "ran out of candidate centers".into(),
            ));
        }
        selected.push(best.1);
    }
    Ok(selected)
}

/// Keep the k+1 functions of smallest support volume, verify disjointness
/// and evaluate Rayleigh quotients.
fn assemble_family(
    mesh: &SimplicialMesh,
    candidates: Vec<(usize, VertexFunction)>,
    k: usize,
    radius: f64,
    inner_radius: f64,
    stiffness: &SparseSymMatrix,
    boundary_mass: &SparseSymMatrix,
) -> Result<TrialFamily, BoundsError> {
    let arity = mesh.dim() + 1;
    let support_volume = |f: &VertexFunction| -> f64 {
        (0..mesh.num_cells())
            .filter(|&c| mesh.cell(c).iter().any(|&v| f.values[v] > 0.0))
            .map(|c| mesh.cell_volume(c))
            .sum()
    };
    let mut with_vol: Vec<(usize, VertexFunction, f64)> = candidates
        .into_iter()
        .map(|(c, f)| {
            let vol = support_volume(&f);
            (c, f, vol)
        })
        .collect();
    with_vol.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    with_vol.truncate(k + 1);
    if with_vol.len() < k + 1 {
        return Err(BoundsError::NotEnoughFunctions {
            need: k + 1,
            got: with_vol.len(),
        });
    }

    // cell-level disjointness: no cell may touch two supports
    let mut owner: Vec<Option<usize>> = vec![None; mesh.num_cells()];
    let mut cell_disjoint = true;
    'outer: for (fi, (_, f, _)) in with_vol.iter().enumerate() {
        for c in 0..mesh.num_cells() {
            if mesh.cell(c).iter().any(|&v| f.values[v] > 0.0) {
                match owner[c] {
                    None => owner[c] = Some(fi),
                    Some(other) if other != fi => {
                        cell_disjoint = false;
                        break 'outer;
                    }
                    _ => {}
                }
            }
        }
    }
    let _ = arity;

    let mut functions = Vec::with_capacity(k + 1);
    let mut centers = Vec::with_capacity(k + 1);
    let mut quotients = Vec::with_capacity(k + 1);
    let mut volumes = Vec::with_capacity(k + 1);
    for (c, f, vol) in with_vol {
        quotients.push(rayleigh_quotient(stiffness, boundary_mass, &f)?);
        functions.push(f);
        centers.push(c);
        volumes.push(vol);
    }
    Ok(TrialFamily {
        k,
        functions,
        centers,
        radius,
        inner_radius,
        rayleigh_quotients: quotients,
        support_volumes: volumes,
        cell_disjoint,
    })
}

impl TrialFamily {
    /// Family of the first k+1 discrete eigenvectors; supports overlap, so
    /// certification uses the Rayleigh-Ritz route, which is tight.
    pub fn from_eigenvectors(
        spectrum: &SpectralResult,
        k: usize,
        stiffness: &SparseSymMatrix,
        boundary_mass: &SparseSymMatrix,
    ) -> Result<TrialFamily, BoundsError> {
        if spectrum.eigenvectors.len() < k + 1 {
            return Err(BoundsError::NotEnoughFunctions {
                need: k + 1,
                got: spectrum.eigenvectors.len(),
            });
        }
        let functions: Vec<VertexFunction> = spectrum.eigenvectors[..=k].to_vec();
        let quotients: Vec<f64> = functions
            .iter()
            .map(|f| rayleigh_quotient(stiffness, boundary_mass, f))
            .collect::<Result<_, _>>()?;
        Ok(TrialFamily {
            k,
            centers: vec![0; k + 1],
            radius: 0.0,
            inner_radius: 0.0,
            rayleigh_quotients: quotients,
            support_volumes: vec![0.0; k + 1],
            cell_disjoint: false,
            functions,
        })
    }
}

/// Certify σ_k from a trial family. Disjoint-support families certify with
/// rhs = max_i R(f_i); overlapping families fall back to the Rayleigh-Ritz
/// maximum over their span. Both are exact discrete bounds, so the check
/// runs at tolerance 1e-9.
pub fn certify_sigma_k(
    sigma_k: f64,
    k: usize,
    family: &TrialFamily,
    stiffness: &SparseSymMatrix,
    boundary_mass: &SparseSymMatrix,
    _opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    if family.functions.len() < k + 1 {
        return Err(BoundsError::NotEnoughFunctions {
            need: k + 1,
            got: family.functions.len(),
        });
    }
    let funcs = &family.functions[..=k];
    let (rhs, route) = if family.cell_disjoint {
        let worst = family.rayleigh_quotients[..=k]
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        (worst, 1.0)
    } else {
        (rayleigh_ritz_max(stiffness, boundary_mass, funcs)?, 2.0)
    };
    const CERT_TOL: f64 = 1e-9;
    let pass = sigma_k <= rhs * (1.0 + CERT_TOL);
    let constants = BTreeMap::from([
        ("route_disjoint_max_1_ritz_2".into(), route),
        ("family_size".into(), (k + 1) as f64),
        ("radius".into(), family.radius),
    ]);
    Ok(BoundReport {
        inequality_id: InequalityId::TrialCertificate,
        k,
        lhs: sigma_k,
        rhs,
        constants_used: constants,
        pass,
        outcome: if pass { BoundOutcome::Pass } else { BoundOutcome::Fail },
        slack: if sigma_k > 0.0 { rhs / sigma_k } else { f64::INFINITY },
        direction: BoundDirection::LhsAtMostRhs,
        component: None,
        note: None,
    })
}
