//! Inequality evaluation: explicit dimensional constants, the volume/packing
//! and diameter upper bounds for Steklov eigenvalues, their Laplace
//! corollaries, and the concentration checks. Each evaluator produces a
//! [`BoundReport`] recording both sides, the constants used and the verdict.

mod trial;

pub use trial::{build_trial_family, certify_sigma_k, TrialFamily, TrialFlavor};

use crate::eigen::EigenError;
use crate::fem::FemError;
use crate::mesh::SimplicialMesh;
use crate::metric::{DistanceOracle, MetricError, MetricInvariantReport};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("missing invariant: {0}")]
    MissingInvariant(String),
    #[error("subset is empty or carries no boundary measure")]
    EmptySubset,
    #[error("subsets overlap")]
    OverlappingSubsets,
    #[error("not enough trial functions: need {need}, got {got}")]
    NotEnoughFunctions { need: usize, got: usize },
    #[error("separated centers infeasible: {0}")]
    SeparationInfeasible(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    ThmMain,
    ThmGeneral,
    Reformulation,
    ThmDiam,
    CorGny,
    CorBergerCroke,
    CorConcentration,
    PropGromovMilman,
    GmConsequence,
    TrialCertificate,
}

impl InequalityId {
    pub fn name(&self) -> &'static str {
        match self {
            InequalityId::ThmMain => "thm_main",
            InequalityId::ThmGeneral => "thm_general",
            InequalityId::Reformulation => "reformulation",
            InequalityId::ThmDiam => "thm_diam",
            InequalityId::CorGny => "cor_gny",
            InequalityId::CorBergerCroke => "cor_berger_croke",
            InequalityId::CorConcentration => "cor_concentration",
            InequalityId::PropGromovMilman => "prop_gromov_milman",
            InequalityId::GmConsequence => "gm_consequence",
            InequalityId::TrialCertificate => "trial_certificate",
        }
    }
}

/// Which way the inequality points (gm_consequence is a lower bound on the
/// measured quantity; everything else is an upper bound).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    LhsAtMostRhs,
    LhsAtLeastRhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundOutcome {
    Pass,
    /// Failed the strict check but within the metric slack factor; sampled
    /// N/Γ estimates make the strict check harsher than the theorem.
    InconclusiveWithinSlack,
    Fail,
    /// Premise not met; the bound asserts nothing.
    Vacuous,
}

/// Per-inequality record: sides, constants, verdict and slack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub inequality_id: InequalityId,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub constants_used: BTreeMap<String, f64>,
    pub pass: bool,
    pub outcome: BoundOutcome,
    /// rhs/lhs for upper bounds, lhs/rhs for lower bounds.
    pub slack: f64,
    pub direction: BoundDirection,
    pub component: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Evaluation options: pass tolerance, metric slack factor, concentration
/// constant variant.
#[derive(Debug, Clone, Copy)]
pub struct BoundOptions {
    /// lhs ≤ rhs·(1 + tol) counts as a pass.
    pub tol: f64,
    /// Additional multiplicative slack on invariant-derived right-hand
    /// sides; failures within it are inconclusive, not hard failures.
    pub slack: f64,
    /// Additionally report the (n+2)-th-root concentration constant.
    pub sharp_concentration: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            slack: 1.0,
            sharp_concentration: false,
        }
    }
}

fn upper_bound_report(
    id: InequalityId,
    k: usize,
    lhs: f64,
    rhs: f64,
    constants: BTreeMap<String, f64>,
    component: Option<usize>,
    note: Option<String>,
    opts: &BoundOptions,
) -> BoundReport {
    let pass = lhs <= rhs * (1.0 + opts.tol);
    let outcome = if pass {
        BoundOutcome::Pass
    } else if lhs <= rhs * (1.0 + opts.tol) * opts.slack.max(1.0) {
        BoundOutcome::InconclusiveWithinSlack
    } else {
        BoundOutcome::Fail
    };
    BoundReport {
        inequality_id: id,
        k,
        lhs,
        rhs,
        constants_used: constants,
        pass,
        outcome,
        slack: if lhs > 0.0 { rhs / lhs } else { f64::INFINITY },
        direction: BoundDirection::LhsAtMostRhs,
        component,
        note,
    }
}

// -- dimensional constants ------------------------------------------------

/// Volume of the unit n-sphere: s_0 = 2, s_1 = 2π, s_n = 2π s_{n-2}/(n-1).
pub fn sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI * sphere_volume(n - 2) / (n - 1) as f64,
    }
}

/// γ(n) = 2^{n-1} s_{n-1}^n / (n^n s_n^{n-1}).
pub fn gamma_const(n: usize) -> f64 {
    assert!(n >= 1, "gamma_const needs n >= 1");
    let sn = sphere_volume(n);
    let snm1 = sphere_volume(n - 1);
    2f64.powi(n as i32 - 1) * snm1.powi(n as i32) / ((n as f64).powi(n as i32) * sn.powi(n as i32 - 1))
}

/// K(n) = 2^{5n+8}/γ(n) = 2^{4n+9} n^n s_n^{n-1} / s_{n-1}^n. Both closed
/// forms are evaluated and must agree to 1e-12 relative.
pub fn k_const(n: usize) -> f64 {
    let via_gamma = 2f64.powi(5 * n as i32 + 8) / gamma_const(n);
    let sn = sphere_volume(n);
    let snm1 = sphere_volume(n - 1);
    let direct = 2f64.powi(4 * n as i32 + 9) * (n as f64).powi(n as i32) * sn.powi(n as i32 - 1)
        / snm1.powi(n as i32);
    let rel = (via_gamma - direct).abs() / direct.abs();
    assert!(
        rel <= 1e-12,
        "K({n}) closed forms disagree: {via_gamma} vs {direct}"
    );
    via_gamma
}

/// Isoperimetric ratio I(M) = |Σ| / |M|^{n/(n+1)}.
pub fn isoperimetric_ratio(boundary_volume: f64, volume: f64, n: u32) -> f64 {
    boundary_volume / volume.powf(n as f64 / (n as f64 + 1.0))
}

// -- Steklov upper bounds --------------------------------------------------

/// σ_k ≤ 512 b² N_M³ Γ Λ² |M| k^{2/n} / |Σ|^{(n+2)/n}.
pub fn bound_thm_main(
    sigma_k: f64,
    k: usize,
    n: u32,
    inv: &MetricInvariantReport,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    if k == 0 {
        return Err(BoundsError::InvalidParameter("k must be ≥ 1".into()));
    }
    if inv.b == 0 {
        return Err(BoundsError::MissingInvariant(
            "thm_main needs a boundary (b ≥ 1)".into(),
        ));
    }
    let nf = n as f64;
    let b = inv.b as f64;
    let n_m = inv.packing_extrinsic as f64;
    let rhs = 512.0 * b * b * n_m.powi(3) * inv.growth * inv.distortion * inv.distortion
        * inv.volume
        * (k as f64).powf(2.0 / nf)
        / inv.boundary_volume.powf((nf + 2.0) / nf);
    let constants = BTreeMap::from([
        ("factor".into(), 512.0),
        ("b".into(), b),
        ("N_M".into(), n_m),
        ("Gamma".into(), inv.growth),
        ("Lambda".into(), inv.distortion),
        ("vol_M".into(), inv.volume),
        ("vol_Sigma".into(), inv.boundary_volume),
    ]);
    Ok(upper_bound_report(
        InequalityId::ThmMain,
        k,
        sigma_k,
        rhs,
        constants,
        None,
        None,
        opts,
    ))
}

/// σ_k ≤ 512 N³ Γ Λ² |M| k^{2/n} / |Σ_0|^{(n+2)/n} with the constants of a
/// single boundary component Σ_0.
pub fn bound_thm_general(
    sigma_k: f64,
    k: usize,
    n: u32,
    inv: &MetricInvariantReport,
    component: usize,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    if k == 0 {
        return Err(BoundsError::InvalidParameter("k must be ≥ 1".into()));
    }
    let comp = inv
        .components
        .iter()
        .find(|c| c.label == component)
        .ok_or_else(|| BoundsError::MissingInvariant(format!("component {component}")))?;
    let nf = n as f64;
    let n_pack = comp.packing_extrinsic as f64;
    let rhs = 512.0 * n_pack.powi(3) * comp.growth * comp.distortion * comp.distortion
        * inv.volume
        * (k as f64).powf(2.0 / nf)
        / comp.measure.powf((nf + 2.0) / nf);
    let constants = BTreeMap::from([
        ("factor".into(), 512.0),
        ("N".into(), n_pack),
        ("Gamma".into(), comp.growth),
        ("Lambda".into(), comp.distortion),
        ("vol_M".into(), inv.volume),
        ("vol_Sigma0".into(), comp.measure),
    ]);
    Ok(upper_bound_report(
        InequalityId::ThmGeneral,
        k,
        sigma_k,
        rhs,
        constants,
        Some(component),
        Some("taking Sigma_0 of largest volume recovers the main bound via |Sigma_0| >= |Sigma|/b".into()),
        opts,
    ))
}

/// Scale-invariant reformulation: σ_k |Σ|^{1/n} ≤ 512 I(M)^{-(n+1)/n} b² N³ Γ Λ² k^{2/n};
/// algebraically identical to the main bound.
pub fn bound_reformulation(
    sigma_k: f64,
    k: usize,
    n: u32,
    inv: &MetricInvariantReport,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    if inv.b == 0 {
        return Err(BoundsError::MissingInvariant(
            "reformulation needs a boundary".into(),
        ));
    }
    let nf = n as f64;
    let iso = isoperimetric_ratio(inv.boundary_volume, inv.volume, n);
    let b = inv.b as f64;
    let n_m = inv.packing_extrinsic as f64;
    let lhs = sigma_k * inv.boundary_volume.powf(1.0 / nf);
    let rhs = 512.0 / iso.powf((nf + 1.0) / nf)
        * b
        * b
        * n_m.powi(3)
        * inv.growth
        * inv.distortion
        * inv.distortion
        * (k as f64).powf(2.0 / nf);
    let constants = BTreeMap::from([
        ("factor".into(), 512.0),
        ("I_M".into(), iso),
        ("b".into(), b),
        ("N_M".into(), n_m),
        ("Gamma".into(), inv.growth),
        ("Lambda".into(), inv.distortion),
    ]);
    Ok(upper_bound_report(
        InequalityId::Reformulation,
        k,
        lhs,
        rhs,
        constants,
        None,
        None,
        opts,
    ))
}

/// σ_k ≤ K(n) |M| Diam_M(Σ_j)^{-(n+2)} (Diam(Σ_j)/inj(Σ_j))^n k^{n+1}.
pub fn bound_thm_diam(
    sigma_k: f64,
    k: usize,
    n: u32,
    inv: &MetricInvariantReport,
    component: usize,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    let comp = inv
        .components
        .iter()
        .find(|c| c.label == component)
        .ok_or_else(|| BoundsError::MissingInvariant(format!("component {component}")))?;
    let inj = comp.injectivity.ok_or_else(|| {
        BoundsError::MissingInvariant(format!(
            "inj(Sigma_{component}) unavailable; supply an override"
        ))
    })?;
    if !(inj > 0.0) {
        return Err(BoundsError::MissingInvariant(format!(
            "inj(Sigma_{component}) = {inj} not positive"
        )));
    }
    let nf = n as f64;
    let kn = k_const(n as usize);
    let rhs = kn * inv.volume / comp.diam_extrinsic.powf(nf + 2.0)
        * (comp.diam_intrinsic / inj).powf(nf)
        * (k as f64).powf(nf + 1.0);
    let constants = BTreeMap::from([
        ("K_n".into(), kn),
        ("vol_M".into(), inv.volume),
        ("diam_M_Sigma_j".into(), comp.diam_extrinsic),
        ("diam_Sigma_j".into(), comp.diam_intrinsic),
        ("inj_Sigma_j".into(), inj),
    ]);
    Ok(upper_bound_report(
        InequalityId::ThmDiam,
        k,
        sigma_k,
        rhs,
        constants,
        Some(component),
        None,
        opts,
    ))
}

/// Cylinder relation: σ = √λ · tanh(√λ · L), with σ = 0 at λ = 0.
pub fn cylinder_sigma_from_lambda(lambda: f64, length: f64) -> f64 {
    assert!(lambda >= 0.0 && length > 0.0);
    if lambda == 0.0 {
        return 0.0;
    }
    let c = lambda.sqrt();
    c * (c * length).tanh()
}

// -- Laplace corollaries ----------------------------------------------------

/// λ_k |Σ|^{2/n} ≤ 2048 Γ N_Σ³ k^{2/n} for a closed manifold Σ.
pub fn bound_cor_gny(
    lambda_k: f64,
    k: usize,
    n: u32,
    total_measure: f64,
    n_sigma: usize,
    gamma: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    if k == 0 {
        return Err(BoundsError::InvalidParameter("k must be ≥ 1".into()));
    }
    let nf = n as f64;
    let lhs = lambda_k * total_measure.powf(2.0 / nf);
    let rhs = 2048.0 * gamma * (n_sigma as f64).powi(3) * (k as f64).powf(2.0 / nf);
    let constants = BTreeMap::from([
        ("factor".into(), 2048.0),
        ("Gamma".into(), gamma),
        ("N_Sigma".into(), n_sigma as f64),
        ("vol_Sigma".into(), total_measure),
    ]);
    Ok(upper_bound_report(
        InequalityId::CorGny,
        k,
        lhs,
        rhs,
        constants,
        None,
        None,
        opts,
    ))
}

/// λ_k diam(Σ)² ≤ K(n) |Σ| k^{n+1} / inj(Σ)^n for a closed manifold. The
/// implied bound on λ_k itself (rhs/diam²) is recorded in the constants for
/// trend checks.
pub fn bound_cor_berger_croke(
    lambda_k: f64,
    k: usize,
    n: u32,
    diam: f64,
    inj: f64,
    total_measure: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    if !(inj > 0.0 && diam > 0.0) {
        return Err(BoundsError::MissingInvariant(format!(
            "diam = {diam}, inj = {inj} must be positive"
        )));
    }
    let nf = n as f64;
    let kn = k_const(n as usize);
    let lhs = lambda_k * diam * diam;
    let rhs = kn * total_measure * (k as f64).powf(nf + 1.0) / inj.powf(nf);
    let constants = BTreeMap::from([
        ("K_n".into(), kn),
        ("diam".into(), diam),
        ("inj".into(), inj),
        ("vol_Sigma".into(), total_measure),
        ("implied_lambda_bound".into(), rhs / (diam * diam)),
    ]);
    Ok(upper_bound_report(
        InequalityId::CorBergerCroke,
        k,
        lhs,
        rhs,
        constants,
        None,
        None,
        opts,
    ))
}

// -- concentration ----------------------------------------------------------

/// Ball-containment concentration: with C_j = K(n)(Diam(Σ_j)/inj(Σ_j))^{n/(n+2)}
/// (the constant exactly as printed, K(n) unrooted) and
/// γ_j = C_j (|M|/σ_k)^{1/(n+2)} k^{(n+1)/(n+2)}, some x_j ∈ Σ_j has
/// Σ_j ⊂ B^M(x_j, γ_j). The lhs is the best sampled containment radius.
/// With `sharp_concentration` the constants also record the variant with
/// K(n)^{1/(n+2)} that direct algebra on the diameter bound yields.
pub fn concentration_check(
    sigma_k: f64,
    k: usize,
    n: u32,
    inv: &MetricInvariantReport,
    component: usize,
    extrinsic: &DistanceOracle,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    if !(sigma_k > 0.0) {
        return Err(BoundsError::InvalidParameter(format!(
            "concentration needs σ_k > 0 (got {sigma_k})"
        )));
    }
    let comp = inv
        .components
        .iter()
        .find(|c| c.label == component)
        .ok_or_else(|| BoundsError::MissingInvariant(format!("component {component}")))?;
    let inj = comp.injectivity.ok_or_else(|| {
        BoundsError::MissingInvariant(format!("inj(Sigma_{component}) unavailable"))
    })?;
    let nf = n as f64;
    let kn = k_const(n as usize);
    let c_j = kn * (comp.diam_intrinsic / inj).powf(nf / (nf + 2.0));
    let gamma_j = c_j
        * (inv.volume / sigma_k).powf(1.0 / (nf + 2.0))
        * (k as f64).powf((nf + 1.0) / (nf + 2.0));

    // best sampled center: minimize the max distance to the component
    let members: Vec<usize> = (0..extrinsic.len())
        .filter(|&i| extrinsic.sample_component[i] == component)
        .collect();
    if members.len() < 2 {
        return Err(BoundsError::Metric(MetricError::InsufficientSamples {
            component,
            got: members.len(),
        }));
    }
    let mut best_radius = f64::INFINITY;
    for &x in &members {
        let mut worst = 0.0f64;
        for &y in &members {
            worst = worst.max(extrinsic.d(x, y));
        }
        best_radius = best_radius.min(worst);
    }

    let mut constants = BTreeMap::from([
        ("K_n".into(), kn),
        ("C_j".into(), c_j),
        ("gamma_j".into(), gamma_j),
        ("inj_Sigma_j".into(), inj),
        ("diam_Sigma_j".into(), comp.diam_intrinsic),
    ]);
    if opts.sharp_concentration {
        let c_sharp = kn.powf(1.0 / (nf + 2.0)) * (comp.diam_intrinsic / inj).powf(nf / (nf + 2.0));
        let gamma_sharp = c_sharp
            * (inv.volume / sigma_k).powf(1.0 / (nf + 2.0))
            * (k as f64).powf((nf + 1.0) / (nf + 2.0));
        constants.insert("C_j_sharp".into(), c_sharp);
        constants.insert("gamma_j_sharp".into(), gamma_sharp);
    }
    Ok(upper_bound_report(
        InequalityId::CorConcentration,
        k,
        best_radius,
        gamma_j,
        constants,
        Some(component),
        None,
        opts,
    ))
}

/// Lumped boundary measure per boundary vertex over all components.
fn boundary_masses(mesh: &SimplicialMesh) -> BTreeMap<usize, f64> {
    let mut w: BTreeMap<usize, f64> = BTreeMap::new();
    for f in 0..mesh.num_boundary_faces() {
        let face = mesh.boundary_face(f);
        let share = mesh.boundary_face_measure(f) / face.len() as f64;
        for &v in face {
            *w.entry(v).or_insert(0.0) += share;
        }
    }
    w
}

/// Gromov-Milman concentration: ρ² ≤ (|M|/σ_1)(1/|A| + 1/|B|) for disjoint
/// boundary subsets at extrinsic distance ρ.
pub fn gromov_milman_check(
    mesh: &SimplicialMesh,
    sigma_1: f64,
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    if a.is_empty() || b.is_empty() {
        return Err(BoundsError::EmptySubset);
    }
    if !a.is_disjoint(b) {
        return Err(BoundsError::OverlappingSubsets);
    }
    let masses = boundary_masses(mesh);
    let mass = |s: &BTreeSet<usize>| -> f64 { s.iter().filter_map(|v| masses.get(v)).sum() };
    let (ma, mb) = (mass(a), mass(b));
    if ma <= 0.0 || mb <= 0.0 {
        return Err(BoundsError::EmptySubset);
    }
    let sources: Vec<usize> = a.iter().copied().collect();
    let dist = crate::metric::multi_source_distances(mesh, &sources);
    let rho = b.iter().map(|&v| dist[v]).fold(f64::INFINITY, f64::min);
    let lhs = rho * rho;
    let rhs = mesh.volume() / sigma_1 * (1.0 / ma + 1.0 / mb);
    let constants = BTreeMap::from([
        ("rho".into(), rho),
        ("vol_A".into(), ma),
        ("vol_B".into(), mb),
        ("vol_M".into(), mesh.volume()),
        ("sigma_1".into(), sigma_1),
    ]);
    Ok(upper_bound_report(
        InequalityId::PropGromovMilman,
        1,
        lhs,
        rhs,
        constants,
        None,
        None,
        opts,
    ))
}

/// Neighborhood growth consequence: |A^ρ| ≥ |Σ| − (σ_1 ρ²/|M| − 1/|A|)^{-1},
/// where A^ρ = {x ∈ Σ : d_M(A, x) < ρ}. Vacuous when σ_1 ρ²/|M| ≤ 1/|A|.
pub fn gm_neighborhood_bound(
    mesh: &SimplicialMesh,
    sigma_1: f64,
    a: &BTreeSet<usize>,
    rho: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    if a.is_empty() {
        return Err(BoundsError::EmptySubset);
    }
    let masses = boundary_masses(mesh);
    let ma: f64 = a.iter().filter_map(|v| masses.get(v)).sum();
    if ma <= 0.0 {
        return Err(BoundsError::EmptySubset);
    }
    let total: f64 = masses.values().sum();
    let sources: Vec<usize> = a.iter().copied().collect();
    let dist = crate::metric::multi_source_distances(mesh, &sources);
    let measured: f64 = masses
        .iter()
        .filter(|&(&v, _)| dist[v] < rho)
        .map(|(_, &m)| m)
        .sum();

    let pole = sigma_1 * rho * rho / mesh.volume() - 1.0 / ma;
    let mut constants = BTreeMap::from([
        ("rho".into(), rho),
        ("vol_A".into(), ma),
        ("vol_Sigma".into(), total),
        ("vol_M".into(), mesh.volume()),
        ("sigma_1".into(), sigma_1),
    ]);
    if pole <= 0.0 {
        constants.insert("pole".into(), pole);
        return Ok(BoundReport {
            inequality_id: InequalityId::GmConsequence,
            k: 1,
            lhs: measured,
            rhs: f64::NEG_INFINITY,
            constants_used: constants,
            pass: true,
            outcome: BoundOutcome::Vacuous,
            slack: f64::INFINITY,
            direction: BoundDirection::LhsAtLeastRhs,
            component: None,
            note: Some("premise σ_1 ρ²/|M| > 1/|A| fails; the bound asserts nothing".into()),
        });
    }
    let rhs = total - 1.0 / pole;
    let pass = measured >= rhs * (1.0 - opts.tol) || rhs <= 0.0;
    Ok(BoundReport {
        inequality_id: InequalityId::GmConsequence,
        k: 1,
        lhs: measured,
        rhs,
        constants_used: constants,
        pass,
        outcome: if pass { BoundOutcome::Pass } else { BoundOutcome::Fail },
        slack: if rhs > 0.0 { measured / rhs } else { f64::INFINITY },
        direction: BoundDirection::LhsAtLeastRhs,
        component: None,
        note: None,
    })
}

/// Boundary vertices of a component whose parameter angle lies in
/// [t0, t1] (radians, wrapping). Circle-shaped components use the geometric
/// angle around their centroid; other components use cumulative arclength
/// mapped to [0, 2π).
pub fn boundary_arc(
    mesh: &SimplicialMesh,
    component: usize,
    t0: f64,
    t1: f64,
) -> Result<BTreeSet<usize>, BoundsError> {
    let verts = mesh.boundary_vertices_of(component).map_err(MetricError::from)?;
    if verts.is_empty() {
        return Err(BoundsError::EmptySubset);
    }
    let params = component_angles(mesh, component, &verts)?;
    let tau = std::f64::consts::TAU;
    let norm = |t: f64| t.rem_euclid(tau);
    let (a0, a1) = (norm(t0), norm(t1));
    let inside = |t: f64| {
        if a0 <= a1 {
            (a0..=a1).contains(&t)
        } else {
            t >= a0 || t <= a1
        }
    };
    let set: BTreeSet<usize> = verts
        .iter()
        .zip(&params)
        .filter(|&(_, &t)| inside(t))
        .map(|(&v, _)| v)
        .collect();
    if set.is_empty() {
        return Err(BoundsError::EmptySubset);
    }
    Ok(set)
}

/// Parameter angle per boundary vertex of one component.
fn component_angles(
    mesh: &SimplicialMesh,
    component: usize,
    verts: &[usize],
) -> Result<Vec<f64>, BoundsError> {
    let tau = std::f64::consts::TAU;
    // circle-shaped: all vertices equidistant from the centroid, use atan2
    let pts: Vec<[f64; 3]> = verts.iter().map(|&v| mesh.vertices()[v]).collect();
    let mut centroid = [0.0f64; 3];
    for p in &pts {
        for d in 0..3 {
            centroid[d] += p[d] / pts.len() as f64;
        }
    }
    let radii: Vec<f64> = pts
        .iter()
        .map(|p| {
            ((p[0] - centroid[0]).powi(2) + (p[1] - centroid[1]).powi(2)).sqrt()
        })
        .collect();
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let rmin = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    if rmax > 0.0 && (rmax - rmin) / rmax < 0.05 {
        return Ok(pts
            .iter()
            .map(|p| (p[1] - centroid[1]).atan2(p[0] - centroid[0]).rem_euclid(tau))
            .collect());
    }
    // generic closed polyline: cumulative arclength from the smallest vertex
    let edges = mesh.boundary_edges_of(component).map_err(MetricError::from)?;
    let mut adj: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for &(x, y, l) in &edges {
        adj.entry(x).or_default().push((y, l));
        adj.entry(y).or_default().push((x, l));
    }
    let start = *verts.iter().min().unwrap();
    let mut order = vec![start];
    let mut arclen = vec![0.0f64];
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let nbrs = adj
            .get(&cur)
            .ok_or_else(|| BoundsError::InvalidParameter("broken boundary walk".into()))?;
        let next = nbrs
            .iter()
            .filter(|&&(u, _)| u != prev)
            .min_by_key(|&&(u, _)| u)
            .copied();
        let Some((next, l)) = next else { break };
        if next == start {
            break;
        }
        arclen.push(arclen.last().unwrap() + l);
        order.push(next);
        prev = cur;
        cur = next;
        if order.len() > verts.len() + 1 {
            return Err(BoundsError::InvalidParameter(
                "boundary walk did not close".into(),
            ));
        }
    }
    let total: f64 = arclen.last().cloned().unwrap_or(0.0)
        + edges
            .iter()
            .find(|&&(x, y, _)| {
                (x == cur && y == start) || (y == cur && x == start)
            })
            .map(|&(_, _, l)| l)
            .unwrap_or(0.0);
    let mut params = vec![0.0; verts.len()];
    for (i, &v) in order.iter().enumerate() {
        let pos = verts.binary_search(&v).map_err(|_| {
            BoundsError::InvalidParameter("walk vertex missing from component".into())
        })?;
        params[pos] = tau * arclen[i] / total;
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_volumes() {
        assert_relative_eq!(sphere_volume(0), 2.0);
        assert_relative_eq!(sphere_volume(1), 2.0 * PI);
        assert_relative_eq!(sphere_volume(2), 4.0 * PI, epsilon = 1e-12);
        assert_relative_eq!(sphere_volume(3), 2.0 * PI * PI, epsilon = 1e-12);
    }

    #[test]
    fn dimensional_constants() {
        assert_relative_eq!(gamma_const(1), 2.0, epsilon = 1e-14);
        assert_relative_eq!(gamma_const(2), PI / 2.0, epsilon = 1e-14);
        assert_relative_eq!(k_const(1), 4096.0, epsilon = 1e-10);
        assert_relative_eq!(k_const(2), 2f64.powi(19) / PI, max_relative = 1e-12);
        for n in 1..=6 {
            // k_const internally asserts both closed forms agree to 1e-12
            assert!(k_const(n).is_finite());
        }
    }

    fn disk_like_invariants() -> MetricInvariantReport {
        // the worked constants from the formula-arithmetic examples
        MetricInvariantReport {
            components: vec![crate::metric::ComponentInvariants {
                label: 0,
                distortion: PI / 2.0,
                packing_extrinsic: 4,
                packing_intrinsic: 3,
                growth: 2.0,
                diam_extrinsic: 2.0,
                diam_intrinsic: PI,
                injectivity: Some(PI),
                measure: 2.0 * PI,
                samples: 64,
            }],
            distortion: PI / 2.0,
            packing_extrinsic: 4,
            packing_intrinsic: 3,
            growth: 2.0,
            b: 1,
            volume: PI,
            boundary_volume: 2.0 * PI,
            diam_extrinsic_global: 2.0,
            seed: 0,
            sample_target: 64,
            r_grid_len: 16,
            estimate_direction: String::new(),
        }
    }

    #[test]
    fn thm_main_disk_arithmetic() {
        let inv = disk_like_invariants();
        let opts = BoundOptions::default();
        let r = bound_thm_main(1.0, 1, 1, &inv, &opts).unwrap();
        assert_relative_eq!(r.rhs, 2048.0, max_relative = 1e-12);
        assert!(r.pass);
        assert_relative_eq!(r.slack, 2048.0, max_relative = 1e-12);
        // k scaling: rhs(k=4)/rhs(k=1) = 16 for n = 1
        let r4 = bound_thm_main(1.0, 4, 1, &inv, &opts).unwrap();
        assert_relative_eq!(r4.rhs / r.rhs, 16.0, max_relative = 1e-12);
    }

    #[test]
    fn thm_general_matches_main_for_single_component() {
        // with b = 1 and matching constants the two bounds coincide
        let mut inv = disk_like_invariants();
        inv.components[0].packing_extrinsic = inv.packing_extrinsic;
        let opts = BoundOptions::default();
        let main = bound_thm_main(1.0, 2, 1, &inv, &opts).unwrap();
        let general = bound_thm_general(1.0, 2, 1, &inv, 0, &opts).unwrap();
        assert_relative_eq!(main.rhs, general.rhs, max_relative = 1e-12);
        // smaller |Σ_0| means a larger rhs
        inv.components[0].measure = PI;
        let smaller = bound_thm_general(1.0, 2, 1, &inv, 0, &opts).unwrap();
        assert!(smaller.rhs > general.rhs);
    }

    #[test]
    fn reformulation_is_algebraically_identical() {
        let inv = disk_like_invariants();
        let opts = BoundOptions::default();
        for k in [1, 2, 5] {
            for sigma in [0.5, 1.0, 7.3] {
                let main = bound_thm_main(sigma, k, 1, &inv, &opts).unwrap();
                let reform = bound_reformulation(sigma, k, 1, &inv, &opts).unwrap();
                assert_relative_eq!(
                    main.lhs / main.rhs,
                    reform.lhs / reform.rhs,
                    max_relative = 1e-12
                );
                assert_eq!(main.pass, reform.pass);
            }
        }
        // unit disk: I(M) = 2π/π^{1/2} = 2√π, scale-invariant
        let iso = isoperimetric_ratio(2.0 * PI, PI, 1);
        assert_relative_eq!(iso, 2.0 * PI.sqrt(), epsilon = 1e-12);
        let t = 3.0;
        assert_relative_eq!(
            isoperimetric_ratio(2.0 * PI * t, PI * t * t, 1),
            iso,
            max_relative = 1e-12
        );
    }

    #[test]
    fn thm_diam_disk_arithmetic() {
        let inv = disk_like_invariants();
        let opts = BoundOptions::default();
        let r = bound_thm_diam(1.0, 1, 1, &inv, 0, &opts).unwrap();
        assert_relative_eq!(r.rhs, 512.0 * PI, max_relative = 1e-10);
        assert!(r.pass);
        // k exponent n+1
        let r2 = bound_thm_diam(1.0, 2, 1, &inv, 0, &opts).unwrap();
        assert_relative_eq!(r2.rhs / r.rhs, 4.0, max_relative = 1e-12);
        // missing inj is an error
        let mut no_inj = disk_like_invariants();
        no_inj.components[0].injectivity = None;
        assert!(matches!(
            bound_thm_diam(1.0, 1, 1, &no_inj, 0, &opts),
            Err(BoundsError::MissingInvariant(_))
        ));
    }

    #[test]
    fn cylinder_relation_values() {
        assert_eq!(cylinder_sigma_from_lambda(0.0, 0.1), 0.0);
        assert_relative_eq!(
            cylinder_sigma_from_lambda(1.0, 0.1),
            0.1f64.tanh(),
            max_relative = 1e-12
        );
        // small-L limit: value/L -> λ
        let l = 1e-6;
        for lambda in [1.0, 4.0, 9.0] {
            assert_relative_eq!(
                cylinder_sigma_from_lambda(lambda, l) / l,
                lambda,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn gny_circle_arithmetic() {
        let opts = BoundOptions::default();
        let r = bound_cor_gny(1.0, 1, 1, 2.0 * PI, 3, 2.0, &opts).unwrap();
        assert_relative_eq!(r.lhs, (2.0 * PI).powi(2), max_relative = 1e-12);
        assert_relative_eq!(r.rhs, 110592.0, max_relative = 1e-12);
        assert!(r.pass);
        let r4 = bound_cor_gny(1.0, 4, 1, 2.0 * PI, 3, 2.0, &opts).unwrap();
        assert_relative_eq!(r4.rhs / r.rhs, 16.0, max_relative = 1e-12);
    }

    #[test]
    fn berger_croke_circle_arithmetic() {
        let opts = BoundOptions::default();
        // circle of length 2π: λ_1 = 1, diam = π, inj = π, |Σ| = 2π
        let r = bound_cor_berger_croke(1.0, 1, 1, PI, PI, 2.0 * PI, &opts).unwrap();
        assert_relative_eq!(r.lhs, PI * PI, max_relative = 1e-12);
        assert_relative_eq!(r.rhs, 4096.0 * 2.0 * PI / PI, max_relative = 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn gm_checks_on_disk() {
        let mesh = shapes::disk(1.0, 0.08).unwrap();
        let opts = BoundOptions::default();
        let a = boundary_arc(&mesh, 0, -PI / 4.0, PI / 4.0).unwrap();
        let b = boundary_arc(&mesh, 0, 3.0 * PI / 4.0, 5.0 * PI / 4.0).unwrap();
        let r = gromov_milman_check(&mesh, 1.0, &a, &b, &opts).unwrap();
        // ρ ≈ √2 through the interior, rhs ≈ 4
        assert_relative_eq!(r.constants_used["rho"], 2.0f64.sqrt(), max_relative = 0.08);
        assert_relative_eq!(r.rhs, 4.0, max_relative = 0.05);
        assert!(r.pass);

        // adjacent halves: ρ -> 0, trivially pass
        let a2 = boundary_arc(&mesh, 0, 0.0, PI).unwrap();
        let b2: BTreeSet<usize> = mesh
            .boundary_vertices()
            .into_iter()
            .filter(|v| !a2.contains(v))
            .collect();
        let r2 = gromov_milman_check(&mesh, 1.0, &a2, &b2, &opts).unwrap();
        assert!(r2.lhs < 0.1 && r2.pass);

        // errors
        assert!(matches!(
            gromov_milman_check(&mesh, 1.0, &a, &a, &opts),
            Err(BoundsError::OverlappingSubsets)
        ));
        let empty = BTreeSet::new();
        assert!(matches!(
            gromov_milman_check(&mesh, 1.0, &a, &empty, &opts),
            Err(BoundsError::EmptySubset)
        ));
    }

    #[test]
    fn gm_neighborhood_on_disk() {
        let mesh = shapes::disk(1.0, 0.08).unwrap();
        let opts = BoundOptions::default();
        let quarter = boundary_arc(&mesh, 0, -PI / 4.0, PI / 4.0).unwrap();
        // ρ = 1.9 with σ_1 = 1: rhs ≈ 2π − (3.61/π − 2/π)^{-1} ≈ 4.33
        let r = gm_neighborhood_bound(&mesh, 1.0, &quarter, 1.9, &opts).unwrap();
        assert!(matches!(r.outcome, BoundOutcome::Pass));
        assert_relative_eq!(r.rhs, 4.33, max_relative = 0.05);
        // ρ beyond the diameter: A^ρ = Σ
        let r2 = gm_neighborhood_bound(&mesh, 1.0, &quarter, 10.0, &opts).unwrap();
        assert_relative_eq!(r2.lhs, mesh.boundary_volume(), max_relative = 1e-12);
        assert!(r2.pass);
        // pole: vacuous
        let r3 = gm_neighborhood_bound(&mesh, 1e-9, &quarter, 0.5, &opts).unwrap();
        assert!(matches!(r3.outcome, BoundOutcome::Vacuous));
    }

    #[test]
    fn boundary_arc_on_rectangle_uses_arclength() {
        let mesh = shapes::rectangle(2.0, 1.0, 0.2).unwrap();
        let half = boundary_arc(&mesh, 0, 0.0, PI).unwrap();
        let masses = super::boundary_masses(&mesh);
        let m: f64 = half.iter().map(|v| masses[v]).sum();
        // half the perimeter by parameter, up to one cell
        assert_relative_eq!(m, 3.0, max_relative = 0.15);
    }
}
