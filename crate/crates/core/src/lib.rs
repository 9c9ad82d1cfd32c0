//! Spectral-geometry laboratory core.
//!
//! Computes Steklov spectra (via the discrete Dirichlet-to-Neumann operator)
//! and Laplace spectra of simplicial meshes, estimates the metric invariants
//! that control them (distortion, packing and growth constants, diameters,
//! injectivity radii), and evaluates a family of eigenvalue upper bounds
//! together with constructive trial-function certificates.
//!
//! Module map:
//! - [`mesh`]: simplicial meshes, shape generators, OFF file IO
//! - [`fem`]: piecewise-linear stiffness/mass assembly and Rayleigh quotients
//! - [`sparse`]: symmetric sparse matrices, reordering, banded Cholesky
//! - [`eigen`]: generalized symmetric eigensolvers, DtN reduction, spectra
//! - [`metric`]: distance oracles, metric invariants, separated families
//! - [`bounds`]: inequality evaluation, dimensional constants, certificates
//! - [`analytic`]: closed-form reference spectra used as oracles

pub mod analytic;
pub mod bounds;
pub mod eigen;
pub mod fem;
pub mod mesh;
pub mod metric;
pub mod sparse;

pub use bounds::{BoundOutcome, BoundReport, InequalityId};
pub use eigen::{SpectralKind, SpectralResult};
pub use fem::{MassScheme, VertexFunction};
pub use mesh::{ShapeKind, ShapeSpec, SimplicialMesh};
pub use metric::{DistanceOracle, MetricInvariantReport, OracleSpace};
pub use sparse::SparseSymMatrix;

/// FNV-1a 64-bit hash, used for deterministic mesh fingerprints.
pub(crate) fn fnv1a(bytes: &[u8], mut state: u64) -> u64 {
    if state == 0 {
        state = 0xcbf2_9ce4_8422_2325;
    }
    for &b in bytes {
        state ^= b as u64;
        state = state.wrapping_mul(0x100_0000_01b3);
    }
    state
}
