//! Separated families in finite metric measure spaces: given that every
//! r-ball carries at most μ(X)/(4N²K) of the mass, produce K subsets of mass
//! at least μ(X)/(2NK) that are pairwise 3r-separated.
//!
//! The construction grows each subset from the heaviest remaining r-ball by
//! merging nearby r-balls until the mass target is met, then deletes the
//! open 3r-collar (a single r-ball usually cannot meet the target, so the
//! union growth is essential). Both certificates are re-verified by brute
//! force before returning; a verified failure comes back as
//! `ConstructionShortfall` carrying the partial family.

use super::MetricError;
use serde::{Deserialize, Serialize};

/// Finite surrogate of a metric measure space: points, symmetric distances
/// and nonnegative masses.
#[derive(Debug, Clone)]
pub struct FiniteMetricMeasureSpace {
    dist: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

impl FiniteMetricMeasureSpace {
    pub fn new(mut dist: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self, MetricError> {
        let n = dist.len();
        if n == 0 || masses.len() != n {
            return Err(MetricError::InvalidParameter(
                "distance matrix and masses must be nonempty and consistent".into(),
            ));
        }
        for i in 0..n {
            if dist[i].len() != n {
                return Err(MetricError::InvalidParameter("distance matrix not square".into()));
            }
            if dist[i][i] != 0.0 {
                return Err(MetricError::InvalidParameter("nonzero diagonal".into()));
            }
            for j in (i + 1)..n {
                let (a, b) = (dist[i][j], dist[j][i]);
                if !(a.is_finite() && a >= 0.0 && b.is_finite() && b >= 0.0) {
                    return Err(MetricError::InvalidParameter(format!(
                        "bad distance entry at ({i}, {j})"
                    )));
                }
                // independent shortest-path runs differ in the last ulp;
                // symmetrize within a tight tolerance
                if (a - b).abs() > 1e-9 * a.max(b).max(1e-300) {
                    return Err(MetricError::InvalidParameter(format!(
                        "asymmetric distance entry at ({i}, {j})"
                    )));
                }
                let m = 0.5 * (a + b);
                dist[i][j] = m;
                dist[j][i] = m;
            }
        }
        if masses.iter().any(|&m| !(m.is_finite() && m >= 0.0)) {
            return Err(MetricError::InvalidParameter("negative mass".into()));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(MetricError::InvalidParameter("zero total mass".into()));
        }
        Ok(Self { dist, masses })
    }

    /// Build from a distance oracle's sample with the given weights.
    pub fn from_oracle(
        oracle: &super::DistanceOracle,
        weights: &[f64],
    ) -> Result<Self, MetricError> {
        let n = oracle.len();
        let dist: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| oracle.d(i, j)).collect())
            .collect();
        Self::new(dist, weights.to_vec())
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    fn set_mass(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.masses[i]).sum()
    }

    fn set_distance(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut d = f64::INFINITY;
        for &i in a {
            for &j in b {
                d = d.min(self.dist[i][j]);
            }
        }
        d
    }
}

/// K pairwise 3r-separated subsets with certified minimum mass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparatedFamily {
    pub subsets: Vec<Vec<usize>>,
    pub r: f64,
    pub k: usize,
    pub n_used: usize,
    pub min_mass: f64,
    pub min_separation: f64,
}

/// Greedy separated-family construction with certificate verification.
pub fn separated_family(
    space: &FiniteMetricMeasureSpace,
    k: usize,
    n_pack: usize,
    r: f64,
) -> Result<SeparatedFamily, MetricError> {
    if k == 0 || n_pack == 0 || !(r.is_finite() && r > 0.0) {
        return Err(MetricError::InvalidParameter(format!(
            "separated_family needs k ≥ 1, N ≥ 1, r > 0 (got k={k}, N={n_pack}, r={r})"
        )));
    }
    let total = space.total_mass();
    let hypothesis_limit = total / (4.0 * (n_pack * n_pack * k) as f64);
    for x in 0..space.len() {
        let ball_mass: f64 = (0..space.len())
            .filter(|&y| space.d(x, y) <= r)
            .map(|y| space.mass(y))
            .sum();
        if ball_mass > hypothesis_limit {
            return Err(MetricError::HypothesisViolated {
                witness: x,
                ball_mass,
                limit: hypothesis_limit,
            });
        }
    }

    let target = total / (2.0 * (n_pack * k) as f64);

    // K = 1 admits A_1 = X: full mass, vacuous separation.
    if k == 1 {
        let subsets = vec![(0..space.len()).collect::<Vec<usize>>()];
        return Ok(SeparatedFamily {
            min_mass: total,
            min_separation: f64::INFINITY,
            subsets,
            r,
            k,
            n_used: n_pack,
        });
    }

    let mut remaining: Vec<bool> = vec![true; space.len()];
    let mut subsets: Vec<Vec<usize>> = Vec::with_capacity(k);

    for _ in 0..k {
        let live: Vec<usize> = (0..space.len()).filter(|&i| remaining[i]).collect();
        if live.is_empty() {
            return Err(shortfall(space, subsets, r, k, n_pack, "points exhausted"));
        }
        // heaviest remaining r-ball
        let ball_of = |c: usize, rem: &[bool]| -> Vec<usize> {
            (0..space.len())
                .filter(|&y| rem[y] && space.d(c, y) <= r)
                .collect()
        };
        let seed = live
            .iter()
            .copied()
            .max_by(|&a, &b| {
                space
                    .set_mass(&ball_of(a, &remaining))
                    .total_cmp(&space.set_mass(&ball_of(b, &remaining)))
                    .then(b.cmp(&a))
            })
            .unwrap();
        let mut current = ball_of(seed, &remaining);
        let mut in_current = vec![false; space.len()];
        for &i in &current {
            in_current[i] = true;
        }

        // grow by adjacent r-balls until the mass target is met
        while space.set_mass(&current) < target {
            let mut best: Option<(f64, usize)> = None;
            for &c in &live {
                if in_current[c] {
                    continue;
                }
                // candidate center within reach of the current set
                let near = current.iter().any(|&i| space.d(c, i) <= 2.0 * r);
                if !near {
                    continue;
                }
                let added: f64 = (0..space.len())
                    .filter(|&y| remaining[y] && !in_current[y] && space.d(c, y) <= r)
                    .map(|y| space.mass(y))
                    .sum();
                if added > 0.0 {
                    let better = match best {
                        None => true,
                        Some((m, c0)) => added > m || (added == m && c < c0),
                    };
                    if better {
                        best = Some((added, c));
                    }
                }
            }
            let Some((_, c)) = best else {
                return Err(shortfall(
                    space,
                    subsets,
                    r,
                    k,
                    n_pack,
                    "no adjacent ball adds mass",
                ));
            };
            for y in 0..space.len() {
                if remaining[y] && !in_current[y] && space.d(c, y) <= r {
                    in_current[y] = true;
                    current.push(y);
                }
            }
        }
        current.sort_unstable();

        // delete the open 3r-collar so later subsets stay 3r-separated
        for y in 0..space.len() {
            if remaining[y] {
                let within = current.iter().any(|&i| space.d(i, y) < 3.0 * r);
                if within {
                    remaining[y] = false;
                }
            }
        }
        subsets.push(current);
    }

    // brute-force certificate verification; never a silent pass
    let min_mass = subsets.iter().map(|s| space.set_mass(s)).fold(f64::INFINITY, f64::min);
    let mut min_sep = f64::INFINITY;
    for i in 0..subsets.len() {
        for j in (i + 1)..subsets.len() {
            min_sep = min_sep.min(space.set_distance(&subsets[i], &subsets[j]));
        }
    }
    if min_mass + 1e-12 * total < target || min_sep < 3.0 * r - 1e-12 * r {
        return Err(shortfall(space, subsets, r, k, n_pack, "certificates failed"));
    }
    Ok(SeparatedFamily {
        subsets,
        r,
        k,
        n_used: n_pack,
        min_mass,
        min_separation: min_sep,
    })
}

fn shortfall(
    space: &FiniteMetricMeasureSpace,
    subsets: Vec<Vec<usize>>,
    r: f64,
    k: usize,
    n_pack: usize,
    reason: &str,
) -> MetricError {
    let min_mass = subsets
        .iter()
        .map(|s| space.set_mass(s))
        .fold(f64::INFINITY, f64::min);
    let mut min_sep = f64::INFINITY;
    for i in 0..subsets.len() {
        for j in (i + 1)..subsets.len() {
            min_sep = min_sep.min(space.set_distance(&subsets[i], &subsets[j]));
        }
    }
    MetricError::ConstructionShortfall {
        reason: reason.to_string(),
        partial: Box::new(SeparatedFamily {
            subsets,
            r,
            k,
            n_used: n_pack,
            min_mass,
            min_separation: min_sep,
        }),
    }
}

/// Packing transfer: N = ceil(b · N_Σ^{log2(2Λ)}) is a packing constant for
/// (Σ, d_M) given the intrinsic packing constant N_Σ and distortion Λ.
pub fn packing_transfer(b: usize, n_sigma: usize, lambda: f64) -> Result<usize, MetricError> {
    if b == 0 || n_sigma == 0 {
        return Err(MetricError::InvalidParameter(
            "packing_transfer needs b ≥ 1 and N_Σ ≥ 1".into(),
        ));
    }
    if !(lambda.is_finite() && lambda >= 1.0) {
        return Err(MetricError::InvalidParameter(format!(
            "packing_transfer needs Λ ≥ 1 (got {lambda})"
        )));
    }
    let value = b as f64 * (n_sigma as f64).powf((2.0 * lambda).log2());
    Ok(value.ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_space(n: usize, circumference: f64) -> FiniteMetricMeasureSpace {
        let step = circumference / n as f64;
        let dist: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let k = (i as i64 - j as i64).unsigned_abs() as usize;
                        let k = k.min(n - k);
                        k as f64 * step
                    })
                    .collect()
            })
            .collect();
        FiniteMetricMeasureSpace::new(dist, vec![1.0; n]).unwrap()
    }

    #[test]
    fn atoms_violate_hypothesis() {
        // three unit masses at {0, 10, 20}: any 1-ball carries 1 > 3/32
        let dist = vec![
            vec![0.0, 10.0, 20.0],
            vec![10.0, 0.0, 10.0],
            vec![20.0, 10.0, 0.0],
        ];
        let space = FiniteMetricMeasureSpace::new(dist, vec![1.0; 3]).unwrap();
        match separated_family(&space, 2, 2, 1.0) {
            Err(MetricError::HypothesisViolated { ball_mass, limit, .. }) => {
                assert_eq!(ball_mass, 1.0);
                assert!((limit - 3.0 / 32.0).abs() < 1e-12);
            }
            other => panic!("expected HypothesisViolated, got {other:?}"),
        }
    }

    #[test]
    fn thousand_point_circle() {
        // 1000 unit masses on a circle of circumference 1000, K=2, N=3, r=1:
        // each subset carries ≥ 1000/12 with separation ≥ 3.
        let space = circle_space(1000, 1000.0);
        let fam = separated_family(&space, 2, 3, 1.0).unwrap();
        assert_eq!(fam.subsets.len(), 2);
        assert!(fam.min_mass >= 1000.0 / 12.0, "min mass {}", fam.min_mass);
        assert!(fam.min_separation >= 3.0, "separation {}", fam.min_separation);
        // re-verify by brute force
        for s in &fam.subsets {
            let m: f64 = s.iter().map(|&i| space.mass(i)).sum();
            assert!(m >= space.total_mass() / 12.0);
        }
        let d = space.set_distance(&fam.subsets[0], &fam.subsets[1]);
        assert!(d >= 3.0);
    }

    #[test]
    fn k_equals_one_returns_whole_space() {
        let space = circle_space(1000, 1000.0);
        let fam = separated_family(&space, 1, 3, 1.0).unwrap();
        assert_eq!(fam.subsets.len(), 1);
        assert_eq!(fam.subsets[0].len(), 1000);
        assert_eq!(fam.min_mass, 1000.0);
    }

    #[test]
    fn invalid_space_rejected() {
        assert!(FiniteMetricMeasureSpace::new(vec![vec![0.0]], vec![0.0]).is_err());
        assert!(FiniteMetricMeasureSpace::new(
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            vec![1.0, 1.0]
        )
        .is_err());
    }

    #[test]
    fn packing_transfer_examples() {
        assert_eq!(packing_transfer(1, 2, 1.0).unwrap(), 2);
        assert_eq!(packing_transfer(2, 3, 2.0).unwrap(), 18);
        assert_eq!(packing_transfer(1, 3, 4.0).unwrap(), 27);
        assert!(packing_transfer(1, 2, 0.5).is_err());
    }
}
