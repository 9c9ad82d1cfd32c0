//! Closed-form reference spectra for the generator shapes. These are the
//! in-repo oracles the fixture tests and the acceptance suite compare
//! against; they share no code with the discrete solvers.

use std::f64::consts::PI;

/// Steklov eigenvalues of the unit disk: {0, 1, 1, 2, 2, ...} by separation
/// of variables (σ_m = m with multiplicity two for m ≥ 1).
pub fn disk_steklov(k: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut m = 1.0;
    while out.len() <= k {
        out.push(m);
        out.push(m);
        m += 1.0;
    }
    out.truncate(k + 1);
    out
}

/// Steklov eigenvalues of the annulus r_in < |x| < r_out with both circles
/// free. For each angular mode m ≥ 1 the restriction to the basis
/// {r^m, r^{-m}} gives a 2x2 generalized problem C x = σ D x; m = 0 uses
/// the basis {1, log r}. Modes with m ≥ 1 carry multiplicity two.
pub fn annulus_steklov(r_in: f64, r_out: f64, k: usize) -> Vec<f64> {
    assert!(0.0 < r_in && r_in < r_out);
    let mut values = vec![0.0];

    // m = 0, u = a + b log r: boundary conditions give σ = 0 and the root of
    // the 2x2 system below.
    {
        // rows: outer u'(r_out) = σ u(r_out); inner -u'(r_in) = σ u(r_in)
        let c = [[0.0, 1.0 / r_out], [0.0, -1.0 / r_in]];
        let d = [[1.0, r_out.ln()], [1.0, r_in.ln()]];
        for s in quadratic_pencil_roots(c, d) {
            if s > 1e-12 {
                values.push(s);
            }
        }
    }

    let mut m = 1.0f64;
    loop {
        let c = [
            [m * r_out.powf(m - 1.0), -m * r_out.powf(-m - 1.0)],
            [-m * r_in.powf(m - 1.0), m * r_in.powf(-m - 1.0)],
        ];
        let d = [
            [r_out.powf(m), r_out.powf(-m)],
            [r_in.powf(m), r_in.powf(-m)],
        ];
        let mut roots: Vec<f64> = quadratic_pencil_roots(c, d)
            .into_iter()
            .filter(|&s| s > -1e-12)
            .collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for s in roots {
            // multiplicity two: modes e^{±imθ}
            values.push(s.max(0.0));
            values.push(s.max(0.0));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // enough small modes collected once the smallest root of the last m
        // exceeds everything we need
        if values.len() > k + 4 && m > (k as f64) + 2.0 {
            break;
        }
        m += 1.0;
    }
    values.truncate(k + 1);
    values
}

/// Real roots σ of det(C - σ D) = 0 for 2x2 matrices.
fn quadratic_pencil_roots(c: [[f64; 2]; 2], d: [[f64; 2]; 2]) -> Vec<f64> {
    let det2 = |m: [[f64; 2]; 2]| m[0][0] * m[1][1] - m[0][1] * m[1][0];
    // det(C - sD) = a s^2 + b s + c0
    let a = det2(d);
    let c0 = det2(c);
    let b = -(c[0][0] * d[1][1] + d[0][0] * c[1][1] - c[0][1] * d[1][0] - d[0][1] * c[1][0]);
    if a.abs() < 1e-300 {
        if b.abs() < 1e-300 {
            return Vec::new();
        }
        return vec![-c0 / b];
    }
    let disc = b * b - 4.0 * a * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    vec![(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
}

/// Laplace eigenvalues of a circle of length `len`: (2πm/len)^2, each with
/// multiplicity two for m ≥ 1.
pub fn circle_laplace(len: f64, k: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut m = 1.0;
    while out.len() <= k {
        let v = (2.0 * PI * m / len).powi(2);
        out.push(v);
        out.push(v);
        m += 1.0;
    }
    out.truncate(k + 1);
    out
}

/// Laplace eigenvalues of the flat torus S^1_lx x S^1_ly:
/// (2πa/lx)^2 + (2πb/ly)^2 over integer lattice modes.
pub fn torus_laplace(lx: f64, ly: f64, k: usize) -> Vec<f64> {
    let mut values = Vec::new();
    let max_mode = (k as i64) + 3;
    for a in -max_mode..=max_mode {
        for b in -max_mode..=max_mode {
            values.push((2.0 * PI * a as f64 / lx).powi(2) + (2.0 * PI * b as f64 / ly).powi(2));
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.truncate(k + 1);
    values
}

/// Laplace eigenvalues of the unit 2-sphere: l(l+1) with multiplicity 2l+1.
pub fn sphere_laplace(k: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut l = 0u32;
    while out.len() <= k {
        for _ in 0..(2 * l + 1) {
            out.push((l * (l + 1)) as f64);
        }
        l += 1;
    }
    out.truncate(k + 1);
    out
}

/// Full Steklov spectrum of the flat cylinder [0, len] x S^1 of the given
/// circumference: for each cross-section mode with eigenvalue λ = μ² > 0 the
/// even/odd branches give μ tanh(μ len/2) and μ coth(μ len/2); the μ = 0
/// modes give 0 and 2/len.
pub fn cylinder_steklov(len: f64, circumference: f64, k: usize) -> Vec<f64> {
    let mut values = vec![0.0, 2.0 / len];
    for m in 1..=(k + 2) {
        let mu = 2.0 * PI * m as f64 / circumference;
        let half = mu * len / 2.0;
        let even = mu * half.tanh();
        let odd = mu / half.tanh();
        // each angular mode has multiplicity two
        values.extend_from_slice(&[even, even, odd, odd]);
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.truncate(k + 1);
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn disk_spectrum_shape() {
        assert_eq!(disk_steklov(6), vec![0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
    }

    #[test]
    fn annulus_m0_root() {
        // m=0 nonzero root: -(1 + 1/ρ)/ln ρ at ρ = 0.5
        let vals = annulus_steklov(0.5, 1.0, 12);
        let expect = -(1.0 + 2.0) / 0.5f64.ln();
        assert!(
            vals.iter().any(|&v| (v - expect).abs() < 1e-9),
            "missing m=0 root {expect} in {vals:?}"
        );
        // ascending
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
    }

    #[test]
    fn annulus_wide_limits_to_disk() {
        // r_in -> 0: the small eigenvalues approach the disk values m/r_out
        let vals = annulus_steklov(1e-6, 1.0, 4);
        assert_relative_eq!(vals[1], 1.0, max_relative = 1e-3);
        assert_relative_eq!(vals[3], 2.0, max_relative = 1e-3);
    }

    #[test]
    fn circle_and_torus_consistency() {
        let c = circle_laplace(2.0 * PI, 4);
        assert_relative_eq!(c[1], 1.0);
        assert_relative_eq!(c[3], 4.0);
        // torus λ_1 = min((2π/lx)^2, (2π/ly)^2)
        let t = torus_laplace(10.0, 2.0 * PI, 2);
        assert_relative_eq!(t[1], (2.0 * PI / 10.0).powi(2));
    }

    #[test]
    fn cylinder_small_modes_are_even_branch() {
        let k = 4;
        let s = cylinder_steklov(0.1, 2.0 * PI, k);
        assert_relative_eq!(s[1], (0.05f64).tanh(), max_relative = 1e-12);
        assert_relative_eq!(s[3], 2.0 * (0.1f64).tanh(), max_relative = 1e-12);
    }
}
