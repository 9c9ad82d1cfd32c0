//! Deterministic generators for the test-shape corpus: disk, annulus, flat
//! cylinder, sphere minus two antipodal caps, rectangle, flat product torus,
//! circle polylines and icospheres.
//!
//! Every generator targets a maximum edge length `h` and is a pure function
//! of its parameters, so identical specs produce bit-identical meshes.

use super::{MeshError, SimplicialMesh};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Disk,
    Annulus,
    FlatCylinder,
    SphereMinusCaps,
    Rectangle,
    ProductTorus,
    Circle,
    CustomFile,
}

impl ShapeKind {
    pub fn parse(s: &str) -> Option<ShapeKind> {
        Some(match s {
            "disk" => ShapeKind::Disk,
            "annulus" => ShapeKind::Annulus,
            "flat_cylinder" => ShapeKind::FlatCylinder,
            "sphere_minus_caps" => ShapeKind::SphereMinusCaps,
            "rectangle" => ShapeKind::Rectangle,
            "product_torus" => ShapeKind::ProductTorus,
            "circle" => ShapeKind::Circle,
            "custom_file" => ShapeKind::CustomFile,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Disk => "disk",
            ShapeKind::Annulus => "annulus",
            ShapeKind::FlatCylinder => "flat_cylinder",
            ShapeKind::SphereMinusCaps => "sphere_minus_caps",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::ProductTorus => "product_torus",
            ShapeKind::Circle => "circle",
            ShapeKind::CustomFile => "custom_file",
        }
    }
}

/// Generator request: kind, named real parameters and a seed. The seed feeds
/// downstream sampling; the geometry itself is deterministic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, params: &[(&str, f64)]) -> Self {
        Self {
            kind,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            path: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn param(&self, key: &str) -> Result<f64, MeshError> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| MeshError::InvalidParameter(format!("missing parameter `{key}`")))
    }

    fn param_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    /// Human-readable tag used in reports and file names.
    pub fn tag(&self) -> String {
        let mut parts: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        parts.sort();
        format!("{}({})", self.kind.name(), parts.join(","))
    }

    /// Generate the mesh. `CustomFile` specs load from `path` instead.
    pub fn generate(&self) -> Result<SimplicialMesh, MeshError> {
        let h = self.param_or("h", 0.05);
        if !(h.is_finite() && h > 0.0) {
            return Err(MeshError::InvalidParameter(format!("h = {h} must be > 0")));
        }
        match self.kind {
            ShapeKind::Disk => disk(self.param_or("radius", 1.0), h),
            ShapeKind::Annulus => annulus(self.param("r_in")?, self.param("r_out")?, h),
            ShapeKind::FlatCylinder => {
                flat_cylinder(self.param("length")?, self.param_or("circumference", 2.0 * PI), h)
            }
            ShapeKind::SphereMinusCaps => sphere_minus_caps(self.param("cap_angle")?, h),
            ShapeKind::Rectangle => {
                rectangle(self.param_or("width", 1.0), self.param_or("height", 1.0), h)
            }
            ShapeKind::ProductTorus => {
                product_torus(self.param("length")?, self.param_or("circumference", 2.0 * PI), h)
            }
            ShapeKind::Circle => circle(self.param_or("length", 2.0 * PI), h),
            ShapeKind::CustomFile => {
                let path = self.path.as_ref().ok_or_else(|| {
                    MeshError::InvalidParameter("custom_file spec needs a path".into())
                })?;
                super::off::read_off(path)
            }
        }
    }
}

/// Ring spacing such that every produced edge stays below the target `h`
/// (cross-ring diagonals near a disk center reach ~2.1 spacings).
const RING_FACTOR: f64 = 2.1;

/// Triangulate the strip between two concentric vertex rings ordered by
/// angle, merging by extended angle so cross edges stay short.
fn stitch_rings(
    ring_a: &[usize],
    angs_a: &[f64],
    ring_b: &[usize],
    angs_b: &[f64],
    cells: &mut Vec<usize>,
) {
    let (na, nb) = (ring_a.len(), ring_b.len());
    let ext = |angs: &[f64], i: usize| angs[i % angs.len()] + 2.0 * PI * (i / angs.len()) as f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < na || j < nb {
        let advance_a = i < na && (j >= nb || ext(angs_a, i + 1) <= ext(angs_b, j + 1));
        if advance_a {
            cells.extend_from_slice(&[ring_a[i % na], ring_a[(i + 1) % na], ring_b[j % nb]]);
            i += 1;
        } else {
            cells.extend_from_slice(&[ring_a[i % na], ring_b[(j + 1) % nb], ring_b[j % nb]]);
            j += 1;
        }
    }
}

fn ring_points(radius: f64, z: f64, count: usize, vertices: &mut Vec<[f64; 3]>) -> (Vec<usize>, Vec<f64>) {
    let base = vertices.len();
    let mut angs = Vec::with_capacity(count);
    for k in 0..count {
        let t = 2.0 * PI * k as f64 / count as f64;
        vertices.push([radius * t.cos(), radius * t.sin(), z]);
        angs.push(t);
    }
    ((base..base + count).collect(), angs)
}

fn ring_count(radius: f64, target: f64) -> usize {
    ((2.0 * PI * radius / target).ceil() as usize).max(6)
}

/// Planar disk of the given radius, centered at the origin.
pub fn disk(radius: f64, h: f64) -> Result<SimplicialMesh, MeshError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(MeshError::InvalidParameter(format!("radius = {radius}")));
    }
    let t = h / RING_FACTOR;
    let n_r = ((radius / t).ceil() as usize).max(2);
    let dr = radius / n_r as f64;

    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut cells = Vec::new();
    let mut prev: (Vec<usize>, Vec<f64>) = (vec![0], vec![0.0]);
    for k in 1..=n_r {
        let ring = ring_points(k as f64 * dr, 0.0, ring_count(k as f64 * dr, t), &mut vertices);
        if k == 1 {
            // fan around the center
            let n = ring.0.len();
            for i in 0..n {
                cells.extend_from_slice(&[0, ring.0[i], ring.0[(i + 1) % n]]);
            }
        } else {
            stitch_rings(&prev.0, &prev.1, &ring.0, &ring.1, &mut cells);
        }
        prev = ring;
    }
    SimplicialMesh::new(2, vertices, cells)
}

/// Planar annulus with radii `0 < r_in < r_out`.
pub fn annulus(r_in: f64, r_out: f64, h: f64) -> Result<SimplicialMesh, MeshError> {
    if !(r_in.is_finite() && r_out.is_finite() && 0.0 < r_in && r_in < r_out) {
        return Err(MeshError::InvalidParameter(format!(
            "annulus radii ({r_in}, {r_out}) must satisfy 0 < r_in < r_out"
        )));
    }
    let t = h / RING_FACTOR;
    let n_r = (((r_out - r_in) / t).ceil() as usize).max(2);
    let dr = (r_out - r_in) / n_r as f64;

    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    let mut prev = ring_points(r_in, 0.0, ring_count(r_in, t), &mut vertices);
    for k in 1..=n_r {
        let r = r_in + k as f64 * dr;
        let ring = ring_points(r, 0.0, ring_count(r, t), &mut vertices);
        stitch_rings(&prev.0, &prev.1, &ring.0, &ring.1, &mut cells);
        prev = ring;
    }
    SimplicialMesh::new(2, vertices, cells)
}

/// Flat cylinder [0, length] x S^1 of the given circumference, embedded as a
/// round cylinder in R^3 (intrinsically flat; chordal edge-length error is
/// O(h^2) relative).
pub fn flat_cylinder(length: f64, circumference: f64, h: f64) -> Result<SimplicialMesh, MeshError> {
    if !(length > 0.0 && circumference > 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "cylinder length {length}, circumference {circumference} must be > 0"
        )));
    }
    let t = h / 2.0f64.sqrt();
    let nx = ((length / t).ceil() as usize).max(1);
    let ny = ((circumference / t).ceil() as usize).max(6);
    let r = circumference / (2.0 * PI);
    let (dx, dth) = (length / nx as f64, 2.0 * PI / ny as f64);

    let mut vertices = Vec::with_capacity((nx + 1) * ny);
    for i in 0..=nx {
        for j in 0..ny {
            let th = j as f64 * dth;
            vertices.push([r * th.cos(), r * th.sin(), i as f64 * dx]);
        }
    }
    let idx = |i: usize, j: usize| i * ny + (j % ny);
    let mut cells = Vec::with_capacity(nx * ny * 6);
    for i in 0..nx {
        for j in 0..ny {
            cells.extend_from_slice(&[idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            cells.extend_from_slice(&[idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    SimplicialMesh::new(2, vertices, cells)
}

/// Unit sphere with two antipodal polar caps of angular radius `cap_angle`
/// removed; the remaining band has two circle boundary components.
pub fn sphere_minus_caps(cap_angle: f64, h: f64) -> Result<SimplicialMesh, MeshError> {
    if !(cap_angle > 0.0 && cap_angle < PI / 2.0) {
        return Err(MeshError::InvalidParameter(format!(
            "cap_angle = {cap_angle} must lie in (0, pi/2)"
        )));
    }
    let t = h / RING_FACTOR;
    let n_t = (((PI - 2.0 * cap_angle) / t).ceil() as usize).max(2);
    let dth = (PI - 2.0 * cap_angle) / n_t as f64;

    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    let mut prev: Option<(Vec<usize>, Vec<f64>)> = None;
    for k in 0..=n_t {
        let theta = cap_angle + k as f64 * dth;
        let ring = ring_points(theta.sin(), theta.cos(), ring_count(theta.sin(), t), &mut vertices);
        if let Some(p) = prev {
            stitch_rings(&p.0, &p.1, &ring.0, &ring.1, &mut cells);
        }
        prev = Some(ring);
    }
    SimplicialMesh::new(2, vertices, cells)
}

/// Axis-aligned rectangle [0, width] x [0, height].
pub fn rectangle(width: f64, height: f64, h: f64) -> Result<SimplicialMesh, MeshError> {
    if !(width > 0.0 && height > 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "rectangle sides ({width}, {height}) must be > 0"
        )));
    }
    let t = h / 2.0f64.sqrt();
    let nx = ((width / t).ceil() as usize).max(1);
    let ny = ((height / t).ceil() as usize).max(1);
    let (dx, dy) = (width / nx as f64, height / ny as f64);

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for i in 0..=nx {
        for j in 0..=ny {
            vertices.push([i as f64 * dx, j as f64 * dy, 0.0]);
        }
    }
    let idx = |i: usize, j: usize| i * (ny + 1) + j;
    let mut cells = Vec::with_capacity(nx * ny * 6);
    for i in 0..nx {
        for j in 0..ny {
            cells.extend_from_slice(&[idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            cells.extend_from_slice(&[idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    SimplicialMesh::new(2, vertices, cells)
}

/// Flat torus S^1_length x S^1_circumference. Vertex coordinates live in the
/// fundamental domain; the flat metric is carried by explicit edge lengths,
/// and seam edges record their winding class for the systole estimator.
pub fn product_torus(length: f64, circumference: f64, h: f64) -> Result<SimplicialMesh, MeshError> {
    if !(length > 0.0 && circumference > 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "torus sides ({length}, {circumference}) must be > 0"
        )));
    }
    let t = h / 2.0f64.sqrt();
    let nx = ((length / t).ceil() as usize).max(3);
    let ny = ((circumference / t).ceil() as usize).max(3);
    let (dx, dy) = (length / nx as f64, circumference / ny as f64);
    let diag = (dx * dx + dy * dy).sqrt();

    let mut vertices = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            vertices.push([i as f64 * dx, j as f64 * dy, 0.0]);
        }
    }
    let idx = |i: usize, j: usize| (i % nx) * ny + (j % ny);

    let mut lengths: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut wraps: BTreeMap<(usize, usize), [i32; 2]> = BTreeMap::new();
    let mut add_edge = |a: usize, b: usize, len: f64, class_ab: [i32; 2]| {
        let key = super::edge_key(a, b);
        lengths.insert(key, len);
        if class_ab != [0, 0] {
            let stored = if a <= b {
                class_ab
            } else {
                [-class_ab[0], -class_ab[1]]
            };
            wraps.insert(key, stored);
        }
    };

    let mut cells = Vec::with_capacity(nx * ny * 6);
    for i in 0..nx {
        for j in 0..ny {
            let wx = i32::from(i + 1 == nx);
            let wy = i32::from(j + 1 == ny);
            let (v00, v10) = (idx(i, j), idx(i + 1, j));
            let (v01, v11) = (idx(i, j + 1), idx(i + 1, j + 1));
            add_edge(v00, v10, dx, [wx, 0]);
            add_edge(v00, v01, dy, [0, wy]);
            add_edge(v00, v11, diag, [wx, wy]);
            cells.extend_from_slice(&[v00, v10, v11]);
            cells.extend_from_slice(&[v00, v11, v01]);
        }
    }
    SimplicialMesh::with_edge_lengths(2, vertices, cells, lengths, wraps)
}

/// Closed circle polyline of the given total length.
pub fn circle(length: f64, h: f64) -> Result<SimplicialMesh, MeshError> {
    if !(length > 0.0) {
        return Err(MeshError::InvalidParameter(format!("length = {length}")));
    }
    let n = ((length / h).ceil() as usize).max(8);
    let r = length / (2.0 * PI);
    let vertices: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            [r * t.cos(), r * t.sin(), 0.0]
        })
        .collect();
    let mut cells = Vec::with_capacity(2 * n);
    for i in 0..n {
        cells.extend_from_slice(&[i, (i + 1) % n]);
    }
    SimplicialMesh::new(1, vertices, cells)
}

/// Closed unit icosphere, subdivided until the edge length is below `h`.
pub fn icosphere(h: f64) -> Result<SimplicialMesh, MeshError> {
    if !(h > 0.0) {
        return Err(MeshError::InvalidParameter(format!("h = {h}")));
    }
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    for v in &mut vertices {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        *v = [v[0] / n, v[1] / n, v[2] / n];
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    // icosahedron edge on the unit sphere
    let mut edge = (vertices[0][0] - vertices[11][0]).hypot(
        (vertices[0][1] - vertices[11][1]).hypot(vertices[0][2] - vertices[11][2]),
    );
    while edge > h {
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for e in 0..3 {
                let key = super::edge_key(f[e], f[(e + 1) % 3]);
                mid[e] = *midpoint.entry(key).or_insert_with(|| {
                    let (p, q) = (vertices[key.0], vertices[key.1]);
                    let mut m = [
                        (p[0] + q[0]) / 2.0,
                        (p[1] + q[1]) / 2.0,
                        (p[2] + q[2]) / 2.0,
                    ];
                    let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                    m = [m[0] / n, m[1] / n, m[2] / n];
                    vertices.push(m);
                    vertices.len() - 1
                });
            }
            new_faces.push([f[0], mid[0], mid[2]]);
            new_faces.push([f[1], mid[1], mid[0]]);
            new_faces.push([f[2], mid[2], mid[1]]);
            new_faces.push([mid[0], mid[1], mid[2]]);
        }
        faces = new_faces;
        edge /= 2.0;
    }
    let cells: Vec<usize> = faces.iter().flatten().copied().collect();
    SimplicialMesh::new(2, vertices, cells)
}
