//! Simplicial manifolds with boundary.
//!
//! A mesh is a list of embedded vertices plus cells (segments, triangles or
//! tetrahedra). Edge lengths are derived from the embedding by default; a
//! mesh may instead carry explicit intrinsic edge lengths (flat tori cannot
//! be embedded in R^3, so their generator supplies the periodic metric
//! directly). All 1D/2D geometry downstream (volumes, assembly, graph
//! distances) is computed from edge lengths, so both representations share
//! one code path.

mod off;
pub mod shapes;

pub use off::{read_off, write_off, write_off_to};
pub use shapes::{icosphere, ShapeKind, ShapeSpec};

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("non-manifold face {face:?} shared by {count} cells")]
    NonManifold { face: Vec<usize>, count: usize },
    #[error("mesh has an empty boundary where one is required")]
    EmptyBoundary,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate cell {cell} (volume {volume:.3e})")]
    DegenerateCell { cell: usize, volume: f64 },
    #[error("cell {cell} references vertex {vertex} out of range")]
    IndexOutOfRange { cell: usize, vertex: usize },
    #[error("missing edge length for edge ({a}, {b})")]
    MissingEdgeLength { a: usize, b: usize },
    #[error("unsupported manifold dimension {0} (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("boundary component {0} not found")]
    ComponentNotFound(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Compact simplicial manifold, immutable after construction.
#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    /// Manifold dimension: 1 (polyline), 2 (triangles) or 3 (tetrahedra).
    dim: usize,
    vertices: Vec<[f64; 3]>,
    /// Flat cell storage, `dim + 1` vertex indices per cell.
    cells: Vec<usize>,
    /// Flat boundary face storage, `dim` vertex indices per face.
    boundary_faces: Vec<usize>,
    /// Component label per boundary face, canonical order (measure ascending).
    boundary_labels: Vec<usize>,
    num_components: usize,
    edge_lengths: BTreeMap<(usize, usize), f64>,
    explicit_lengths: bool,
    /// Homology winding class per edge (torus generators only); the class is
    /// picked up traversing from the smaller to the larger vertex index.
    wrap_classes: BTreeMap<(usize, usize), [i32; 2]>,
    cell_volumes: Vec<f64>,
    face_measures: Vec<f64>,
}

impl SimplicialMesh {
    /// Build a mesh whose edge lengths are derived from vertex coordinates.
    pub fn new(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        cells: Vec<usize>,
    ) -> Result<Self, MeshError> {
        Self::build(dim, vertices, cells, None, BTreeMap::new())
    }

    /// Build a mesh with explicit intrinsic edge lengths (1D/2D only).
    pub fn with_edge_lengths(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        cells: Vec<usize>,
        edge_lengths: BTreeMap<(usize, usize), f64>,
        wrap_classes: BTreeMap<(usize, usize), [i32; 2]>,
    ) -> Result<Self, MeshError> {
        if dim == 3 {
            return Err(MeshError::InvalidParameter(
                "explicit edge lengths are only supported for 1D/2D meshes".into(),
            ));
        }
        Self::build(dim, vertices, cells, Some(edge_lengths), wrap_classes)
    }

    fn build(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        cells: Vec<usize>,
        lengths: Option<BTreeMap<(usize, usize), f64>>,
        wrap_classes: BTreeMap<(usize, usize), [i32; 2]>,
    ) -> Result<Self, MeshError> {
        if !(1..=3).contains(&dim) {
            return Err(MeshError::UnsupportedDimension(dim));
        }
        let arity = dim + 1;
        if cells.is_empty() || cells.len() % arity != 0 {
            return Err(MeshError::Parse(format!(
                "cell list length {} is not a multiple of {}",
                cells.len(),
                arity
            )));
        }
        for (c, chunk) in cells.chunks(arity).enumerate() {
            for &v in chunk {
                if v >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange { cell: c, vertex: v });
                }
            }
        }

        let explicit_lengths = lengths.is_some();
        let mut edge_lengths = lengths.unwrap_or_default();
        for chunk in cells.chunks(arity) {
            for i in 0..arity {
                for j in (i + 1)..arity {
                    let key = edge_key(chunk[i], chunk[j]);
                    if explicit_lengths {
                        match edge_lengths.get(&key) {
                            Some(&l) if l > 0.0 && l.is_finite() => {}
                            _ => {
                                return Err(MeshError::MissingEdgeLength { a: key.0, b: key.1 })
                            }
                        }
                    } else {
                        edge_lengths.entry(key).or_insert_with(|| {
                            let (p, q) = (vertices[key.0], vertices[key.1]);
                            ((p[0] - q[0]).powi(2)
                                + (p[1] - q[1]).powi(2)
                                + (p[2] - q[2]).powi(2))
                            .sqrt()
                        });
                    }
                }
            }
        }

        let mut mesh = Self {
            dim,
            vertices,
            cells,
            boundary_faces: Vec::new(),
            boundary_labels: Vec::new(),
            num_components: 0,
            edge_lengths,
            explicit_lengths,
            wrap_classes,
            cell_volumes: Vec::new(),
            face_measures: Vec::new(),
        };
        mesh.compute_cell_volumes()?;
        mesh.extract_boundary()?;
        Ok(mesh)
    }

    fn compute_cell_volumes(&mut self) -> Result<(), MeshError> {
        let arity = self.dim + 1;
        let vols: Vec<f64> = self
            .cells
            .chunks(arity)
            .map(|c| self.simplex_volume(c))
            .collect();
        for (i, &v) in vols.iter().enumerate() {
            if !(v.is_finite() && v > 1e-300) {
                return Err(MeshError::DegenerateCell { cell: i, volume: v });
            }
        }
        self.cell_volumes = vols;
        Ok(())
    }

    fn simplex_volume(&self, verts: &[usize]) -> f64 {
        match verts.len() {
            2 => self.edge_length(verts[0], verts[1]),
            3 => {
                let a = self.edge_length(verts[1], verts[2]);
                let b = self.edge_length(verts[0], verts[2]);
                let c = self.edge_length(verts[0], verts[1]);
                heron(a, b, c)
            }
            4 => {
                let p0 = self.vertices[verts[0]];
                let mut m = [[0.0; 3]; 3];
                for k in 0..3 {
                    let p = self.vertices[verts[k + 1]];
                    for d in 0..3 {
                        m[k][d] = p[d] - p0[d];
                    }
                }
                let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
                det.abs() / 6.0
            }
            _ => unreachable!(),
        }
    }

    fn extract_boundary(&mut self) -> Result<(), MeshError> {
        let arity = self.dim + 1;
        // Faces of a d-simplex: drop one vertex.
        let mut incidence: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for chunk in self.cells.chunks(arity) {
            for drop in 0..arity {
                let mut face: Vec<usize> = chunk
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, &v)| v)
                    .collect();
                face.sort_unstable();
                *incidence.entry(face).or_insert(0) += 1;
            }
        }
        let mut faces: Vec<Vec<usize>> = Vec::new();
        for (face, count) in incidence {
            match count {
                1 => faces.push(face),
                2 => {}
                c => {
                    return Err(MeshError::NonManifold {
                        face,
                        count: c,
                    })
                }
            }
        }

        // Flood fill over shared (n-1)-subfaces of boundary faces.
        let labels = self.label_components(&faces);
        let measures: Vec<f64> = faces.iter().map(|f| self.face_measure(f)).collect();

        // Canonical component order: total measure ascending, ties by the
        // smallest vertex index in the component.
        let b = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut comp_measure = vec![0.0; b];
        let mut comp_minv = vec![usize::MAX; b];
        for (i, f) in faces.iter().enumerate() {
            comp_measure[labels[i]] += measures[i];
            comp_minv[labels[i]] = comp_minv[labels[i]].min(*f.iter().min().unwrap());
        }
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&x, &y| {
            comp_measure[x]
                .partial_cmp(&comp_measure[y])
                .unwrap()
                .then(comp_minv[x].cmp(&comp_minv[y]))
        });
        let mut relabel = vec![0usize; b];
        for (new, &old) in order.iter().enumerate() {
            relabel[old] = new;
        }

        self.boundary_faces = faces.iter().flatten().copied().collect();
        self.boundary_labels = labels.iter().map(|&l| relabel[l]).collect();
        self.num_components = b;
        self.face_measures = measures;
        Ok(())
    }

    fn label_components(&self, faces: &[Vec<usize>]) -> Vec<usize> {
        let mut subface_map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (i, face) in faces.iter().enumerate() {
            if face.len() == 1 {
                // 0-dimensional boundary: isolated points, one component each.
                continue;
            }
            for drop in 0..face.len() {
                let sub: Vec<usize> = face
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != drop)
                    .map(|(_, &v)| v)
                    .collect();
                subface_map.entry(sub).or_default().push(i);
            }
        }
        let mut labels = vec![usize::MAX; faces.len()];
        let mut next = 0usize;
        for start in 0..faces.len() {
            if labels[start] != usize::MAX {
                continue;
            }
            labels[start] = next;
            let mut stack = vec![start];
            while let Some(f) = stack.pop() {
                if faces[f].len() == 1 {
                    continue;
                }
                for drop in 0..faces[f].len() {
                    let sub: Vec<usize> = faces[f]
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    if let Some(neigh) = subface_map.get(&sub) {
                        for &g in neigh {
                            if labels[g] == usize::MAX {
                                labels[g] = next;
                                stack.push(g);
                            }
                        }
                    }
                }
            }
            next += 1;
        }
        labels
    }

    fn face_measure(&self, face: &[usize]) -> f64 {
        match face.len() {
            1 => 1.0,
            2 => self.edge_length(face[0], face[1]),
            3 => {
                let a = self.edge_length(face[1], face[2]);
                let b = self.edge_length(face[0], face[2]);
                let c = self.edge_length(face[0], face[1]);
                heron(a, b, c)
            }
            _ => unreachable!(),
        }
    }

    // -- accessors -------------------------------------------------------

    /// Manifold dimension of the cells (1, 2 or 3).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn cell(&self, i: usize) -> &[usize] {
        let a = self.dim + 1;
        &self.cells[i * a..(i + 1) * a]
    }

    pub fn cell_volume(&self, i: usize) -> f64 {
        self.cell_volumes[i]
    }

    /// |M|: sum of cell volumes.
    pub fn volume(&self) -> f64 {
        self.cell_volumes.iter().sum()
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        self.edge_lengths[&edge_key(a, b)]
    }

    pub fn edge_lengths(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.edge_lengths
    }

    pub fn has_explicit_lengths(&self) -> bool {
        self.explicit_lengths
    }

    pub fn wrap_classes(&self) -> &BTreeMap<(usize, usize), [i32; 2]> {
        &self.wrap_classes
    }

    pub fn mean_edge_length(&self) -> f64 {
        let s: f64 = self.edge_lengths.values().sum();
        s / self.edge_lengths.len() as f64
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_lengths.values().fold(0.0, |m, &l| m.max(l))
    }

    /// Largest cell diameter (max edge within any cell).
    pub fn max_cell_diameter(&self) -> f64 {
        self.max_edge_length()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_faces.is_empty()
    }

    /// Number of boundary components b.
    pub fn num_boundary_components(&self) -> usize {
        self.num_components
    }

    pub fn num_boundary_faces(&self) -> usize {
        self.boundary_labels.len()
    }

    pub fn boundary_face(&self, i: usize) -> &[usize] {
        &self.boundary_faces[i * self.dim..(i + 1) * self.dim]
    }

    pub fn boundary_face_label(&self, i: usize) -> usize {
        self.boundary_labels[i]
    }

    pub fn boundary_face_measure(&self, i: usize) -> f64 {
        self.face_measures[i]
    }

    /// |Σ_j| per component label.
    pub fn boundary_volumes(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.num_components];
        for i in 0..self.num_boundary_faces() {
            v[self.boundary_labels[i]] += self.face_measures[i];
        }
        v
    }

    /// |Σ|: total boundary measure.
    pub fn boundary_volume(&self) -> f64 {
        self.face_measures.iter().sum()
    }

    /// Sorted global indices of all boundary vertices.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_faces.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Sorted vertices of one boundary component.
    pub fn boundary_vertices_of(&self, label: usize) -> Result<Vec<usize>, MeshError> {
        if label >= self.num_components {
            return Err(MeshError::ComponentNotFound(label));
        }
        let mut v: Vec<usize> = (0..self.num_boundary_faces())
            .filter(|&i| self.boundary_labels[i] == label)
            .flat_map(|i| self.boundary_face(i).iter().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        Ok(v)
    }

    /// Lumped boundary measure per vertex (face measure split evenly among
    /// its vertices), restricted to one component.
    pub fn boundary_vertex_weights(&self, label: usize) -> Result<BTreeMap<usize, f64>, MeshError> {
        if label >= self.num_components {
            return Err(MeshError::ComponentNotFound(label));
        }
        let mut w: BTreeMap<usize, f64> = BTreeMap::new();
        for i in 0..self.num_boundary_faces() {
            if self.boundary_labels[i] != label {
                continue;
            }
            let face = self.boundary_face(i);
            let share = self.face_measures[i] / face.len() as f64;
            for &v in face {
                *w.entry(v).or_insert(0.0) += share;
            }
        }
        Ok(w)
    }

    /// Weighted adjacency over all mesh edges.
    pub fn edge_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for (&(a, b), &l) in &self.edge_lengths {
            adj[a].push((b, l));
            adj[b].push((a, l));
        }
        adj
    }

    /// Edges intrinsic to one boundary component: the boundary faces
    /// themselves in 2D, the edges of boundary triangles in 3D.
    pub fn boundary_edges_of(&self, label: usize) -> Result<Vec<(usize, usize, f64)>, MeshError> {
        if label >= self.num_components {
            return Err(MeshError::ComponentNotFound(label));
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for i in 0..self.num_boundary_faces() {
            if self.boundary_labels[i] != label {
                continue;
            }
            let f = self.boundary_face(i);
            match f.len() {
                2 => edges.push(edge_key(f[0], f[1])),
                3 => {
                    edges.push(edge_key(f[0], f[1]));
                    edges.push(edge_key(f[1], f[2]));
                    edges.push(edge_key(f[0], f[2]));
                }
                _ => {}
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(edges
            .into_iter()
            .map(|(a, b)| (a, b, self.edge_lengths[&(a, b)]))
            .collect())
    }

    /// True if component `label` is a closed polyline (every vertex has
    /// exactly two incident boundary edges).
    pub fn component_is_circle(&self, label: usize) -> Result<bool, MeshError> {
        if self.dim != 2 {
            return Ok(false);
        }
        let edges = self.boundary_edges_of(label)?;
        let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
        for &(a, b, _) in &edges {
            *deg.entry(a).or_insert(0) += 1;
            *deg.entry(b).or_insert(0) += 1;
        }
        Ok(!edges.is_empty() && deg.values().all(|&d| d == 2))
    }

    /// Uniformly scale the mesh by `t > 0` (coordinates and stored lengths).
    pub fn scaled(&self, t: f64) -> Result<SimplicialMesh, MeshError> {
        if !(t.is_finite() && t > 0.0) {
            return Err(MeshError::InvalidParameter(format!("scale factor {t}")));
        }
        let vertices: Vec<[f64; 3]> = self
            .vertices
            .iter()
            .map(|p| [p[0] * t, p[1] * t, p[2] * t])
            .collect();
        if self.explicit_lengths {
            let lengths = self
                .edge_lengths
                .iter()
                .map(|(&k, &l)| (k, l * t))
                .collect();
            Self::with_edge_lengths(
                self.dim,
                vertices,
                self.cells.clone(),
                lengths,
                self.wrap_classes.clone(),
            )
        } else {
            Self::new(self.dim, vertices, self.cells.clone())
        }
    }

    /// Apply a rigid motion (rotation matrix rows `r`, translation `t`).
    pub fn transformed(&self, r: [[f64; 3]; 3], t: [f64; 3]) -> Result<SimplicialMesh, MeshError> {
        let vertices: Vec<[f64; 3]> = self
            .vertices
            .iter()
            .map(|p| {
                let mut q = [0.0; 3];
                for (i, qi) in q.iter_mut().enumerate() {
                    *qi = r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + t[i];
                }
                q
            })
            .collect();
        if self.explicit_lengths {
            Self::with_edge_lengths(
                self.dim,
                vertices,
                self.cells.clone(),
                self.edge_lengths.clone(),
                self.wrap_classes.clone(),
            )
        } else {
            Self::new(self.dim, vertices, self.cells.clone())
        }
    }

    /// Deterministic fingerprint of the mesh contents.
    pub fn fingerprint(&self) -> String {
        let mut h = crate::fnv1a(&(self.dim as u64).to_le_bytes(), 0);
        for p in &self.vertices {
            for c in p {
                h = crate::fnv1a(&c.to_le_bytes(), h);
            }
        }
        for &c in &self.cells {
            h = crate::fnv1a(&(c as u64).to_le_bytes(), h);
        }
        if self.explicit_lengths {
            for (&(a, b), &l) in &self.edge_lengths {
                h = crate::fnv1a(&(a as u64).to_le_bytes(), h);
                h = crate::fnv1a(&(b as u64).to_le_bytes(), h);
                h = crate::fnv1a(&l.to_le_bytes(), h);
            }
        }
        format!("{h:016x}")
    }
}

/// Stable Heron formula (Kahan's ordering) for a triangle area.
pub(crate) fn heron(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let (a, b, c) = (s[0], s[1], s[2]);
    let t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if t <= 0.0 {
        0.0
    } else {
        0.25 * t.sqrt()
    }
}
