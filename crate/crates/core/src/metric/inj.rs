//! Injectivity radius estimators.
//!
//! Circles are exact (ℓ/2). Closed surfaces use half the length of the
//! shortest noncontractible edge loop through sampled basepoints (a
//! tree-cotree search): loops are classified by winding metadata when the
//! generator recorded it, and otherwise by a nonseparating-cycle flood test
//! (exact on tori; on genus ≥ 2 separating noncontractible loops are not
//! seen, so the value is an estimate). Simply-connected surfaces have no
//! noncontractible loops and return None — callers must supply an override.

use super::{farthest_point_sample, MetricError};
use crate::mesh::SimplicialMesh;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

/// inj(Σ_j) for a boundary component: exact ℓ_j/2 for circle components,
/// systole estimate for the closed boundary surfaces of 3D meshes.
pub fn boundary_injectivity_radius(
    mesh: &SimplicialMesh,
    label: usize,
) -> Result<Option<f64>, MetricError> {
    if label >= mesh.num_boundary_components() {
        return Err(MetricError::ComponentNotFound(label));
    }
    if mesh.dim() == 2 {
        if mesh.component_is_circle(label)? {
            let len = mesh.boundary_volumes()[label];
            return Ok(Some(len / 2.0));
        }
        return Ok(None);
    }
    if mesh.dim() == 3 {
        // boundary component is a closed triangulated surface
        let faces: Vec<[usize; 3]> = (0..mesh.num_boundary_faces())
            .filter(|&i| mesh.boundary_face_label(i) == label)
            .map(|i| {
                let f = mesh.boundary_face(i);
                [f[0], f[1], f[2]]
            })
            .collect();
        let edges = mesh.boundary_edges_of(label)?;
        return Ok(surface_systole(mesh.num_vertices(), &edges, &faces, None, 8)
            .map(|s| s / 2.0));
    }
    Ok(None)
}

/// inj of a closed mesh: ℓ/2 for a circle, half the systole estimate for a
/// surface of positive genus, None for a simply-connected surface.
pub fn closed_injectivity_radius(
    mesh: &SimplicialMesh,
    seed: u64,
) -> Result<Option<f64>, MetricError> {
    if !mesh.is_closed() {
        return Err(MetricError::InvalidParameter(
            "closed_injectivity_radius needs a closed mesh".into(),
        ));
    }
    match mesh.dim() {
        1 => Ok(Some(mesh.volume() / 2.0)),
        2 => {
            let v = mesh.num_vertices() as i64;
            let e = mesh.edge_lengths().len() as i64;
            let f = mesh.num_cells() as i64;
            let euler = v - e + f;
            if euler == 2 {
                // genus 0: no noncontractible loops
                return Ok(None);
            }
            let faces: Vec<[usize; 3]> = (0..mesh.num_cells())
                .map(|c| {
                    let cell = mesh.cell(c);
                    [cell[0], cell[1], cell[2]]
                })
                .collect();
            let edges: Vec<(usize, usize, f64)> = mesh
                .edge_lengths()
                .iter()
                .map(|(&(a, b), &l)| (a, b, l))
                .collect();
            let wraps = if mesh.wrap_classes().is_empty() {
                None
            } else {
                Some(mesh.wrap_classes())
            };
            let systole =
                surface_systole_seeded(mesh.num_vertices(), &edges, &faces, wraps, 8, seed);
            Ok(systole.map(|s| s / 2.0))
        }
        _ => Ok(None),
    }
}

fn surface_systole(
    n_vertices: usize,
    edges: &[(usize, usize, f64)],
    faces: &[[usize; 3]],
    wraps: Option<&BTreeMap<(usize, usize), [i32; 2]>>,
    basepoints: usize,
) -> Option<f64> {
    surface_systole_seeded(n_vertices, edges, faces, wraps, basepoints, 0)
}

/// Length of the shortest loop through sampled basepoints that is detected
/// as noncontractible. Loops have the tree-cotree form: two shortest paths
/// from the basepoint plus one non-tree edge.
fn surface_systole_seeded(
    n_vertices: usize,
    edges: &[(usize, usize, f64)],
    faces: &[[usize; 3]],
    wraps: Option<&BTreeMap<(usize, usize), [i32; 2]>>,
    basepoints: usize,
    seed: u64,
) -> Option<f64> {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_vertices];
    let mut surface_vertices: BTreeSet<usize> = BTreeSet::new();
    for &(a, b, l) in edges {
        adj[a].push((b, l));
        adj[b].push((a, l));
        surface_vertices.insert(a);
        surface_vertices.insert(b);
    }
    let candidates: Vec<usize> = surface_vertices.into_iter().collect();
    let bases = farthest_point_sample(&adj, &candidates, basepoints.min(candidates.len()), seed);

    let mut best: Option<f64> = None;
    for &v in &bases {
        let found = match wraps {
            Some(w) => loop_via_winding(&adj, edges, v, w),
            None => loop_via_flood(&adj, edges, faces, v),
        };
        if let Some(len) = found {
            best = Some(best.map_or(len, |b: f64| b.min(len)));
        }
    }
    best
}

/// Dijkstra with parent tracking.
fn shortest_path_tree(adj: &[Vec<(usize, f64)>], source: usize) -> (Vec<f64>, Vec<usize>) {
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
        }
    }
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut parent = vec![usize::MAX; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse(Item(0.0, source)));
    while let Some(Reverse(Item(d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(u, w) in &adj[v] {
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                parent[u] = v;
                heap.push(Reverse(Item(nd, u)));
            }
        }
    }
    (dist, parent)
}

fn wrap_class(
    wraps: &BTreeMap<(usize, usize), [i32; 2]>,
    from: usize,
    to: usize,
) -> [i32; 2] {
    let key = crate::mesh::edge_key(from, to);
    match wraps.get(&key) {
        None => [0, 0],
        Some(&c) => {
            if from <= to {
                c
            } else {
                [-c[0], -c[1]]
            }
        }
    }
}

/// Shortest noncontractible loop through `v`, homology classes accumulated
/// from per-edge winding metadata.
fn loop_via_winding(
    adj: &[Vec<(usize, f64)>],
    edges: &[(usize, usize, f64)],
    v: usize,
    wraps: &BTreeMap<(usize, usize), [i32; 2]>,
) -> Option<f64> {
    let (dist, parent) = shortest_path_tree(adj, v);
    // accumulate winding along tree paths, in order of distance
    let mut order: Vec<usize> = (0..adj.len()).filter(|&u| dist[u].is_finite()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]));
    let mut wind = vec![[0i32; 2]; adj.len()];
    for &u in &order {
        if u == v || parent[u] == usize::MAX {
            continue;
        }
        let p = parent[u];
        let c = wrap_class(wraps, p, u);
        wind[u] = [wind[p][0] + c[0], wind[p][1] + c[1]];
    }
    let mut best: Option<f64> = None;
    for &(a, b, len) in edges {
        if parent[a] == b || parent[b] == a {
            continue;
        }
        if !(dist[a].is_finite() && dist[b].is_finite()) {
            continue;
        }
        let c = wrap_class(wraps, a, b);
        let total = [
            wind[a][0] + c[0] - wind[b][0],
            wind[a][1] + c[1] - wind[b][1],
        ];
        if total != [0, 0] {
            let l = dist[a] + len + dist[b];
            best = Some(best.map_or(l, |x: f64| x.min(l)));
        }
    }
    best
}

/// Shortest loop through `v` whose reduced cycle is nonseparating: cutting
/// the surface along it leaves the dual face graph connected, which on a
/// torus exactly characterizes noncontractible simple cycles.
fn loop_via_flood(
    adj: &[Vec<(usize, f64)>],
    edges: &[(usize, usize, f64)],
    faces: &[[usize; 3]],
    v: usize,
) -> Option<f64> {
    let (dist, parent) = shortest_path_tree(adj, v);
    let mut candidates: Vec<(f64, usize, usize, f64)> = edges
        .iter()
        .filter(|&&(a, b, _)| {
            parent[a] != b && parent[b] != a && dist[a].is_finite() && dist[b].is_finite()
        })
        .map(|&(a, b, l)| (dist[a] + l + dist[b], a, b, l))
        .collect();
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));

    // edge -> incident faces
    let mut edge_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for e in 0..3 {
            let key = crate::mesh::edge_key(f[e], f[(e + 1) % 3]);
            edge_faces.entry(key).or_default().push(fi);
        }
    }

    const FLOOD_CAP: usize = 2000;
    for (tested, &(len, a, b, _)) in candidates.iter().enumerate() {
        if tested >= FLOOD_CAP {
            break;
        }
        // XOR of the two tree paths plus the cotree edge: a cycle over Z2
        let mut cycle: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut toggle = |x: usize, y: usize| {
            let key = crate::mesh::edge_key(x, y);
            if !cycle.remove(&key) {
                cycle.insert(key);
            }
        };
        toggle(a, b);
        let mut walk = |mut u: usize| {
            while parent[u] != usize::MAX {
                toggle(parent[u], u);
                u = parent[u];
            }
        };
        walk(a);
        walk(b);
        if cycle.is_empty() {
            continue;
        }
        // flood the dual graph without crossing the cycle
        let mut reached = vec![false; faces.len()];
        let mut stack = vec![0usize];
        reached[0] = true;
        let mut count = 1usize;
        while let Some(fi) = stack.pop() {
            let f = faces[fi];
            for e in 0..3 {
                let key = crate::mesh::edge_key(f[e], f[(e + 1) % 3]);
                if cycle.contains(&key) {
                    continue;
                }
                if let Some(nb) = edge_faces.get(&key) {
                    for &g in nb {
                        if !reached[g] {
                            reached[g] = true;
                            count += 1;
                            stack.push(g);
                        }
                    }
                }
            }
        }
        if count == faces.len() {
            return Some(len);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn circle_half_length() {
        let m = shapes::circle(2.0 * PI, 0.05).unwrap();
        let inj = closed_injectivity_radius(&m, 0).unwrap().unwrap();
        assert_relative_eq!(inj, m.volume() / 2.0, epsilon = 1e-12);
        let m2 = shapes::circle(7.0, 0.05).unwrap();
        let inj2 = closed_injectivity_radius(&m2, 0).unwrap().unwrap();
        assert_relative_eq!(inj2, m2.volume() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn disk_boundary_circle() {
        let m = shapes::disk(1.0, 0.1).unwrap();
        let inj = boundary_injectivity_radius(&m, 0).unwrap().unwrap();
        assert_relative_eq!(inj, m.boundary_volumes()[0] / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn torus_systole_via_winding() {
        // shortest noncontractible loop of the 10 x 2π flat torus is 2π
        let m = shapes::product_torus(10.0, 2.0 * PI, 0.3).unwrap();
        let inj = closed_injectivity_radius(&m, 0).unwrap().unwrap();
        assert_relative_eq!(inj, PI, max_relative = 0.02);
    }

    #[test]
    fn torus_systole_via_flood_matches() {
        // strip the winding metadata: the flood test must agree
        let m = shapes::product_torus(6.0, 2.0, 0.4).unwrap();
        let faces: Vec<[usize; 3]> = (0..m.num_cells())
            .map(|c| {
                let cell = m.cell(c);
                [cell[0], cell[1], cell[2]]
            })
            .collect();
        let edges: Vec<(usize, usize, f64)> = m
            .edge_lengths()
            .iter()
            .map(|(&(a, b), &l)| (a, b, l))
            .collect();
        let with_meta =
            surface_systole(m.num_vertices(), &edges, &faces, Some(m.wrap_classes()), 6).unwrap();
        let with_flood = surface_systole(m.num_vertices(), &edges, &faces, None, 6).unwrap();
        assert_relative_eq!(with_meta, 2.0, max_relative = 0.02);
        assert_relative_eq!(with_flood, with_meta, max_relative = 0.02);
    }

    #[test]
    fn sphere_has_no_loops() {
        let m = shapes::icosphere(0.4).unwrap();
        assert!(closed_injectivity_radius(&m, 0).unwrap().is_none());
    }
}
