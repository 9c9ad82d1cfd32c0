//! ASCII OFF interchange: counts header, vertex lines, face lines. Two
//! extensions cover the rest of the corpus: a `#TETS` block for tetrahedral
//! cells and an `#EDGELEN` block for meshes carrying explicit intrinsic edge
//! lengths (flat tori).

use super::{MeshError, SimplicialMesh};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn read_off(path: impl AsRef<Path>) -> Result<SimplicialMesh, MeshError> {
    let file = std::fs::File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    parse_off(reader)
}

fn parse_off(reader: impl BufRead) -> Result<SimplicialMesh, MeshError> {
    let mut lines = Vec::new();
    for line in reader.lines() {
        lines.push(line?);
    }
    let mut it = lines.iter().enumerate();

    // Content lines, with our extension markers passed through.
    let next_content = |it: &mut dyn Iterator<Item = (usize, &String)>| -> Option<(usize, String)> {
        for (n, line) in it {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if t.starts_with('#') && !t.starts_with("#TETS") && !t.starts_with("#EDGELEN") {
                continue;
            }
            return Some((n, t.to_string()));
        }
        None
    };
    let err = |n: usize, msg: &str| MeshError::Parse(format!("line {}: {}", n + 1, msg));

    let (n0, header) = next_content(&mut it).ok_or_else(|| MeshError::Parse("empty file".into()))?;
    if header != "OFF" {
        return Err(err(n0, "expected OFF header"));
    }
    let (n1, counts) = next_content(&mut it).ok_or_else(|| err(n0, "missing counts line"))?;
    let parts: Vec<&str> = counts.split_whitespace().collect();
    if parts.len() < 2 {
        return Err(err(n1, "counts line needs at least `nv nf`"));
    }
    let nv: usize = parts[0].parse().map_err(|_| err(n1, "bad vertex count"))?;
    let nf: usize = parts[1].parse().map_err(|_| err(n1, "bad face count"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, line) = next_content(&mut it).ok_or_else(|| err(n1, "unexpected end of vertices"))?;
        let coords: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
        let coords = coords.map_err(|_| err(n, "bad vertex coordinates"))?;
        if coords.len() < 3 {
            return Err(err(n, "vertex line needs 3 coordinates"));
        }
        vertices.push([coords[0], coords[1], coords[2]]);
    }

    let mut face_arity: Option<usize> = None;
    let mut faces: Vec<usize> = Vec::new();
    for _ in 0..nf {
        let (n, line) = next_content(&mut it).ok_or_else(|| err(n1, "unexpected end of faces"))?;
        let nums: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
        let nums = nums.map_err(|_| err(n, "bad face indices"))?;
        if nums.is_empty() || nums.len() != nums[0] + 1 {
            return Err(err(n, "face line must be `k v_1 .. v_k`"));
        }
        let arity = nums[0];
        if !(2..=3).contains(&arity) {
            return Err(err(n, "only 2- and 3-vertex faces are supported"));
        }
        match face_arity {
            None => face_arity = Some(arity),
            Some(a) if a == arity => {}
            Some(_) => return Err(err(n, "mixed face arities")),
        }
        faces.extend_from_slice(&nums[1..]);
    }

    let mut tets: Vec<usize> = Vec::new();
    let mut edge_lengths: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    while let Some((n, line)) = next_content(&mut it) {
        if let Some(rest) = line.strip_prefix("#TETS") {
            let count: usize = rest
                .trim()
                .parse()
                .map_err(|_| err(n, "bad #TETS count"))?;
            for _ in 0..count {
                let (m, tline) =
                    next_content(&mut it).ok_or_else(|| err(n, "unexpected end of tets"))?;
                let nums: Result<Vec<usize>, _> =
                    tline.split_whitespace().map(str::parse).collect();
                let nums = nums.map_err(|_| err(m, "bad tet indices"))?;
                if nums.len() != 5 || nums[0] != 4 {
                    return Err(err(m, "tet line must be `4 a b c d`"));
                }
                tets.extend_from_slice(&nums[1..]);
            }
        } else if let Some(rest) = line.strip_prefix("#EDGELEN") {
            let count: usize = rest
                .trim()
                .parse()
                .map_err(|_| err(n, "bad #EDGELEN count"))?;
            for _ in 0..count {
                let (m, eline) =
                    next_content(&mut it).ok_or_else(|| err(n, "unexpected end of edge lengths"))?;
                let parts: Vec<&str> = eline.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(err(m, "edge length line must be `a b length`"));
                }
                let a: usize = parts[0].parse().map_err(|_| err(m, "bad edge index"))?;
                let b: usize = parts[1].parse().map_err(|_| err(m, "bad edge index"))?;
                let l: f64 = parts[2].parse().map_err(|_| err(m, "bad edge length"))?;
                edge_lengths.insert(super::edge_key(a, b), l);
            }
        } else {
            return Err(err(n, "unexpected trailing content"));
        }
    }

    if !tets.is_empty() {
        return SimplicialMesh::new(3, vertices, tets);
    }
    let dim = match face_arity {
        Some(3) => 2,
        Some(2) => 1,
        _ => return Err(MeshError::Parse("no cells found".into())),
    };
    if edge_lengths.is_empty() {
        SimplicialMesh::new(dim, vertices, faces)
    } else {
        SimplicialMesh::with_edge_lengths(dim, vertices, faces, edge_lengths, BTreeMap::new())
    }
}

pub fn write_off(mesh: &SimplicialMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    write_off_to(mesh, &mut file)
}

pub fn write_off_to(mesh: &SimplicialMesh, w: &mut impl Write) -> Result<(), MeshError> {
    writeln!(w, "OFF")?;
    let is_tet = mesh.dim() == 3;
    let nf = if is_tet { 0 } else { mesh.num_cells() };
    writeln!(w, "{} {} 0", mesh.num_vertices(), nf)?;
    // Display prints the shortest representation that round-trips exactly
    for p in mesh.vertices() {
        writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
    }
    if is_tet {
        writeln!(w, "#TETS {}", mesh.num_cells())?;
        for c in 0..mesh.num_cells() {
            let t = mesh.cell(c);
            writeln!(w, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
        }
    } else {
        for c in 0..mesh.num_cells() {
            let cell = mesh.cell(c);
            let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{} {}", cell.len(), ids.join(" "))?;
        }
    }
    if mesh.has_explicit_lengths() {
        writeln!(w, "#EDGELEN {}", mesh.edge_lengths().len())?;
        for (&(a, b), &l) in mesh.edge_lengths() {
            writeln!(w, "{} {} {}", a, b, l)?;
        }
    }
    Ok(())
}
