//! Planar triangulations, boundary data and frame normalization.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::algebra::{rotation2, Mat2, Vec2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    /// Outward unit normal.
    pub normal: Vec2,
    pub tag: u32,
}

/// Rigid change of coordinates applied by [`normalize_frame`]:
/// `x_new = rotationᵀ (x_old + centroid_shift)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub centroid_shift: Vec2,
    pub rotation: Mat2,
}

impl Default for Frame {
    fn default() -> Self {
        Self {
            centroid_shift: Vec2::zeros(),
            rotation: Mat2::identity(),
        }
    }
}

/// Per-triangle area and P1 shape-function gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub area: f64,
    pub grads: [Vec2; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    elements: Vec<Element>,
    frame: Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeshKind {
    UnitSquare,
    Rectangle { width: f64, height: f64 },
}

fn element_geometry(p: [Vec2; 3]) -> Element {
    let d1 = p[1] - p[0];
    let d2 = p[2] - p[0];
    let twice = d1[0] * d2[1] - d1[1] * d2[0];
    let area = 0.5 * twice;
    // ∇φ_i = rot(p_{i+2} − p_{i+1}) / 2|T|
    let grad = |a: Vec2, b: Vec2| Vec2::new(a[1] - b[1], b[0] - a[0]) / twice;
    Element {
        area,
        grads: [grad(p[1], p[2]), grad(p[2], p[0]), grad(p[0], p[1])],
    }
}

impl Mesh {
    /// Builds a mesh from raw data. Triangles must be counter-clockwise;
    /// boundary edges are given as node pairs with a tag, and their outward
    /// normals are derived from the adjacent triangle.
    pub fn new(nodes: Vec<Vec2>, triangles: Vec<[usize; 3]>, boundary: Vec<([usize; 2], u32)>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        let mut elements = Vec::with_capacity(triangles.len());
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("triangle {k} references a missing node")));
            }
            let e = element_geometry([nodes[t[0]], nodes[t[1]], nodes[t[2]]]);
            if !(e.area > 0.0) {
                return Err(Error::InvalidMesh(format!("triangle {k} has non-positive signed area {}", e.area)));
            }
            elements.push(e);
        }

        let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, t) in triangles.iter().enumerate() {
            for j in 0..3 {
                let (a, b) = (t[j], t[(j + 1) % 3]);
                edge_owner.insert((a.min(b), a.max(b)), k);
            }
        }

        let mut degree = vec![0usize; nodes.len()];
        let mut edges = Vec::with_capacity(boundary.len());
        for ([a, b], tag) in boundary {
            let owner = *edge_owner
                .get(&(a.min(b), a.max(b)))
                .ok_or_else(|| Error::InvalidMesh(format!("boundary edge ({a},{b}) is not a triangle edge")))?;
            let t = triangles[owner];
            let c = t.iter().copied().find(|&i| i != a && i != b).unwrap();
            let d = nodes[b] - nodes[a];
            let len = d.norm();
            let mut normal = Vec2::new(d[1], -d[0]) / len;
            if normal.dot(&(nodes[c] - nodes[a])) > 0.0 {
                normal = -normal;
            }
            degree[a] += 1;
            degree[b] += 1;
            edges.push(BoundaryEdge { nodes: [a, b], normal, tag });
        }
        if edges.is_empty() || degree.iter().any(|&d| d != 0 && d != 2) {
            return Err(Error::InvalidMesh("boundary edges do not form closed loops".into()));
        }

        Ok(Self {
            nodes,
            triangles,
            boundary: edges,
            elements,
            frame: Frame::default(),
        })
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    pub fn edge_length(&self, e: &BoundaryEdge) -> f64 {
        (self.nodes[e.nodes[1]] - self.nodes[e.nodes[0]]).norm()
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary.iter().map(|e| self.edge_length(e)).sum()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.nodes {
            for b in &self.nodes {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    pub fn centroid(&self, tri: usize) -> Vec2 {
        let t = self.triangles[tri];
        (self.nodes[t[0]] + self.nodes[t[1]] + self.nodes[t[2]]) / 3.0
    }

    /// Edge midpoints of a triangle: the 3-point rule exact for quadratics.
    pub fn midpoints(&self, tri: usize) -> [Vec2; 3] {
        let t = self.triangles[tri];
        let p = [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]];
        [(p[0] + p[1]) * 0.5, (p[1] + p[2]) * 0.5, (p[2] + p[0]) * 0.5]
    }

    /// `∫_Ω x dx`.
    pub fn first_moment(&self) -> Vec2 {
        (0..self.triangles.len())
            .map(|k| self.centroid(k) * self.elements[k].area)
            .fold(Vec2::zeros(), |a, b| a + b)
    }

    /// `∫_Ω x ⊗ x dx`, exact.
    pub fn second_moment(&self) -> Mat2 {
        let mut s = Mat2::zeros();
        for (t, e) in self.triangles.iter().zip(&self.elements) {
            let p = [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]];
            let sum = p[0] + p[1] + p[2];
            let mut local = sum * sum.transpose();
            for q in &p {
                local += q * q.transpose();
            }
            s += local * (e.area / 12.0);
        }
        s
    }

    /// Whether `∫x = 0` and `∫x₁x₂ = 0` hold to round-off.
    pub fn is_normalized(&self) -> bool {
        let area = self.area();
        let first = self.first_moment();
        let second = self.second_moment();
        let diam = self.diameter();
        first.amax() <= 1e-12 * diam * area && second[(0, 1)].abs() <= 1e-12 * second.trace()
    }

    /// Restriction to the triangles selected by `keep` (boundary edges of the
    /// sub-mesh include the cut). Tags of new edges are `u32::MAX`.
    pub fn submesh(&self, keep: impl Fn(usize) -> bool) -> Result<Mesh> {
        let selected: Vec<usize> = (0..self.triangles.len()).filter(|&k| keep(k)).collect();
        let mut map = HashMap::new();
        let mut nodes = Vec::new();
        let mut tris = Vec::new();
        for &k in &selected {
            let mut t = [0usize; 3];
            for j in 0..3 {
                let old = self.triangles[k][j];
                t[j] = *map.entry(old).or_insert_with(|| {
                    nodes.push(self.nodes[old]);
                    nodes.len() - 1
                });
            }
            tris.push(t);
        }
        let tags: HashMap<(usize, usize), u32> = self
            .boundary
            .iter()
            .map(|e| ((e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])), e.tag))
            .collect();
        let mut count: HashMap<(usize, usize), (usize, usize, usize)> = HashMap::new();
        for t in &tris {
            for j in 0..3 {
                let (a, b) = (t[j], t[(j + 1) % 3]);
                count.entry((a.min(b), a.max(b))).or_insert((a, b, 0)).2 += 1;
            }
        }
        let inverse: HashMap<usize, usize> = map.iter().map(|(o, n)| (*n, *o)).collect();
        let mut edges: Vec<([usize; 2], u32)> = count
            .into_iter()
            .filter(|(_, (_, _, c))| *c == 1)
            .map(|(_, (a, b, _))| {
                let (oa, ob) = (inverse[&a], inverse[&b]);
                let tag = tags.get(&(oa.min(ob), oa.max(ob))).copied().unwrap_or(u32::MAX);
                ([a, b], tag)
            })
            .collect();
        edges.sort_by_key(|(n, _)| (n[0], n[1]));
        let mut sub = Mesh::new(nodes, tris, edges)?;
        sub.frame = self.frame;
        Ok(sub)
    }

    /// Text export: `node`, `tri` and `bedge` lines with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(out, "node {i} {:.16e} {:.16e}", p[0], p[1]).unwrap();
        }
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(out, "tri {i} {} {} {}", t[0], t[1], t[2]).unwrap();
        }
        for e in &self.boundary {
            writeln!(out, "bedge {} {} {}", e.nodes[0], e.nodes[1], e.tag).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut nodes: Vec<(usize, Vec2)> = Vec::new();
        let mut tris: Vec<(usize, [usize; 3])> = Vec::new();
        let mut edges = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: &str| Error::Parse {
                line: ln + 1,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err("bad integer"));
            let real = |s: &str| s.parse::<f64>().map_err(|_| parse_err("bad number"));
            match (fields[0], fields.len()) {
                ("node", 4) => nodes.push((int(fields[1])?, Vec2::new(real(fields[2])?, real(fields[3])?))),
                ("tri", 5) => tris.push((int(fields[1])?, [int(fields[2])?, int(fields[3])?, int(fields[4])?])),
                ("bedge", 4) => edges.push((
                    [int(fields[1])?, int(fields[2])?],
                    fields[3].parse::<u32>().map_err(|_| parse_err("bad tag"))?,
                )),
                _ => return Err(parse_err("unrecognized record")),
            }
        }
        nodes.sort_by_key(|(i, _)| *i);
        tris.sort_by_key(|(i, _)| *i);
        if nodes.iter().enumerate().any(|(k, (i, _))| k != *i) || tris.iter().enumerate().any(|(k, (i, _))| k != *i) {
            return Err(Error::InvalidMesh("ids must be contiguous and 0-based".into()));
        }
        Mesh::new(
            nodes.into_iter().map(|(_, p)| p).collect(),
            tris.into_iter().map(|(_, t)| t).collect(),
            edges,
        )
    }

    /// Applies `x ↦ A x + c` to every node (A must preserve orientation).
    pub fn transformed(&self, a: &Mat2, c: &Vec2) -> Result<Mesh> {
        let nodes = self.nodes.iter().map(|p| a * p + c).collect();
        let edges = self.boundary.iter().map(|e| (e.nodes, e.tag)).collect();
        Mesh::new(nodes, self.triangles.clone(), edges)
    }
}

/// Structured mesh centred at the origin with `n × n` cells, each split
/// along an alternating diagonal (`2n²` triangles).
///
/// Boundary tags: 0 bottom, 1 right, 2 top, 3 left.
pub fn generate_mesh(kind: MeshKind, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::ZeroSubdivisions);
    }
    let (width, height) = match kind {
        MeshKind::UnitSquare => (1.0, 1.0),
        MeshKind::Rectangle { width, height } => {
            if !(width > 0.0 && height > 0.0) {
                return Err(Error::BadParameter("rectangle sides must be positive".into()));
            }
            (width, height)
        }
    };
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push(Vec2::new(
                width * (i as f64 / n as f64 - 0.5),
                height * (j as f64 / n as f64 - 0.5),
            ));
        }
    }
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
        }
    }
    let mut edges = Vec::with_capacity(4 * n);
    for i in 0..n {
        edges.push(([id(i, 0), id(i + 1, 0)], 0));
    }
    for j in 0..n {
        edges.push(([id(n, j), id(n, j + 1)], 1));
    }
    for i in (0..n).rev() {
        edges.push(([id(i + 1, n), id(i, n)], 2));
    }
    for j in (0..n).rev() {
        edges.push(([id(0, j + 1), id(0, j)], 3));
    }
    Mesh::new(nodes, tris, edges)
}

/// Translates the mesh so that `∫x = 0` and rotates it onto the principal
/// axes of its second-moment matrix. The applied transform is recorded in
/// the returned mesh's [`Frame`].
pub fn normalize_frame(mesh: &Mesh) -> Result<Mesh> {
    let area = mesh.area();
    if !(area > 0.0) {
        return Err(Error::DegenerateMesh);
    }
    let shift = -mesh.first_moment() / area;
    let centered = mesh.transformed(&Mat2::identity(), &shift)?;
    let s = centered.second_moment();
    let mut theta = 0.5 * (2.0 * s[(0, 1)]).atan2(s[(0, 0)] - s[(1, 1)]);
    // keep the smallest rotation so that normalization is idempotent
    let quarter = std::f64::consts::FRAC_PI_4;
    if theta > quarter {
        theta -= 2.0 * quarter;
    } else if theta <= -quarter {
        theta += 2.0 * quarter;
    }
    if s[(0, 1)].abs() <= 1e-14 * s.trace() {
        theta = 0.0;
    }
    let rotation = rotation2(theta);
    let mut out = centered.transformed(&rotation.transpose(), &Vec2::zeros())?;
    out.frame = Frame {
        centroid_shift: shift,
        rotation,
    };
    Ok(out)
}
