//! Simplicial surfaces and tetrahedral solids.
//!
//! Surface triangles are wound counter-clockwise when seen from outside the
//! enclosed solid, so `(b - a) × (c - a)` points outward. Geometric quantities
//! that need a normal (shape operators, the Reilly boundary terms) use the
//! opposite, inner unit normal: with it, round spheres have positive
//! principal curvatures.

mod generate;
pub mod io;
mod shape;

use std::collections::{BTreeMap, HashMap};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{
    disjoint_union, generate_ball, generate_ball_with, generate_ellipsoid, generate_icosphere,
    generate_torus,
};
pub use shape::{discrete_shape, fit_osculating_quadric, DiscreteShape, QuadricFit};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cell {cell} references vertex {vertex}, but only {count} vertices exist")]
    IndexOutOfRange {
        cell: usize,
        vertex: usize,
        count: usize,
    },
    #[error("cell {cell} repeats a vertex or has zero measure")]
    DegenerateCell { cell: usize },
    #[error("edge ({a}, {b}) has {count} incident triangles, expected 2")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("edge ({a}, {b}) is traversed twice in the same direction")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("vertex {vertex} is not referenced by any cell")]
    UnreferencedVertex { vertex: usize },
    #[error("boundary faces do not match the boundary of the tetrahedra: {0}")]
    BoundaryMismatch(String),
    #[error("vertex {vertex}: neighbourhood too degenerate for a quadric fit")]
    DegenerateNeighborhood { vertex: usize },
    #[error("expected a {expected} mesh")]
    WrongKind { expected: &'static str },
    #[error("io: {0}")]
    Io(String),
    #[error("unsupported mesh format `{0}`")]
    UnknownFormat(String),
}

impl MeshError {
    /// Stable short code for reports and exit diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            MeshError::Parse { .. } => "parse",
            MeshError::IndexOutOfRange { .. } => "index_out_of_range",
            MeshError::DegenerateCell { .. } => "degenerate_cell",
            MeshError::NonManifoldEdge { .. } => "non_manifold_edge",
            MeshError::InconsistentOrientation { .. } => "inconsistent_orientation",
            MeshError::UnreferencedVertex { .. } => "unreferenced_vertex",
            MeshError::BoundaryMismatch(_) => "boundary_mismatch",
            MeshError::DegenerateNeighborhood { .. } => "degenerate_neighborhood",
            MeshError::WrongKind { .. } => "wrong_kind",
            MeshError::Io(_) => "io",
            MeshError::UnknownFormat(_) => "unknown_format",
        }
    }
}

pub type Result<T> = std::result::Result<T, MeshError>;

#[derive(Debug, Clone, PartialEq)]
pub enum MeshKind {
    /// Closed oriented triangle surface.
    Surface { triangles: Vec<[usize; 3]> },
    /// Positively oriented tetrahedra plus their outward-wound boundary triangles.
    Solid {
        tets: Vec<[usize; 4]>,
        boundary_faces: Vec<[usize; 3]>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshComplex {
    vertices: Vec<Vec3>,
    kind: MeshKind,
    /// Sorted vertex pairs `(a < b)` in lexicographic order.
    edges: Vec<[usize; 2]>,
}

impl MeshComplex {
    /// Builds and validates a closed oriented surface.
    pub fn surface(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        validate_surface(vertices.len(), &triangles)?;
        for (i, t) in triangles.iter().enumerate() {
            let n = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
            if n.norm() == 0.0 {
                return Err(MeshError::DegenerateCell { cell: i });
            }
        }
        let edges = collect_edges(triangles.iter().flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]]));
        Ok(Self {
            vertices,
            kind: MeshKind::Surface { triangles },
            edges,
        })
    }

    /// Builds a solid mesh. Tetrahedra are re-oriented to positive volume and
    /// the boundary is extracted from them.
    pub fn solid(vertices: Vec<Vec3>, mut tets: Vec<[usize; 4]>) -> Result<Self> {
        let count = vertices.len();
        let mut used = vec![false; count];
        for (i, t) in tets.iter_mut().enumerate() {
            for &v in t.iter() {
                if v >= count {
                    return Err(MeshError::IndexOutOfRange { cell: i, vertex: v, count });
                }
                used[v] = true;
            }
            let vol = signed_tet_volume(&vertices, t);
            if vol == 0.0 {
                return Err(MeshError::DegenerateCell { cell: i });
            }
            if vol < 0.0 {
                t.swap(2, 3);
            }
        }
        if let Some(vertex) = used.iter().position(|u| !u) {
            return Err(MeshError::UnreferencedVertex { vertex });
        }
        let boundary_faces = extract_boundary(&tets)?;
        // the boundary must itself be a closed oriented surface
        validate_closed_orientable(&boundary_faces)?;
        let edges = collect_edges(tets.iter().flat_map(|t| {
            [[t[0], t[1]], [t[0], t[2]], [t[0], t[3]], [t[1], t[2]], [t[1], t[3]], [t[2], t[3]]]
        }));
        Ok(Self {
            vertices,
            kind: MeshKind::Solid {
                tets,
                boundary_faces,
            },
            edges,
        })
    }

    /// Builds a solid mesh and checks that the declared boundary matches the
    /// extracted one, including orientation.
    pub fn solid_with_boundary(
        vertices: Vec<Vec3>,
        tets: Vec<[usize; 4]>,
        declared: &[[usize; 3]],
    ) -> Result<Self> {
        let mesh = Self::solid(vertices, tets)?;
        let canonical = |f: &[usize; 3]| {
            // rotate so the smallest index leads; keeps the winding
            let k = (0..3).min_by_key(|&i| f[i]).unwrap();
            [f[k], f[(k + 1) % 3], f[(k + 2) % 3]]
        };
        let mut extracted: Vec<[usize; 3]> = mesh.boundary_faces().iter().map(canonical).collect();
        let mut given: Vec<[usize; 3]> = declared.iter().map(canonical).collect();
        extracted.sort_unstable();
        given.sort_unstable();
        if extracted != given {
            let missing = given.iter().find(|f| !extracted.contains(f));
            return Err(MeshError::BoundaryMismatch(match missing {
                Some(f) => format!("declared face {f:?} is not an outward boundary face"),
                None => format!("{} declared vs {} extracted faces", given.len(), extracted.len()),
            }));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn kind(&self) -> &MeshKind {
        &self.kind
    }

    pub fn is_surface(&self) -> bool {
        matches!(self.kind, MeshKind::Surface { .. })
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Triangles of a surface mesh, or the boundary faces of a solid.
    pub fn triangles(&self) -> &[[usize; 3]] {
        match &self.kind {
            MeshKind::Surface { triangles } => triangles,
            MeshKind::Solid { boundary_faces, .. } => boundary_faces,
        }
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        match &self.kind {
            MeshKind::Surface { .. } => &[],
            MeshKind::Solid { tets, .. } => tets,
        }
    }

    pub fn boundary_faces(&self) -> &[[usize; 3]] {
        match &self.kind {
            MeshKind::Surface { .. } => &[],
            MeshKind::Solid { boundary_faces, .. } => boundary_faces,
        }
    }

    /// The boundary of a solid as a surface mesh, with the map from new to old
    /// vertex indices.
    pub fn boundary_surface(&self) -> Result<(MeshComplex, Vec<usize>)> {
        let faces = match &self.kind {
            MeshKind::Solid { boundary_faces, .. } => boundary_faces,
            MeshKind::Surface { .. } => return Err(MeshError::WrongKind { expected: "solid" }),
        };
        let mut old_to_new: BTreeMap<usize, usize> = BTreeMap::new();
        for f in faces {
            for &v in f {
                old_to_new.entry(v).or_insert(0);
            }
        }
        for (new, (_, slot)) in old_to_new.iter_mut().enumerate() {
            *slot = new;
        }
        let map: Vec<usize> = old_to_new.keys().copied().collect();
        let vertices = map.iter().map(|&v| self.vertices[v]).collect();
        let triangles = faces
            .iter()
            .map(|f| [old_to_new[&f[0]], old_to_new[&f[1]], old_to_new[&f[2]]])
            .collect();
        Ok((MeshComplex::surface(vertices, triangles)?, map))
    }

    /// Per-vertex lists of neighbouring vertices, sorted.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.vertices.len()];
        for &[a, b] in &self.edges {
            nbrs[a].push(b);
            nbrs[b].push(a);
        }
        for n in nbrs.iter_mut() {
            n.sort_unstable();
        }
        nbrs
    }

    pub fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        let [a, b, c] = t.map(|i| self.vertices[i]);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Total area of the surface (or of the solid's boundary).
    pub fn area(&self) -> f64 {
        self.triangles().iter().map(|t| self.triangle_area(t)).sum()
    }

    /// Enclosed volume: tetrahedra for solids, divergence theorem for surfaces.
    pub fn volume(&self) -> f64 {
        match &self.kind {
            MeshKind::Solid { tets, .. } => tets.iter().map(|t| signed_tet_volume(&self.vertices, t)).sum(),
            MeshKind::Surface { triangles } => triangles
                .iter()
                .map(|t| {
                    let [a, b, c] = t.map(|i| self.vertices[i]);
                    a.dot(&b.cross(&c)) / 6.0
                })
                .sum(),
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        let v = self.vertices.len() as i64;
        let e = self.edges.len() as i64;
        match &self.kind {
            MeshKind::Surface { triangles } => v - e + triangles.len() as i64,
            MeshKind::Solid { tets, .. } => {
                let faces = count_tet_faces(tets) as i64;
                v - e + faces - tets.len() as i64
            }
        }
    }

    /// Component label of every vertex, labels numbered from 0 in order of
    /// first appearance.
    pub fn vertex_components(&self) -> Vec<usize> {
        component_labels(self.vertices.len(), self.edges.iter().copied())
    }

    pub fn component_count(&self) -> usize {
        self.vertex_components().into_iter().max().map_or(0, |m| m + 1)
    }

    /// Total genus of a closed surface, `(2c - χ) / 2`.
    pub fn genus(&self) -> Option<usize> {
        if !self.is_surface() {
            return None;
        }
        let twice = 2 * self.component_count() as i64 - self.euler_characteristic();
        (twice >= 0 && twice % 2 == 0).then_some((twice / 2) as usize)
    }

    /// Largest distance between two vertices along coordinate extents.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).norm()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let total: f64 = self
            .edges
            .iter()
            .map(|&[a, b]| (self.vertices[a] - self.vertices[b]).norm())
            .sum();
        total / self.edges.len().max(1) as f64
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        let mut out = self.clone();
        for v in out.vertices.iter_mut() {
            *v += offset;
        }
        out
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            kind: if self.is_surface() { "surface" } else { "solid" }.to_string(),
            vertices: self.vertices.len(),
            edges: self.edges.len(),
            triangles: self.triangles().len(),
            tets: self.tets().len(),
            components: self.component_count(),
            euler_characteristic: self.euler_characteristic(),
            genus: self.genus(),
            area: self.area(),
            volume: self.volume(),
            mean_edge_length: self.mean_edge_length(),
        }
    }
}

/// Summary counts and measures, serialized as the mesh-statistics JSON dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub kind: String,
    pub vertices: usize,
    pub edges: usize,
    /// Surface triangles, or boundary faces of a solid.
    pub triangles: usize,
    pub tets: usize,
    pub components: usize,
    pub euler_characteristic: i64,
    pub genus: Option<usize>,
    pub area: f64,
    pub volume: f64,
    pub mean_edge_length: f64,
}

pub fn signed_tet_volume(vertices: &[Vec3], t: &[usize; 4]) -> f64 {
    let [a, b, c, d] = t.map(|i| vertices[i]);
    (b - a).dot(&(c - a).cross(&(d - a))) / 6.0
}

pub(crate) fn component_labels(count: usize, edges: impl Iterator<Item = [usize; 2]>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for [a, b] in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut labels = vec![usize::MAX; count];
    let mut next = 0;
    for v in 0..count {
        let root = find(&mut parent, v);
        if labels[root] == usize::MAX {
            labels[root] = next;
            next += 1;
        }
        labels[v] = labels[root];
    }
    labels
}

fn collect_edges(pairs: impl Iterator<Item = [usize; 2]>) -> Vec<[usize; 2]> {
    let mut edges: Vec<[usize; 2]> = pairs.map(|[a, b]| if a < b { [a, b] } else { [b, a] }).collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

fn count_tet_faces(tets: &[[usize; 4]]) -> usize {
    let mut faces: Vec<[usize; 3]> = tets
        .iter()
        .flat_map(|t| {
            [[t[0], t[1], t[2]], [t[0], t[1], t[3]], [t[0], t[2], t[3]], [t[1], t[2], t[3]]].map(|mut f| {
                f.sort_unstable();
                f
            })
        })
        .collect();
    faces.sort_unstable();
    faces.dedup();
    faces.len()
}

/// Faces of positively oriented tetrahedra that belong to exactly one of them,
/// wound outward.
fn extract_boundary(tets: &[[usize; 4]]) -> Result<Vec<[usize; 3]>> {
    let mut seen: HashMap<[usize; 3], (usize, [usize; 3])> = HashMap::new();
    for t in tets {
        // outward winding of each face of a positive tet (a,b,c,d)
        let [a, b, c, d] = *t;
        for f in [[b, c, d], [a, d, c], [a, b, d], [a, c, b]] {
            let mut key = f;
            key.sort_unstable();
            let e = seen.entry(key).or_insert((0, f));
            e.0 += 1;
        }
    }
    let mut out = Vec::new();
    for (key, (count, f)) in seen {
        match count {
            1 => out.push(f),
            2 => {}
            _ => {
                return Err(MeshError::NonManifoldEdge {
                    a: key[0],
                    b: key[1],
                    count,
                })
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn validate_surface(count: usize, triangles: &[[usize; 3]]) -> Result<()> {
    let mut used = vec![false; count];
    for (i, t) in triangles.iter().enumerate() {
        for &v in t {
            if v >= count {
                return Err(MeshError::IndexOutOfRange { cell: i, vertex: v, count });
            }
            used[v] = true;
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(MeshError::DegenerateCell { cell: i });
        }
    }
    if let Some(vertex) = used.iter().position(|u| !u) {
        return Err(MeshError::UnreferencedVertex { vertex });
    }
    validate_closed_orientable(triangles)
}

fn validate_closed_orientable(triangles: &[[usize; 3]]) -> Result<()> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *directed.entry((a, b)).or_insert(0) += 1;
        }
    }
    let mut undirected: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&(a, b), &c) in &directed {
        *undirected.entry((a.min(b), a.max(b))).or_insert(0) += c;
    }
    for (&(a, b), &count) in &undirected {
        if count != 2 {
            return Err(MeshError::NonManifoldEdge { a, b, count });
        }
    }
    for (&(a, b), &count) in &undirected {
        let forward = directed.get(&(a, b)).copied().unwrap_or(0);
        if forward != 1 || count - forward != 1 {
            return Err(MeshError::InconsistentOrientation { a, b });
        }
    }
    Ok(())
}
