//! Metric surfaces given as triangle meshes, the induced (extended) length
//! metric of their edge graphs, and finite metric spaces.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Norm, Point};
use crate::graph::{self, Adjacency};

/// Length assigned to edges that are collapsed to (numerically) zero.
pub const ZERO_LENGTH_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

/// A finite extended metric space: a symmetric matrix of distances in
/// `[0, ∞]` over labelled points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledMetricSpace {
    pub points: Vec<usize>,
    #[serde(with = "extended_reals")]
    dist: Vec<f64>,
}

impl SampledMetricSpace {
    /// Builds a space from a row-major matrix. Rejects negative or NaN
    /// entries and a non-zero diagonal; symmetry is checked separately.
    pub fn new(points: Vec<usize>, dist: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if dist.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        if let Some(bad) = dist.iter().position(|d| d.is_nan() || *d < 0.0) {
            return Err(Error::InvalidMetric(format!("entry {bad} is negative or NaN")));
        }
        if let Some(i) = (0..n).find(|&i| dist[i * n + i] != 0.0) {
            return Err(Error::InvalidMetric(format!("diagonal entry {i} is non-zero")));
        }
        Ok(Self { points, dist })
    }

    pub fn from_fn(points: Vec<usize>, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let n = points.len();
        let dist: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i == j {
                    0.0
                } else {
                    f(i, j)
                }
            })
            .collect();
        Self { points, dist }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.points.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.points.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Restriction to the given indices (labels carried over).
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let points = idx.iter().map(|&i| self.points[i]).collect();
        Self::from_fn(points, |a, b| self.get(idx[a], idx[b]))
    }
}

/// (De)serializes `f64` vectors with `null` standing for `+∞`.
pub(crate) mod extended_reals {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| if x.is_finite() { Some(*x) } else { None }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

/// The sampled ambient metric `d` of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum Ambient {
    None,
    /// Norm distance between vertex coordinates.
    Norm(Norm),
    /// Explicit matrix indexed by vertex.
    Matrix(SampledMetricSpace),
}

/// A stop on a polyline drawn on a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stop {
    Vertex(VertexId),
    /// Point on an edge at parameter `t` from its first to its second vertex.
    EdgePoint { edge: EdgeId, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPolyline {
    pub stops: Vec<Stop>,
    pub length: f64,
}

/// Raw ingredients of a mesh; see [`MetricSurfaceMesh::from_parts`].
#[derive(Debug, Clone)]
pub struct MeshParts {
    pub n_vertices: usize,
    pub coords: Option<Vec<Point>>,
    /// Norm for in-face lengths and areas when coordinates are present.
    pub norm: Norm,
    pub faces: Vec<[usize; 3]>,
    /// Edge lengths keyed by `(min, max)` vertex pair; derived from the
    /// coordinates when absent.
    pub lengths: Option<HashMap<(usize, usize), f64>>,
    pub face_scale: Option<Vec<f64>>,
    pub ambient: Ambient,
}

/// A triangulated surface carrying per-edge lengths and, optionally, planar
/// coordinates and an ambient sampled metric.
#[derive(Debug, Clone)]
pub struct MetricSurfaceMesh {
    coords: Option<Vec<Point>>,
    /// Norm used for in-face lengths when coordinates are present.
    norm: Norm,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_length: Vec<f64>,
    edge_faces: Vec<[usize; 2]>,
    face_edges: Vec<[usize; 3]>,
    edge_index: HashMap<(usize, usize), usize>,
    vertex_edges: Vec<Vec<usize>>,
    face_scale: Vec<f64>,
    ambient: Ambient,
    boundary: Vec<Vec<usize>>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MetricSurfaceMesh {
    /// Mesh with planar coordinates whose edge lengths and ambient metric
    /// come from `norm`.
    pub fn from_coords(coords: Vec<Point>, faces: Vec<[usize; 3]>, norm: Norm) -> Result<Self> {
        Self::from_parts(MeshParts {
            n_vertices: coords.len(),
            coords: Some(coords),
            norm,
            faces,
            lengths: None,
            face_scale: None,
            ambient: Ambient::Norm(norm),
        })
    }

    /// Mesh given by explicit edge lengths. Coordinates, when present, are
    /// used only for in-face chord lengths (with the L2 norm).
    pub fn from_lengths(
        n_vertices: usize,
        coords: Option<Vec<Point>>,
        faces: Vec<[usize; 3]>,
        lengths: &HashMap<(usize, usize), f64>,
        ambient: Ambient,
    ) -> Result<Self> {
        Self::from_parts(MeshParts {
            n_vertices,
            coords,
            norm: Norm::L2,
            faces,
            lengths: Some(lengths.clone()),
            face_scale: None,
            ambient,
        })
    }

    pub fn from_parts(p: MeshParts) -> Result<Self> {
        Self::build(p.n_vertices, p.coords, p.faces, p.lengths.as_ref(), p.ambient, p.norm, p.face_scale)
    }

    fn build(
        n_vertices: usize,
        coords: Option<Vec<Point>>,
        mut faces: Vec<[usize; 3]>,
        lengths: Option<&HashMap<(usize, usize), f64>>,
        ambient: Ambient,
        norm: Norm,
        face_scale: Option<Vec<f64>>,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::InvalidMesh("no faces".into()));
        }
        for (f, t) in faces.iter().enumerate() {
            if t.iter().any(|&v| v >= n_vertices) {
                return Err(Error::InvalidMesh(format!("face {f} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("face {f} repeats a vertex")));
            }
        }
        if let Some(c) = &coords {
            if c.len() != n_vertices {
                return Err(Error::InvalidMesh("coordinate count mismatch".into()));
            }
        }
        orient_faces(&mut faces, coords.as_deref())?;

        let mut edge_index = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_faces: Vec<[usize; 2]> = Vec::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        for (f, t) in faces.iter().enumerate() {
            let mut fe = [0; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = *edge_index.entry(key(a, b)).or_insert_with(|| {
                    edges.push([a.min(b), a.max(b)]);
                    edge_faces.push([graph::NONE, graph::NONE]);
                    edges.len() - 1
                });
                let slot = &mut edge_faces[e];
                if slot[0] == graph::NONE {
                    slot[0] = f;
                } else if slot[1] == graph::NONE {
                    slot[1] = f;
                } else {
                    return Err(Error::InvalidMesh(format!(
                        "edge {a}-{b} bounds more than two faces"
                    )));
                }
                fe[k] = e;
            }
            face_edges.push(fe);
        }
        let mut vertex_edges = vec![Vec::new(); n_vertices];
        for (e, &[a, b]) in edges.iter().enumerate() {
            vertex_edges[a].push(e);
            vertex_edges[b].push(e);
        }

        let edge_length = match lengths {
            Some(map) => edges
                .iter()
                .map(|&[a, b]| {
                    map.get(&(a, b))
                        .copied()
                        .ok_or_else(|| Error::InvalidMesh(format!("missing length for edge {a}-{b}")))
                })
                .collect::<Result<Vec<_>>>()?,
            None => {
                let c = coords
                    .as_ref()
                    .ok_or_else(|| Error::InvalidMesh("need coordinates or edge lengths".into()))?;
                edges.iter().map(|&[a, b]| norm.dist(c[a], c[b])).collect()
            }
        };

        let mut mesh = Self {
            coords,
            norm,
            face_scale: face_scale.unwrap_or_else(|| vec![1.0; faces.len()]),
            faces,
            edges,
            edge_length,
            edge_faces,
            face_edges,
            edge_index,
            vertex_edges,
            ambient,
            boundary: Vec::new(),
        };
        if mesh.face_scale.len() != mesh.faces.len() || mesh.face_scale.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidMesh("bad face scale".into()));
        }
        mesh.boundary = mesh.trace_boundary()?;
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        for (e, &l) in self.edge_length.iter().enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidMesh(format!("edge {e} has non-positive length {l}")));
            }
        }
        let max_len = self.edge_length.iter().copied().fold(0.0, f64::max);
        for f in 0..self.faces.len() {
            let [a, b, c] = self.face_edges[f].map(|e| self.edge_length[e]);
            let degenerate = [a, b, c].iter().any(|&l| l <= 1e3 * ZERO_LENGTH_FLOOR.max(1e-15 * max_len));
            if degenerate || self.face_scale[f] == 0.0 {
                // Collapsed faces must still have a non-degenerate geometric shape.
                if self.coords.is_none() {
                    return Err(Error::InvalidMesh(format!("face {f} has a collapsed edge")));
                }
                let [p, q, r] = self.face_points(f);
                if geom::triangle_area(p, q, r) <= 0.0 {
                    return Err(Error::InvalidMesh(format!("face {f} is geometrically degenerate")));
                }
                continue;
            }
            let tol = 1e-12 * (a + b + c);
            if self.coords.is_some() && self.norm == Norm::Linf {
                // ℓ∞ triangles may be metrically flat; the planar shape must not be
                let [p, q, r] = self.face_points(f);
                if geom::triangle_area(p, q, r) <= 0.0 || a > b + c + tol || b > a + c + tol || c > a + b + tol {
                    return Err(Error::InvalidMesh(format!("face {f} is degenerate ({a}, {b}, {c})")));
                }
                continue;
            }
            if a >= b + c - tol || b >= a + c - tol || c >= a + b - tol {
                return Err(Error::InvalidMesh(format!(
                    "face {f} violates the strict triangle inequality ({a}, {b}, {c})"
                )));
            }
        }
        if let Ambient::Matrix(m) = &self.ambient {
            if m.len() != self.n_vertices() {
                return Err(Error::InvalidMesh("ambient matrix size mismatch".into()));
            }
            for (e, &[a, b]) in self.edges.iter().enumerate() {
                if self.edge_length[e] < m.get(a, b) * (1.0 - 1e-9) {
                    return Err(Error::InvalidMesh(format!(
                        "edge {a}-{b} is shorter than the ambient distance"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Boundary loops, each oriented so that the mesh lies to its left.
    fn trace_boundary(&self) -> Result<Vec<Vec<usize>>> {
        let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
        for (f, t) in self.faces.iter().enumerate() {
            for k in 0..3 {
                let e = self.face_edges[f][k];
                if self.edge_faces[e][1] == graph::NONE {
                    next.entry(t[k]).or_default().push(t[(k + 1) % 3]);
                }
            }
        }
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        for v in next.values_mut() {
            v.sort_unstable();
        }
        let mut used: HashMap<(usize, usize), bool> = HashMap::new();
        let mut loops = Vec::new();
        for &s in &starts {
            for &first in &next[&s].clone() {
                if used.contains_key(&(s, first)) {
                    continue;
                }
                let mut lp = vec![s];
                let (mut a, mut b) = (s, first);
                loop {
                    used.insert((a, b), true);
                    if b == s {
                        break;
                    }
                    lp.push(b);
                    let cands = next.get(&b).ok_or_else(|| {
                        Error::InvalidMesh(format!("boundary is not closed at vertex {b}"))
                    })?;
                    let nb = cands
                        .iter()
                        .copied()
                        .find(|&c| !used.contains_key(&(b, c)))
                        .ok_or_else(|| Error::InvalidMesh(format!("boundary pinches at {b}")))?;
                    a = b;
                    b = nb;
                    if lp.len() > self.edges.len() + 1 {
                        return Err(Error::InvalidMesh("boundary trace did not close".into()));
                    }
                }
                let _ = a;
                loops.push(lp);
            }
        }
        Ok(loops)
    }

    /// Replaces per-face length multipliers and recomputes coordinate-based
    /// edge lengths: each edge takes the smallest multiplier of its faces,
    /// floored at [`ZERO_LENGTH_FLOOR`].
    pub fn with_face_scale(mut self, scale: Vec<f64>) -> Result<Self> {
        if scale.len() != self.faces.len() || scale.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidMesh("bad face scale".into()));
        }
        let c = self
            .coords
            .as_ref()
            .ok_or_else(|| Error::InvalidMesh("face scaling needs coordinates".into()))?;
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            let s = self.edge_faces[e]
                .iter()
                .filter(|&&f| f != graph::NONE)
                .map(|&f| scale[f])
                .fold(f64::INFINITY, f64::min);
            self.edge_length[e] = (self.norm.dist(c[a], c[b]) * s).max(ZERO_LENGTH_FLOOR);
        }
        self.face_scale = scale;
        self.validate()?;
        Ok(self)
    }

    /// Overrides individual edge lengths (used for collapsed classes).
    pub fn with_edge_lengths(mut self, overrides: &[(usize, f64)]) -> Result<Self> {
        for &(e, l) in overrides {
            self.edge_length[e] = l.max(ZERO_LENGTH_FLOOR);
        }
        self.validate()?;
        Ok(self)
    }

    /// All lengths multiplied by `lambda` (coordinates and ambient too).
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut m = self.clone();
        if let Some(c) = &mut m.coords {
            for p in c.iter_mut() {
                *p = geom::scale(*p, lambda);
            }
        }
        for l in &mut m.edge_length {
            *l *= lambda;
        }
        if let Ambient::Matrix(s) = &m.ambient {
            let s2 = SampledMetricSpace::from_fn(s.points.clone(), |i, j| s.get(i, j) * lambda);
            m.ambient = Ambient::Matrix(s2);
        }
        m
    }

    pub fn n_vertices(&self) -> usize {
        self.vertex_edges.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_length
    }
    pub fn edge_length(&self, e: usize) -> f64 {
        self.edge_length[e]
    }
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        self.edge_faces[e]
    }
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }
    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&key(a, b)).copied()
    }
    pub fn coords(&self) -> Option<&[Point]> {
        self.coords.as_deref()
    }
    pub fn norm(&self) -> Norm {
        self.norm
    }
    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }
    pub fn boundary(&self) -> &[Vec<usize>] {
        &self.boundary
    }
    pub fn face_scale(&self) -> &[f64] {
        &self.face_scale
    }
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_faces[e][1] == graph::NONE
    }
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    /// Hausdorff 2-measure per unit Lebesgue area of the mesh's geometry.
    pub fn area_weight(&self) -> f64 {
        if self.coords.is_some() {
            self.norm.area_weight()
        } else {
            1.0
        }
    }

    /// Local planar positions of a face's vertices: its coordinates when
    /// present, otherwise an isometric layout from the edge lengths.
    pub fn face_points(&self, f: usize) -> [Point; 3] {
        let t = self.faces[f];
        match &self.coords {
            Some(c) => [c[t[0]], c[t[1]], c[t[2]]],
            None => {
                let [e0, e1, e2] = self.face_edges[f];
                geom::layout_triangle(self.edge_length[e0], self.edge_length[e1], self.edge_length[e2])
            }
        }
    }

    /// Length of the straight segment between two points of face `f`.
    pub fn face_segment_length(&self, f: usize, p: Point, q: Point) -> f64 {
        if self.coords.is_some() {
            let s = self.face_scale[f];
            let l = self.norm.dist(p, q) * s;
            if s == 0.0 {
                ZERO_LENGTH_FLOOR
            } else {
                l
            }
        } else {
            geom::euclid(p, q)
        }
    }

    /// Hausdorff 2-measure of face `f`.
    pub fn face_area(&self, f: usize) -> f64 {
        match &self.coords {
            Some(_) => {
                let [p, q, r] = self.face_points(f);
                let s = self.face_scale[f];
                geom::triangle_area(p, q, r) * self.norm.area_weight() * s * s
            }
            None => {
                let [a, b, c] = self.face_edges[f].map(|e| self.edge_length[e]);
                geom::heron(a, b, c)
            }
        }
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_faces()).map(|f| self.face_area(f)).sum()
    }

    /// Ambient distance `d` between two vertices, when available.
    pub fn ambient_dist(&self, a: usize, b: usize) -> Option<f64> {
        match &self.ambient {
            Ambient::None => None,
            Ambient::Norm(n) => self.coords.as_ref().map(|c| n.dist(c[a], c[b])),
            Ambient::Matrix(m) => Some(m.get(a, b)),
        }
    }

    /// Planar position of a point on an edge.
    pub fn edge_point(&self, e: usize, t: f64) -> Option<Point> {
        let [a, b] = self.edges[e];
        self.coords.as_ref().map(|c| geom::lerp(c[a], c[b], t))
    }

    /// Vertex adjacency of the edge graph weighted by edge length.
    pub fn edge_graph(&self) -> Adjacency {
        let mut adj = vec![Vec::new(); self.n_vertices()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            adj[a].push((b, self.edge_length[e]));
            adj[b].push((a, self.edge_length[e]));
        }
        for row in &mut adj {
            row.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    /// Edge-graph refinement: every edge split into `k` pieces and, inside
    /// every face, straight chords between boundary nodes on different
    /// sides. The first `n_vertices` nodes are the mesh vertices.
    pub fn steiner_graph(&self, k: usize) -> SteinerGraph {
        let k = k.max(1);
        let nv = self.n_vertices();
        let per = k - 1;
        let n = nv + per * self.n_edges();
        let node = |e: usize, j: usize| -> usize {
            // j in 0..=k along the edge from edges[e][0]
            let [a, b] = self.edges[e];
            if j == 0 {
                a
            } else if j == k {
                b
            } else {
                nv + e * per + (j - 1)
            }
        };
        let mut adj: Adjacency = vec![Vec::new(); n];
        for e in 0..self.n_edges() {
            let w = self.edge_length[e] / k as f64;
            for j in 0..k {
                let (u, v) = (node(e, j), node(e, j + 1));
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        if k > 1 {
            for f in 0..self.n_faces() {
                let pts = self.face_points(f);
                let t = self.faces[f];
                // (node, position, side index or 3 for vertex with its two sides)
                let mut items: Vec<(usize, Point, [usize; 2])> = Vec::new();
                for side in 0..3 {
                    let e = self.face_edges[f][side];
                    let (va, vb) = (t[side], t[(side + 1) % 3]);
                    let forward = self.edges[e][0] == va;
                    let (pa, pb) = (pts[side], pts[(side + 1) % 3]);
                    items.push((va, pa, [side, (side + 2) % 3]));
                    for j in 1..k {
                        let s = j as f64 / k as f64;
                        let id = if forward { node(e, j) } else { node(e, k - j) };
                        let _ = vb;
                        items.push((id, geom::lerp(pa, pb, s), [side, side]));
                    }
                }
                for i in 0..items.len() {
                    for j in i + 1..items.len() {
                        let (a, pa, sa) = items[i];
                        let (b, pb, sb) = items[j];
                        let shared = sa.iter().any(|s| sb.contains(s));
                        if shared || a == b {
                            continue;
                        }
                        let w = self.face_segment_length(f, pa, pb);
                        adj[a].push((b, w));
                        adj[b].push((a, w));
                    }
                }
            }
        }
        for row in &mut adj {
            row.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
            row.dedup_by_key(|x| x.0);
        }
        SteinerGraph { adj, n_vertices: nv, subdivision: k }
    }
}

/// Refined edge graph used to approximate the induced length metric.
#[derive(Debug, Clone)]
pub struct SteinerGraph {
    pub adj: Adjacency,
    pub n_vertices: usize,
    pub subdivision: usize,
}

impl SteinerGraph {
    /// Distances from the given mesh vertices to every mesh vertex.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<f64> {
        let mut d = graph::dijkstra(&self.adj, sources).dist;
        d.truncate(self.n_vertices);
        d
    }
}

/// Makes face orientations consistent across shared edges; with
/// coordinates the first face of each component is made counter-clockwise.
fn orient_faces(faces: &mut [[usize; 3]], coords: Option<&[Point]>) -> Result<()> {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (f, t) in faces.iter().enumerate() {
        for k in 0..3 {
            by_edge.entry(key(t[k], t[(k + 1) % 3])).or_default().push(f);
        }
    }
    let n = faces.len();
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        if let Some(c) = coords {
            let t = faces[root];
            if geom::orient(c[t[0]], c[t[1]], c[t[2]]) < 0.0 {
                faces[root].swap(1, 2);
            }
        }
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(f) = stack.pop() {
            let t = faces[f];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                for &g in &by_edge[&key(a, b)] {
                    if g == f {
                        continue;
                    }
                    let tg = faces[g];
                    let same_dir = (0..3).any(|m| tg[m] == a && tg[(m + 1) % 3] == b);
                    if seen[g] {
                        if same_dir {
                            return Err(Error::InvalidMesh("surface is not orientable".into()));
                        }
                        continue;
                    }
                    if same_dir {
                        faces[g].swap(1, 2);
                    }
                    seen[g] = true;
                    stack.push(g);
                }
            }
        }
    }
    Ok(())
}

/// All-pairs induced length metric `d̄` over mesh vertices, computed on the
/// edge graph refined with `subdivision` pieces per edge. Disconnected
/// pairs get `+∞`.
pub fn induced_length_metric(mesh: &MetricSurfaceMesh, subdivision: usize) -> SampledMetricSpace {
    let g = mesh.steiner_graph(subdivision);
    let n = mesh.n_vertices();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| g.distances_from(&[s])).collect();
    let mut dist = Vec::with_capacity(n * n);
    for (i, r) in rows.iter().enumerate() {
        for (j, &d) in r.iter().enumerate() {
            // symmetrize exactly: take the row with the smaller index
            dist.push(if i <= j { d } else { rows[j][i] });
        }
    }
    SampledMetricSpace { points: (0..n).collect(), dist }
}

/// Induced length metric restricted to a subset of vertices.
pub fn induced_length_metric_on(
    mesh: &MetricSurfaceMesh,
    subset: &[usize],
    subdivision: usize,
) -> SampledMetricSpace {
    let g = mesh.steiner_graph(subdivision);
    let rows: Vec<Vec<f64>> = subset.par_iter().map(|&s| g.distances_from(&[s])).collect();
    let m = subset.len();
    let mut dist = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            dist.push(if i <= j { rows[i][subset[j]] } else { rows[j][subset[i]] });
        }
    }
    SampledMetricSpace { points: subset.to_vec(), dist }
}

/// Shortest path on the mesh edge graph from `a` to `b`, lexicographic
/// tie-breaking. Its length equals `induced_length_metric(mesh, 1)[a][b]`.
pub fn geodesic(mesh: &MetricSurfaceMesh, a: usize, b: usize) -> Result<PathPolyline> {
    let adj = mesh.edge_graph();
    let sp = graph::dijkstra(&adj, &[a]);
    let path = sp.path_to(b).ok_or(Error::NoPath(a, b))?;
    let mut length = 0.0;
    for w in path.windows(2) {
        let e = mesh.edge_between(w[0], w[1]).expect("path follows edges");
        length += mesh.edge_length(e);
    }
    Ok(PathPolyline {
        stops: path.into_iter().map(|v| Stop::Vertex(VertexId(v))).collect(),
        length,
    })
}

/// Gromov product `(p·q)_r = ½(d(p,r) + d(q,r) − d(p,q))`.
pub fn gromov_product(d_pr: f64, d_qr: f64, d_pq: f64) -> Result<f64> {
    let g = 0.5 * (d_pr + d_qr - d_pq);
    let tol = 1e-9 * (d_pr + d_qr + d_pq).max(f64::MIN_POSITIVE);
    if g < -tol {
        return Err(Error::NegativeProduct(g));
    }
    Ok(g.max(0.0))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// `(i, j, |d(i,j) − d(j,i)|)`
    pub symmetry: Vec<(usize, usize, f64)>,
    /// `(i, j, k, d(i,k) − d(i,j) − d(j,k))`
    pub triangle: Vec<(usize, usize, usize, f64)>,
    /// Off-diagonal zero distances (reported unless zero classes are allowed).
    pub zero_pairs: Vec<(usize, usize)>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.symmetry.is_empty() && self.triangle.is_empty() && self.zero_pairs.is_empty()
    }
}

/// Lists the worst symmetry and triangle violations (at most `limit` each)
/// with relative tolerance 1e-9. `allow_zero_classes` accepts pseudometrics
/// whose zero sets are equivalence classes.
pub fn metric_axioms_check_with(
    space: &SampledMetricSpace,
    allow_zero_classes: bool,
    limit: usize,
) -> ViolationReport {
    let n = space.len();
    let tol = |x: f64| 1e-9 * x.abs().max(1e-300) + 1e-15;
    let mut rep = ViolationReport::default();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (space.get(i, j), space.get(j, i));
            let bad = if a.is_infinite() || b.is_infinite() {
                a != b
            } else {
                (a - b).abs() > tol(a.max(b))
            };
            if bad {
                rep.symmetry.push((i, j, (a - b).abs()));
            }
            if !allow_zero_classes && a == 0.0 {
                rep.zero_pairs.push((i, j));
            }
        }
    }
    let tri: Vec<(usize, usize, usize, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            for k in 0..n {
                let dik = space.get(i, k);
                if i == k || dik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let s = space.get(i, j) + space.get(j, k);
                    if dik.is_infinite() {
                        if s.is_finite() {
                            out.push((i, j, k, f64::INFINITY));
                        }
                    } else if dik > s + tol(dik) {
                        out.push((i, j, k, dik - s));
                    }
                }
            }
            out
        })
        .collect();
    rep.triangle = tri;
    rep.triangle.sort_by(|a, b| b.3.total_cmp(&a.3).then((a.0, a.1, a.2).cmp(&(b.0, b.1, b.2))));
    rep.triangle.truncate(limit);
    rep.symmetry.sort_by(|a, b| b.2.total_cmp(&a.2));
    rep.symmetry.truncate(limit);
    rep.zero_pairs.truncate(limit);
    rep
}

/// Metric axioms check for an extended metric (zero only on the diagonal).
pub fn metric_axioms_check(space: &SampledMetricSpace) -> ViolationReport {
    metric_axioms_check_with(space, false, 16)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces;

    #[test]
    fn single_edge_of_length_three() {
        // Two triangles sharing the edge 0-1 of length 3.
        let mut l = HashMap::new();
        l.insert((0, 1), 3.0);
        l.insert((1, 2), 2.0);
        l.insert((0, 2), 2.0);
        let m = MetricSurfaceMesh::from_lengths(3, None, vec![[0, 1, 2]], &l, Ambient::None).unwrap();
        let d = induced_length_metric(&m, 1);
        assert_eq!(d.get(0, 1), 3.0);
    }

    #[test]
    fn two_components_are_infinitely_far() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 0.0], [6.0, 0.0], [5.0, 1.0]];
        let m = MetricSurfaceMesh::from_coords(coords, vec![[0, 1, 2], [3, 4, 5]], Norm::L2).unwrap();
        let d = induced_length_metric(&m, 2);
        assert!(d.get(0, 4).is_infinite());
        assert!(metric_axioms_check(&d).is_empty());
        assert!(matches!(geodesic(&m, 0, 4), Err(Error::NoPath(0, 4))));
    }

    #[test]
    fn gromov_examples() {
        assert_eq!(gromov_product(1.0, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(gromov_product(3.0, 4.0, 5.0).unwrap(), 1.0);
        assert_eq!(gromov_product(1.0, 2.0, 3.0).unwrap(), 0.0);
        assert!(matches!(gromov_product(1.0, 1.0, 3.0), Err(Error::NegativeProduct(_))));
    }

    #[test]
    fn zero_length_geodesic_and_chain() {
        let m = spaces::gen_euclid_square(4).unwrap();
        let p = geodesic(&m, 3, 3).unwrap();
        assert_eq!(p.length, 0.0);
        assert_eq!(p.stops.len(), 1);
        // bottom row is a straight chain of four edges
        let p = geodesic(&m, 0, 4).unwrap();
        assert!((p.length - 1.0).abs() < 1e-15);
        assert_eq!(p.stops.len(), 5);
    }

    #[test]
    fn perturbed_entry_is_reported() {
        let pts: Vec<Point> = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        let s = SampledMetricSpace::from_fn((0..4).collect(), |i, j| geom::euclid(pts[i], pts[j]));
        assert!(metric_axioms_check(&s).is_empty());
        let mut m = s.matrix().to_vec();
        m[2] += 0.5; // d(0,2): tight triangle 0-1-2
        m[2 * 4] += 0.5;
        let s = SampledMetricSpace::new((0..4).collect(), m).unwrap();
        let rep = metric_axioms_check(&s);
        assert!(rep.symmetry.is_empty());
        let tris: Vec<_> = rep.triangle.iter().map(|t| (t.0.min(t.2), t.1, t.0.max(t.2))).collect();
        assert!(tris.iter().all(|&t| t == (0, 1, 2)), "{tris:?}");
        assert!(!rep.triangle.is_empty());
    }

    #[test]
    fn boundary_of_square_is_one_loop() {
        let m = spaces::gen_euclid_square(3).unwrap();
        assert_eq!(m.boundary().len(), 1);
        assert_eq!(m.boundary()[0].len(), 12);
        assert_eq!(m.euler_characteristic(), 1);
    }
}
