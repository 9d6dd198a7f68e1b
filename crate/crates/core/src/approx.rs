//! Approximation of a metric surface by glued polyhedral fillings: coarse
//! triangulation, chain-quotient gluing, and the ε-isometry and area checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filling::{fill_triangle, FillingReport, PolyhedralDisk, L_CONFIG};
use crate::geom::{self, Norm, Point};
use crate::graph::{dijkstra, Adjacency};
use crate::metric::{metric_axioms_check, MetricSurfaceMesh, SampledMetricSpace};
use crate::tripod::MetricTriangle;

/// A triangle of the host: corner vertices, the host vertices along each
/// edge (from corner `j`, exclusive, to corner `j+1`, inclusive) and the
/// host faces it contains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostTriangle {
    pub corners: [usize; 3],
    pub edges: [Vec<usize>; 3],
    pub faces: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triangulation {
    pub triangles: Vec<HostTriangle>,
    pub epsilon: f64,
    /// Side of the coarse lattice cell, when the host is a lattice square.
    pub cell_side: Option<f64>,
}

/// Lattice resolution `n` when `mesh` is a unit-square grid host.
fn lattice_resolution(mesh: &MetricSurfaceMesh) -> Option<usize> {
    let coords = mesh.coords()?;
    let n = (coords.len() as f64).sqrt().round() as usize;
    if n < 2 || n * n != coords.len() {
        return None;
    }
    let n = n - 1;
    let h = 1.0 / n as f64;
    let ok = coords.iter().enumerate().all(|(v, p)| {
        let (i, j) = (v % (n + 1), v / (n + 1));
        (p[0] - i as f64 * h).abs() < 1e-9 && (p[1] - j as f64 * h).abs() < 1e-9
    });
    (ok && mesh.n_faces() == 2 * n * n).then_some(n)
}

/// Perimeter of the half-cell triangle of side `s` in `norm`.
fn half_cell_perimeter(norm: Norm, s: f64) -> f64 {
    2.0 * s + norm.length([s, s])
}

/// Triangles with diameter and perimeter at most `epsilon`.
///
/// Lattice square hosts get the coarsest lattice of `k×k` host cells
/// (`k | n`) whose half-cells qualify, each cut along the host's own
/// diagonal; a one-face mesh is its own cover when `epsilon` allows.
pub fn triangulate(mesh: &MetricSurfaceMesh, epsilon: f64) -> Result<Triangulation> {
    if !(epsilon > 0.0) {
        return Err(Error::EpsilonTooSmall(epsilon));
    }
    if mesh.n_faces() == 1 {
        let [a, b, c] = mesh.faces()[0];
        let l: Vec<f64> = mesh.face_edges(0).iter().map(|&e| mesh.edge_length(e)).collect();
        let perimeter: f64 = l.iter().sum();
        let diam = l.iter().copied().fold(0.0, f64::max);
        if diam + perimeter > epsilon * (1.0 + 1e-12) && perimeter > epsilon * (1.0 + 1e-12) {
            return Err(Error::EpsilonTooSmall(epsilon));
        }
        return Ok(Triangulation {
            triangles: vec![HostTriangle { corners: [a, b, c], edges: [vec![b], vec![c], vec![a]], faces: vec![0] }],
            epsilon,
            cell_side: None,
        });
    }
    let n = lattice_resolution(mesh).ok_or_else(|| {
        Error::ConfigInvalid("triangulation needs a unit-square lattice host or a single triangle".into())
    })?;
    let norm = mesh.norm();
    let h = 1.0 / n as f64;
    let fits = |k: usize| {
        let s = k as f64 * h;
        half_cell_perimeter(norm, s) <= epsilon * (1.0 + 1e-12) && norm.length([s, s]).max(s) <= epsilon
    };
    // k must also divide n/2 so that coarse cells never straddle the
    // lines where the host diagonals change direction
    let k = (1..=n.max(1))
        .rev()
        .find(|&k| n % k == 0 && (n % (2 * k) == 0 || k == n) && fits(k))
        .ok_or(Error::EpsilonTooSmall(epsilon))?;
    let m = n / k;
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let path = |a: (usize, usize), b: (usize, usize)| -> Vec<usize> {
        (1..=k)
            .map(|t| {
                let i = (a.0 as isize + (b.0 as isize - a.0 as isize) * t as isize / k as isize) as usize;
                let j = (a.1 as isize + (b.1 as isize - a.1 as isize) * t as isize / k as isize) as usize;
                vid(i, j)
            })
            .collect()
    };
    let coords = mesh.coords().expect("lattice host has coordinates");
    let mut triangles = Vec::with_capacity(2 * m * m);
    for cj in 0..m {
        for ci in 0..m {
            let (i0, j0, i1, j1) = (ci * k, cj * k, ci * k + k, cj * k + k);
            let rising = mesh.edge_between(vid(i0, j0), vid(i0 + 1, j0 + 1)).is_some();
            let corner_sets: [[(usize, usize); 3]; 2] = if rising {
                [[(i0, j0), (i1, j0), (i1, j1)], [(i0, j0), (i1, j1), (i0, j1)]]
            } else {
                [[(i0, j0), (i1, j0), (i0, j1)], [(i1, j0), (i1, j1), (i0, j1)]]
            };
            for cs in corner_sets {
                let corners = cs.map(|(i, j)| vid(i, j));
                let edges = [0, 1, 2].map(|e| path(cs[e], cs[(e + 1) % 3]));
                let [a, b, c] = corners.map(|v| coords[v]);
                let faces = (ci * k..i1)
                    .flat_map(|i| (cj * k..j1).map(move |j| (i, j)))
                    .flat_map(|(i, j)| [2 * (j * n + i), 2 * (j * n + i) + 1])
                    .filter(|&f| {
                        let [p, q, r] = mesh.face_points(f);
                        let g = geom::scale(geom::add(geom::add(p, q), r), 1.0 / 3.0);
                        geom::point_in_triangle(g, a, b, c, 0.0)
                    })
                    .collect();
                triangles.push(HostTriangle { corners, edges, faces });
            }
        }
    }
    let tri = Triangulation { triangles, epsilon, cell_side: Some(k as f64 * h) };
    check_partition(mesh, &tri)?;
    Ok(tri)
}

/// Every host face lies in exactly one triangle.
fn check_partition(mesh: &MetricSurfaceMesh, tri: &Triangulation) -> Result<()> {
    let mut seen = vec![0u8; mesh.n_faces()];
    for t in &tri.triangles {
        for &f in &t.faces {
            seen[f] += 1;
        }
    }
    if let Some(f) = seen.iter().position(|&c| c != 1) {
        return Err(Error::InvalidMesh(format!("face {f} covered {} times", seen[f])));
    }
    Ok(())
}

/// Diameter and perimeter of a host triangle in the ambient norm.
pub fn triangle_size(mesh: &MetricSurfaceMesh, t: &HostTriangle) -> (f64, f64) {
    let d = |a: usize, b: usize| mesh.ambient_dist(a, b).unwrap_or(f64::INFINITY);
    let [a, b, c] = t.corners;
    let sides = [d(a, b), d(b, c), d(c, a)];
    (sides.iter().copied().fold(0.0, f64::max), sides.iter().sum())
}

/// One piece of a gluing: global node ids and the piece's own distances.
#[derive(Debug, Clone, PartialEq)]
pub struct GluePiece {
    pub nodes: Vec<usize>,
    /// Row-major `nodes.len()²` matrix.
    pub dist: Vec<f64>,
}

/// The union graph of pieces (complete graphs with their internal
/// distances) and chords; its shortest paths realize the chain metric.
#[derive(Debug, Clone)]
pub struct GluedSurface {
    pub n_nodes: usize,
    pub adj: Adjacency,
}

impl GluedSurface {
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        dijkstra(&self.adj, &[source]).dist
    }

    /// `d_n` restricted to `nodes`.
    pub fn restrict(&self, nodes: &[usize]) -> Result<SampledMetricSpace> {
        let rows: Vec<Vec<f64>> = nodes
            .par_iter()
            .map(|&s| {
                let d = self.distances_from(s);
                nodes.iter().map(|&t| d[t]).collect()
            })
            .collect();
        SampledMetricSpace::new(nodes.to_vec(), rows.into_iter().flatten().collect())
    }
}

/// Union graph of the pieces plus chords `(a, b, length)`.
pub fn glue(n_nodes: usize, pieces: &[GluePiece], chords: &[(usize, usize, f64)]) -> Result<GluedSurface> {
    let mut adj: Adjacency = vec![Vec::new(); n_nodes];
    for p in pieces {
        let m = p.nodes.len();
        if p.dist.len() != m * m {
            return Err(Error::MismatchedSampling("piece matrix does not match its nodes".into()));
        }
        for a in 0..m {
            for b in a + 1..m {
                let w = p.dist[a * m + b];
                if w.is_finite() {
                    adj[p.nodes[a]].push((p.nodes[b], w));
                    adj[p.nodes[b]].push((p.nodes[a], w));
                }
            }
        }
    }
    for &(a, b, w) in chords {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    Ok(GluedSurface { n_nodes, adj })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsIsometry {
    pub distortion: f64,
    pub density_defect: f64,
    pub epsilon: f64,
}

/// `max(distortion, density defect)` of a map given on samples:
/// `map[i]` is the codomain sample hit by domain sample `i`.
pub fn epsilon_isometry_check<D, C>(
    n_dom: usize,
    d_dom: D,
    n_cod: usize,
    d_cod: C,
    map: &[usize],
) -> EpsIsometry
where
    D: Fn(usize, usize) -> f64 + Sync,
    C: Fn(usize, usize) -> f64 + Sync,
{
    let distortion = (0..n_dom)
        .into_par_iter()
        .map(|i| {
            (i + 1..n_dom)
                .map(|j| (d_dom(i, j) - d_cod(map[i], map[j])).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let density_defect = (0..n_cod)
        .into_par_iter()
        .map(|y| map.iter().map(|&x| d_cod(y, x)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max);
    EpsIsometry { distortion, density_defect, epsilon: distortion.max(density_defect) }
}

/// ε-isometry of a map between two sampled spaces.
pub fn epsilon_isometry_spaces(dom: &SampledMetricSpace, cod: &SampledMetricSpace, map: &[usize]) -> EpsIsometry {
    epsilon_isometry_check(dom.len(), |i, j| dom.get(i, j), cod.len(), |i, j| cod.get(i, j), map)
}

/// Checks `H² ≥ 1 − tol` for a disk with four sides whose opposite sides
/// are at distance at least 1.
pub fn besicovitch_check(area: f64, d13: f64, d24: f64, tol: f64) -> Result<()> {
    if d13 < 1.0 - tol || d24 < 1.0 - tol {
        return Err(Error::SideDistanceBelowOne(d13, d24));
    }
    if area < 1.0 - tol {
        return Err(Error::SpecInconsistent(format!("H² = {area} below 1 with side distances ≥ 1")));
    }
    Ok(())
}

/// Intrinsic distances between two vertex sets of a mesh (Steiner graph
/// with `k` subdivisions).
pub fn side_distance(mesh: &MetricSurfaceMesh, a: &[usize], b: &[usize], k: usize) -> f64 {
    let g = mesh.steiner_graph(k);
    let d = g.distances_from(a);
    b.iter().map(|&v| d[v]).fold(f64::INFINITY, f64::min)
}

/// Radial collapse of a boundary collar of width `w` in the unit square:
/// each point is clamped into `[w, 1−w]²`. Returns the map's distortion on
/// the given points in `norm`.
pub fn collar_retraction_distortion(points: &[Point], norm: Norm, w: f64) -> f64 {
    let clamp = |p: Point| [p[0].clamp(w, 1.0 - w), p[1].clamp(w, 1.0 - w)];
    let img: Vec<Point> = points.iter().map(|&p| clamp(p)).collect();
    let n = points.len();
    let distortion = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| (norm.dist(points[i], points[j]) - norm.dist(img[i], img[j])).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let density = points
        .iter()
        .map(|&p| norm.dist(p, clamp(p)))
        .fold(0.0, f64::max);
    distortion.max(density)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxOptions {
    /// Chords join all net pairs up to this many net vertices, otherwise
    /// only pairs within `chord_cap_cells` coarse cells.
    pub all_pairs_limit: usize,
    pub chord_cap_cells: f64,
    pub filling_density: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self { all_pairs_limit: 500, chord_cap_cells: 3.0, filling_density: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillingSummary {
    pub max_diam_ratio: f64,
    pub max_area_ratio: f64,
    pub min_domination: f64,
    pub boundary_ratio_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub epsilon: f64,
    pub n_triangles: usize,
    pub n_net: usize,
    pub n_skeleton: usize,
    pub n_chords: usize,
    pub epsilon_achieved: f64,
    pub distortion: f64,
    pub density_defect: f64,
    /// `max |d_n − d|` over net-vertex pairs.
    pub vertex_identity_error: f64,
    pub vertex_identity_slack: f64,
    /// Worst metric-axiom violation of `d_n` on the net.
    pub metric_violation: f64,
    /// `H²(X_n)`, the total area of the fillings.
    pub area: f64,
    /// `H²(X_n) / H²(X)`.
    pub area_ratio: f64,
    pub area_lower_bound: f64,
    pub area_upper_bound: f64,
    pub retraction_distortion: f64,
    pub fillings: FillingSummary,
    pub filling_reports: Vec<FillingReport>,
}

/// Runs triangulation, filling, gluing and all checks at one `epsilon`.
pub fn approximate(mesh: &MetricSurfaceMesh, epsilon: f64, opts: &ApproxOptions) -> Result<ApproxReport> {
    let tri = triangulate(mesh, epsilon)?;
    let norm = mesh.norm();
    let coords = mesh.coords().ok_or_else(|| Error::ConfigInvalid("host needs coordinates".into()))?;
    let d = |a: usize, b: usize| mesh.ambient_dist(a, b).unwrap_or(f64::INFINITY);
    for t in &tri.triangles {
        let (diam, per) = triangle_size(mesh, t);
        if diam > epsilon * (1.0 + 1e-9) || per > epsilon * (1.0 + 1e-9) {
            return Err(Error::SpecInconsistent(format!("triangle of size {diam}/{per} above ε = {epsilon}")));
        }
    }

    let fills: Vec<(PolyhedralDisk, FillingReport, [f64; 3])> = tri
        .triangles
        .par_iter()
        .map(|t| {
            let k = t.edges[0].len();
            let mt = MetricTriangle::from_planar(t.corners.map(|v| coords[v]), norm, k)?;
            let h2: f64 = t.faces.iter().map(|&f| mesh.face_area(f)).sum();
            let (disk, rep) = fill_triangle(&mt, h2, opts.filling_density)?;
            Ok((disk, rep, mt.edge_lengths))
        })
        .collect::<Result<_>>()?;

    // skeleton nodes: host vertices on triangle edges
    let mut node_of = vec![usize::MAX; mesh.n_vertices()];
    let mut skeleton = Vec::new();
    let mut edge_len: std::collections::HashMap<(usize, usize), f64> = Default::default();
    let mut pieces = Vec::with_capacity(fills.len());
    for (t, (disk, _, lengths)) in tri.triangles.iter().zip(&fills) {
        let samples: Vec<usize> = t.edges.iter().flatten().copied().collect();
        for &v in &samples {
            if node_of[v] == usize::MAX {
                node_of[v] = skeleton.len();
                skeleton.push(v);
            }
        }
        for j in 0..3 {
            let key = (t.corners[j].min(t.corners[(j + 1) % 3]), t.corners[j].max(t.corners[(j + 1) % 3]));
            let l = lengths[j];
            if let Some(&prev) = edge_len.get(&key) {
                if (prev - l).abs() > 1e-9 * l {
                    return Err(Error::EdgeMismatch(format!("edge {key:?}: {prev} vs {l}")));
                }
            }
            edge_len.insert(key, l);
        }
        pieces.push(GluePiece { nodes: samples.iter().map(|&v| node_of[v]).collect(), dist: disk.sample_dist.clone() });
    }
    let mut net: Vec<usize> = tri.triangles.iter().flat_map(|t| t.corners).collect();
    net.sort_unstable();
    net.dedup();
    let cap = match tri.cell_side {
        Some(s) if net.len() > opts.all_pairs_limit => opts.chord_cap_cells * s * (1.0 + 1e-9),
        _ => f64::INFINITY,
    };
    let mut chords = Vec::new();
    for (i, &a) in net.iter().enumerate() {
        for &b in &net[i + 1..] {
            let l = d(a, b);
            if l <= cap {
                chords.push((node_of[a], node_of[b], l));
            }
        }
    }
    let glued = glue(skeleton.len(), &pieces, &chords)?;

    // distortion of f_n on skeleton samples, streamed per source
    let ns = skeleton.len();
    let distortion = (0..ns)
        .into_par_iter()
        .map(|i| {
            let dn = glued.distances_from(i);
            (i + 1..ns).map(|j| (dn[j] - d(skeleton[i], skeleton[j])).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let net_nodes: Vec<usize> = net.iter().map(|&v| node_of[v]).collect();
    let dn_net = glued.restrict(&net_nodes)?;
    let mut vertex_identity_error: f64 = 0.0;
    for i in 0..net.len() {
        for j in i + 1..net.len() {
            vertex_identity_error = vertex_identity_error.max((dn_net.get(i, j) - d(net[i], net[j])).abs());
        }
    }
    let viol = metric_axioms_check(&dn_net);
    let metric_violation = viol
        .symmetry
        .iter()
        .map(|v| v.2)
        .chain(viol.triangle.iter().map(|v| v.3))
        .fold(0.0, f64::max);
    let density_defect = (0..mesh.n_vertices())
        .into_par_iter()
        .map(|y| skeleton.iter().map(|&x| d(y, x)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max);
    let epsilon_achieved = distortion.max(density_defect);

    let area: f64 = fills.iter().map(|f| f.0.mesh.total_area()).sum();
    let host_area = mesh.total_area();
    let rs: Vec<&FillingReport> = fills.iter().map(|f| &f.1).collect();
    let fillings = FillingSummary {
        max_diam_ratio: rs.iter().map(|r| r.diam_ratio).fold(0.0, f64::max),
        max_area_ratio: rs.iter().map(|r| r.area_ratio).fold(0.0, f64::max),
        min_domination: rs.iter().map(|r| r.min_domination).fold(f64::INFINITY, f64::min),
        boundary_ratio_range: [
            rs.iter().flat_map(|r| r.boundary_length_ratios).fold(f64::INFINITY, f64::min),
            rs.iter().flat_map(|r| r.boundary_length_ratios).fold(0.0, f64::max),
        ],
    };
    let net_points: Vec<Point> = net.iter().map(|&v| coords[v]).collect();
    let retraction_distortion = collar_retraction_distortion(&net_points, norm, tri.cell_side.unwrap_or(0.0));
    let scale = dn_net.diameter().max(1.0);
    Ok(ApproxReport {
        epsilon,
        n_triangles: tri.triangles.len(),
        n_net: net.len(),
        n_skeleton: ns,
        n_chords: chords.len(),
        epsilon_achieved,
        distortion,
        density_defect,
        vertex_identity_error,
        vertex_identity_slack: 1e-9 * scale,
        metric_violation,
        area,
        area_ratio: area / host_area,
        area_lower_bound: (1.0 - 2.0 * epsilon_achieved).max(0.0).powi(2),
        area_upper_bound: L_CONFIG * host_area,
        retraction_distortion,
        fillings,
        filling_reports: rs.into_iter().cloned().collect(),
    })
}
