//! Hausdorff content by greedy ball coverings, curve lengths, level-set
//! extraction on meshes and the co-area inequality check.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Norm, Point};
use crate::graph::{self, DisjointSets};
use crate::metric::{EdgeId, MetricSurfaceMesh, PathPolyline, SampledMetricSpace, Stop, VertexId};

/// Normalisation constant `C(s) = π^{s/2} / (2^s Γ(s/2 + 1))`, so that
/// `C(2) = π/4` and `C(1) = 1`.
pub fn normalization(s: f64) -> f64 {
    if s == 2.0 {
        return std::f64::consts::FRAC_PI_4;
    }
    if s == 1.0 {
        return 1.0;
    }
    std::f64::consts::PI.powf(s / 2.0) / (2f64.powf(s) * gamma(s / 2.0 + 1.0))
}

/// Lanczos approximation of Γ for positive arguments.
fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = G[0];
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// A finite sample of a metric space in which every sample stands for a
/// small cell of diameter `cell_diameter` around it.
pub trait SampleCloud: Sync {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;
    fn cell_diameter(&self) -> f64;
    /// Diameter of the union of the cells of `members`.
    fn union_diameter(&self, members: &[usize]) -> f64 {
        let mut d: f64 = 0.0;
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                d = d.max(self.dist(i, j));
            }
        }
        d + self.cell_diameter()
    }
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Number of samples in an untruncated ball of radius `r` around a
    /// sample, when the cloud is a lattice.
    fn full_ball_count(&self, _r: f64) -> Option<usize> {
        None
    }
    /// Sample spacing of a lattice cloud.
    fn lattice_spacing(&self) -> Option<f64> {
        None
    }
}

/// Centres of axis-parallel square cells of side `h` in the plane.
#[derive(Debug, Clone)]
pub struct PlanarCloud {
    pub points: Vec<Point>,
    pub norm: Norm,
    pub h: f64,
}

impl PlanarCloud {
    /// Cell centres of an `n × n` subdivision of `[0,1]²`.
    pub fn unit_square(n: usize, norm: Norm) -> Self {
        let h = 1.0 / n as f64;
        let points = (0..n * n)
            .map(|k| [((k % n) as f64 + 0.5) * h, ((k / n) as f64 + 0.5) * h])
            .collect();
        Self { points, norm, h }
    }

    /// Cell centres of the grid cells of `[0,1]²` inside `keep`.
    pub fn unit_square_where(n: usize, norm: Norm, keep: impl Fn(Point) -> bool) -> Self {
        let mut c = Self::unit_square(n, norm);
        c.points.retain(|&p| keep(p));
        c
    }
}

impl SampleCloud for PlanarCloud {
    fn len(&self) -> usize {
        self.points.len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.norm.dist(self.points[i], self.points[j])
    }
    fn cell_diameter(&self) -> f64 {
        self.norm.length([self.h, self.h])
    }
    /// Exact diameter of a union of square cells: the farthest pair of cell
    /// corners.
    fn union_diameter(&self, members: &[usize]) -> f64 {
        let hh = 0.5 * self.h;
        let mut corners: Vec<Point> = Vec::with_capacity(4 * members.len());
        for &i in members {
            let [x, y] = self.points[i];
            corners.extend([[x - hh, y - hh], [x + hh, y - hh], [x - hh, y + hh], [x + hh, y + hh]]);
        }
        let hull = convex_hull(corners);
        let mut d: f64 = 0.0;
        for (k, &p) in hull.iter().enumerate() {
            for &q in &hull[k + 1..] {
                d = d.max(self.norm.dist(p, q));
            }
        }
        d
    }
    fn lattice_spacing(&self) -> Option<f64> {
        Some(self.h)
    }
    fn full_ball_count(&self, r: f64) -> Option<usize> {
        let m = (r / self.h).ceil() as i64 + 1;
        let mut count = 0;
        for a in -m..=m {
            for b in -m..=m {
                if self.norm.length([a as f64 * self.h, b as f64 * self.h]) < r {
                    count += 1;
                }
            }
        }
        Some(count)
    }
}

impl SampleCloud for SampledMetricSpace {
    fn len(&self) -> usize {
        SampledMetricSpace::len(self)
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
    fn cell_diameter(&self) -> f64 {
        0.0
    }
}

/// Monotone-chain convex hull.
fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && geom::orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && geom::orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringSet {
    /// Index of the centre sample.
    pub center: usize,
    pub diameter: f64,
    pub members: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoveringFamily {
    pub sets: Vec<CoveringSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentEstimate {
    pub s: f64,
    pub delta: f64,
    pub upper_value: f64,
    pub covering: CoveringFamily,
}

/// Greedy upper bound for the δ-Hausdorff `s`-content of a sample cloud.
///
/// Scales run from the largest ball radius `(k+½)·spacing` with diameter
/// below `delta` down to single samples. At each scale samples are scanned
/// in order and a ball is taken when none of its members is covered yet and
/// it is not truncated by the edge of the cloud.
/// Each covering set is the union of its members' cells.
pub fn content_estimate<C: SampleCloud>(cloud: &C, s: f64, delta: f64) -> Result<ContentEstimate> {
    if !(delta > 0.0) || !(s > 0.0) {
        return Err(Error::ConfigInvalid("content needs s > 0 and δ > 0".into()));
    }
    let n = cloud.len();
    let mut covering = CoveringFamily::default();
    if n <= 1 {
        // a single point has zero content at every scale
        if n == 1 {
            covering.sets.push(CoveringSet { center: 0, diameter: 0.0, members: 1 });
        }
        return Ok(ContentEstimate { s, delta, upper_value: 0.0, covering });
    }
    let spacing = if let Some(h) = cloud.lattice_spacing() {
        h
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| (0..n).filter(|&j| j != i).map(|j| cloud.dist(i, j)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    let mut covered = vec![false; n];
    let mut kmax = 0usize;
    while (2 * (kmax + 1) + 1) as f64 * spacing <= delta * (1.0 + 1e-12) {
        kmax += 1;
    }
    let c_s = normalization(s);
    let mut total = 0.0;
    for k in (0..=kmax).rev() {
        let r = (k as f64 + 0.5) * spacing;
        let full_count = cloud.full_ball_count(r);
        for c in 0..n {
            if covered[c] {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|&j| cloud.dist(c, j) < r).collect();
            if members.iter().any(|&j| covered[j]) {
                continue;
            }
            // skip balls truncated by the edge of the cloud; smaller scales
            // cover those samples more economically
            if k > 0 && full_count.is_some_and(|m| members.len() < m) {
                continue;
            }
            let diam = cloud.union_diameter(&members);
            if k > 0 && full_count.is_none() && diam < (2.0 * r - spacing) * (1.0 - 1e-9) {
                continue;
            }
            for &j in &members {
                covered[j] = true;
            }
            total += c_s * diam.powf(s);
            covering.sets.push(CoveringSet { center: c, diameter: diam, members: members.len() });
        }
    }
    Ok(ContentEstimate { s, delta, upper_value: total, covering })
}

/// Content estimates along a δ schedule (in the given order).
pub fn content_schedule<C: SampleCloud>(cloud: &C, s: f64, deltas: &[f64]) -> Result<Vec<ContentEstimate>> {
    deltas.par_iter().map(|&d| content_estimate(cloud, s, d)).collect()
}

/// Length of a planar polyline under `norm`.
pub fn polyline_length(points: &[Point], norm: Norm) -> f64 {
    points.windows(2).map(|w| norm.dist(w[0], w[1])).sum()
}

/// Length of a path given by a sequence of sample indices in a metric
/// space: the sum of consecutive distances (∞ if any is infinite).
pub fn curve_length(space: &SampledMetricSpace, stops: &[usize]) -> f64 {
    stops.windows(2).map(|w| space.get(w[0], w[1])).sum()
}

/// Planar position of a stop.
pub fn stop_point(mesh: &MetricSurfaceMesh, stop: Stop) -> Option<Point> {
    match stop {
        Stop::Vertex(VertexId(v)) => mesh.coords().map(|c| c[v]),
        Stop::EdgePoint { edge: EdgeId(e), t } => mesh.edge_point(e, t),
    }
}

/// Length of a mesh path measured in the ambient norm of a planar mesh.
pub fn mesh_path_length(mesh: &MetricSurfaceMesh, path: &PathPolyline) -> Option<f64> {
    let pts: Option<Vec<Point>> = path.stops.iter().map(|&s| stop_point(mesh, s)).collect();
    pts.map(|p| polyline_length(&p, mesh.norm()))
}

/// Linear interpolation of a vertex function inside a face: its gradient in
/// the face's planar frame.
fn face_gradient(pts: &[Point; 3], f: [f64; 3]) -> Point {
    let e1 = geom::sub(pts[1], pts[0]);
    let e2 = geom::sub(pts[2], pts[0]);
    let det = geom::cross(e1, e2);
    let (d1, d2) = (f[1] - f[0], f[2] - f[0]);
    [(d1 * e2[1] - d2 * e1[1]) / det, (d2 * e1[0] - d1 * e2[0]) / det]
}

/// Largest dual-norm gradient of the piecewise-linear interpolation of `f`,
/// i.e. its Lipschitz constant with respect to the in-face metric.
pub fn lipschitz_constant(mesh: &MetricSurfaceMesh, f: &[f64]) -> f64 {
    let dual = if mesh.coords().is_some() { mesh.norm() } else { Norm::L2 };
    (0..mesh.n_faces())
        .map(|k| {
            let t = mesh.faces()[k];
            let g = face_gradient(&mesh.face_points(k), t.map(|v| f[v]));
            let s = if mesh.coords().is_some() { mesh.face_scale()[k] } else { 1.0 };
            if s == 0.0 {
                if g == [0.0, 0.0] {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                dual.dual_length(g) / s
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetCurve {
    pub t: f64,
    /// Connected components of the level set, each a loop (first stop
    /// repeated at the end) or a boundary-to-boundary arc.
    pub polylines: Vec<PathPolyline>,
    pub length: f64,
    /// Vertices with `f < t` and with `f > t`.
    pub separates: (Vec<usize>, Vec<usize>),
}

/// Crossing point on edge `e` for level `t` (parameter from the edge's
/// first vertex).
fn crossing(mesh: &MetricSurfaceMesh, f: &[f64], e: usize, t: f64) -> f64 {
    let [a, b] = mesh.edges()[e];
    (t - f[a]) / (f[b] - f[a])
}

fn local_point(mesh: &MetricSurfaceMesh, face: usize, e: usize, s: f64) -> Point {
    let pts = mesh.face_points(face);
    let tri = mesh.faces()[face];
    let [a, b] = mesh.edges()[e];
    let pa = pts[tri.iter().position(|&v| v == a).expect("edge of face")];
    let pb = pts[tri.iter().position(|&v| v == b).expect("edge of face")];
    geom::lerp(pa, pb, s)
}

/// Level set `f = t` of the piecewise-linear interpolation of `f`, traced
/// through faces. Fails with `DegenerateLevel` when `t` equals a vertex value.
pub fn level_set_extract(mesh: &MetricSurfaceMesh, f: &[f64], t: f64) -> Result<LevelSetCurve> {
    if f.len() != mesh.n_vertices() {
        return Err(Error::ConfigInvalid("function length differs from vertex count".into()));
    }
    if f.contains(&t) {
        return Err(Error::DegenerateLevel(t));
    }
    // segments: face -> (edge, edge)
    let mut seg_of_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut segs: Vec<(usize, [usize; 2])> = Vec::new();
    for (k, tri) in mesh.faces().iter().enumerate() {
        let above = tri.map(|v| f[v] > t);
        if above.iter().all(|&x| x) || above.iter().all(|&x| !x) {
            continue;
        }
        let crossed: Vec<usize> = mesh
            .face_edges(k)
            .into_iter()
            .filter(|&e| {
                let [a, b] = mesh.edges()[e];
                (f[a] > t) != (f[b] > t)
            })
            .collect();
        debug_assert_eq!(crossed.len(), 2);
        let id = segs.len();
        segs.push((k, [crossed[0], crossed[1]]));
        for &e in &crossed {
            seg_of_edge.entry(e).or_default().push(id);
        }
    }
    let mut length = 0.0;
    for &(k, [e1, e2]) in &segs {
        let p = local_point(mesh, k, e1, crossing(mesh, f, e1, t));
        let q = local_point(mesh, k, e2, crossing(mesh, f, e2, t));
        length += mesh.face_segment_length(k, p, q);
    }
    // chain segments into components
    let mut used = vec![false; segs.len()];
    let mut polylines = Vec::new();
    let mut order: Vec<usize> = (0..segs.len()).collect();
    // start arcs at boundary edges so they are traced end to end
    order.sort_by_key(|&i| {
        let open = segs[i].1.iter().any(|e| seg_of_edge[e].len() == 1);
        (!open, i)
    });
    for &start in &order {
        if used[start] {
            continue;
        }
        let (_, [ea, eb]) = segs[start];
        let first = if seg_of_edge[&eb].len() == 1 && seg_of_edge[&ea].len() != 1 { eb } else { ea };
        let mut edges_seq = vec![first];
        let mut cur = start;
        let mut at = first;
        let mut seg_len = 0.0;
        loop {
            used[cur] = true;
            let (k, [x, y]) = segs[cur];
            let next_edge = if x == at { y } else { x };
            let p = local_point(mesh, k, at, crossing(mesh, f, at, t));
            let q = local_point(mesh, k, next_edge, crossing(mesh, f, next_edge, t));
            seg_len += mesh.face_segment_length(k, p, q);
            edges_seq.push(next_edge);
            match seg_of_edge[&next_edge].iter().find(|&&s| !used[s]) {
                Some(&s) => {
                    cur = s;
                    at = next_edge;
                }
                None => break,
            }
        }
        let stops = edges_seq
            .into_iter()
            .map(|e| Stop::EdgePoint { edge: EdgeId(e), t: crossing(mesh, f, e, t) })
            .collect();
        polylines.push(PathPolyline { stops, length: seg_len });
    }
    let low: Vec<usize> = (0..f.len()).filter(|&v| f[v] < t).collect();
    let high: Vec<usize> = (0..f.len()).filter(|&v| f[v] > t).collect();
    Ok(LevelSetCurve { t, polylines, length, separates: (low, high) })
}

/// As [`level_set_extract`], moving `t` up by `jitter·range(f)` (repeatedly)
/// while it hits a vertex value.
pub fn level_set_extract_jittered(
    mesh: &MetricSurfaceMesh,
    f: &[f64],
    t: f64,
    jitter: f64,
) -> Result<LevelSetCurve> {
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let step = jitter * (hi - lo).max(f64::MIN_POSITIVE);
    let mut t = t;
    for _ in 0..64 {
        match level_set_extract(mesh, f, t) {
            Err(Error::DegenerateLevel(_)) => t += step,
            other => return other,
        }
    }
    Err(Error::DegenerateLevel(t))
}

/// Whether removing the edges crossed by the level set leaves no edge-path
/// from a `f < t` vertex to a `f > t` vertex.
pub fn separates(mesh: &MetricSurfaceMesh, f: &[f64], t: f64) -> bool {
    let mut sets = DisjointSets::new(mesh.n_vertices());
    for &[a, b] in mesh.edges() {
        if (f[a] > t) == (f[b] > t) {
            sets.union(a, b);
        }
    }
    let mut side: HashMap<usize, bool> = HashMap::new();
    for v in 0..mesh.n_vertices() {
        let r = sets.find(v);
        let s = f[v] > t;
        if *side.entry(r).or_insert(s) != s {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoareaReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs` (0 when both vanish).
    pub ratio: f64,
    pub lipschitz: f64,
    pub lipschitz_measured: f64,
    pub levels: usize,
    pub pass: bool,
}

/// Checks `∫ ∫_{f⁻¹(t)} g dH¹ dt ≤ (4L/π) ∫ g dH²` with a midpoint rule in
/// `t` over `levels` levels and tolerance `tol` on the ratio.
pub fn coarea_check(
    mesh: &MetricSurfaceMesh,
    f: &[f64],
    g: &[f64],
    lipschitz: f64,
    levels: usize,
    tol: f64,
) -> Result<CoareaReport> {
    let measured = lipschitz_constant(mesh, f);
    if measured > lipschitz * (1.0 + tol) {
        return Err(Error::LipschitzViolated { bound: lipschitz, measured });
    }
    let rhs_integral: f64 = (0..mesh.n_faces())
        .map(|k| {
            let t = mesh.faces()[k];
            mesh.face_area(k) * (g[t[0]] + g[t[1]] + g[t[2]]) / 3.0
        })
        .sum();
    let rhs = 4.0 * lipschitz / std::f64::consts::PI * rhs_integral;
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let dt = (hi - lo) / levels as f64;
    let per_level: Vec<f64> = (0..levels)
        .into_par_iter()
        .map(|i| {
            let t = lo + (i as f64 + 0.5) * dt;
            weighted_level_length(mesh, f, g, t, 1e-7)
        })
        .collect::<Result<Vec<_>>>()?;
    let lhs = per_level.iter().sum::<f64>() * dt;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(CoareaReport {
        lhs,
        rhs,
        ratio,
        lipschitz,
        lipschitz_measured: measured,
        levels,
        pass: lhs <= rhs * (1.0 + tol),
    })
}

/// `∫_{f⁻¹(t)} g dH¹` for piecewise-linear `g`.
fn weighted_level_length(mesh: &MetricSurfaceMesh, f: &[f64], g: &[f64], t: f64, jitter: f64) -> Result<f64> {
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mut t = t;
    while f.contains(&t) {
        t += jitter * (hi - lo);
    }
    let mut total = 0.0;
    for (k, tri) in mesh.faces().iter().enumerate() {
        let above = tri.map(|v| f[v] > t);
        if above.iter().all(|&x| x) || above.iter().all(|&x| !x) {
            continue;
        }
        let mut ends = [([0.0; 2], 0.0); 2];
        let mut m = 0;
        for e in mesh.face_edges(k) {
            let [a, b] = mesh.edges()[e];
            if (f[a] > t) != (f[b] > t) && m < 2 {
                let s = crossing(mesh, f, e, t);
                ends[m] = (local_point(mesh, k, e, s), g[a] + s * (g[b] - g[a]));
                m += 1;
            }
        }
        total += mesh.face_segment_length(k, ends[0].0, ends[1].0) * 0.5 * (ends[0].1 + ends[1].1);
    }
    Ok(total)
}

/// Distance from a set of mesh vertices in the induced length metric
/// (refined graph), used as a Lipschitz test function.
pub fn distance_function(mesh: &MetricSurfaceMesh, sources: &[usize], subdivision: usize) -> Vec<f64> {
    let g = mesh.steiner_graph(subdivision);
    let d = graph::dijkstra(&g.adj, sources).dist;
    d[..mesh.n_vertices()].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{self, ShellShape};
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn normalization_constants() {
        assert_eq!(normalization(2.0), FRAC_PI_4);
        assert!((normalization(3.0) - PI / 6.0).abs() < 1e-12);
        assert!((gamma(5.0) - 24.0).abs() < 1e-10);
    }

    #[test]
    fn single_point_and_empty() {
        let c = PlanarCloud { points: vec![[0.3, 0.3]], norm: Norm::L2, h: 0.0 };
        assert_eq!(content_estimate(&c, 1.5, 0.1).unwrap().upper_value, 0.0);
        let e = PlanarCloud { points: vec![], norm: Norm::L2, h: 0.1 };
        assert_eq!(content_estimate(&e, 2.0, 0.1).unwrap().upper_value, 0.0);
    }

    #[test]
    fn linf_square_content_is_pi_over_four() {
        let c = PlanarCloud::unit_square(32, Norm::Linf);
        for delta in [0.5, 0.25, 0.1] {
            let e = content_estimate(&c, 2.0, delta).unwrap();
            assert!((e.upper_value - FRAC_PI_4).abs() < 1e-9, "{}", e.upper_value);
            assert!(e.covering.sets.iter().all(|s| s.diameter <= delta + 1e-12));
        }
    }

    #[test]
    fn euclid_square_content_is_an_upper_bound() {
        // Round balls cannot tile, so the lattice greedy cover overshoots the
        // Lebesgue area; the overshoot shrinks with the sample spacing.
        let coarse = content_estimate(&PlanarCloud::unit_square(32, Norm::L2), 2.0, 0.5).unwrap();
        let fine = content_estimate(&PlanarCloud::unit_square(64, Norm::L2), 2.0, 0.5).unwrap();
        assert!(fine.upper_value >= 1.0 && fine.upper_value < coarse.upper_value);
        assert!(fine.upper_value < 1.2, "{}", fine.upper_value);
    }

    #[test]
    fn covering_covers_every_sample() {
        let c = PlanarCloud::unit_square(16, Norm::L2);
        let e = content_estimate(&c, 2.0, 0.3).unwrap();
        let covered: usize = e.covering.sets.iter().map(|s| s.members).sum();
        assert_eq!(covered, c.len());
    }

    #[test]
    fn curve_lengths() {
        // partition-sum oracle: any refinement of a straight segment has the
        // same ℓ∞ sum, equal to the ℓ∞ length of the increment
        let pts: Vec<Point> = (0..=10).map(|i| [i as f64 / 10.0, i as f64 / 10.0]).collect();
        assert!((polyline_length(&pts, Norm::Linf) - 1.0).abs() < 1e-12);
        assert!((polyline_length(&[[0.0, 0.0], [0.7, 0.0]], Norm::Linf) - 0.7).abs() < 1e-15);
        assert_eq!(polyline_length(&[[0.2, 0.2], [0.2, 0.2]], Norm::L2), 0.0);
    }

    #[test]
    fn vertical_level_set() {
        let m = spaces::gen_euclid_square(8).unwrap();
        let f: Vec<f64> = m.coords().unwrap().iter().map(|p| p[0]).collect();
        assert!(matches!(level_set_extract(&m, &f, 0.5), Err(Error::DegenerateLevel(_))));
        let c = level_set_extract_jittered(&m, &f, 0.5, 1e-7).unwrap();
        assert!((c.length - 1.0).abs() < 1e-9);
        assert_eq!(c.polylines.len(), 1);
        assert!(separates(&m, &f, c.t));
    }

    #[test]
    fn linf_square_loop() {
        let m = spaces::gen_linf_square(32).unwrap();
        let f: Vec<f64> = m.coords().unwrap().iter().map(|p| Norm::Linf.dist(*p, [0.5, 0.5])).collect();
        let c = level_set_extract_jittered(&m, &f, 0.25, 1e-7).unwrap();
        assert!((c.length - 2.0).abs() < 0.03 * 2.0, "{}", c.length);
        assert_eq!(c.polylines.len(), 1);
        assert!(separates(&m, &f, c.t));
    }

    #[test]
    fn circle_level_set_on_disk() {
        let m = spaces::gen_polar_disk(ShellShape::Circle, Norm::L2, 1.0, 1.0 / 64.0, 4, 128).unwrap();
        let f: Vec<f64> = m.coords().unwrap().iter().map(|p| geom::euclid(*p, [0.0, 0.0])).collect();
        let c = level_set_extract_jittered(&m, &f, 0.5, 1e-7).unwrap();
        assert!((c.length - PI).abs() < 0.05 * PI, "{}", c.length);
    }

    #[test]
    fn coarea_examples() {
        let m = spaces::gen_polar_disk(ShellShape::Circle, Norm::L2, 1.0, 1.0 / 64.0, 4, 128).unwrap();
        let f: Vec<f64> = m.coords().unwrap().iter().map(|p| geom::euclid(*p, [0.0, 0.0])).collect();
        let one = vec![1.0; f.len()];
        let r = coarea_check(&m, &f, &one, 1.0, 200, 0.03).unwrap();
        assert!((r.lhs - PI).abs() < 0.03 * PI, "{r:?}");
        assert!((r.rhs - 4.0).abs() < 0.03 * 4.0);
        assert!(r.pass);
        let zero = vec![0.0; f.len()];
        let r = coarea_check(&m, &f, &zero, 1.0, 50, 0.03).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));

        let sq = spaces::gen_linf_square(32).unwrap();
        let f: Vec<f64> = sq.coords().unwrap().iter().map(|p| Norm::Linf.dist(*p, [0.5, 0.5])).collect();
        let one = vec![1.0; f.len()];
        let r = coarea_check(&sq, &f, &one, 1.0, 200, 0.03).unwrap();
        assert!((r.ratio - 1.0).abs() < 0.03, "{r:?}");
        assert!(matches!(
            coarea_check(&sq, &f, &one, 0.5, 10, 0.03),
            Err(Error::LipschitzViolated { .. })
        ));
    }
}
