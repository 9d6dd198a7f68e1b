//! Metric triangles, their tripod projection and the planar embedding
//! `F(x) = x̄ + dist(x, Î(x))·v_j` with its bi-Lipschitz certificate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Norm, Point};
use crate::metric::gromov_product;

/// Proof constant of the triangle-area inequality.
pub const K_AREA: f64 = 64.0 * 30.0 * std::f64::consts::PI;

/// A Jordan curve split into three edges, sampled `n` times per edge.
///
/// Sample `j·n + k − 1` (for `k = 1..=n`) lies on edge `I_j` at arclength
/// `k·ℓ_j/n` from `p_j`; so `p_{j+1}` is the last sample of `I_j` and every
/// vertex belongs to the edge ending at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTriangle {
    pub edge_lengths: [f64; 3],
    pub samples_per_edge: usize,
    dist: Vec<f64>,
}

impl MetricTriangle {
    /// Builds a triangle from a cross-edge distance function on
    /// `(edge, arclength)` positions. Same-edge distances are set to the
    /// arclength difference; cross entries come from `cross`.
    pub fn from_fn(
        edge_lengths: [f64; 3],
        n: usize,
        cross: impl Fn((usize, f64), (usize, f64)) -> f64,
    ) -> Result<Self> {
        if n < 1 {
            return Err(Error::InconsistentTriangle("need at least one sample per edge".into()));
        }
        if edge_lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::InconsistentTriangle(format!("edge lengths {edge_lengths:?}")));
        }
        let m = 3 * n;
        let mut dist = vec![0.0; m * m];
        let mut tri = Self { edge_lengths, samples_per_edge: n, dist: Vec::new() };
        for a in 0..m {
            for b in a + 1..m {
                let d = match tri.same_edge_arclength(a, b) {
                    Some(d) => d,
                    None => cross(tri.position(a), tri.position(b)),
                };
                dist[a * m + b] = d;
                dist[b * m + a] = d;
            }
        }
        tri.dist = dist;
        tri.validate()?;
        Ok(tri)
    }

    /// Boundary of a planar triangle with the distance of `norm`.
    pub fn from_planar(vertices: [Point; 3], norm: Norm, n: usize) -> Result<Self> {
        let lengths = [0, 1, 2].map(|j| norm.dist(vertices[j], vertices[(j + 1) % 3]));
        let pos = |(e, s): (usize, f64)| {
            geom::lerp(vertices[e], vertices[(e + 1) % 3], s / lengths[e])
        };
        Self::from_fn(lengths, n, |a, b| norm.dist(pos(a), pos(b)))
    }

    /// Flat Euclidean triangle with the given side lengths `ℓ_j = |p_j p_{j+1}|`.
    pub fn euclidean(lengths: [f64; 3], n: usize) -> Result<Self> {
        let [a, b, c] = geom::layout_triangle(lengths[0], lengths[1], lengths[2]);
        Self::from_planar([a, b, c], Norm::L2, n)
    }

    /// The curve with its own arclength metric (a circle of length `ℓ₁+ℓ₂+ℓ₃`).
    pub fn intrinsic(lengths: [f64; 3], n: usize) -> Result<Self> {
        let perimeter: f64 = lengths.iter().sum();
        let t = |(e, s): (usize, f64)| lengths[..e].iter().sum::<f64>() + s;
        Self::from_fn(lengths, n, |a, b| {
            let d = (t(a) - t(b)).abs();
            d.min(perimeter - d)
        })
    }

    pub fn n_samples(&self) -> usize {
        3 * self.samples_per_edge
    }

    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n_samples() + b]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }

    /// Edge assignment of a sample.
    pub fn edge_of(&self, a: usize) -> usize {
        a / self.samples_per_edge
    }

    /// `(edge, arclength from p_edge)`.
    pub fn position(&self, a: usize) -> (usize, f64) {
        let n = self.samples_per_edge;
        let (j, k) = (a / n, a % n + 1);
        let s = if k == n { self.edge_lengths[j] } else { self.edge_lengths[j] * k as f64 / n as f64 };
        (j, s)
    }

    /// Sample index of vertex `p_j`.
    pub fn vertex_index(&self, j: usize) -> usize {
        let n = self.samples_per_edge;
        ((j + 2) % 3) * n + n - 1
    }

    pub fn vertex_indices(&self) -> [usize; 3] {
        [0, 1, 2].map(|j| self.vertex_index(j))
    }

    /// Arclength distance when both samples lie on one closed edge
    /// (a vertex lies on both edges meeting at it).
    fn same_edge_arclength(&self, a: usize, b: usize) -> Option<f64> {
        let (ea, sa) = self.position(a);
        let (eb, sb) = self.position(b);
        if ea == eb {
            return Some((sa - sb).abs());
        }
        // a vertex p_{e+1} (end of edge e) is at arclength 0 on edge e+1
        let n = self.samples_per_edge;
        let is_end = |x: usize| x % n == n - 1;
        if is_end(a) && (ea + 1) % 3 == eb {
            return Some(sb);
        }
        if is_end(b) && (eb + 1) % 3 == ea {
            return Some(sa);
        }
        None
    }

    fn validate(&self) -> Result<()> {
        let m = self.n_samples();
        let scale: f64 = self.edge_lengths.iter().sum();
        for a in 0..m {
            for b in 0..m {
                let d = self.dist(a, b);
                if d.is_nan() || d < 0.0 || !d.is_finite() {
                    return Err(Error::InconsistentTriangle(format!("bad distance {d} at ({a},{b})")));
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    if self.dist(a, c) > self.dist(a, b) + self.dist(b, c) + 1e-9 * scale {
                        return Err(Error::InconsistentTriangle(format!(
                            "triangle inequality fails for samples ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Samples of `Î(x)`: everything except samples interior to x's edge
    /// (both endpoints of the edge are included).
    fn in_hat(&self, x: usize, y: usize) -> bool {
        let n = self.samples_per_edge;
        let e = self.edge_of(x);
        self.edge_of(y) != e || y % n == n - 1 || y == self.vertex_index(e)
    }

    /// `dist(x, Î(x))` as a minimum over samples.
    pub fn dist_to_hat(&self, x: usize) -> f64 {
        let n = self.samples_per_edge;
        if x % n == n - 1 {
            return 0.0;
        }
        (0..self.n_samples())
            .filter(|&y| self.in_hat(x, y))
            .map(|y| self.dist(x, y))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Unit vector at `angle` radians.
fn dir(angle: f64) -> Point {
    [angle.cos(), angle.sin()]
}

/// Spoke direction of edge `j` (0-based): `e^{2πij/3}`.
pub fn spoke_direction(j: usize) -> Point {
    dir(2.0 * std::f64::consts::PI * j as f64 / 3.0)
}

/// Offset direction for samples on `I_j` (0-based): `e^{πi(2j+1)/3}`.
pub fn offset_direction(j: usize) -> Point {
    dir(std::f64::consts::PI * (2 * j + 1) as f64 / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripodModel {
    /// Spoke lengths `|u_j|` (Gromov products at `p_j`).
    pub spokes: [f64; 3],
    pub u: [Point; 3],
}

pub fn build_tripod(tri: &MetricTriangle) -> Result<TripodModel> {
    let v = tri.vertex_indices();
    let d = |a: usize, b: usize| tri.dist(v[a], v[b]);
    let mut spokes = [0.0; 3];
    for j in 0..3 {
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        spokes[j] = gromov_product(d(j1, j), d(j2, j), d(j1, j2))?;
    }
    for j in 0..3 {
        let l = tri.edge_lengths[j];
        let s = spokes[j] + spokes[(j + 1) % 3];
        if (s - l).abs() > 1e-9 * l {
            return Err(Error::InconsistentTriangle(format!(
                "|u_{j}| + |u_{}| = {s} but ℓ = {l}",
                (j + 1) % 3
            )));
        }
    }
    let u = [0, 1, 2].map(|j| geom::scale(spoke_direction(j), spokes[j]));
    Ok(TripodModel { spokes, u })
}

/// Point of the tripod as `(spoke, distance from the centre)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripodPoint {
    pub spoke: usize,
    pub radius: f64,
}

impl TripodPoint {
    pub fn planar(self) -> Point {
        geom::scale(spoke_direction(self.spoke), self.radius)
    }

    /// Intrinsic distance on the tripod.
    pub fn dist(self, other: Self) -> f64 {
        if self.spoke == other.spoke {
            (self.radius - other.radius).abs()
        } else {
            self.radius + other.radius
        }
    }
}

/// Foot `x̄` of the sample at arclength `s` on edge `j`.
pub fn project_to_tripod(model: &TripodModel, edge: usize, s: f64) -> TripodPoint {
    let uj = model.spokes[edge];
    if s <= uj {
        TripodPoint { spoke: edge, radius: uj - s }
    } else {
        TripodPoint { spoke: (edge + 1) % 3, radius: s - uj }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedTriangle {
    pub model: TripodModel,
    /// `F(x)` per sample, in sample order (a closed polygon).
    pub points: Vec<Point>,
    pub feet: Vec<TripodPoint>,
    pub offsets: Vec<f64>,
}

/// The embedding `F` on samples. Fails with `SelfIntersection` when the
/// image polygon is not simple.
pub fn embed_triangle(tri: &MetricTriangle) -> Result<EmbeddedTriangle> {
    let model = build_tripod(tri)?;
    let m = tri.n_samples();
    let mut points = Vec::with_capacity(m);
    let mut feet = Vec::with_capacity(m);
    let mut offsets = Vec::with_capacity(m);
    for x in 0..m {
        let (j, s) = tri.position(x);
        let foot = project_to_tripod(&model, j, s);
        let off = tri.dist_to_hat(x);
        points.push(geom::add(foot.planar(), geom::scale(offset_direction(j), off)));
        feet.push(foot);
        offsets.push(off);
    }
    let scale: f64 = tri.edge_lengths.iter().sum();
    if let Some((a, b)) = geom::first_self_intersection(&points, 1e-12 * scale) {
        return Err(Error::SelfIntersection(a, b));
    }
    Ok(EmbeddedTriangle { model, points, feet, offsets })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    pub max_expand: f64,
    pub max_contract: f64,
}

/// Largest expansion `|F(x)−F(y)|/d(x,y)` and contraction
/// `d(x,y)/|F(x)−F(y)|` over all sample pairs.
pub fn distortion_certificate(tri: &MetricTriangle, emb: &EmbeddedTriangle) -> Result<Distortion> {
    let m = tri.n_samples();
    if emb.points.len() != m {
        return Err(Error::MismatchedSampling("embedding and triangle differ".into()));
    }
    let mut out = Distortion { max_expand: 0.0, max_contract: 0.0 };
    for a in 0..m {
        for b in a + 1..m {
            let d = tri.dist(a, b);
            let e = geom::euclid(emb.points[a], emb.points[b]);
            if d == 0.0 || e == 0.0 {
                return Err(Error::ZeroDistancePair(a, b));
            }
            out.max_expand = out.max_expand.max(e / d);
            out.max_contract = out.max_contract.max(d / e);
        }
    }
    Ok(out)
}

/// Largest `dist_tripod(x̄, ȳ) / d(x, y)`; at most 1 for a 1-Lipschitz foot map.
pub fn projection_lipschitz(tri: &MetricTriangle, emb: &EmbeddedTriangle) -> f64 {
    let m = tri.n_samples();
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            let d = tri.dist(a, b);
            if d > 0.0 {
                worst = worst.max(emb.feet[a].dist(emb.feet[b]) / d);
            }
        }
    }
    worst
}

/// Euclidean area of the region bounded by the embedded polygon.
pub fn region_area(emb: &EmbeddedTriangle) -> Result<f64> {
    let scale = emb.points.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    if geom::first_self_intersection(&emb.points, 1e-12 * scale.max(1e-300)).is_some() {
        return Err(Error::NotJordan);
    }
    Ok(geom::signed_area(&emb.points).abs())
}

/// `H²(Ω) / H²(T)` (0 when both vanish, ∞ when only `H²(T)` does).
pub fn region_area_check(emb: &EmbeddedTriangle, triangle_area_h2: f64) -> Result<f64> {
    let a = region_area(emb)?;
    Ok(if a == 0.0 {
        0.0
    } else if triangle_area_h2 == 0.0 {
        f64::INFINITY
    } else {
        a / triangle_area_h2
    })
}

/// Image-polygon length of each edge divided by the edge length.
pub fn edge_length_ratios(tri: &MetricTriangle, emb: &EmbeddedTriangle) -> [f64; 3] {
    let n = tri.samples_per_edge;
    [0, 1, 2].map(|j| {
        let start = tri.vertex_index(j);
        let mut len = geom::euclid(emb.points[start], emb.points[j * n]);
        for k in 0..n - 1 {
            len += geom::euclid(emb.points[j * n + k], emb.points[j * n + k + 1]);
        }
        len / tri.edge_lengths[j]
    })
}

/// Random metric triangle: side lengths drawn from `[0.2, 1]` (strict
/// triangle inequality), cross distances `λ·arc + (1−λ)·chord` with a fresh
/// `λ ∈ [0,1]` per pair, where `arc` is the boundary arc distance and
/// `chord` the Euclidean distance on the flat triangle with the same sides;
/// finally closed under shortest paths so the result is a metric.
pub fn random_triangle<R: Rng>(rng: &mut R, n: usize) -> Result<MetricTriangle> {
    let lengths = loop {
        let l = [rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0)];
        let p = l[0] + l[1] + l[2];
        if l.iter().all(|&x| x < 0.5 * p * (1.0 - 1e-3)) {
            break l;
        }
    };
    let flat = MetricTriangle::euclidean(lengths, n)?;
    let perimeter: f64 = lengths.iter().sum();
    let m = 3 * n;
    let mut d = vec![0.0; m * m];
    for a in 0..m {
        for b in a + 1..m {
            let (ea, sa) = flat.position(a);
            let (eb, sb) = flat.position(b);
            let ta = lengths[..ea].iter().sum::<f64>() + sa;
            let tb = lengths[..eb].iter().sum::<f64>() + sb;
            let arc = (ta - tb).abs().min(perimeter - (ta - tb).abs());
            let lambda: f64 = rng.gen();
            let v = lambda * arc + (1.0 - lambda) * flat.dist(a, b);
            d[a * m + b] = v;
            d[b * m + a] = v;
        }
    }
    MetricTriangle::closed(lengths, n, d)
}

impl MetricTriangle {
    /// Closes a raw `3n × 3n` matrix of cross distances under shortest paths
    /// (same-edge entries are replaced by arclength first).
    pub fn closed(lengths: [f64; 3], n: usize, mut d: Vec<f64>) -> Result<Self> {
        let m = 3 * n;
        if d.len() != m * m {
            return Err(Error::MismatchedSampling(format!("matrix of {} for {m} samples", d.len())));
        }
        let probe = Self { edge_lengths: lengths, samples_per_edge: n, dist: Vec::new() };
        for a in 0..m {
            for b in 0..m {
                if let Some(s) = probe.same_edge_arclength(a, b) {
                    d[a * m + b] = s;
                } else if a == b {
                    d[a * m + b] = 0.0;
                }
            }
        }
        for k in 0..m {
            for a in 0..m {
                let dak = d[a * m + k];
                for b in 0..m {
                    let via = dak + d[k * m + b];
                    if via < d[a * m + b] {
                        d[a * m + b] = via;
                    }
                }
            }
        }
        let idx = |(e, s): (usize, f64)| index_of(&probe, (e, s));
        Self::from_fn(lengths, n, |x, y| d[idx(x) * m + idx(y)])
    }

    /// Triangle whose cross-edge distances are the tripod distances of the
    /// feet plus `eta`, closed under shortest paths. Small `eta` approaches
    /// the tripod itself, where the embedding region collapses.
    pub fn tripod_like(lengths: [f64; 3], n: usize, eta: f64) -> Result<Self> {
        let probe = Self { edge_lengths: lengths, samples_per_edge: n, dist: Vec::new() };
        let p = |j: usize| 0.5 * (lengths[j] + lengths[(j + 2) % 3] - lengths[(j + 1) % 3]);
        let model = TripodModel { spokes: [p(0), p(1), p(2)], u: [[0.0; 2]; 3] };
        let m = 3 * n;
        let mut d = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    let (ea, sa) = probe.position(a);
                    let (eb, sb) = probe.position(b);
                    let fa = project_to_tripod(&model, ea, sa);
                    let fb = project_to_tripod(&model, eb, sb);
                    d[a * m + b] = fa.dist(fb) + eta;
                }
            }
        }
        Self::closed(lengths, n, d)
    }
}

fn index_of(tri: &MetricTriangle, (e, s): (usize, f64)) -> usize {
    let n = tri.samples_per_edge;
    let k = (s / tri.edge_lengths[e] * n as f64).round() as usize;
    if k == 0 {
        tri.vertex_index(e)
    } else {
        e * n + k - 1
    }
}

/// SVG drawing of the embedded polygon and the tripod.
pub fn to_svg(emb: &EmbeddedTriangle) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in emb.points.iter().chain(emb.model.u.iter()) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let size = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let pad = 0.05 * size;
    let tx = |p: Point| [(p[0] - lo[0] + pad) / size * 500.0, (hi[1] - p[1] + pad) / size * 500.0];
    let poly: Vec<String> = emb
        .points
        .iter()
        .chain(std::iter::once(&emb.points[0]))
        .map(|&p| {
            let q = tx(p);
            format!("{:.3},{:.3}", q[0], q[1])
        })
        .collect();
    let o = tx([0.0, 0.0]);
    let spokes: String = emb
        .model
        .u
        .iter()
        .map(|&u| {
            let q = tx(u);
            format!(
                "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"gray\"/>",
                o[0], o[1], q[0], q[1]
            )
        })
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"550\" height=\"550\">{spokes}<polyline points=\"{}\" fill=\"none\" stroke=\"black\"/></svg>\n",
        poly.join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equilateral_spokes_and_midpoint() {
        let t = MetricTriangle::intrinsic([1.0, 1.0, 1.0], 4).unwrap();
        let m = build_tripod(&t).unwrap();
        for s in m.spokes {
            assert!((s - 0.5).abs() < 1e-12);
        }
        let mid = project_to_tripod(&m, 0, 0.5);
        assert!(mid.radius.abs() < 1e-12);
        let e = embed_triangle(&t).unwrap();
        // midpoint of I_1 is sample 1 (k = 2 of 4)
        assert!((e.offsets[1] - 0.5).abs() < 1e-12);
        let want = geom::scale(offset_direction(0), 0.5);
        assert!(geom::euclid(e.points[1], want) < 1e-12);
        for j in 0..3 {
            assert!(geom::euclid(e.points[t.vertex_index(j)], m.u[j]) < 1e-12);
        }
        let d = distortion_certificate(&t, &e).unwrap();
        assert!(d.max_expand <= 4.0 && d.max_contract <= 4.0, "{d:?}");
        assert!(projection_lipschitz(&t, &e) <= 1.0 + 1e-12);
        let flat = MetricTriangle::euclidean([1.0, 1.0, 1.0], 8).unwrap();
        let e = embed_triangle(&flat).unwrap();
        let d = distortion_certificate(&flat, &e).unwrap();
        assert!(d.max_expand <= 4.0 && d.max_contract <= 4.0, "{d:?}");
    }

    #[test]
    fn right_triangle_spokes() {
        // legs 3 and 4: ℓ = (3, 5, 4) from p1 (right angle) around
        let t = MetricTriangle::euclidean([3.0, 5.0, 4.0], 6).unwrap();
        let m = build_tripod(&t).unwrap();
        // hand values: (3+4−5)/2, (3+5−4)/2, (5+4−3)/2
        let want = [1.0, 2.0, 3.0];
        for j in 0..3 {
            assert!((m.spokes[j] - want[j]).abs() < 1e-12);
        }
        let e = embed_triangle(&t).unwrap();
        let d = distortion_certificate(&t, &e).unwrap();
        assert!(d.max_expand <= 4.0 && d.max_contract <= 4.0);
    }

    #[test]
    fn degenerate_spoke_vanishes() {
        let t = MetricTriangle::from_fn([1.0, 1.0, 2.0], 1, |_, _| unreachable!()).unwrap();
        let m = build_tripod(&t).unwrap();
        // d(p1,p2) = d(p1,p3) + d(p3,p2) makes the spoke at p3 vanish
        assert!(m.spokes[1].abs() < 1e-15 || m.spokes[2].abs() < 1e-15);
    }

    #[test]
    fn foot_case_split() {
        let m = TripodModel { spokes: [0.3, 0.5, 0.7], u: [[0.0; 2]; 3] };
        assert_eq!(project_to_tripod(&m, 0, 0.1), TripodPoint { spoke: 0, radius: 0.3 - 0.1 });
        let far = project_to_tripod(&m, 0, 0.6);
        assert_eq!(far.spoke, 1);
        assert!((far.radius - 0.3).abs() < 1e-15);
    }

    #[test]
    fn near_degenerate_triangle() {
        let t = MetricTriangle::euclidean([3.0, 4.0, 6.999], 12).unwrap();
        let e = embed_triangle(&t).unwrap();
        let d = distortion_certificate(&t, &e).unwrap();
        assert!(d.max_expand <= 4.0 && d.max_contract <= 4.0, "{d:?}");
    }

    #[test]
    fn region_ratio_flat_triangle() {
        let t = MetricTriangle::euclidean([1.0, 1.0, 1.0], 8).unwrap();
        let e = embed_triangle(&t).unwrap();
        let area = 3f64.sqrt() / 4.0;
        let r = region_area_check(&e, area).unwrap();
        assert!(r > 0.0 && r <= K_AREA);
    }

    #[test]
    fn random_triangles_are_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = random_triangle(&mut rng, 6).unwrap();
            let m = build_tripod(&t).unwrap();
            for j in 0..3 {
                let l = t.edge_lengths[j];
                assert!((m.spokes[j] + m.spokes[(j + 1) % 3] - l).abs() <= 1e-9 * l);
            }
        }
    }

    #[test]
    fn tripod_like_triangle_has_thin_region() {
        let t = MetricTriangle::tripod_like([1.0, 1.0, 1.0], 8, 1e-3).unwrap();
        let e = embed_triangle(&t).unwrap();
        let a = region_area(&e).unwrap();
        let flat = region_area(&embed_triangle(&MetricTriangle::euclidean([1.0; 3], 8).unwrap()).unwrap()).unwrap();
        assert!(a < 0.05 * flat, "{a} vs {flat}");
    }

    #[test]
    fn svg_is_wellformed() {
        let t = MetricTriangle::euclidean([1.0, 1.0, 1.0], 3).unwrap();
        let s = to_svg(&embed_triangle(&t).unwrap());
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
    }
}
