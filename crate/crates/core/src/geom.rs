//! Planar geometry helpers: norms, polygons, ear clipping and geodesics
//! inside simple polygons.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

/// A norm on the plane used to measure lengths of planar segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    Linf,
}

impl Norm {
    pub fn length(self, v: Point) -> f64 {
        match self {
            Norm::L2 => v[0].hypot(v[1]),
            Norm::Linf => v[0].abs().max(v[1].abs()),
        }
    }

    pub fn dist(self, a: Point, b: Point) -> f64 {
        self.length(sub(a, b))
    }

    /// Dual norm, used for Lipschitz constants of linear functions.
    pub fn dual_length(self, v: Point) -> f64 {
        match self {
            Norm::L2 => v[0].hypot(v[1]),
            Norm::Linf => v[0].abs() + v[1].abs(),
        }
    }

    /// Hausdorff 2-measure of a unit of Lebesgue area under this norm.
    pub fn area_weight(self) -> f64 {
        match self {
            Norm::L2 => 1.0,
            Norm::Linf => std::f64::consts::FRAC_PI_4,
        }
    }
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

#[inline]
pub fn euclid(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Signed shoelace area (positive for counter-clockwise polygons).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * s
}

pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * orient(a, b, c).abs()
}

/// Area of a triangle from its side lengths (Heron, stable form).
pub fn heron(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * p.max(0.0).sqrt()
}

/// Place a triangle with side lengths `ab`, `bc`, `ca` in the plane with
/// `a` at the origin and `b` on the positive x-axis.
pub fn layout_triangle(ab: f64, bc: f64, ca: f64) -> [Point; 3] {
    let x = if ab > 0.0 { (ab * ab + ca * ca - bc * bc) / (2.0 * ab) } else { 0.0 };
    let y = (ca * ca - x * x).max(0.0).sqrt();
    [[0.0, 0.0], [ab, 0.0], [x, y]]
}

/// Proper or touching intersection test for closed segments `pq` and `rs`.
pub fn segments_intersect(p: Point, q: Point, r: Point, s: Point, eps: f64) -> bool {
    let d1 = orient(r, s, p);
    let d2 = orient(r, s, q);
    let d3 = orient(p, q, r);
    let d4 = orient(p, q, s);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, d: f64| {
        d.abs() <= eps
            && c[0] >= a[0].min(b[0]) - eps
            && c[0] <= a[0].max(b[0]) + eps
            && c[1] >= a[1].min(b[1]) - eps
            && c[1] <= a[1].max(b[1]) + eps
    };
    on(r, s, p, d1) || on(r, s, q, d2) || on(p, q, r, d3) || on(p, q, s, d4)
}

/// Returns the first pair of non-adjacent polygon edges that intersect.
pub fn first_self_intersection(poly: &[Point], eps: f64) -> Option<(usize, usize)> {
    let n = poly.len();
    if n < 4 {
        return None;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d, eps) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Closed point-in-polygon test (boundary counts as inside within `eps`).
pub fn point_in_polygon(poly: &[Point], p: Point, eps: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if dist_point_segment(p, a, b) <= eps {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn dist_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return euclid(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    euclid(p, lerp(a, b, t))
}

pub fn point_in_triangle(p: Point, a: Point, b: Point, c: Point, eps: f64) -> bool {
    let d1 = orient(a, b, p);
    let d2 = orient(b, c, p);
    let d3 = orient(c, a, p);
    d1 >= -eps && d2 >= -eps && d3 >= -eps
}

/// Relative length deficit `(|ab| + |bc| − |ac|) / perimeter` of the path
/// `a → b → c`; zero exactly when `b` lies on the segment `ac`.
pub fn length_deficit(a: Point, b: Point, c: Point) -> f64 {
    let (x, y, z) = (euclid(a, b), euclid(b, c), euclid(a, c));
    let per = x + y + z;
    if per == 0.0 {
        0.0
    } else {
        (x + y - z) / per
    }
}

/// Vertices whose length deficit is at most this are treated as straight
/// by [`ear_clip`]. Faces above it pass the strict triangle inequality
/// of mesh validation with room to spare.
pub const STRAIGHT_DEFICIT: f64 = 1e-9;

/// Ear-clipping triangulation of a simple counter-clockwise polygon.
/// Returns triangles as index triples into `poly`. Straight vertices (on the
/// segment between their neighbours) are clipped away first and then
/// inserted by splitting the triangle on their side, so no triangle is flat.
pub fn ear_clip(poly: &[Point]) -> Option<Vec<[usize; 3]>> {
    let n = poly.len();
    let mut keep: Vec<usize> = (0..n).collect();
    let mut straight = Vec::new();
    loop {
        let m = keep.len();
        if m <= 3 {
            break;
        }
        let found = (0..m).find(|&k| {
            let (a, b, c) = (poly[keep[(k + m - 1) % m]], poly[keep[k]], poly[keep[(k + 1) % m]]);
            length_deficit(a, b, c) <= STRAIGHT_DEFICIT
        });
        match found {
            Some(k) => straight.push(keep.remove(k)),
            None => break,
        }
    }
    let reduced: Vec<Point> = keep.iter().map(|&i| poly[i]).collect();
    let (core, inner) = ear_clip_core(&reduced)?;
    let mut tris: Vec<[usize; 3]> = core.into_iter().map(|t| t.map(|k| keep[k])).collect();
    let order: Vec<usize> = inner.iter().rev().map(|&k| keep[k]).chain(straight.iter().rev().copied()).collect();
    for v in order {
        let p = poly[v];
        // the triangle side that v deviates least from
        let mut hit: Option<(usize, usize, f64)> = None;
        for (ti, t) in tris.iter().enumerate() {
            for k in 0..3 {
                if t[k] == v || t[(k + 1) % 3] == v {
                    continue;
                }
                let (a, b) = (poly[t[k]], poly[t[(k + 1) % 3]]);
                let d = length_deficit(a, p, b);
                if hit.is_none_or(|h| d < h.2) {
                    hit = Some((ti, k, d));
                }
            }
        }
        let (ti, k, d) = hit?;
        if d > 1e3 * STRAIGHT_DEFICIT {
            return None;
        }
        let t = tris[ti];
        let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
        tris[ti] = [a, v, c];
        tris.push([v, b, c]);
    }
    Some(tris)
}

/// Ear clipping without flat ears. Returns the triangles and the vertices
/// set aside as straight, in removal order.
fn ear_clip_core(poly: &[Point]) -> Option<(Vec<[usize; 3]>, Vec<usize>)> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    let scale_len = poly
        .iter()
        .fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
        .max(1e-300);
    let eps = 1e-12 * scale_len * scale_len;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let mut straight = Vec::new();
    let mut guard = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        // Prefer the ear with the best shape to keep triangles well conditioned.
        let mut best: Option<(usize, f64)> = None;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            let o = orient(a, b, c);
            if o <= eps || length_deficit(a, b, c) <= STRAIGHT_DEFICIT {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ia && j != ib && j != ic && point_in_triangle(poly[j], a, b, c, -eps)
            });
            if blocked {
                continue;
            }
            let l2 = [euclid(a, b), euclid(b, c), euclid(c, a)]
                .iter()
                .map(|x| x * x)
                .sum::<f64>();
            let quality = o / l2;
            if best.is_none_or(|(_, q)| quality > q) {
                best = Some((k, quality));
            }
        }
        if let Some((k, _)) = best {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            tris.push([ia, ib, ic]);
            idx.remove(k);
            clipped = true;
        }
        if !clipped {
            // only flat ears are left: set aside a vertex lying between its
            // neighbours, the caller splits it back in
            let k = (0..m).find(|&k| {
                let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
                length_deficit(poly[ia], poly[ib], poly[ic]) <= STRAIGHT_DEFICIT
            })?;
            straight.push(idx.remove(k));
        }
        guard += 1;
        if guard > 4 * n {
            return None;
        }
    }
    // the last three may be collinear once the rest is covered
    match (0..3).find(|&k| length_deficit(poly[idx[(k + 2) % 3]], poly[idx[k]], poly[idx[(k + 1) % 3]]) <= STRAIGHT_DEFICIT) {
        Some(k) => straight.push(idx[k]),
        None => tris.push([idx[0], idx[1], idx[2]]),
    }
    Some((tris, straight))
}

/// Whether the closed segment between polygon vertices `i` and `j` lies in
/// the closed polygon. Uses edge crossings plus midpoint containment
/// between consecutive boundary contacts.
pub fn polygon_visible(poly: &[Point], i: usize, j: usize, eps: f64) -> bool {
    let n = poly.len();
    if i == j {
        return true;
    }
    if (i + 1) % n == j || (j + 1) % n == i {
        return true;
    }
    let (p, q) = (poly[i], poly[j]);
    let len = euclid(p, q);
    if len == 0.0 {
        return true;
    }
    let mut ts = vec![0.0, 1.0];
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        let d1 = orient(p, q, a);
        let d2 = orient(p, q, b);
        let d3 = orient(a, b, p);
        let d4 = orient(a, b, q);
        let tol = eps * len;
        if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
            && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
        {
            return false;
        }
        for v in [a, b] {
            if dist_point_segment(v, p, q) <= eps * len.max(1.0) {
                let dir = sub(q, p);
                let t = ((v[0] - p[0]) * dir[0] + (v[1] - p[1]) * dir[1]) / (len * len);
                ts.push(t.clamp(0.0, 1.0));
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    ts.windows(2).all(|w| {
        let m = lerp(p, q, 0.5 * (w[0] + w[1]));
        point_in_polygon(poly, m, eps * len.max(1.0))
    })
}

/// Lengths of shortest paths inside a closed simple polygon between all
/// pairs of its vertices (visibility graph plus Dijkstra).
pub fn polygon_geodesics(poly: &[Point]) -> Vec<Vec<f64>> {
    let n = poly.len();
    let scale_len = poly
        .iter()
        .fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
        .max(1e-300);
    let eps = 1e-10 * scale_len;
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if polygon_visible(poly, i, j, eps) {
                let w = euclid(poly[i], poly[j]);
                adj[i].push((j, w));
                adj[j].push((i, w));
            }
        }
    }
    (0..n)
        .map(|s| crate::graph::dijkstra(&adj, &[s]).dist)
        .collect()
}

/// Whether segment `pq` is covered by the union of the given triangles
/// (within a relative tolerance). Parametric clipping per triangle.
pub fn segment_covered(p: Point, q: Point, tris: &[[Point; 3]], eps: f64) -> bool {
    let dir = sub(q, p);
    let len = euclid(p, q);
    if len == 0.0 {
        return tris.iter().any(|t| point_in_triangle(p, t[0], t[1], t[2], eps));
    }
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for t in tris {
        let (a, b, c) = (t[0], t[1], t[2]);
        let o = orient(a, b, c);
        if o.abs() < 1e-300 {
            continue;
        }
        let verts = if o > 0.0 { [a, b, c] } else { [a, c, b] };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut empty = false;
        for k in 0..3 {
            let (u, v) = (verts[k], verts[(k + 1) % 3]);
            let e = sub(v, u);
            let elen = e[0].hypot(e[1]).max(1e-300);
            // inside: cross(e, x - u) >= -eps * |e|
            let f0 = cross(e, sub(p, u)) + eps * elen * len;
            let fd = cross(e, dir);
            if fd.abs() < 1e-300 {
                if f0 < 0.0 {
                    empty = true;
                    break;
                }
            } else {
                let t = -f0 / fd;
                if fd > 0.0 {
                    lo = lo.max(t);
                } else {
                    hi = hi.min(t);
                }
            }
        }
        if !empty && hi >= lo {
            intervals.push((lo, hi));
        }
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = 0.0;
    for (lo, hi) in intervals {
        if lo > reach + 1e-9 {
            return false;
        }
        reach = f64::max(reach, hi);
    }
    reach >= 1.0 - 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shoelace_unit_square() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!((signed_area(&sq) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn heron_matches_shoelace() {
        let (a, b, c) = ([0.0, 0.0], [3.0, 0.0], [0.0, 4.0]);
        let h = heron(euclid(a, b), euclid(b, c), euclid(c, a));
        assert!((h - 6.0).abs() < 1e-12);
        let l = layout_triangle(3.0, 5.0, 4.0);
        assert!((triangle_area(l[0], l[1], l[2]) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn ear_clip_l_shape() {
        let l = [
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ];
        let tris = ear_clip(&l).unwrap();
        assert_eq!(tris.len(), 4);
        let area: f64 = tris.iter().map(|t| triangle_area(l[t[0]], l[t[1]], l[t[2]])).sum();
        assert!((area - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ear_clip_pocket_below_a_chord() {
        // clipping the pocket at (1,-1) leaves (0,0), (2,0), (4,0) collinear
        let p = [[0.0, 0.0], [1.0, -1.0], [2.0, 0.0], [4.0, 0.0], [2.0, 3.0]];
        let tris = ear_clip(&p).unwrap();
        let area: f64 = tris.iter().map(|t| triangle_area(p[t[0]], p[t[1]], p[t[2]])).sum();
        assert!((area - signed_area(&p)).abs() < 1e-12);
        assert!(tris.iter().all(|t| length_deficit(p[t[0]], p[t[1]], p[t[2]]) > STRAIGHT_DEFICIT));
        assert!((0..p.len()).all(|v| tris.iter().any(|t| t.contains(&v))));
    }

    #[test]
    fn geodesic_around_reflex_corner() {
        let l = [
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ];
        let g = polygon_geodesics(&l);
        // (2,1) to (1,2) must bend at the reflex vertex (1,1).
        assert!((g[2][4] - 2.0).abs() < 1e-12);
        // (2,0) to (0,2) passes through (1,1) exactly.
        assert!((g[1][5] - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn self_intersection_detected() {
        let bow = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(first_self_intersection(&bow, 1e-12).is_some());
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(first_self_intersection(&sq, 1e-12).is_none());
    }

    #[test]
    fn coverage_by_triangles() {
        let tris = [
            [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
            [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        ];
        assert!(segment_covered([0.0, 0.0], [1.0, 1.0], &tris, 1e-12));
        assert!(segment_covered([0.0, 1.0], [1.0, 0.0], &tris, 1e-12));
        assert!(!segment_covered([0.0, 0.0], [2.0, 1.0], &tris, 1e-12));
    }
}
