//! Flat polyhedral fillings of metric triangles built from the tripod
//! embedding, and an independent re-verification of their four properties.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Norm, Point};
use crate::metric::MetricSurfaceMesh;
use crate::tripod::{embed_triangle, edge_length_ratios, MetricTriangle, K_AREA};

/// Global scale applied to the embedded region (the bi-Lipschitz constant).
pub const FILLING_SCALE: f64 = 4.0;

/// Default bound for the diameter and area ratios.
pub const L_CONFIG: f64 = K_AREA * 16.0;

/// Relative tolerance of the cross-check between a report and its
/// recomputation.
pub const VERIFY_TOL: f64 = 1e-6;

/// A boundary vertex of the filling and the point of `∂T` it is glued to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub vertex: usize,
    pub edge: usize,
    /// Arclength on the triangle edge, measured from `p_edge`.
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct PolyhedralDisk {
    /// Flat mesh; vertex `i < 3n` is the image of triangle sample `i`.
    pub mesh: MetricSurfaceMesh,
    pub boundary_correspondence: Vec<BoundaryPoint>,
    pub scale: f64,
    pub samples_per_edge: usize,
    /// Intrinsic distances `d_S` between the `3n` sample vertices.
    pub sample_dist: Vec<f64>,
}

impl PolyhedralDisk {
    pub fn n_samples(&self) -> usize {
        3 * self.samples_per_edge
    }

    pub fn sample_dist(&self, a: usize, b: usize) -> f64 {
        self.sample_dist[a * self.n_samples() + b]
    }

    /// Mesh JSON with an extra `boundary_correspondence` section.
    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(crate::mesh_io::MeshFile::from_mesh(&self.mesh))?;
        v["boundary_correspondence"] = serde_json::to_value(&self.boundary_correspondence)?;
        v["scale"] = self.scale.into();
        v["samples_per_edge"] = self.samples_per_edge.into();
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillingReport {
    pub diam_ratio: f64,
    pub area_ratio: f64,
    pub boundary_length_ratios: [f64; 3],
    pub min_domination: f64,
    /// Set when `H²(S)` is below 1% of `(4·diam(∂T))²`: the region has
    /// collapsed toward the tripod.
    pub near_zero_area: bool,
}

/// One uniform midpoint refinement step of a triangle list.
fn refine(coords: &mut Vec<Point>, faces: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, coords: &mut Vec<Point>| {
        *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
            coords.push(geom::lerp(coords[a], coords[b], 0.5));
            coords.len() - 1
        })
    };
    let mut out = Vec::with_capacity(4 * faces.len());
    for &[a, b, c] in faces {
        let ab = midpoint(a, b, coords);
        let bc = midpoint(b, c, coords);
        let ca = midpoint(c, a, coords);
        out.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    out
}

/// Fills `tri` by the ×4 scaled tripod-embedding region, ear-clipped and
/// refined `density` times. `h2_t` is the area of the triangle.
pub fn fill_triangle(
    tri: &MetricTriangle,
    h2_t: f64,
    density: usize,
) -> Result<(PolyhedralDisk, FillingReport)> {
    let emb = embed_triangle(tri).map_err(|e| Error::EmbeddingFailed(e.to_string()))?;
    let poly: Vec<Point> = emb.points.iter().map(|&p| geom::scale(p, FILLING_SCALE)).collect();
    let m = poly.len();
    let mut faces = geom::ear_clip(&poly)
        .ok_or_else(|| Error::EmbeddingFailed("region could not be triangulated".into()))?;
    let mut coords = poly.clone();
    for _ in 0..density {
        faces = refine(&mut coords, &faces);
    }
    let mesh = MetricSurfaceMesh::from_coords(coords, faces, Norm::L2)
        .map_err(|e| Error::EmbeddingFailed(e.to_string()))?;
    let boundary_correspondence = boundary_points(tri, &mesh);
    let geo = geom::polygon_geodesics(&poly);
    let sample_dist: Vec<f64> = geo.iter().flatten().copied().collect();
    let disk = PolyhedralDisk {
        mesh,
        boundary_correspondence,
        scale: FILLING_SCALE,
        samples_per_edge: tri.samples_per_edge,
        sample_dist,
    };

    let mut diam_s: f64 = 0.0;
    let mut diam_t: f64 = 0.0;
    let mut min_dom = f64::INFINITY;
    let mut worst = (0, 0);
    for a in 0..m {
        for b in a + 1..m {
            let ds = disk.sample_dist(a, b);
            let dt = tri.dist(a, b);
            diam_s = diam_s.max(ds);
            diam_t = diam_t.max(dt);
            if dt > 0.0 && ds / dt < min_dom {
                min_dom = ds / dt;
                worst = (a, b);
            }
        }
    }
    let scale = tri.edge_lengths.iter().sum::<f64>();
    if min_dom < 1.0 - 1e-9 * scale {
        let (a, b) = worst;
        return Err(Error::DominationFailed(a, b, disk.sample_dist(a, b), tri.dist(a, b)));
    }
    let area = disk.mesh.total_area();
    let report = FillingReport {
        diam_ratio: diam_s / diam_t,
        area_ratio: ratio(area, h2_t),
        boundary_length_ratios: edge_length_ratios(tri, &emb).map(|r| r * FILLING_SCALE),
        min_domination: min_dom,
        near_zero_area: area < 1e-2 * (FILLING_SCALE * diam_t).powi(2),
    };
    Ok((disk, report))
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

/// Boundary vertices of the mesh with their triangle arclength: samples
/// exactly, refinement vertices by linear interpolation along their polygon
/// side.
fn boundary_points(tri: &MetricTriangle, mesh: &MetricSurfaceMesh) -> Vec<BoundaryPoint> {
    let m = tri.n_samples();
    let coords = mesh.coords().expect("filling meshes carry coordinates");
    let mut out: Vec<BoundaryPoint> = (0..m)
        .map(|i| {
            let (edge, t) = tri.position(i);
            BoundaryPoint { vertex: i, edge, t }
        })
        .collect();
    let on_side = |v: usize| -> Option<BoundaryPoint> {
        let p = coords[v];
        for i in 0..m {
            let (a, b) = (if i == 0 { m - 1 } else { i - 1 }, i);
            let (pa, pb) = (coords[a], coords[b]);
            let len = geom::euclid(pa, pb);
            if geom::dist_point_segment(p, pa, pb) <= 1e-9 * len {
                let lam = geom::euclid(pa, p) / len;
                let (edge, tb) = tri.position(b);
                let ta = if tri.edge_of(a) == edge { tri.position(a).1 } else { 0.0 };
                return Some(BoundaryPoint { vertex: v, edge, t: ta + lam * (tb - ta) });
            }
        }
        None
    };
    for loop_ in mesh.boundary() {
        for &v in loop_ {
            if v >= m {
                if let Some(bp) = on_side(v) {
                    out.push(bp);
                }
            }
        }
    }
    out
}

/// One recomputed property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemCheck {
    pub item: String,
    pub reported: f64,
    pub recomputed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillingVerification {
    pub items: Vec<ItemCheck>,
    pub topology_ok: bool,
}

impl FillingVerification {
    pub fn pass(&self) -> bool {
        self.topology_ok && self.items.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.items.iter().filter(|c| !c.pass).map(|c| c.item.as_str()).collect()
    }
}

/// Recomputes the four ratios of a filling from the mesh alone: `d_S` by
/// Floyd–Warshall over mesh edges (with their stored lengths) plus every
/// chord between sample vertices that lies inside the triangulated region,
/// boundary lengths from the mesh boundary edges.
pub fn verify_filling(
    disk: &PolyhedralDisk,
    tri: &MetricTriangle,
    report: &FillingReport,
    h2_t: f64,
) -> Result<FillingVerification> {
    let m = tri.n_samples();
    if disk.n_samples() != m || disk.mesh.n_vertices() < m {
        return Err(Error::MismatchedSampling(format!(
            "disk has {} samples, triangle {m}",
            disk.n_samples()
        )));
    }
    let mesh = &disk.mesh;
    let coords = mesh.coords().ok_or_else(|| Error::MismatchedSampling("no coordinates".into()))?;
    let nv = mesh.n_vertices();
    let mut d = vec![f64::INFINITY; nv * nv];
    for v in 0..nv {
        d[v * nv + v] = 0.0;
    }
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let l = mesh.edge_length(e);
        d[a * nv + b] = d[a * nv + b].min(l);
        d[b * nv + a] = d[b * nv + a].min(l);
    }
    let tris: Vec<[Point; 3]> = (0..mesh.n_faces()).map(|f| mesh.face_points(f)).collect();
    let size = coords.iter().fold(0.0f64, |s, p| s.max(p[0].abs()).max(p[1].abs()));
    for a in 0..m {
        for b in a + 1..m {
            if geom::segment_covered(coords[a], coords[b], &tris, 1e-9 * size) {
                let l = geom::euclid(coords[a], coords[b]);
                d[a * nv + b] = d[a * nv + b].min(l);
                d[b * nv + a] = d[b * nv + a].min(l);
            }
        }
    }
    for k in 0..nv {
        for a in 0..nv {
            let dak = d[a * nv + k];
            if dak.is_infinite() {
                continue;
            }
            for b in 0..nv {
                let via = dak + d[k * nv + b];
                if via < d[a * nv + b] {
                    d[a * nv + b] = via;
                }
            }
        }
    }
    let (mut diam_s, mut diam_t, mut min_dom) = (0.0f64, 0.0f64, f64::INFINITY);
    for a in 0..m {
        for b in a + 1..m {
            let (ds, dt) = (d[a * nv + b], tri.dist(a, b));
            diam_s = diam_s.max(ds);
            diam_t = diam_t.max(dt);
            if dt > 0.0 {
                min_dom = min_dom.min(ds / dt);
            }
        }
    }
    // boundary arcs: walk the boundary loop and charge each edge to the
    // triangle edge of its far endpoint
    let edge_of_vertex: HashMap<usize, usize> =
        disk.boundary_correspondence.iter().map(|bp| (bp.vertex, bp.edge)).collect();
    let mut arc = [0.0; 3];
    let loops = mesh.boundary();
    let topology_ok = loops.len() == 1 && mesh.euler_characteristic() == 1;
    for lp in loops {
        for i in 0..lp.len() {
            let (a, b) = (lp[i], lp[(i + 1) % lp.len()]);
            let e = mesh.edge_between(a, b).expect("boundary loop follows mesh edges");
            let (ea, eb) = (edge_of_vertex.get(&a), edge_of_vertex.get(&b));
            // the edge lies on the arc shared by both endpoints (a vertex
            // sample ends its own arc, so prefer the non-vertex label)
            let j = match (ea, eb) {
                (Some(&x), Some(&y)) if x == y => x,
                (Some(&x), Some(&y)) => {
                    if is_vertex_sample(a, tri) { y } else { x }
                }
                (Some(&x), None) | (None, Some(&x)) => x,
                (None, None) => continue,
            };
            arc[j] += mesh.edge_length(e);
        }
    }
    let lengths = [0, 1, 2].map(|j| arc[j] / tri.edge_lengths[j]);
    let area = ratio(mesh.total_area(), h2_t);
    let close = |x: f64, y: f64| {
        (x == y) || (x - y).abs() <= VERIFY_TOL * x.abs().max(y.abs()).max(1e-300)
    };
    let mut items = vec![
        ItemCheck {
            item: "diameter".into(),
            reported: report.diam_ratio,
            recomputed: diam_s / diam_t,
            pass: false,
        },
        ItemCheck { item: "area".into(), reported: report.area_ratio, recomputed: area, pass: false },
    ];
    for j in 0..3 {
        items.push(ItemCheck {
            item: format!("boundary_length_{j}"),
            reported: report.boundary_length_ratios[j],
            recomputed: lengths[j],
            pass: false,
        });
    }
    items.push(ItemCheck {
        item: "domination".into(),
        reported: report.min_domination,
        recomputed: min_dom,
        pass: false,
    });
    for c in &mut items {
        let bound_ok = match c.item.as_str() {
            "diameter" | "area" => c.recomputed <= L_CONFIG,
            "domination" => c.recomputed >= 1.0 - 1e-9,
            _ => (1.0 - 1e-9..=16.0 + 1e-9).contains(&c.recomputed),
        };
        c.pass = bound_ok && close(c.reported, c.recomputed);
    }
    Ok(FillingVerification { items, topology_ok })
}

fn is_vertex_sample(v: usize, tri: &MetricTriangle) -> bool {
    v < tri.n_samples() && v % tri.samples_per_edge == tri.samples_per_edge - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(l: [f64; 3], n: usize) -> (MetricTriangle, f64) {
        (MetricTriangle::euclidean(l, n).unwrap(), geom::heron(l[0], l[1], l[2]))
    }

    #[test]
    fn equilateral_filling_passes_all_items() {
        let (t, a) = flat([1.0; 3], 8);
        let (disk, rep) = fill_triangle(&t, a, 0).unwrap();
        assert!(rep.min_domination >= 1.0);
        for r in rep.boundary_length_ratios {
            assert!((1.0..=16.0).contains(&r), "{r}");
        }
        assert!(rep.diam_ratio <= L_CONFIG && rep.area_ratio <= L_CONFIG);
        assert_eq!(disk.mesh.euler_characteristic(), 1);
        let v = verify_filling(&disk, &t, &rep, a).unwrap();
        assert!(v.pass(), "{v:?}");
    }

    #[test]
    fn refinement_keeps_area_and_verification() {
        let (t, a) = flat([3.0, 4.0, 6.99], 6);
        let (d0, r0) = fill_triangle(&t, a, 0).unwrap();
        let (d1, r1) = fill_triangle(&t, a, 1).unwrap();
        assert!(r1.area_ratio <= r0.area_ratio * (1.0 + 1e-12));
        assert!(r0.area_ratio <= L_CONFIG);
        assert!(d1.mesh.n_faces() == 4 * d0.mesh.n_faces());
        assert!(verify_filling(&d1, &t, &r1, a).unwrap().pass());
    }

    #[test]
    fn tripod_limit_is_flagged() {
        let t = MetricTriangle::tripod_like([1.0; 3], 8, 1e-3).unwrap();
        let (_, rep) = fill_triangle(&t, 3f64.sqrt() / 4.0, 0).unwrap();
        assert!(rep.near_zero_area);
        let (t, a) = flat([1.0; 3], 8);
        assert!(!fill_triangle(&t, a, 0).unwrap().1.near_zero_area);
    }

    #[test]
    fn mismatched_sampling_is_rejected() {
        let (t, a) = flat([1.0; 3], 8);
        let (disk, rep) = fill_triangle(&t, a, 0).unwrap();
        let (t2, _) = flat([1.0; 3], 5);
        assert!(matches!(verify_filling(&disk, &t2, &rep, a), Err(Error::MismatchedSampling(_))));
    }

    #[test]
    fn json_has_correspondence() {
        let (t, a) = flat([1.0; 3], 4);
        let (disk, _) = fill_triangle(&t, a, 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&disk.to_json().unwrap()).unwrap();
        assert_eq!(v["boundary_correspondence"].as_array().unwrap().len(), 24);
        assert!(crate::mesh_io::mesh_from_json(&disk.to_json().unwrap()).is_ok());
    }
}
