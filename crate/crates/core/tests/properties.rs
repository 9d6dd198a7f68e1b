use std::f64::consts::PI;

use mslab_core::geom::{self, ear_clip, length_deficit, signed_area, triangle_area, Norm, STRAIGHT_DEFICIT};
use mslab_core::measure::{coarea_check, distance_function, lipschitz_constant};
use mslab_core::modulus::{lattice_quad, modulus_quad, SolverOptions};
use mslab_core::report::{compare_reports, Assertion, Basis, Comparison, ExperimentReport, Tolerances};
use mslab_core::spaces::{self, CantorSpec};
use mslab_core::tripod::{build_tripod, distortion_certificate, embed_triangle, MetricTriangle};
use mslab_core::{gromov_product, induced_length_metric, metric_axioms_check, MetricSurfaceMesh};
use proptest::prelude::*;

/// Side lengths with a relative margin on the strict triangle inequality.
fn triangle_sides() -> impl Strategy<Value = [f64; 3]> {
    (0.2f64..1.0, 0.2f64..1.0, 0.05f64..0.95).prop_map(|(a, b, s)| {
        let (lo, hi) = ((a - b).abs(), a + b);
        [a, b, lo + (hi - lo) * s]
    })
}

/// Euclidean grid with interior vertices moved by up to `jitter` cells.
fn jittered_square(n: usize, jitter: &[(f64, f64)]) -> MetricSurfaceMesh {
    let m = spaces::gen_euclid_square(n).unwrap();
    let h = 1.0 / n as f64;
    let mut coords = m.coords().unwrap().to_vec();
    for (v, c) in coords.iter_mut().enumerate() {
        let (i, j) = (v % (n + 1), v / (n + 1));
        if i > 0 && j > 0 && i < n && j < n {
            let (dx, dy) = jitter[v % jitter.len()];
            c[0] += dx * h;
            c[1] += dy * h;
        }
    }
    MetricSurfaceMesh::from_coords(coords, m.faces().to_vec(), Norm::L2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn induced_metric_is_a_metric(jitter in prop::collection::vec((-0.2f64..0.2, -0.2f64..0.2), 1..16)) {
        let m = jittered_square(4, &jitter);
        let d = induced_length_metric(&m, 2);
        prop_assert!(metric_axioms_check(&d).is_empty());
        // geodesic distances never undercut straight lines
        let c = m.coords().unwrap();
        for i in 0..m.n_vertices() {
            for j in 0..m.n_vertices() {
                prop_assert!(d.get(i, j) >= geom::euclid(c[i], c[j]) - 1e-12);
            }
        }
    }

    #[test]
    fn gromov_products_are_bounded(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3)) {
        let p: Vec<geom::Point> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let (dpr, dqr, dpq) = (geom::euclid(p[0], p[2]), geom::euclid(p[1], p[2]), geom::euclid(p[0], p[1]));
        let g = gromov_product(dpr, dqr, dpq).unwrap();
        prop_assert!(g >= 0.0 && g <= dpr.min(dqr) + 1e-12);
    }

    #[test]
    fn tripod_spokes_and_distortion(l in triangle_sides()) {
        let t = MetricTriangle::euclidean(l, 6).unwrap();
        let m = build_tripod(&t).unwrap();
        for j in 0..3 {
            prop_assert!((m.spokes[j] + m.spokes[(j + 1) % 3] - l[j]).abs() <= 1e-9 * l[j]);
            prop_assert!(m.spokes[j] >= 0.0);
        }
        let e = embed_triangle(&t).unwrap();
        let d = distortion_certificate(&t, &e).unwrap();
        prop_assert!(d.max_expand <= 4.0 && d.max_contract <= 4.0);
    }

    #[test]
    fn ear_clip_star_polygons(
        radii in prop::collection::vec(0.3f64..1.0, 3..24),
        splits in prop::collection::vec(0usize..3, 3..24),
    ) {
        // star-shaped polygon with extra points placed on some sides
        let n = radii.len();
        let corners: Vec<geom::Point> = radii
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let t = 2.0 * PI * k as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let mut poly = Vec::new();
        for k in 0..n {
            let (a, b) = (corners[k], corners[(k + 1) % n]);
            let s = splits[k % splits.len()];
            for i in 0..=s {
                poly.push(geom::lerp(a, b, i as f64 / (s + 1) as f64));
            }
        }
        let tris = ear_clip(&poly).unwrap();
        let area: f64 = tris.iter().map(|t| triangle_area(poly[t[0]], poly[t[1]], poly[t[2]])).sum();
        prop_assert!((area - signed_area(&poly)).abs() <= 1e-9 * area.max(1.0));
        prop_assert!(tris.iter().all(|t| length_deficit(poly[t[0]], poly[t[1]], poly[t[2]]) > STRAIGHT_DEFICIT));
        prop_assert!((0..poly.len()).all(|v| tris.iter().any(|t| t.contains(&v))));
    }

    #[test]
    fn coarea_holds_for_random_weights(src in 0usize..81, g in prop::collection::vec(0.0f64..1.0, 81)) {
        let m = spaces::gen_euclid_square(8).unwrap();
        let f = distance_function(&m, &[src], 2);
        let lip = lipschitz_constant(&m, &f);
        let r = coarea_check(&m, &f, &g, lip, 60, 0.03).unwrap();
        prop_assert!(r.lhs <= r.rhs * 1.03, "{r:?}");
    }

    #[test]
    fn cantor_axis_measure_is_additive(x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0) {
        let spec = CantorSpec::default();
        let mut v = [x, y, z];
        v.sort_by(f64::total_cmp);
        let (a, b) = (spec.axis_measure(v[0], v[1]), spec.axis_measure(v[1], v[2]));
        let whole = spec.axis_measure(v[0], v[2]);
        prop_assert!((a + b - whole).abs() <= 1e-12);
        prop_assert!(whole <= v[2] - v[0] + 1e-15);
    }

    #[test]
    fn report_diffs_respect_tolerance(value in 0.1f64..10.0, rel in 0.0f64..0.02, tol in 0.001f64..0.02) {
        let mut a = ExperimentReport::new("prop", serde_json::json!({"k": 1}), 3);
        a.scalar("x", value);
        a.check(Assertion::new("x", value, value, 0.1, Comparison::Relative, Basis::Oracle));
        let t = Tolerances { default: tol, ..Default::default() };
        prop_assert!(compare_reports(&a, &a.clone(), &t).unwrap().is_empty());
        let mut b = a.clone();
        b.scalar("x", value * (1.0 + rel));
        let d = compare_reports(&a, &b, &t).unwrap();
        let measured = rel / (1.0 + rel);
        prop_assert_eq!(d.failures().len(), usize::from(measured > tol));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lattice_rectangles_are_reciprocal(w in 1usize..=8, h in 1usize..=8) {
        let n = 8;
        let m = spaces::gen_euclid_square(n).unwrap();
        let r = modulus_quad(&m, &lattice_quad(&m, n, 0, 0, w, h), &[], &SolverOptions::default()).unwrap();
        prop_assert!((r.primal.value / (h as f64 / w as f64) - 1.0).abs() < 0.03, "{r:?}");
        prop_assert!((r.product - 1.0).abs() < 0.05);
    }
}
