use mslab_core::tripod::{
    build_tripod, distortion_certificate, edge_length_ratios, embed_triangle, projection_lipschitz,
    random_triangle, region_area_check, MetricTriangle, K_AREA,
};
use mslab_core::geom::heron;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_triangles_embed_with_distortion_at_most_four() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut worst_ratio) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let t = random_triangle(&mut rng, 10).unwrap();
        let e = embed_triangle(&t).unwrap();
        let d = distortion_certificate(&t, &e).unwrap();
        worst = worst.max(d.max_expand).max(d.max_contract);
        assert!(projection_lipschitz(&t, &e) <= 1.0 + 1e-9);
        for r in edge_length_ratios(&t, &e) {
            assert!((0.25..=4.0).contains(&r), "edge ratio {r}");
        }
        let [a, b, c] = t.edge_lengths;
        let r = region_area_check(&e, heron(a, b, c)).unwrap();
        worst_ratio = worst_ratio.max(r);
        assert!(r <= K_AREA);
    }
    assert!(worst <= 4.0, "distortion {worst}");
    eprintln!("worst distortion {worst:.3}, worst area ratio {worst_ratio:.3}");
}

#[test]
fn spoke_identity_on_flat_triangles() {
    for l in [[1.0, 1.0, 1.0], [3.0, 5.0, 4.0], [3.0, 4.0, 6.999], [0.2, 0.9, 0.75]] {
        let t = MetricTriangle::euclidean(l, 5).unwrap();
        let m = build_tripod(&t).unwrap();
        for j in 0..3 {
            let s = m.spokes[j] + m.spokes[(j + 1) % 3];
            assert!((s - l[j]).abs() <= 1e-9 * l[j]);
        }
    }
}
