use std::time::Instant;

use mslab_core::modulus::{modulus_point_condition, modulus_quad, SolverOptions};
use mslab_core::spaces::{
    cantor_collar_quad, cantor_rectangle_moduli, gen_cantor_quotient, CantorGrid, CantorSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `H¹(C ∩ [x, y])` by enumerating level-`k` intervals breadth first and
/// scaling their overlap by the remaining product.
fn oracle_measure(spec: &CantorSpec, x: f64, y: f64, k: usize) -> f64 {
    let a = &spec.gap_fractions;
    let mut ivs = vec![(0.0f64, 1.0f64)];
    for &f in &a[..k] {
        let mut next = Vec::with_capacity(2 * ivs.len());
        for (l, r) in ivs {
            if r <= x || l >= y {
                continue;
            }
            let w = (r - l) * (1.0 - f) / 2.0;
            next.push((l, l + w));
            next.push((r - w, r));
        }
        ivs = next;
    }
    let rest: f64 = a[k..].iter().map(|f| 1.0 - f).product();
    ivs.iter().map(|&(l, r)| (r.min(y) - l.max(x)).max(0.0)).sum::<f64>() * rest
}

#[test]
fn quotient_metric_on_the_axis() {
    let t = Instant::now();
    let spec = CantorSpec::default();
    let q = gen_cantor_quotient(&spec, &CantorGrid::default()).unwrap();
    let adj = q.quotient_graph(1);
    for c in &q.classes {
        let d = q.dr_from(&adj, &[c[0]]);
        assert!(c.iter().all(|&v| d[v] == 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = q.axis[rng.gen_range(0..q.axis.len())];
        let b = q.axis[rng.gen_range(0..q.axis.len())];
        let (x, y) = (q.x(a).min(q.x(b)), q.x(a).max(q.x(b)));
        let d = q.dr_from(&adj, &[a])[b];
        let h = oracle_measure(&spec, x, y, 16);
        // the lower bound holds on every pair
        assert!(d >= h - 1e-9, "{x} {y}: {d} < {h}");
        if h > 0.0 {
            worst = worst.max((d - h).abs() / h);
        } else {
            assert!(d <= 1e-9 + 0.02 * (y - x));
        }
    }
    assert!(worst < 0.02, "worst axis error {worst}");
    let (a, b) = (q.axis[0], *q.axis.last().unwrap());
    let d01 = q.dr_from(&adj, &[a])[b];
    assert!((d01 - 0.688_537_537_405_4).abs() < 0.02 * 0.6885, "{d01}");
    // far from the collapsed set the quotient is flat
    let p = q.vertex_at([-0.25, 1.25]).unwrap();
    let r = q.vertex_at([-0.25, 1.0]).unwrap();
    assert!((q.dr_from(&adj, &[p])[r] - 0.25).abs() < 1e-9);
    eprintln!("axis worst {worst:.2e}, dR(0,1) {d01:.6} in {:?}", t.elapsed());
}

#[test]
fn rectangle_moduli_levels_one_to_three() {
    let t = Instant::now();
    let spec = CantorSpec::default();
    let opts = SolverOptions::default();
    for n in 1..=3 {
        let r = cantor_rectangle_moduli(&spec, n, 24, &opts).unwrap();
        eprintln!("M_{n}: analytic {:.4} solved {:.4} err {:.3}", r.analytic, r.solved.value, r.relative_error);
        assert!(r.relative_error < 0.10);
    }
    eprintln!("rectangles in {:?}", t.elapsed());
}

#[test]
fn point_condition_fails_at_the_cantor_end() {
    let t = Instant::now();
    let spec = CantorSpec::default();
    let h = 1.0 / 48.0;
    let g = CantorGrid { h, window: Some([-0.35, -0.7, 0.4, 0.7]), min_gap: h / 4.0, ..CantorGrid::default() };
    let q = gen_cantor_quotient(&spec, &g).unwrap();
    let a = q.vertex_at([0.0, 0.0]).unwrap();
    let d = q.dr_from(&q.quotient_graph(1), &[a]);
    let big_r = 0.3;
    let radii: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|k| big_r / k).collect();
    let vals = modulus_point_condition(&q.mesh, &d, big_r, &radii, &q.classes, &SolverOptions::default()).unwrap();
    let floor = spec.chain_floor();
    let v: Vec<f64> = vals.iter().map(|m| m.value).collect();
    eprintln!("cantor point: {v:?} floor {floor:.4} faces {} in {:?}", q.mesh.n_faces(), t.elapsed());
    assert!(v.iter().all(|&x| x >= 0.5 * floor));
}

#[test]
fn shrinking_quads_are_not_reciprocal() {
    let t = Instant::now();
    let spec = CantorSpec::default();
    let opts = SolverOptions::default();
    let mut prods = Vec::new();
    for k in 0..3 {
        let delta = 0.4 / 2f64.powi(k);
        let (q, quad) = cantor_collar_quad(&spec, 1, delta, delta / 3.0).unwrap();
        let m = modulus_quad(&q.mesh, &quad, &q.classes, &opts).unwrap();
        eprintln!("δ {delta}: {} x {} = {} ({} faces)", m.primal.value, m.conjugate.value, m.product, q.mesh.n_faces());
        prods.push(m.product);
    }
    assert!(prods.windows(2).all(|w| w[1] > w[0]));
    assert!(*prods.last().unwrap() > 10.0);
    eprintln!("shrinking quads in {:?}", t.elapsed());
}
