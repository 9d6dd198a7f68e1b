use criterion::{black_box, criterion_group, criterion_main, Criterion};

use mslab_core::geom::Norm;
use mslab_core::measure::{coarea_check, content_estimate, PlanarCloud};
use mslab_core::modulus::{lattice_quad, modulus_quad, SolverOptions};
use mslab_core::spaces::{self, CantorGrid, CantorSpec};
use mslab_core::tripod::{distortion_certificate, embed_triangle, MetricTriangle};
use mslab_core::induced_length_metric;

fn metric(c: &mut Criterion) {
    let m = spaces::gen_euclid_square(16).unwrap();
    c.bench_function("induced_length_metric/euclid16", |b| b.iter(|| induced_length_metric(black_box(&m), 2)));
    let spec = CantorSpec::default();
    let g = CantorGrid { h: 1.0 / 24.0, ..CantorGrid::default() };
    c.bench_function("cantor_quotient/h24", |b| b.iter(|| spaces::gen_cantor_quotient(black_box(&spec), &g).unwrap()));
}

fn measure(c: &mut Criterion) {
    let cloud = PlanarCloud::unit_square(32, Norm::Linf);
    c.bench_function("content_estimate/linf32", |b| b.iter(|| content_estimate(black_box(&cloud), 2.0, 0.1).unwrap()));
    let sq = spaces::gen_linf_square(32).unwrap();
    let f: Vec<f64> = sq.coords().unwrap().iter().map(|&p| Norm::Linf.dist(p, [0.5, 0.5])).collect();
    let g = vec![1.0; f.len()];
    c.bench_function("coarea_check/linf32", |b| b.iter(|| coarea_check(black_box(&sq), &f, &g, 1.0, 100, 0.03).unwrap()));
}

fn tripod(c: &mut Criterion) {
    let t = MetricTriangle::euclidean([3.0, 4.0, 5.0], 10).unwrap();
    c.bench_function("embed_and_certify/345", |b| {
        b.iter(|| {
            let e = embed_triangle(black_box(&t)).unwrap();
            distortion_certificate(&t, &e).unwrap()
        })
    });
}

fn modulus(c: &mut Criterion) {
    let mut group = c.benchmark_group("modulus_quad");
    group.sample_size(10);
    for n in [8usize, 16] {
        for (norm, tag) in [(Norm::L2, "euclid"), (Norm::Linf, "linf")] {
            let m = spaces::gen_square(n, norm).unwrap();
            let q = lattice_quad(&m, n, 0, 0, n, n);
            group.bench_function(format!("{tag}{n}"), |b| {
                b.iter(|| modulus_quad(black_box(&m), &q, &[], &SolverOptions::default()).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, metric, measure, tripod, modulus);
criterion_main!(benches);
