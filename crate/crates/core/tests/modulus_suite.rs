use std::f64::consts::{E, PI};
use std::time::Instant;

use mslab_core::geom::{euclid, Norm};
use mslab_core::modulus::{
    lattice_quad, modulus_connect, modulus_point_condition, modulus_quad, modulus_separating, ConnectSetup,
    SolverOptions,
};
use mslab_core::spaces::{self, ShellShape};

#[test]
fn linf_square_quad_at_64() {
    let t = Instant::now();
    let n = 64;
    let m = spaces::gen_linf_square(n).unwrap();
    let q = lattice_quad(&m, n, 0, 0, n, n);
    let r = modulus_quad(&m, &q, &[], &SolverOptions::default()).unwrap();
    eprintln!("linf: {} {} {} in {:?}", r.primal.value, r.conjugate.value, r.product, t.elapsed());
    assert!((r.primal.value / (PI / 4.0) - 1.0).abs() < 0.05);
    assert!((r.conjugate.value / (PI / 4.0) - 1.0).abs() < 0.05);
    assert!((r.product / (PI * PI / 16.0) - 1.0).abs() < 0.10);
}

#[test]
fn euclid_rectangles_at_64() {
    let t = Instant::now();
    let n = 64;
    let m = spaces::gen_euclid_square(n).unwrap();
    for (i1, j1) in [(64, 16), (64, 32), (32, 64), (16, 64)] {
        let q = lattice_quad(&m, n, 0, 0, i1, j1);
        let r = modulus_quad(&m, &q, &[], &SolverOptions::default()).unwrap();
        eprintln!("rect {i1}x{j1}: {} {} {}", r.primal.value, r.conjugate.value, r.product);
        assert!((r.product - 1.0).abs() < 0.06);
    }
    eprintln!("rectangles in {:?}", t.elapsed());
}

#[test]
fn round_annulus() {
    let t = Instant::now();
    let m = spaces::gen_annulus(1.0, E, 96, 24).unwrap();
    let c = m.coords().unwrap();
    let inner: Vec<usize> = (0..m.n_vertices()).filter(|&v| euclid(c[v], [0.0, 0.0]) < 1.0 + 1e-9).collect();
    let outer: Vec<usize> = (0..m.n_vertices()).filter(|&v| euclid(c[v], [0.0, 0.0]) > E - 1e-9).collect();
    let o = SolverOptions::default();
    let conn = modulus_connect(&m, &inner, &outer, &ConnectSetup::default(), &o).unwrap();
    let sep = modulus_separating(&m, &inner, &outer, &o).unwrap();
    eprintln!("annulus: {} {} in {:?}", conn.value, sep.value, t.elapsed());
    assert!((conn.value / (2.0 * PI) - 1.0).abs() < 0.05);
    assert!((sep.value * 2.0 * PI - 1.0).abs() < 0.07);
}

#[test]
fn point_condition_euclid_and_linf() {
    let t = Instant::now();
    let radii = [0.5, 0.25, 0.125, 0.0625];
    for (shape, norm) in [(ShellShape::Circle, Norm::L2), (ShellShape::Square, Norm::Linf)] {
        let m = spaces::gen_polar_disk(shape, norm, 1.0, 1.0 / 32.0, 4, 64).unwrap();
        let d: Vec<f64> = m.coords().unwrap().iter().map(|&p| norm.dist(p, [0.0, 0.0])).collect();
        let res = modulus_point_condition(&m, &d, 1.0, &radii, &[], &SolverOptions::default()).unwrap();
        let vals: Vec<f64> = res.iter().map(|r| r.value).collect();
        eprintln!("{norm:?}: {vals:?}");
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        if norm == Norm::L2 {
            for (v, r) in vals.iter().zip(radii) {
                let want = 2.0 * PI / (1.0 / r).ln();
                assert!((v / want - 1.0).abs() < 0.08, "{v} vs {want}");
            }
        }
    }
    eprintln!("point condition in {:?}", t.elapsed());
}

#[test]
fn collar_quadrilateral_restricted_modulus() {
    let t = Instant::now();
    let delta = 0.1;
    let sectors = 128;
    let mut radii: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    radii.extend((1..=4).map(|k| 0.9 + k as f64 * 0.025));
    let m = spaces::gen_shells(ShellShape::Circle, Norm::L2, &radii, sectors, true).unwrap();
    let c = m.coords().unwrap();
    let outer: Vec<usize> = (0..m.n_vertices()).filter(|&v| (euclid(c[v], [0.0, 0.0]) - 1.0).abs() < 1e-12).collect();
    // ζ₁ right and ζ₃ left quarter arcs of the unit circle
    let arc = |centre: f64| -> Vec<usize> {
        outer
            .iter()
            .copied()
            .filter(|&v| {
                let d = (c[v][1].atan2(c[v][0]) - centre + PI).rem_euclid(2.0 * PI) - PI;
                d.abs() <= PI / 4.0 + 1e-9
            })
            .collect()
    };
    let collar: Vec<bool> =
        m.faces().iter().map(|f| f.iter().all(|&v| euclid(c[v], [0.0, 0.0]) >= 1.0 - delta - 1e-12)).collect();
    let setup = ConnectSetup { region: None, support: Some(&collar), classes: &[] };
    let r = modulus_connect(&m, &arc(0.0), &arc(PI), &setup, &SolverOptions::default()).unwrap();
    let floor = 2.0 / (PI * delta * (2.0 - delta));
    eprintln!("collar: {} (floor {floor}) in {:?}", r.value, t.elapsed());
    assert!(r.value >= floor);
    // restricting the support can only raise the modulus
    let free = modulus_connect(&m, &arc(0.0), &arc(PI), &ConnectSetup::default(), &SolverOptions::default()).unwrap();
    assert!(free.value <= r.value * (1.0 + 1e-2));
}

#[test]
fn square_frame_reciprocity() {
    let t = Instant::now();
    // midpoint chains are anisotropic around the frame corners; three
    // nodes per edge let chains follow diagonal directions
    let (m, inner, outer) = spaces::gen_square_frame(8).unwrap();
    let opts = SolverOptions { edge_points: 3, ..SolverOptions::default() };
    let conn = modulus_connect(&m, &inner, &outer, &ConnectSetup::default(), &opts).unwrap();
    let sep = modulus_separating(&m, &inner, &outer, &opts).unwrap();
    let p = conn.value * sep.value;
    eprintln!("frame: {} x {} = {p} in {:?}", conn.value, sep.value, t.elapsed());
    assert!(conn.value.is_finite() && conn.value > 0.0);
    assert!((0.8..=1.25).contains(&p));
}

#[test]
fn weighted_plane_point_condition_decays() {
    let t = Instant::now();
    let spec = spaces::WeightedPlaneSpec::default();
    let w = spaces::weighted_plane_chain(&spec, &SolverOptions::default()).unwrap();
    eprintln!(
        "weighted: rings {:?} bound {} point {} in {:?}",
        w.ring_moduli,
        w.chain_bound,
        w.point_modulus.value,
        t.elapsed()
    );
    assert!(w.point_modulus.value <= 3.0 * w.chain_bound);
}
