//! The registered experiment suite. Each experiment reads its parameters
//! from a JSON object (missing keys take defaults, unknown keys are
//! rejected) and returns an [`ExperimentReport`].

use std::f64::consts::{E, FRAC_PI_4, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::approx::{approximate, ApproxOptions};
use crate::error::{Error, Result};
use crate::filling::{fill_triangle, verify_filling, L_CONFIG};
use crate::geom::{self, heron, Norm};
use crate::measure::{self, coarea_check, content_estimate, PlanarCloud};
use crate::metric::MetricSurfaceMesh;
use crate::modulus::{
    lattice_quad, modulus_connect, modulus_point_condition, modulus_quad, modulus_separating, ConnectSetup,
    SolverOptions,
};
use crate::report::{Assertion, Basis, Comparison, ExperimentReport};
use crate::spaces::{self, ShellShape};
use crate::tripod::{
    build_tripod, distortion_certificate, embed_triangle, projection_lipschitz, random_triangle,
    region_area_check, K_AREA,
};

pub const EXPERIMENTS: [&str; 11] = [
    "linf-square",
    "euclid-square",
    "annulus",
    "coarea",
    "tripod-suite",
    "filling-suite",
    "approximate",
    "cantor-annuli",
    "weighted-plane",
    "slit-convergence",
    "reciprocity-scan",
];

pub const DEFAULT_SEED: u64 = 7;

/// Runs a registered experiment. `config` is a JSON object of parameters
/// (`null` for all defaults).
pub fn run(name: &str, config: &Value, seed: u64) -> Result<ExperimentReport> {
    let t = Instant::now();
    let mut report = match name {
        "linf-square" => linf_square(&params(config)?)?,
        "euclid-square" => euclid_square(&params(config)?)?,
        "annulus" => annulus(&params(config)?)?,
        "coarea" => coarea(&params(config)?, seed)?,
        "tripod-suite" => tripod_suite(&params(config)?, seed)?,
        "filling-suite" => filling_suite(&params(config)?, seed)?,
        "approximate" => approximate_schedule(&params(config)?)?,
        "cantor-annuli" => cantor_annuli(&params(config)?, seed)?,
        "weighted-plane" => weighted_plane(&params(config)?)?,
        "slit-convergence" => slit_convergence(&params(config)?, seed)?,
        "reciprocity-scan" => reciprocity_scan(&params(config)?, seed)?,
        _ => return Err(Error::UnknownExperiment(name.to_string())),
    };
    report.inputs.seed = seed;
    report.runtime_ms = t.elapsed().as_millis() as u64;
    Ok(report)
}

fn params<P: DeserializeOwned>(config: &Value) -> Result<P> {
    let v = if config.is_null() { Value::Object(Default::default()) } else { config.clone() };
    serde_json::from_value(v).map_err(|e| Error::ConfigInvalid(e.to_string()))
}

fn new_report<P: Serialize>(name: &str, p: &P) -> Result<ExperimentReport> {
    Ok(ExperimentReport::new(name, serde_json::to_value(p)?, 0))
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ConfigInvalid(what.to_string()))
    }
}

fn rel(name: &str, value: f64, target: f64, tol: f64, basis: Basis) -> Assertion {
    Assertion::new(name, value, target, tol, Comparison::Relative, basis)
}

fn at_most(name: &str, value: f64, bound: f64, basis: Basis) -> Assertion {
    Assertion::new(name, value, bound, 0.0, Comparison::AtMost, basis)
}

fn at_least(name: &str, value: f64, bound: f64, basis: Basis) -> Assertion {
    Assertion::new(name, value, bound, 0.0, Comparison::AtLeast, basis)
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn vertices_where(mesh: &MetricSurfaceMesh, keep: impl Fn(geom::Point) -> bool) -> Vec<usize> {
    let c = mesh.coords().expect("generated meshes carry coordinates");
    (0..mesh.n_vertices()).filter(|&v| keep(c[v])).collect()
}

// ---------------------------------------------------------------- squares

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinfSquareParams {
    pub grid: usize,
    pub content_samples: usize,
    pub content_delta: f64,
    pub solver: SolverOptions,
}

impl Default for LinfSquareParams {
    fn default() -> Self {
        Self { grid: 64, content_samples: 64, content_delta: 0.1, solver: SolverOptions::default() }
    }
}

fn linf_square(p: &LinfSquareParams) -> Result<ExperimentReport> {
    require(p.grid >= 2 && p.grid.is_multiple_of(2), "grid must be even and ≥ 2")?;
    require(p.content_samples >= 1 && p.content_delta > 0.0, "content needs samples and δ > 0")?;
    let mut r = new_report("linf-square", p)?;
    let c = content_estimate(&PlanarCloud::unit_square(p.content_samples, Norm::Linf), 2.0, p.content_delta)?;
    let mesh = spaces::gen_linf_square(p.grid)?;
    r.set_mesh(&mesh)?;
    let m = modulus_quad(&mesh, &lattice_quad(&mesh, p.grid, 0, 0, p.grid, p.grid), &[], &p.solver)?;
    r.scalar("content", c.upper_value);
    r.scalar("covering_sets", c.covering.sets.len() as f64);
    r.scalar("modulus_horizontal", m.primal.value);
    r.scalar("modulus_vertical", m.conjugate.value);
    r.scalar("modulus_horizontal_lower", m.primal.lower_bound);
    r.scalar("modulus_vertical_lower", m.conjugate.lower_bound);
    r.scalar("product", m.product);
    r.check(rel("content", c.upper_value, FRAC_PI_4, 0.03, Basis::ClosedForm));
    r.check(rel("modulus_horizontal", m.primal.value, FRAC_PI_4, 0.05, Basis::ClosedForm));
    r.check(rel("modulus_vertical", m.conjugate.value, FRAC_PI_4, 0.05, Basis::ClosedForm));
    r.check(rel("product", m.product, PI * PI / 16.0, 0.10, Basis::ClosedForm));
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EuclidSquareParams {
    pub grid: usize,
    /// Side ratios `a/b` of the rectangles; the longer side spans the grid.
    pub aspects: Vec<f64>,
    pub annulus_sectors: usize,
    pub annulus_rings: usize,
    pub solver: SolverOptions,
}

impl Default for EuclidSquareParams {
    fn default() -> Self {
        Self {
            grid: 32,
            aspects: vec![0.25, 0.5, 2.0, 4.0],
            annulus_sectors: 96,
            annulus_rings: 24,
            solver: SolverOptions::default(),
        }
    }
}

fn euclid_square(p: &EuclidSquareParams) -> Result<ExperimentReport> {
    require(p.grid >= 4 && p.grid.is_multiple_of(4), "grid must be a multiple of 4")?;
    require(p.annulus_sectors >= 8 && p.annulus_rings >= 2, "annulus needs ≥ 8 sectors and ≥ 2 rings")?;
    let mut r = new_report("euclid-square", p)?;
    let n = p.grid;
    let mesh = spaces::gen_euclid_square(n)?;
    r.set_mesh(&mesh)?;
    let square = modulus_quad(&mesh, &lattice_quad(&mesh, n, 0, 0, n, n), &[], &p.solver)?;
    r.scalar("square_modulus", square.primal.value);
    r.check(rel("square_modulus", square.primal.value, 1.0, 0.03, Basis::ClosedForm));

    let mut products = Vec::new();
    let mut moduli = Vec::new();
    for &ab in &p.aspects {
        // a×b rectangle with the longer side spanning the grid
        let (w, h) = if ab >= 1.0 { (n, (n as f64 / ab).round() as usize) } else { ((n as f64 * ab).round() as usize, n) };
        require(w >= 1 && h >= 1, "aspect too extreme for the grid")?;
        let m = modulus_quad(&mesh, &lattice_quad(&mesh, n, 0, 0, w, h), &[], &p.solver)?;
        moduli.push(m.primal.value);
        products.push(m.product);
        r.check(rel(&format!("rectangle_product_{ab}"), m.product, 1.0, 0.06, Basis::ClosedForm));
    }
    r.sequence("rectangle_aspects", p.aspects.clone());
    r.sequence("rectangle_moduli", moduli);
    r.sequence("rectangle_products", products);

    let ann = spaces::gen_annulus(1.0, E, p.annulus_sectors, p.annulus_rings)?;
    let inner = vertices_where(&ann, |q| geom::euclid(q, [0.0, 0.0]) < 1.0 + 1e-9);
    let outer = vertices_where(&ann, |q| geom::euclid(q, [0.0, 0.0]) > E - 1e-9);
    let conn = modulus_connect(&ann, &inner, &outer, &ConnectSetup::default(), &p.solver)?;
    let sep = modulus_separating(&ann, &inner, &outer, &p.solver)?;
    r.scalar("annulus_connecting", conn.value);
    r.scalar("annulus_separating", sep.value);
    r.check(rel("annulus_connecting", conn.value, 2.0 * PI, 0.05, Basis::ClosedForm));
    r.check(rel("annulus_separating", sep.value, 1.0 / (2.0 * PI), 0.07, Basis::ClosedForm));
    Ok(r)
}

// ---------------------------------------------------------------- annuli

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnulusParams {
    pub r_min: f64,
    pub rings_per_octave: usize,
    pub sectors: usize,
    pub collar_delta: f64,
    pub collar_sectors: usize,
    pub frame_cells: usize,
    pub frame_edge_points: usize,
    pub solver: SolverOptions,
}

impl Default for AnnulusParams {
    fn default() -> Self {
        Self {
            r_min: 1.0 / 32.0,
            rings_per_octave: 4,
            sectors: 64,
            collar_delta: 0.1,
            collar_sectors: 128,
            frame_cells: 8,
            frame_edge_points: 3,
            solver: SolverOptions::default(),
        }
    }
}

fn annulus(p: &AnnulusParams) -> Result<ExperimentReport> {
    require(p.r_min > 0.0 && p.r_min < 1.0 / 16.0, "r_min must lie in (0, 1/16)")?;
    require(p.collar_delta > 0.0 && p.collar_delta < 0.5, "collar δ must lie in (0, 1/2)")?;
    require(p.frame_cells >= 2 && p.frame_edge_points >= 1, "frame needs ≥ 2 cells and ≥ 1 edge point")?;
    let mut r = new_report("annulus", p)?;
    let radii: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|k| 1.0 / k).collect();
    r.sequence("radii", radii.clone());
    for (shape, norm, tag) in [(ShellShape::Circle, Norm::L2, "l2"), (ShellShape::Square, Norm::Linf, "linf")] {
        let m = spaces::gen_polar_disk(shape, norm, 1.0, p.r_min, p.rings_per_octave, p.sectors)?;
        if norm == Norm::L2 {
            r.set_mesh(&m)?;
        }
        let d: Vec<f64> = m.coords().expect("coordinates").iter().map(|&q| norm.dist(q, [0.0, 0.0])).collect();
        let vals: Vec<f64> =
            modulus_point_condition(&m, &d, 1.0, &radii, &[], &p.solver)?.iter().map(|x| x.value).collect();
        r.check(Assertion::holds(&format!("point_{tag}_decreasing"), strictly_decreasing(&vals), Basis::ClosedForm));
        if norm == Norm::L2 {
            for (v, rr) in vals.iter().zip(&radii) {
                let want = 2.0 * PI / (1.0 / rr).ln();
                r.check(rel(&format!("point_l2_r{rr}"), *v, want, 0.08, Basis::ClosedForm));
            }
        }
        r.sequence(&format!("point_{tag}"), vals);
    }

    // collar quadrilateral: quarter arcs at angle 0 and π on the unit circle
    let delta = p.collar_delta;
    let mut shells: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    shells.retain(|&s| s < 1.0 - delta - 1e-9);
    let steps = 4;
    shells.extend((0..=steps).map(|k| 1.0 - delta + delta * k as f64 / steps as f64));
    let m = spaces::gen_shells(ShellShape::Circle, Norm::L2, &shells, p.collar_sectors, true)?;
    let c = m.coords().expect("coordinates");
    let arc = |centre: f64| {
        vertices_where(&m, |q| {
            let a = (q[1].atan2(q[0]) - centre + PI).rem_euclid(2.0 * PI) - PI;
            (geom::euclid(q, [0.0, 0.0]) - 1.0).abs() < 1e-12 && a.abs() <= PI / 4.0 + 1e-9
        })
    };
    let collar: Vec<bool> =
        m.faces().iter().map(|f| f.iter().all(|&v| geom::euclid(c[v], [0.0, 0.0]) >= 1.0 - delta - 1e-12)).collect();
    let restricted = ConnectSetup { region: None, support: Some(&collar), classes: &[] };
    let (z1, z3) = (arc(0.0), arc(PI));
    let rm = modulus_connect(&m, &z1, &z3, &restricted, &p.solver)?.value;
    let free = modulus_connect(&m, &z1, &z3, &ConnectSetup::default(), &p.solver)?.value;
    let floor = 2.0 / (PI * delta * (2.0 - delta));
    r.scalar("collar_restricted", rm);
    r.scalar("collar_free", free);
    r.scalar("collar_floor", floor);
    r.check(at_least("collar_floor", rm, floor, Basis::ClosedForm));
    r.check(Assertion::new(
        "collar_restriction_monotone",
        free,
        rm,
        p.solver.gap_tol,
        Comparison::AtMost,
        Basis::Construction,
    ));

    // square frame: connecting × separating moduli of a non-round annulus
    let (frame, inner, outer) = spaces::gen_square_frame(p.frame_cells)?;
    let fo = SolverOptions { edge_points: p.frame_edge_points, ..p.solver };
    let conn = modulus_connect(&frame, &inner, &outer, &ConnectSetup::default(), &fo)?.value;
    let sep = modulus_separating(&frame, &inner, &outer, &fo)?.value;
    r.scalar("frame_connecting", conn);
    r.scalar("frame_separating", sep);
    r.scalar("frame_product", conn * sep);
    r.check(rel("frame_product", conn * sep, 1.0, 0.2, Basis::ClosedForm));
    Ok(r)
}

// ---------------------------------------------------------------- co-area

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoareaParams {
    pub grid: usize,
    pub functions: usize,
    pub max_sources: usize,
    pub levels: usize,
    pub subdivision: usize,
    pub tol: f64,
}

impl Default for CoareaParams {
    fn default() -> Self {
        Self { grid: 32, functions: 20, max_sources: 3, levels: 100, subdivision: 2, tol: 0.03 }
    }
}

fn coarea(p: &CoareaParams, seed: u64) -> Result<ExperimentReport> {
    require(p.grid >= 2 && p.grid.is_multiple_of(2), "grid must be even and ≥ 2")?;
    require(p.functions >= 1 && p.max_sources >= 1 && p.levels >= 1, "need functions, sources and levels")?;
    let mut r = new_report("coarea", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (norm, tag) in [(Norm::L2, "l2"), (Norm::Linf, "linf")] {
        let mesh = spaces::gen_square(p.grid, norm)?;
        if norm == Norm::L2 {
            r.set_mesh(&mesh)?;
        }
        let nv = mesh.n_vertices();
        let mut ratios = Vec::with_capacity(p.functions);
        for _ in 0..p.functions {
            let k = rng.gen_range(1..=p.max_sources);
            let sources: Vec<usize> = (0..k).map(|_| rng.gen_range(0..nv)).collect();
            let f = measure::distance_function(&mesh, &sources, p.subdivision);
            let g: Vec<f64> = (0..nv).map(|_| rng.gen::<f64>()).collect();
            let lip = measure::lipschitz_constant(&mesh, &f);
            ratios.push(coarea_check(&mesh, &f, &g, lip, p.levels, p.tol)?.ratio);
        }
        r.check(Assertion::new(&format!("{tag}_max_ratio"), max_of(&ratios), 1.0, p.tol, Comparison::AtMost, Basis::ClosedForm));
        r.sequence(&format!("{tag}_ratios"), ratios);
    }
    // sharpness: the ℓ∞ distance to the centre with g = 1
    let sq = spaces::gen_linf_square(p.grid)?;
    let f: Vec<f64> = sq.coords().expect("coordinates").iter().map(|&q| Norm::Linf.dist(q, [0.5, 0.5])).collect();
    let sharp = coarea_check(&sq, &f, &vec![1.0; f.len()], 1.0, p.levels, p.tol)?;
    r.scalar("linf_sharp_ratio", sharp.ratio);
    r.scalar("linf_sharp_lhs", sharp.lhs);
    r.scalar("linf_sharp_rhs", sharp.rhs);
    r.check(rel("linf_sharp_ratio", sharp.ratio, 1.0, p.tol, Basis::ClosedForm));
    Ok(r)
}

// ---------------------------------------------------------------- triangles

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TripodParams {
    pub triangles: usize,
    pub samples_per_edge: usize,
}

impl Default for TripodParams {
    fn default() -> Self {
        Self { triangles: 1000, samples_per_edge: 10 }
    }
}

fn tripod_suite(p: &TripodParams, seed: u64) -> Result<ExperimentReport> {
    require(p.triangles >= 1 && p.samples_per_edge >= 2, "need triangles and ≥ 2 samples per edge")?;
    let mut r = new_report("tripod-suite", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut distortion = Vec::with_capacity(p.triangles);
    let (mut spoke_err, mut lip, mut area): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..p.triangles {
        let t = random_triangle(&mut rng, p.samples_per_edge)?;
        let model = build_tripod(&t)?;
        let l = t.edge_lengths;
        for j in 0..3 {
            let s = model.spokes[j] + model.spokes[(j + 1) % 3];
            spoke_err = spoke_err.max((s - l[j]).abs() / l[j]);
        }
        let e = embed_triangle(&t)?;
        let d = distortion_certificate(&t, &e)?;
        distortion.push(d.max_expand.max(d.max_contract));
        lip = lip.max(projection_lipschitz(&t, &e));
        area = area.max(region_area_check(&e, heron(l[0], l[1], l[2]))?);
    }
    let within = distortion.iter().filter(|&&x| x <= 4.0).count();
    r.scalar("max_distortion", max_of(&distortion));
    r.scalar("within_bound", within as f64);
    r.scalar("max_spoke_error", spoke_err);
    r.scalar("max_projection_lipschitz", lip);
    r.scalar("max_area_ratio", area);
    r.check(at_most("max_distortion", max_of(&distortion), 4.0, Basis::ClosedForm));
    r.check(Assertion::new("spoke_identity", spoke_err, 0.0, 1e-9, Comparison::Absolute, Basis::Construction));
    r.check(at_most("projection_lipschitz", lip, 1.0 + 1e-9, Basis::Construction));
    r.check(at_most("area_ratio", area, K_AREA, Basis::ClosedForm));
    r.sequence("distortion", distortion);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FillingParams {
    pub triangles: usize,
    pub samples_per_edge: usize,
    pub density: usize,
    /// Bound `K` on the region-area and diameter ratios.
    pub k: f64,
}

impl Default for FillingParams {
    fn default() -> Self {
        Self { triangles: 200, samples_per_edge: 8, density: 0, k: L_CONFIG }
    }
}

fn filling_suite(p: &FillingParams, seed: u64) -> Result<ExperimentReport> {
    require(p.triangles >= 1 && p.samples_per_edge >= 2, "need triangles and ≥ 2 samples per edge")?;
    require(p.k >= 1.0, "K must be ≥ 1")?;
    let mut r = new_report("filling-suite", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut dom, mut lo, mut hi) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    let mut area = Vec::with_capacity(p.triangles);
    let mut diam: f64 = 0.0;
    let mut verified = 0usize;
    for _ in 0..p.triangles {
        let t = random_triangle(&mut rng, p.samples_per_edge)?;
        let [a, b, c] = t.edge_lengths;
        let h2 = heron(a, b, c);
        let (disk, rep) = fill_triangle(&t, h2, p.density)?;
        dom = dom.min(rep.min_domination);
        for x in rep.boundary_length_ratios {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        area.push(rep.area_ratio);
        diam = diam.max(rep.diam_ratio);
        if verify_filling(&disk, &t, &rep, h2)?.pass() {
            verified += 1;
        }
    }
    r.scalar("min_domination", dom);
    r.scalar("min_boundary_ratio", lo);
    r.scalar("max_boundary_ratio", hi);
    r.scalar("max_area_ratio", max_of(&area));
    r.scalar("max_diam_ratio", diam);
    r.scalar("verified", verified as f64);
    r.check(Assertion::new("domination", dom, 1.0, 1e-9, Comparison::AtLeast, Basis::Construction));
    r.check(at_least("boundary_ratio_low", lo, 1.0 - 1e-12, Basis::Construction));
    r.check(at_most("boundary_ratio_high", hi, 16.0, Basis::Construction));
    r.check(at_most("area_ratio", max_of(&area), p.k, Basis::ClosedForm));
    r.check(at_most("diam_ratio", diam, p.k, Basis::ClosedForm));
    r.check(Assertion::new("verified", verified as f64, p.triangles as f64, 0.0, Comparison::Absolute, Basis::Oracle));
    r.sequence("area_ratio", area);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproximateParams {
    pub grid: usize,
    pub schedule: Vec<f64>,
    pub options: ApproxOptions,
}

impl Default for ApproximateParams {
    fn default() -> Self {
        Self { grid: 64, schedule: vec![0.5, 0.25, 0.125], options: ApproxOptions::default() }
    }
}

fn approximate_schedule(p: &ApproximateParams) -> Result<ExperimentReport> {
    require(p.grid >= 2 && p.grid.is_multiple_of(2), "grid must be even and ≥ 2")?;
    require(!p.schedule.is_empty() && p.schedule.iter().all(|&e| e > 0.0), "schedule needs positive ε")?;
    let mut r = new_report("approximate", p)?;
    let mesh = spaces::gen_linf_square(p.grid)?;
    r.set_mesh(&mesh)?;
    let mut achieved = Vec::new();
    let mut cols: [Vec<f64>; 6] = Default::default();
    for &eps in &p.schedule {
        let a = approximate(&mesh, eps, &p.options)?;
        achieved.push(a.epsilon_achieved);
        for (col, v) in cols.iter_mut().zip([
            a.vertex_identity_error,
            a.vertex_identity_slack,
            a.area,
            a.area_lower_bound,
            a.area_upper_bound,
            a.retraction_distortion,
        ]) {
            col.push(v);
        }
        r.check(at_most(&format!("vertex_identity_{eps}"), a.vertex_identity_error, a.vertex_identity_slack, Basis::Construction));
        r.check(at_least(&format!("area_lower_{eps}"), a.area, a.area_lower_bound, Basis::ClosedForm));
        r.check(at_most(&format!("area_upper_{eps}"), a.area, a.area_upper_bound, Basis::ClosedForm));
    }
    let monotone = achieved.windows(2).all(|w| w[1] <= w[0]);
    r.check(Assertion::holds("epsilon_non_increasing", monotone, Basis::Construction));
    r.sequence("epsilon", p.schedule.clone());
    r.sequence("epsilon_achieved", achieved);
    for (name, col) in
        ["vertex_identity_error", "vertex_identity_slack", "area", "area_lower_bound", "area_upper_bound", "retraction_distortion"]
            .iter()
            .zip(cols)
    {
        r.sequence(name, col);
    }
    Ok(r)
}

// ---------------------------------------------------------------- example spaces

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CantorParams {
    pub spec: spaces::CantorSpec,
    pub grid: spaces::CantorGrid,
    pub axis_pairs: usize,
    pub rectangle_levels: Vec<usize>,
    pub rectangle_cells: usize,
    /// Levels at which the analytic `M_n` growth is tabulated.
    pub growth_levels: Vec<usize>,
    /// Point-condition ball: window, cell size, centre and `R`.
    pub point_window: [f64; 4],
    pub point_h: f64,
    pub point_centre: geom::Point,
    pub point_radius: f64,
    pub solver: SolverOptions,
}

impl Default for CantorParams {
    fn default() -> Self {
        Self {
            spec: spaces::CantorSpec::default(),
            grid: spaces::CantorGrid::default(),
            axis_pairs: 100,
            rectangle_levels: vec![1, 2, 3],
            rectangle_cells: 24,
            growth_levels: vec![1, 2, 3, 4, 5],
            point_window: [-0.35, -0.7, 0.4, 0.7],
            point_h: 1.0 / 48.0,
            point_centre: [0.0, 0.0],
            point_radius: 0.3,
            solver: SolverOptions::default(),
        }
    }
}

fn cantor_annuli(p: &CantorParams, seed: u64) -> Result<ExperimentReport> {
    require(p.axis_pairs >= 1 && p.rectangle_cells >= 2, "need axis pairs and ≥ 2 rectangle cells")?;
    require(p.point_h > 0.0 && p.point_radius > 0.0, "point ball needs h > 0 and R > 0")?;
    p.spec.validate()?;
    let mut r = new_report("cantor-annuli", p)?;
    let q = spaces::gen_cantor_quotient(&p.spec, &p.grid)?;
    r.set_mesh(&q.mesh)?;
    require(!q.axis.is_empty(), "the grid window must contain the axis")?;
    let adj = q.quotient_graph(1);

    let class_max = q
        .classes
        .iter()
        .map(|c| {
            let d = q.dr_from(&adj, &c[..1]);
            c.iter().map(|&v| d[v]).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    r.scalar("class_max_distance", class_max);
    r.check(Assertion::new("classes_collapsed", class_max, 0.0, 0.0, Comparison::Absolute, Basis::Construction));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut below): (f64, f64) = (0.0, 0.0);
    for _ in 0..p.axis_pairs {
        let a = q.axis[rng.gen_range(0..q.axis.len())];
        let b = q.axis[rng.gen_range(0..q.axis.len())];
        let d = q.dr_from(&adj, &[a])[b];
        let h = p.spec.axis_measure(q.x(a), q.x(b));
        below = below.max(h - d);
        if h > 0.0 {
            worst = worst.max((d - h).abs() / h);
        }
    }
    let (a, b) = (q.axis[0], *q.axis.last().expect("non-empty axis"));
    let d01 = q.dr_from(&adj, &[a])[b];
    r.scalar("axis_worst_relative_error", worst);
    r.scalar("axis_lower_bound_violation", below.max(0.0));
    r.scalar("dr_0_1", d01);
    r.check(at_most("axis_formula", worst, 0.02, Basis::Oracle));
    r.check(at_most("axis_lower_bound", below, 1e-9, Basis::ClosedForm));
    r.check(rel("dr_0_1", d01, p.spec.measure(), 0.02, Basis::Oracle));

    let (mut analytic, mut solved) = (Vec::new(), Vec::new());
    for &n in &p.rectangle_levels {
        let c = spaces::cantor_rectangle_moduli(&p.spec, n, p.rectangle_cells, &p.solver)?;
        r.check(rel(&format!("rectangle_modulus_{n}"), c.solved.value, c.analytic, 0.10, Basis::ClosedForm));
        analytic.push(c.analytic);
        solved.push(c.solved.value);
    }
    r.sequence("rectangle_analytic", analytic);
    r.sequence("rectangle_solved", solved);

    // M_n against n⁻¹2ⁿ
    let growth: Vec<f64> = p
        .growth_levels
        .iter()
        .map(|&n| p.spec.rectangle_modulus(n).map(|m| m * n as f64 / 2f64.powi(n as i32)))
        .collect::<Result<_>>()?;
    if !growth.is_empty() {
        let spread = max_of(&growth) / min_of(&growth);
        r.scalar("growth_spread", spread);
        r.check(at_most("growth_comparable", spread, 4.0, Basis::ClosedForm));
    }
    r.sequence("growth_ratio", growth);

    let g = spaces::CantorGrid {
        h: p.point_h,
        window: Some(p.point_window),
        min_gap: p.point_h / 4.0,
        ..spaces::CantorGrid::default()
    };
    let pq = spaces::gen_cantor_quotient(&p.spec, &g)?;
    let centre = pq.vertex_at(p.point_centre).ok_or_else(|| Error::ConfigInvalid("point centre is not a grid vertex".into()))?;
    let dist = pq.dr_from(&pq.quotient_graph(1), &[centre]);
    let radii: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|k| p.point_radius / k).collect();
    let vals: Vec<f64> = modulus_point_condition(&pq.mesh, &dist, p.point_radius, &radii, &pq.classes, &p.solver)?
        .iter()
        .map(|m| m.value)
        .collect();
    let floor = p.spec.chain_floor();
    r.scalar("chain_floor", floor);
    r.check(at_least("point_condition_floor", min_of(&vals), 0.5 * floor, Basis::ClosedForm));
    r.sequence("point_radii", radii);
    r.sequence("point_moduli", vals);
    Ok(r)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightedPlaneParams {
    pub spec: spaces::WeightedPlaneSpec,
    pub solver: SolverOptions,
}

fn weighted_plane(p: &WeightedPlaneParams) -> Result<ExperimentReport> {
    let mut r = new_report("weighted-plane", p)?;
    r.set_mesh(&spaces::gen_weighted_plane(p.spec.n, &p.spec.zero_cells())?)?;
    let w = spaces::weighted_plane_chain(&p.spec, &p.solver)?;
    r.scalar("chain_bound", w.chain_bound);
    r.scalar("point_modulus", w.point_modulus.value);
    r.scalar("big_r", w.big_r);
    r.check(at_most("point_within_chain_bound", w.point_modulus.value, 3.0 * w.chain_bound, Basis::ClosedForm));
    r.sequence("ring_moduli", w.ring_moduli);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlitParams {
    pub ns: Vec<usize>,
    pub resolution: usize,
    /// Disk samples: rings × points per ring.
    pub disk_rings: usize,
    pub disk_angles: usize,
    /// Random sources for the intrinsic ≥ ambient check.
    pub sources: usize,
    pub subdivision: usize,
}

impl Default for SlitParams {
    fn default() -> Self {
        Self { ns: vec![2, 4, 8, 16], resolution: 2, disk_rings: 40, disk_angles: 360, sources: 6, subdivision: 2 }
    }
}

fn slit_convergence(p: &SlitParams, seed: u64) -> Result<ExperimentReport> {
    require(!p.ns.is_empty() && p.ns.iter().all(|&n| n >= 2), "slit counts must be ≥ 2")?;
    require(p.disk_rings >= 1 && p.disk_angles >= 4 && p.sources >= 1, "need disk samples and sources")?;
    let mut r = new_report("slit-convergence", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disk = vec![[0.0, 0.0]];
    for i in 1..=p.disk_rings {
        let rad = i as f64 / p.disk_rings as f64;
        disk.extend((0..p.disk_angles).map(|j| {
            let t = 2.0 * PI * j as f64 / p.disk_angles as f64;
            [rad * t.cos(), rad * t.sin()]
        }));
    }
    let (mut eps, mut scaled, mut across, mut ambient_across) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut below: f64 = 0.0;
    for &n in &p.ns {
        let m = spaces::gen_slit_disk(n, false, p.resolution)?;
        if n == p.ns[0] {
            r.set_mesh(&m)?;
        }
        let c = m.coords().expect("coordinates");
        // inclusion into the disk: the ambient metric is restricted, so the
        // distortion vanishes and ε is the density defect
        let cod: Vec<geom::Point> = c.iter().copied().chain(disk.iter().copied()).collect();
        let map: Vec<usize> = (0..c.len()).collect();
        let e = crate::approx::epsilon_isometry_check(
            c.len(),
            |i, j| geom::euclid(c[i], c[j]),
            cod.len(),
            |i, j| geom::euclid(cod[i], cod[j]),
            &map,
        );
        eps.push(e.epsilon);
        scaled.push(e.epsilon * n as f64);
        // intrinsic distances never undercut the ambient ones
        for _ in 0..p.sources {
            let s = rng.gen_range(0..m.n_vertices());
            let d = measure::distance_function(&m, &[s], p.subdivision);
            for v in 0..m.n_vertices() {
                below = below.max(geom::euclid(c[s], c[v]) - d[v]);
            }
        }
        // the outer corners of the slit: any path between them passes the
        // slit's inner end at radius 1/2, so it is at least 1 long
        let outer = vertices_where(&m, |q| (geom::euclid(q, [0.0, 0.0]) - 1.0).abs() < 1e-9);
        let angle = |v: usize| c[v][1].atan2(c[v][0]);
        let above = *outer.iter().filter(|&&v| angle(v) > 0.0).min_by(|&&a, &&b| angle(a).total_cmp(&angle(b))).expect("upper corner");
        let under = *outer.iter().filter(|&&v| angle(v) < 0.0).max_by(|&&a, &&b| angle(a).total_cmp(&angle(b))).expect("lower corner");
        across.push(measure::distance_function(&m, &[above], p.subdivision)[under]);
        ambient_across.push(geom::euclid(c[above], c[under]));
    }
    let monotone = eps.windows(2).all(|w| w[1] <= w[0]);
    r.check(Assertion::holds("epsilon_decreasing", monotone, Basis::Oracle));
    r.check(at_most("intrinsic_dominates_ambient", below, 1e-9, Basis::Construction));
    r.check(at_least("detour_across_slit", min_of(&across), 1.0, Basis::ClosedForm));
    r.check(Assertion::holds(
        "strict_across_slit",
        across.iter().zip(&ambient_across).all(|(d, a)| d > a),
        Basis::Construction,
    ));
    r.scalar("max_n_times_epsilon", max_of(&scaled));
    r.sequence("n", p.ns.iter().map(|&n| n as f64).collect());
    r.sequence("epsilon", eps);
    r.sequence("n_times_epsilon", scaled);
    r.sequence("intrinsic_across", across);
    r.sequence("ambient_across", ambient_across);
    Ok(r)
}

// ---------------------------------------------------------------- reciprocity

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReciprocityParams {
    pub grid: usize,
    /// Random lattice rectangles per square host.
    pub quads: usize,
    pub min_cells: usize,
    pub cantor_level: usize,
    pub cantor_deltas: Vec<f64>,
    /// Cell size of the Cantor quads as a fraction of δ.
    pub cantor_cells_per_delta: f64,
    pub solver: SolverOptions,
}

impl Default for ReciprocityParams {
    fn default() -> Self {
        Self {
            grid: 16,
            quads: 25,
            min_cells: 2,
            cantor_level: 1,
            cantor_deltas: vec![0.4, 0.2, 0.1, 0.05],
            cantor_cells_per_delta: 3.0,
            solver: SolverOptions::default(),
        }
    }
}

fn reciprocity_scan(p: &ReciprocityParams, seed: u64) -> Result<ExperimentReport> {
    require(p.min_cells >= 1 && p.grid > p.min_cells, "grid must exceed min_cells")?;
    require(p.cantor_cells_per_delta >= 1.0, "Cantor quads need ≥ 1 cell per δ")?;
    let mut r = new_report("reciprocity-scan", p)?;
    let floor = PI * PI / 16.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.grid;
    for (norm, tag) in [(Norm::L2, "euclid"), (Norm::Linf, "linf")] {
        let mesh = spaces::gen_square(n, norm)?;
        if norm == Norm::L2 {
            r.set_mesh(&mesh)?;
        }
        let mut products = Vec::with_capacity(p.quads);
        for _ in 0..p.quads {
            let w = rng.gen_range(p.min_cells..=n);
            let h = rng.gen_range(p.min_cells..=n);
            let (i0, j0) = (rng.gen_range(0..=n - w), rng.gen_range(0..=n - h));
            let q = lattice_quad(&mesh, n, i0, j0, i0 + w, j0 + h);
            products.push(modulus_quad(&mesh, &q, &[], &p.solver)?.product);
        }
        r.scalar(&format!("{tag}_min_product"), min_of(&products));
        r.scalar(&format!("{tag}_max_product"), max_of(&products));
        r.check(Assertion::new(&format!("{tag}_lower_reciprocity"), min_of(&products), floor, 0.1, Comparison::AtLeast, Basis::ClosedForm));
        r.sequence(&format!("{tag}_products"), products);
    }

    // quads shrinking onto an H-shape of the Cantor quotient
    let mut products = Vec::with_capacity(p.cantor_deltas.len());
    for &delta in &p.cantor_deltas {
        let (q, quad) = spaces::cantor_collar_quad(&spaces::CantorSpec::default(), p.cantor_level, delta, delta / p.cantor_cells_per_delta)?;
        products.push(modulus_quad(&q.mesh, &quad, &q.classes, &p.solver)?.product);
    }
    r.check(Assertion::new("cantor_lower_reciprocity", min_of(&products), floor, 0.1, Comparison::AtLeast, Basis::ClosedForm));
    r.check(Assertion::holds("cantor_products_increasing", products.windows(2).all(|w| w[1] > w[0]), Basis::ClosedForm));
    r.check(Assertion::new("cantor_products_unbounded", max_of(&products), 10.0, 0.0, Comparison::AtLeast, Basis::ClosedForm));
    r.sequence("cantor_deltas", p.cantor_deltas.clone());
    r.sequence("cantor_products", products);
    Ok(r)
}
