//! Generators for test hosts and example spaces: flat and ℓ∞ squares,
//! polar and square-shell disks, slit disks, weighted planes and the
//! Cantor quotient plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Norm, Point};
use crate::graph::{self, Adjacency, DisjointSets};
use crate::metric::{MetricSurfaceMesh, ZERO_LENGTH_FLOOR};
use crate::modulus::{modulus_connect, modulus_point_condition, ConnectSetup, ModulusResult, Quad, SolverOptions};

/// Tensor grid on the given (sorted) lines. Cells are split along the
/// diagonal pointing at `center`, so that norm distances to `center` are
/// linear on every triangle of a uniform grid.
pub fn grid(xs: &[f64], ys: &[f64], center: Point) -> (Vec<Point>, Vec<[usize; 3]>) {
    let nx = xs.len();
    let mut coords = Vec::with_capacity(nx * ys.len());
    for &y in ys {
        for &x in xs {
            coords.push([x, y]);
        }
    }
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ys.len() - 1));
    for j in 0..ys.len() - 1 {
        for i in 0..nx - 1 {
            let v00 = j * nx + i;
            let (v10, v01, v11) = (v00 + 1, v00 + nx, v00 + nx + 1);
            let mx = 0.5 * (xs[i] + xs[i + 1]) - center[0];
            let my = 0.5 * (ys[j] + ys[j + 1]) - center[1];
            if mx * my > 0.0 {
                faces.push([v00, v10, v11]);
                faces.push([v00, v11, v01]);
            } else {
                faces.push([v00, v10, v01]);
                faces.push([v10, v11, v01]);
            }
        }
    }
    (coords, faces)
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

/// `[0,a] × [0,b]` with `nx × ny` cells under `norm`.
pub fn gen_rectangle(a: f64, b: f64, nx: usize, ny: usize, norm: Norm) -> Result<MetricSurfaceMesh> {
    if nx < 1 || ny < 1 || !(a > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidMesh("rectangle needs positive sides and cells".into()));
    }
    let (coords, faces) = grid(&uniform(0.0, a, nx), &uniform(0.0, b, ny), [0.5 * a, 0.5 * b]);
    MetricSurfaceMesh::from_coords(coords, faces, norm)
}

/// Unit square with `n` cells per side (`2n²` triangles), Euclidean.
pub fn gen_euclid_square(n: usize) -> Result<MetricSurfaceMesh> {
    gen_square(n, Norm::L2)
}

/// Unit square with `n` cells per side under the ℓ∞ norm (area weight π/4).
pub fn gen_linf_square(n: usize) -> Result<MetricSurfaceMesh> {
    gen_square(n, Norm::Linf)
}

pub fn gen_square(n: usize, norm: Norm) -> Result<MetricSurfaceMesh> {
    if n < 2 {
        return Err(Error::InvalidMesh("square grid needs n ≥ 2".into()));
    }
    gen_rectangle(1.0, 1.0, n, n, norm)
}

/// Vertex index of grid point `(i, j)` in a square of `n` cells per side.
pub fn square_vertex(n: usize, i: usize, j: usize) -> usize {
    j * (n + 1) + i
}

/// Shape of the rings of a shell mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShellShape {
    Circle,
    Square,
}

/// Point at perimeter parameter `u ∈ [0,1)` on the shell of radius `r`.
fn shell_point(shape: ShellShape, r: f64, u: f64) -> Point {
    match shape {
        ShellShape::Circle => {
            let t = std::f64::consts::TAU * u;
            [r * t.cos(), r * t.sin()]
        }
        ShellShape::Square => {
            // start at (r, 0), counter-clockwise; corners at u = 1/8, 3/8, ...
            let s = 8.0 * u;
            let (x, y) = if s < 1.0 {
                (1.0, s)
            } else if s < 3.0 {
                (2.0 - s, 1.0)
            } else if s < 5.0 {
                (-1.0, 4.0 - s)
            } else if s < 7.0 {
                (s - 6.0, -1.0)
            } else {
                (1.0, s - 8.0)
            };
            [r * x, r * y]
        }
    }
}

/// Concentric shells around the origin at the given increasing radii, each
/// with `sectors` vertices; with `center` a vertex at the origin is joined
/// to the first shell. Square shells need `sectors` divisible by 8.
pub fn gen_shells(
    shape: ShellShape,
    norm: Norm,
    radii: &[f64],
    sectors: usize,
    center: bool,
) -> Result<MetricSurfaceMesh> {
    let (coords, faces) = shell_complex(shape, radii, sectors, center)?;
    MetricSurfaceMesh::from_coords(coords, faces, norm)
}

fn shell_complex(
    shape: ShellShape,
    radii: &[f64],
    sectors: usize,
    center: bool,
) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    if radii.is_empty() || sectors < 3 || radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::RadiusOrder("shell radii must be positive and increasing".into()));
    }
    if shape == ShellShape::Square && !sectors.is_multiple_of(8) {
        return Err(Error::InvalidMesh("square shells need sectors divisible by 8".into()));
    }
    if !center && radii.len() < 2 {
        return Err(Error::InvalidMesh("an annulus needs two shells".into()));
    }
    let mut coords = Vec::new();
    let off = usize::from(center);
    if center {
        coords.push([0.0, 0.0]);
    }
    for &r in radii {
        for s in 0..sectors {
            coords.push(shell_point(shape, r, s as f64 / sectors as f64));
        }
    }
    let v = |k: usize, s: usize| off + k * sectors + s % sectors;
    let mut faces = Vec::new();
    if center {
        for s in 0..sectors {
            faces.push([0, v(0, s), v(0, s + 1)]);
        }
    }
    for k in 0..radii.len() - 1 {
        for s in 0..sectors {
            let (a, b, c, d) = (v(k, s), v(k, s + 1), v(k + 1, s), v(k + 1, s + 1));
            if (k + s) % 2 == 0 {
                faces.push([a, b, d]);
                faces.push([a, d, c]);
            } else {
                faces.push([a, b, c]);
                faces.push([b, d, c]);
            }
        }
    }
    Ok((coords, faces))
}

/// Geometric radii `r0·q^k` from `r0` to `r1` in `steps` steps, inclusive.
pub fn geometric_radii(r0: f64, r1: f64, steps: usize) -> Vec<f64> {
    let q = (r1 / r0).ln() / steps as f64;
    (0..=steps)
        .map(|k| if k == steps { r1 } else { r0 * (q * k as f64).exp() })
        .collect()
}

/// Round annulus `r ≤ |x| ≤ R` with log-spaced rings.
pub fn gen_annulus(r: f64, big_r: f64, sectors: usize, rings: usize) -> Result<MetricSurfaceMesh> {
    if !(0.0 < r && r < big_r) {
        return Err(Error::RadiusOrder(format!("need 0 < r < R, got {r}, {big_r}")));
    }
    gen_shells(ShellShape::Circle, Norm::L2, &geometric_radii(r, big_r, rings), sectors, false)
}

/// Disk of radius `big_r` with a central fan and log-spaced rings down to
/// `r_min`, so that every radius `big_r·2⁻ᵏ` down to `r_min` is a ring when
/// `rings_per_octave` divides evenly.
pub fn gen_polar_disk(
    shape: ShellShape,
    norm: Norm,
    big_r: f64,
    r_min: f64,
    rings_per_octave: usize,
    sectors: usize,
) -> Result<MetricSurfaceMesh> {
    let octaves = (big_r / r_min).log2().round() as usize;
    let radii = geometric_radii(big_r / 2f64.powi(octaves as i32), big_r, octaves * rings_per_octave);
    gen_shells(shape, norm, &radii, sectors, true)
}

/// Unit disk with one (or `n`) removed sectors of angular width `π/n` in
/// the outer half: the slit disks of the ambient plane. Ambient metric is
/// Euclidean. `res` controls the mesh resolution.
pub fn gen_slit_disk(n: usize, multi: bool, res: usize) -> Result<MetricSurfaceMesh> {
    if n < 2 || res < 1 {
        return Err(Error::InvalidMesh("slit disk needs n ≥ 2".into()));
    }
    let sectors = 8 * n * res;
    let m = 4 * res;
    let radii: Vec<f64> = (1..=2 * m).map(|k| k as f64 / (2 * m) as f64).collect();
    let (coords, faces) = shell_complex(ShellShape::Circle, &radii, sectors, true)?;
    let half = std::f64::consts::PI / (2.0 * n as f64);
    let centers: Vec<f64> = if multi {
        (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect()
    } else {
        vec![0.0]
    };
    let removed = |p: Point| {
        let r = geom::euclid(p, [0.0, 0.0]);
        let th = p[1].atan2(p[0]);
        r > 0.5
            && centers.iter().any(|&c| {
                let mut d = (th - c).rem_euclid(std::f64::consts::TAU);
                if d > std::f64::consts::PI {
                    d -= std::f64::consts::TAU;
                }
                d.abs() < half
            })
    };
    let kept: Vec<[usize; 3]> = faces
        .into_iter()
        .filter(|t| {
            let c = geom::scale(geom::add(geom::add(coords[t[0]], coords[t[1]]), coords[t[2]]), 1.0 / 3.0);
            !removed(c)
        })
        .collect();
    let (coords, faces) = compact(&coords, kept);
    MetricSurfaceMesh::from_coords(coords, faces, Norm::L2)
}

/// Square frame `[0,3]² ∖ (1,2)²` with `n` cells per unit length. Returns
/// the mesh with its inner and outer boundary vertices.
pub fn gen_square_frame(n: usize) -> Result<(MetricSurfaceMesh, Vec<usize>, Vec<usize>)> {
    if n < 1 {
        return Err(Error::InvalidMesh("frame needs n ≥ 1".into()));
    }
    let lines = uniform(0.0, 3.0, 3 * n);
    let (coords, faces) = grid(&lines, &lines, [1.5, 1.5]);
    let hole = |p: Point| p[0] > 1.0 && p[0] < 2.0 && p[1] > 1.0 && p[1] < 2.0;
    let kept = faces
        .into_iter()
        .filter(|t| !hole(geom::scale(geom::add(geom::add(coords[t[0]], coords[t[1]]), coords[t[2]]), 1.0 / 3.0)))
        .collect();
    let (coords, faces) = compact(&coords, kept);
    let tol = 1e-12;
    let on = |p: Point, lo: f64, hi: f64| {
        let inside = p.iter().all(|&c| c >= lo - tol && c <= hi + tol);
        inside && p.iter().any(|&c| (c - lo).abs() < tol || (c - hi).abs() < tol)
    };
    let inner = (0..coords.len()).filter(|&v| on(coords[v], 1.0, 2.0)).collect();
    let outer = (0..coords.len()).filter(|&v| on(coords[v], 0.0, 3.0)).collect();
    Ok((MetricSurfaceMesh::from_coords(coords, faces, Norm::L2)?, inner, outer))
}

/// Drops unreferenced vertices, renumbering in order.
fn compact(coords: &[Point], faces: Vec<[usize; 3]>) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut map = vec![graph::NONE; coords.len()];
    for t in &faces {
        for &v in t {
            map[v] = 0;
        }
    }
    let mut out = Vec::new();
    for (v, m) in map.iter_mut().enumerate() {
        if *m == 0 {
            *m = out.len();
            out.push(coords[v]);
        }
    }
    let faces = faces.into_iter().map(|t| t.map(|v| map[v])).collect();
    (out, faces)
}

/// Square rings of cells (by Chebyshev cell radius around the centre) kept
/// at unit weight in a weighted plane; everything else has weight zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPlaneSpec {
    /// Cells per side of the unit square; must be even.
    pub n: usize,
    /// Half-open ranges `[a, b)` of cell radii forming the unit-weight rings,
    /// innermost first. Cell radius of the four central cells is 0.
    pub rings: Vec<(usize, usize)>,
}

impl Default for WeightedPlaneSpec {
    fn default() -> Self {
        Self { n: 64, rings: vec![(2, 4), (6, 9), (11, 15), (17, 22), (24, 30)] }
    }
}

impl WeightedPlaneSpec {
    pub fn cell_radius(&self, i: usize, j: usize) -> usize {
        let h = self.n / 2;
        let r = |k: usize| if k >= h { k - h } else { h - 1 - k };
        r(i).max(r(j))
    }

    /// Ring index containing the cell, if any.
    pub fn ring_of(&self, i: usize, j: usize) -> Option<usize> {
        let c = self.cell_radius(i, j);
        self.rings.iter().position(|&(a, b)| a <= c && c < b)
    }

    /// Cells of zero weight: everything outside the rings.
    pub fn zero_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for i in 0..self.n {
                if self.ring_of(i, j).is_none() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::ConfigInvalid("weighted plane needs an even n ≥ 2".into()));
        }
        let mut prev = 0;
        for &(a, b) in &self.rings {
            if a >= b || a < prev || b > self.n / 2 {
                return Err(Error::ConfigInvalid("rings must be disjoint, increasing and inside".into()));
            }
            prev = b;
        }
        Ok(())
    }
}

/// Unit-square grid in which the cells in `zero` have weight zero: lengths
/// inside them vanish (floored) while their area is retained.
pub fn gen_weighted_plane(n: usize, zero: &[(usize, usize)]) -> Result<MetricSurfaceMesh> {
    let mesh = gen_euclid_square(n)?;
    let mut scale = vec![1.0; mesh.n_faces()];
    for &(i, j) in zero {
        if i >= n || j >= n {
            return Err(Error::InvalidMesh(format!("cell ({i},{j}) outside the grid")));
        }
        let f = 2 * (j * n + i);
        scale[f] = 0.0;
        scale[f + 1] = 0.0;
    }
    mesh.with_face_scale(scale)
}

/// Ring moduli of a weighted plane and the point-condition modulus at the
/// centre, with the chain bound `2 (Σ 1/M_i)⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPlaneChain {
    /// Modulus of the curves joining the two sides of each ring, solved
    /// on the ring alone.
    pub ring_moduli: Vec<f64>,
    pub chain_bound: f64,
    /// `Mod Γ(B̄(a,r), X∖B(a,R))` with `a` the centre, `R` the distance to
    /// the outside of the last ring and `r = R/64`.
    pub point_modulus: ModulusResult,
    pub big_r: f64,
}

pub fn weighted_plane_chain(spec: &WeightedPlaneSpec, opts: &SolverOptions) -> Result<WeightedPlaneChain> {
    spec.validate()?;
    if spec.rings.is_empty() {
        return Err(Error::ConfigInvalid("weighted plane needs at least one ring".into()));
    }
    let n = spec.n;
    let mesh = gen_weighted_plane(n, &spec.zero_cells())?;
    let h = 1.0 / n as f64;
    let half = (n / 2) as i64;
    // Chebyshev distance of a grid vertex from the centre, in cells
    let vrad = |v: usize| {
        let (i, j) = ((v % (n + 1)) as i64, (v / (n + 1)) as i64);
        (i - half).unsigned_abs().max((j - half).unsigned_abs()) as usize
    };
    let mut ring_moduli = Vec::with_capacity(spec.rings.len());
    for &(a, b) in &spec.rings {
        let region: Vec<bool> = (0..mesh.n_faces())
            .map(|f| {
                let cell = f / 2;
                let c = spec.cell_radius(cell % n, cell / n);
                a <= c && c < b
            })
            .collect();
        let inner: Vec<usize> = (0..mesh.n_vertices()).filter(|&v| vrad(v) == a).collect();
        let outer: Vec<usize> = (0..mesh.n_vertices()).filter(|&v| vrad(v) == b).collect();
        let setup = ConnectSetup { region: Some(&region), support: None, classes: &[] };
        ring_moduli.push(modulus_connect(&mesh, &inner, &outer, &setup, opts)?.value);
    }
    let chain_bound = 2.0 / ring_moduli.iter().map(|m| 1.0 / m).sum::<f64>();
    let width: usize = spec.rings.iter().map(|&(a, b)| b - a).sum();
    let big_r = width as f64 * h * (1.0 - 1e-9);
    let centre = square_vertex(n, n / 2, n / 2);
    let d = crate::measure::distance_function(&mesh, &[centre], 1);
    let mut vals = modulus_point_condition(&mesh, &d, big_r, &[big_r / 64.0], &[], opts)?;
    Ok(WeightedPlaneChain { ring_moduli, chain_bound, point_modulus: vals.remove(0), big_r })
}

/// Fat Cantor set description: level-`n` removed middle fractions `a_n`,
/// H-shape half-heights `η(J_n) = 1/n`, and the number of levels meshed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    /// `a_1, a_2, ...`; entries beyond `levels` only feed the measure oracle.
    pub gap_fractions: Vec<f64>,
    pub levels: usize,
}

impl Default for CantorSpec {
    fn default() -> Self {
        Self { gap_fractions: (1..=40).map(|n| 4f64.powi(-n)).collect(), levels: 6 }
    }
}

impl CantorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.levels > 8 {
            return Err(Error::SpecInconsistent(format!("levels {} outside 1..=8", self.levels)));
        }
        if self.gap_fractions.len() < self.levels + 1 {
            return Err(Error::SpecInconsistent("need a gap fraction beyond the last level".into()));
        }
        if let Some(a) = self.gap_fractions.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::SpecInconsistent(format!("gap fraction {a} outside (0,1)")));
        }
        Ok(())
    }

    pub fn eta(&self, n: usize) -> f64 {
        1.0 / n as f64
    }

    /// Length of every level-`n` interval.
    pub fn interval_length(&self, n: usize) -> f64 {
        self.gap_fractions[..n].iter().fold(1.0, |l, a| l * (1.0 - a) / 2.0)
    }

    /// Level-`n` intervals, left to right.
    pub fn intervals(&self, n: usize) -> Vec<(f64, f64)> {
        let mut cur = vec![(0.0, 1.0)];
        for a in &self.gap_fractions[..n] {
            cur = cur
                .into_iter()
                .flat_map(|(l, r)| {
                    let w = (r - l) * (1.0 - a) / 2.0;
                    [(l, l + w), (r - w, r)]
                })
                .collect();
        }
        cur
    }

    /// Gaps `J` removed at level `n ≥ 1`, left to right.
    pub fn gaps(&self, n: usize) -> Vec<(f64, f64)> {
        self.intervals(n).chunks(2).map(|c| (c[0].1, c[1].0)).collect()
    }

    /// `H¹(C)` from the full product of the gap fractions.
    pub fn measure(&self) -> f64 {
        self.gap_fractions.iter().map(|a| 1.0 - a).product()
    }

    /// `H¹(C ∩ [x, y])` using every listed gap fraction.
    pub fn axis_measure(&self, x: f64, y: f64) -> f64 {
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        let tail: Vec<f64> = {
            let mut t = vec![1.0; self.gap_fractions.len() + 1];
            for k in (0..self.gap_fractions.len()).rev() {
                t[k] = t[k + 1] * (1.0 - self.gap_fractions[k]);
            }
            t
        };
        fn rec(s: &CantorSpec, tail: &[f64], l: f64, r: f64, k: usize, x: f64, y: f64) -> f64 {
            if r <= x || l >= y {
                return 0.0;
            }
            if x <= l && r <= y {
                return (r - l) * tail[k];
            }
            if k == s.gap_fractions.len() {
                return (r.min(y) - l.max(x)) * tail[k];
            }
            let w = (r - l) * (1.0 - s.gap_fractions[k]) / 2.0;
            rec(s, tail, l, l + w, k + 1, x, y) + rec(s, tail, r - w, r, k + 1, x, y)
        }
        rec(self, &tail, 0.0, 1.0, 0, x, y)
    }

    /// `M_n = η(J_{n+1}) / H¹(I_{n+1})`.
    pub fn rectangle_modulus(&self, n: usize) -> Result<f64> {
        if n == 0 || n + 1 >= self.gap_fractions.len() {
            return Err(Error::LevelOutOfRange(n));
        }
        Ok(self.eta(n + 1) / self.interval_length(n + 1))
    }

    /// Chain lower bound `(2 Σ_n M_n^{-1/2})⁻²` over all listed levels.
    pub fn chain_floor(&self) -> f64 {
        let s: f64 = (1..self.gap_fractions.len() - 1)
            .map(|n| self.rectangle_modulus(n).map(|m| m.powf(-0.5)).unwrap_or(0.0))
            .sum();
        (2.0 * s).powi(-2)
    }

    /// Rectangle `R_n` for `x₀ = 0`: the level-(n+1) interval between
    /// `J_{n+1}` and `J_n`, times `[0, η(J_{n+1})]`.
    pub fn rectangle(&self, n: usize) -> Result<[f64; 4]> {
        if n == 0 || n >= self.levels {
            return Err(Error::LevelOutOfRange(n));
        }
        let l_n = self.interval_length(n);
        let l_n1 = self.interval_length(n + 1);
        Ok([l_n - l_n1, 0.0, l_n, self.eta(n + 1)])
    }
}

/// Planar grid with the H-shapes of a Cantor set collapsed.
#[derive(Debug, Clone)]
pub struct QuotientPlaneMesh {
    pub mesh: MetricSurfaceMesh,
    pub spec: CantorSpec,
    /// Vertex sets of the collapsed H-shapes, one per gap (level order).
    pub classes: Vec<Vec<usize>>,
    /// Class index per vertex, or `graph::NONE`.
    pub class_of: Vec<usize>,
    /// Vertices on the axis segment `[0,1] × {0}`, sorted by `x`.
    pub axis: Vec<usize>,
    /// Mesh edges lying on H-shapes.
    pub collapsed_edges: Vec<usize>,
}

/// Mesh resolution and extent for the Cantor quotient plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorGrid {
    /// Maximum cell width / height.
    pub h: f64,
    /// Horizontal margin around `[0,1]`.
    pub margin_x: f64,
    /// Half-height of the meshed region (must exceed η(J_1) = 1).
    pub half_height: f64,
    /// Extra horizontal grid lines `y = ±w`.
    pub extra_y: Vec<f64>,
    /// Mesh only `[x0, x1] × [y0, y1]` (H-shapes are clipped to it)
    /// instead of the full margin box.
    #[serde(default)]
    pub window: Option<[f64; 4]>,
    /// Gaps narrower than this are meshed as a single vertical line at the
    /// gap's left end (their two verticals merge); distances change by at
    /// most the gap width.
    #[serde(default)]
    pub min_gap: f64,
}

impl Default for CantorGrid {
    fn default() -> Self {
        Self { h: 1.0 / 48.0, margin_x: 0.25, half_height: 1.25, extra_y: Vec::new(), window: None, min_gap: 0.0 }
    }
}

impl CantorGrid {
    fn bounds(&self) -> [f64; 4] {
        self.window.unwrap_or([-self.margin_x, -self.half_height, 1.0 + self.margin_x, self.half_height])
    }
}

fn fill_lines(mut pts: Vec<f64>, h: f64) -> Vec<f64> {
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        let k = ((w[1] - w[0]) / h).ceil().max(1.0) as usize;
        for i in 1..=k {
            out.push(if i == k { w[1] } else { w[0] + (w[1] - w[0]) * i as f64 / k as f64 });
        }
    }
    out
}

pub fn gen_cantor_quotient(spec: &CantorSpec, g: &CantorGrid) -> Result<QuotientPlaneMesh> {
    spec.validate()?;
    let [x0, y0, x1, y1] = g.bounds();
    if !(g.h > 0.0) || !(x1 > x0 && y1 > y0) {
        return Err(Error::SpecInconsistent("empty grid".into()));
    }
    if g.window.is_none() && !(g.half_height > 1.0 && g.margin_x > 0.0) {
        return Err(Error::SpecInconsistent("grid must contain every H-shape".into()));
    }
    let tol = 1e-12;
    let inside = |t: f64, lo: f64, hi: f64| t >= lo - tol && t <= hi + tol;
    let gap = |l: f64, r: f64| if r - l < g.min_gap { (l, l) } else { (l, r) };
    let mut xs = vec![x0, x1, 0.0, 1.0];
    for n in 1..=spec.levels {
        for (l, r) in spec.gaps(n) {
            let (l, r) = gap(l, r);
            xs.push(l);
            xs.push(r);
        }
    }
    let mut ys = vec![0.0, y0, y1];
    for n in 1..=spec.levels {
        ys.push(spec.eta(n));
        ys.push(-spec.eta(n));
    }
    for &w in &g.extra_y {
        ys.push(w);
        ys.push(-w);
    }
    xs.retain(|&x| inside(x, x0, x1));
    ys.retain(|&y| inside(y, y0, y1));
    let xs = fill_lines(xs, g.h);
    let ys = fill_lines(ys, g.h);
    let (coords, faces) = grid(&xs, &ys, [0.5, 0.0]);
    let mesh = MetricSurfaceMesh::from_coords(coords, faces, Norm::L2)?;

    let nx = xs.len();
    let find = |v: &[f64], t: f64| v.iter().position(|&s| (s - t).abs() < tol);
    let axis_row = find(&ys, 0.0);
    let mut sets = DisjointSets::new(mesh.n_vertices());
    let mut collapsed = Vec::new();
    let mut class_roots = Vec::new();
    for n in 1..=spec.levels {
        let eta = spec.eta(n);
        // rows spanned by the H-shape inside the window
        let ylo = ys.iter().position(|&y| y >= -eta - tol).unwrap_or(ys.len());
        let yhi = ys.iter().rposition(|&y| y <= eta + tol).unwrap_or(0);
        for (l, r) in spec.gaps(n) {
            let (l, r) = gap(l, r);
            let mut segs = Vec::new();
            let il = find(&xs, l);
            let ir = find(&xs, r);
            for i in [il, ir].into_iter().flatten() {
                for j in ylo..yhi.max(ylo) {
                    segs.push((j * nx + i, (j + 1) * nx + i));
                }
            }
            if let Some(y0) = axis_row {
                let a = il.unwrap_or(0);
                let b = ir.unwrap_or(nx - 1);
                if xs[a] < r && xs[b] > l {
                    for i in a..b {
                        segs.push((y0 * nx + i, y0 * nx + i + 1));
                    }
                }
            }
            let Some(&(root, _)) = segs.first() else { continue };
            for (a, b) in segs {
                sets.union(a, b);
                collapsed.push(mesh.edge_between(a, b).expect("grid edge"));
            }
            class_roots.push(root);
        }
    }
    let mesh = mesh.with_edge_lengths(&collapsed.iter().map(|&e| (e, ZERO_LENGTH_FLOOR)).collect::<Vec<_>>())?;
    let mut class_of = vec![graph::NONE; mesh.n_vertices()];
    let mut classes = vec![Vec::new(); class_roots.len()];
    let root_index: std::collections::HashMap<usize, usize> =
        class_roots.iter().enumerate().map(|(k, &v)| (sets.find(v), k)).collect();
    for v in 0..mesh.n_vertices() {
        if let Some(&k) = root_index.get(&sets.find(v)) {
            class_of[v] = k;
            classes[k].push(v);
        }
    }
    let axis = axis_row
        .map(|y0| (0..nx).filter(|&i| xs[i] >= 0.0 && xs[i] <= 1.0).map(|i| y0 * nx + i).collect())
        .unwrap_or_default();
    collapsed.sort_unstable();
    collapsed.dedup();
    Ok(QuotientPlaneMesh { mesh, spec: spec.clone(), classes, class_of, axis, collapsed_edges: collapsed })
}

impl QuotientPlaneMesh {
    /// Steiner graph of the mesh with each class contracted by zero-length
    /// links to its first vertex.
    pub fn quotient_graph(&self, subdivision: usize) -> Adjacency {
        let mut adj = self.mesh.steiner_graph(subdivision).adj;
        for c in &self.classes {
            let r = c[0];
            for &v in &c[1..] {
                adj[r].push((v, 0.0));
                adj[v].push((r, 0.0));
            }
        }
        adj
    }

    /// `d_R` from the given vertices to every mesh vertex.
    pub fn dr_from(&self, adj: &Adjacency, sources: &[usize]) -> Vec<f64> {
        let mut d = graph::dijkstra(adj, sources).dist;
        d.truncate(self.mesh.n_vertices());
        d
    }

    pub fn x(&self, v: usize) -> f64 {
        self.mesh.coords().expect("planar")[v][0]
    }

    /// Vertices on the vertical line through `x`.
    pub fn vertices_at_x(&self, x: f64) -> Vec<usize> {
        (0..self.mesh.n_vertices()).filter(|&v| (self.x(v) - x).abs() < 1e-12).collect()
    }

    /// Vertex at the planar point `p`, if any.
    pub fn vertex_at(&self, p: Point) -> Option<usize> {
        let c = self.mesh.coords().expect("planar");
        (0..c.len()).find(|&v| (c[v][0] - p[0]).abs() < 1e-12 && (c[v][1] - p[1]).abs() < 1e-12)
    }
}

/// Analytic and solved modulus of the Cantor rectangle `R_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorRectangle {
    pub level: usize,
    pub analytic: f64,
    pub solved: ModulusResult,
    pub relative_error: f64,
}

/// Solves the crossing family of `R_n` between its two vertical sides,
/// meshing the rectangle with `cells` columns.
pub fn cantor_rectangle_moduli(
    spec: &CantorSpec,
    n: usize,
    cells: usize,
    opts: &SolverOptions,
) -> Result<CantorRectangle> {
    let rect = spec.rectangle(n)?;
    let analytic = spec.rectangle_modulus(n)?;
    let g = CantorGrid { h: (rect[2] - rect[0]) / cells.max(1) as f64, window: Some(rect), ..CantorGrid::default() };
    let q = gen_cantor_quotient(spec, &g)?;
    let left = q.vertices_at_x(rect[0]);
    let right = q.vertices_at_x(rect[2]);
    let setup = ConnectSetup { region: None, support: None, classes: &q.classes };
    let solved = modulus_connect(&q.mesh, &left, &right, &setup, opts)?;
    let relative_error = (solved.value - analytic).abs() / analytic;
    Ok(CantorRectangle { level: n, analytic, solved, relative_error })
}

/// Quadrilateral `[l−δ, r+δ] × [−η−δ, η+δ]` around the H-shape of the
/// first gap `(l, r)` of level `level`, meshed on its own with cell size
/// `h` (gaps below `h/4` snapped). Sides: left, bottom, right, top.
pub fn cantor_collar_quad(spec: &CantorSpec, level: usize, delta: f64, h: f64) -> Result<(QuotientPlaneMesh, Quad)> {
    if level == 0 || level > spec.levels {
        return Err(Error::LevelOutOfRange(level));
    }
    if !(delta > 0.0) {
        return Err(Error::ConfigInvalid("collar width must be positive".into()));
    }
    let (l, r) = spec.gaps(level)[0];
    let eta = spec.eta(level);
    let w = [l - delta, -eta - delta, r + delta, eta + delta];
    let g = CantorGrid { h, window: Some(w), min_gap: h / 4.0, ..CantorGrid::default() };
    let q = gen_cantor_quotient(spec, &g)?;
    let c = q.mesh.coords().expect("planar");
    let at = |k: usize, t: f64| -> Vec<usize> { (0..c.len()).filter(|&v| (c[v][k] - t).abs() < 1e-12).collect() };
    let quad = Quad { faces: None, sides: [at(0, w[0]), at(1, w[1]), at(0, w[2]), at(1, w[3])] };
    Ok((q, quad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{induced_length_metric, metric_axioms_check};

    #[test]
    fn square_counts_and_area() {
        let m = gen_euclid_square(2).unwrap();
        assert_eq!(m.n_faces(), 8);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        let m = gen_linf_square(4).unwrap();
        assert!((m.total_area() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(m.ambient_dist(0, square_vertex(4, 4, 4)), Some(1.0));
    }

    #[test]
    fn linf_diagonal_is_one_after_refinement() {
        let m = gen_linf_square(4).unwrap();
        let d = induced_length_metric(&m, 1);
        assert!((d.get(0, square_vertex(4, 4, 4)) - 1.0).abs() < 1e-12);
        assert!(metric_axioms_check(&d).is_empty());
    }

    #[test]
    fn square_shells_are_linf_spheres() {
        let m = gen_shells(ShellShape::Square, Norm::Linf, &[0.25, 0.5], 16, true).unwrap();
        let c = m.coords().unwrap();
        for v in 1..m.n_vertices() {
            let r = Norm::Linf.length(c[v]);
            assert!((r - 0.25).abs() < 1e-15 || (r - 0.5).abs() < 1e-15);
        }
        assert_eq!(m.boundary().len(), 1);
    }

    #[test]
    fn annulus_topology() {
        let m = gen_annulus(1.0, std::f64::consts::E, 32, 6).unwrap();
        assert_eq!(m.boundary().len(), 2);
        assert_eq!(m.euler_characteristic(), 0);
    }

    #[test]
    fn slit_disks_have_notches() {
        let single = gen_slit_disk(4, false, 1).unwrap();
        assert_eq!(single.boundary().len(), 1);
        let full = gen_shells(
            ShellShape::Circle,
            Norm::L2,
            &(1..=8).map(|k| k as f64 / 8.0).collect::<Vec<_>>(),
            32,
            true,
        )
        .unwrap();
        // a notch removes a wedge of the outer half
        assert!(single.n_faces() < full.n_faces());
        let multi = gen_slit_disk(4, true, 1).unwrap();
        assert_eq!(full.n_faces() - multi.n_faces(), 4 * (full.n_faces() - single.n_faces()));
    }

    #[test]
    fn single_zero_cell_shortcuts() {
        let m = gen_weighted_plane(4, &[(1, 1)]).unwrap();
        let d = induced_length_metric(&m, 1);
        // corners of cell (1,1) not joined by its diagonal
        let (a, b) = (square_vertex(4, 1, 2), square_vertex(4, 2, 1));
        assert!(d.get(a, b) < 1e-9);
        let plain = induced_length_metric(&gen_weighted_plane(4, &[]).unwrap(), 1);
        assert!((plain.get(a, b) - 0.5).abs() < 1e-12);
        assert!((m.total_area() - 15.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn cantor_spec_defaults() {
        let s = CantorSpec::default();
        s.validate().unwrap();
        assert!((s.interval_length(1) - 0.375).abs() < 1e-15);
        assert!((s.interval_length(2) - 0.375 * 0.9375 / 2.0).abs() < 1e-15);
        assert!((s.measure() - 0.688_537_537_405_4).abs() < 1e-9);
        assert!((s.axis_measure(0.0, 1.0) - s.measure()).abs() < 1e-12);
        // the first gap carries no measure
        let (l, r) = s.gaps(1)[0];
        assert!(s.axis_measure(l, r) < 1e-15);
        assert!((s.axis_measure(0.0, l) - 0.5 * s.measure()).abs() < 1e-12);
        let bad = CantorSpec { gap_fractions: vec![0.5], levels: 2 };
        assert!(matches!(bad.validate(), Err(Error::SpecInconsistent(_))));
    }

    #[test]
    fn cantor_classes_collapse() {
        let s = CantorSpec { levels: 3, ..CantorSpec::default() };
        let q = gen_cantor_quotient(&s, &CantorGrid { h: 0.1, ..CantorGrid::default() }).unwrap();
        assert_eq!(q.classes.len(), 7);
        let adj = q.quotient_graph(1);
        let c = &q.classes[0];
        let d = q.dr_from(&adj, &[c[0]]);
        assert!(c.iter().all(|&v| d[v] == 0.0));
    }
}
