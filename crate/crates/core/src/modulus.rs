//! Discrete conformal 2-modulus with face densities.
//!
//! Curves are chains through the mesh: polylines between edge midpoints,
//! one straight piece per face. The density `ρ` is constant on faces, a
//! piece through face `f` costs `ρ_f` times its length and the energy is
//! `Σ ρ_f² H²(f)`. The minimum over admissible `ρ` is found by constraint
//! generation: a quadratic program over the chains found so far (solved by
//! Hildreth's dual coordinate ascent) alternates with a shortest-chain
//! search that either certifies admissibility or yields a new chain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::graph::{dijkstra_with, DisjointSets, NONE};
use crate::metric::MetricSurfaceMesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Admissibility tolerance on the final shortest chain.
    pub tol: f64,
    /// Relative duality gap accepted at termination.
    pub gap_tol: f64,
    pub max_outer: usize,
    /// Dual sweeps per outer iteration (the dual state is kept between
    /// iterations).
    pub max_sweeps: usize,
    /// Chains added per outer iteration.
    pub batch: usize,
    /// Chain nodes per mesh edge (1: midpoints only). More nodes let
    /// chains run in more directions inside a face.
    #[serde(default = "one")]
    pub edge_points: usize,
}

fn one() -> usize {
    1
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-3, gap_tol: 1e-2, max_outer: 3000, max_sweeps: 60, batch: 12, edge_points: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusResult {
    /// Energy of the admissible density `rho` (an upper bound).
    pub value: f64,
    /// Dual objective of the last QP (a lower bound).
    pub lower_bound: f64,
    /// Shortest chain `ρ`-length before normalization.
    pub certificate: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub n_constraints: usize,
    /// Per-face density, scaled so the shortest chain has length 1.
    pub rho: Vec<f64>,
}

impl ModulusResult {
    fn infinite(n_faces: usize) -> Self {
        Self {
            value: f64::INFINITY,
            lower_bound: f64::INFINITY,
            certificate: 0.0,
            duality_gap: 0.0,
            iterations: 0,
            n_constraints: 0,
            rho: vec![0.0; n_faces],
        }
    }
}

/// A straight piece of a chain inside face `face` (or a free link when
/// `face` is `NONE`).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Arc {
    a: usize,
    b: usize,
    face: usize,
    len: f64,
}

/// Chain graph of a mesh. Every edge carries `k` evenly spaced nodes
/// (`k = 1`: its midpoint) and a chain moves between nodes on different
/// edges of a face along straight pieces. Extra nodes stand for collapsed
/// classes or for the far side of split cut edges.
#[derive(Debug, Clone)]
pub struct ChainGraph {
    n_nodes: usize,
    k: usize,
    n_edges: usize,
    n_classes: usize,
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl ChainGraph {
    /// Chains through the faces where `region[f]` holds (all faces if
    /// `None`). Every vertex class in `classes` gets a node joined at no
    /// cost to the nodes of the edges inside the class (or of the edges at
    /// its vertices, for a class without edges).
    pub fn new(mesh: &MetricSurfaceMesh, region: Option<&[bool]>, classes: &[Vec<usize>], k: usize) -> Self {
        Self::build(mesh, region, classes, &[], &[], k)
    }

    fn build(
        mesh: &MetricSurfaceMesh,
        region: Option<&[bool]>,
        classes: &[Vec<usize>],
        split: &[(usize, usize, usize)],
        blocked: &[bool],
        k: usize,
    ) -> Self {
        let k = k.max(1);
        let ne = mesh.n_edges();
        let mut g = Self { n_nodes: (ne + split.len()) * k + classes.len(), k, n_edges: ne, n_classes: classes.len(), arcs: Vec::new(), out: Vec::new() };
        let mut arcs = Vec::with_capacity(3 * k * k * mesh.n_faces());
        // split: (edge, tail vertex, head vertex); faces on the right of
        // tail→head attach to the copy nodes
        let mut copy_of = vec![NONE; ne];
        let mut dir = vec![(NONE, NONE); ne];
        for (i, &(e, t, h)) in split.iter().enumerate() {
            copy_of[e] = i;
            dir[e] = (t, h);
        }
        let ts: Vec<f64> = (0..k).map(|j| (j as f64 + 0.5) / k as f64).collect();
        for f in 0..mesh.n_faces() {
            if region.is_some_and(|r| !r[f]) {
                continue;
            }
            let pts = mesh.face_points(f);
            let fe = mesh.face_edges(f);
            let tri = mesh.faces()[f];
            // nodes and positions along face edge m (tri[m] → tri[m+1])
            let side = |m: usize| -> Vec<(usize, Point)> {
                let e = fe[m];
                let (a, b) = (tri[m], tri[(m + 1) % 3]);
                let forward = mesh.edges()[e] == [a, b];
                let on_copy = copy_of[e] != NONE && dir[e] != (a, b);
                (0..k)
                    .map(|j| {
                        let t = if forward { ts[j] } else { 1.0 - ts[j] };
                        let node = if on_copy { g.copy_node(copy_of[e], j) } else { g.edge_node(e, j) };
                        (node, geom::lerp(pts[m], pts[(m + 1) % 3], t))
                    })
                    .collect()
            };
            let sides = [side(0), side(1), side(2)];
            for m in 0..3 {
                let l = (m + 1) % 3;
                if !blocked.is_empty() && (blocked[fe[m]] || blocked[fe[l]]) {
                    continue;
                }
                for &(a, p) in &sides[m] {
                    for &(b, q) in &sides[l] {
                        arcs.push(Arc { a, b, face: f, len: mesh.face_segment_length(f, p, q) });
                    }
                }
            }
        }
        let mut member = vec![NONE; mesh.n_vertices()];
        for (c, class) in classes.iter().enumerate() {
            for &v in class {
                member[v] = c;
            }
        }
        for (c, class) in classes.iter().enumerate() {
            let mut seen = std::collections::BTreeSet::new();
            for &v in class {
                for &e in mesh.vertex_edges(v) {
                    let [a, b] = mesh.edges()[e];
                    if member[a] == c && member[b] == c {
                        seen.insert(e);
                    }
                }
            }
            if seen.is_empty() {
                // a class without edges is entered through its incident edges
                seen.extend(class.iter().flat_map(|&v| mesh.vertex_edges(v).iter().copied()));
            }
            let cn = g.class_node(c);
            for e in seen {
                arcs.extend((0..k).map(|j| Arc { a: cn, b: g.edge_node(e, j), face: NONE, len: 0.0 }));
            }
        }
        let mut out = vec![Vec::new(); g.n_nodes];
        for (i, a) in arcs.iter().enumerate() {
            out[a.a].push(i);
            out[a.b].push(i);
        }
        g.arcs = arcs;
        g.out = out;
        g
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Node `j` of edge `e`.
    pub fn edge_node(&self, e: usize, j: usize) -> usize {
        e * self.k + j
    }

    pub fn class_node(&self, c: usize) -> usize {
        self.n_edges * self.k + c
    }

    fn copy_node(&self, i: usize, j: usize) -> usize {
        self.n_edges * self.k + self.n_classes + i * self.k + j
    }

    /// All nodes on the given edges.
    pub fn nodes_on(&self, edges: &[usize]) -> Vec<usize> {
        edges.iter().flat_map(|&e| (0..self.k).map(move |j| self.edge_node(e, j))).collect()
    }
}

/// Edges with both endpoints in `set`.
pub fn edges_within(mesh: &MetricSurfaceMesh, set: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; mesh.n_vertices()];
    for &v in set {
        inside[v] = true;
    }
    (0..mesh.n_edges())
        .filter(|&e| {
            let [a, b] = mesh.edges()[e];
            inside[a] && inside[b]
        })
        .collect()
}

/// A curve family as chains from `sources` to `sinks` in a chain graph.
#[derive(Debug, Clone)]
pub struct ChainFamily<'a> {
    pub graph: &'a ChainGraph,
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
}

/// Sparse chain: `(face, length)` pairs over faces carrying density.
type Chain = Vec<(usize, f64)>;

struct Search {
    dist: Vec<f64>,
    pred_arc: Vec<usize>,
}

fn shortest(family: &ChainFamily, rho: &[f64], free: &[bool]) -> Search {
    let g = family.graph;
    let cost = |a: &Arc| if a.face == NONE || free[a.face] { 0.0 } else { rho[a.face] * a.len };
    let sp = dijkstra_with(g.n_nodes, &family.sources, |u, emit| {
        for &i in &g.out[u] {
            let a = &g.arcs[i];
            emit(if a.a == u { a.b } else { a.a }, cost(a));
        }
    });
    // recover the arc used into each node
    let mut pred_arc = vec![NONE; g.n_nodes];
    for v in 0..g.n_nodes {
        let p = sp.pred[v];
        if p == NONE {
            continue;
        }
        let mut best = (f64::INFINITY, NONE);
        for &i in &g.out[v] {
            let a = &g.arcs[i];
            let other = if a.a == v { a.b } else { a.a };
            if other == p && cost(a) < best.0 {
                best = (cost(a), i);
            }
        }
        pred_arc[v] = best.1;
    }
    Search { dist: sp.dist, pred_arc }
}

fn chain_to(family: &ChainFamily, s: &Search, target: usize, free: &[bool]) -> Chain {
    let g = family.graph;
    let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
    let mut v = target;
    while s.pred_arc[v] != NONE {
        let a = &g.arcs[s.pred_arc[v]];
        if a.face != NONE && !free[a.face] {
            *acc.entry(a.face).or_insert(0.0) += a.len;
        }
        v = if a.a == v { a.b } else { a.a };
    }
    acc.into_iter().collect()
}

/// Modulus of a chain family. `weights[f]` is `H²(f)`; faces where
/// `support[f]` is false carry no density (curves cross them for free).
pub fn solve_family(
    family: &ChainFamily,
    weights: &[f64],
    support: Option<&[bool]>,
    opts: &SolverOptions,
) -> Result<ModulusResult> {
    let nf = weights.len();
    if family.sources.is_empty() || family.sinks.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut used = vec![false; nf];
    for a in &family.graph.arcs {
        if a.face != NONE {
            used[a.face] = true;
        }
    }
    let free: Vec<bool> =
        (0..nf).map(|f| !used[f] || support.is_some_and(|s| !s[f]) || weights[f] <= 0.0).collect();
    let mut is_sink = vec![false; family.graph.n_nodes];
    for &t in &family.sinks {
        is_sink[t] = true;
    }
    let best_sink = |s: &Search| {
        family
            .sinks
            .iter()
            .copied()
            .min_by(|&a, &b| s.dist[a].total_cmp(&s.dist[b]).then(a.cmp(&b)))
            .expect("sinks are nonempty")
    };

    let ones: Vec<f64> = (0..nf).map(|f| if free[f] { 0.0 } else { 1.0 }).collect();
    let s0 = shortest(family, &ones, &free);
    let t0 = best_sink(&s0);
    if !s0.dist[t0].is_finite() {
        return Err(Error::NoCurve);
    }
    if s0.dist[t0] <= 0.0 {
        return Ok(ModulusResult::infinite(nf));
    }
    // the first batch of chains comes from the geometric metric
    let mut rho: Vec<f64> = ones.iter().map(|&x| x / s0.dist[t0]).collect();
    let mut solved = false;
    let mut chains: Vec<Chain> = Vec::new();
    let mut lambda: Vec<f64> = Vec::new();
    let mut qnorm: Vec<f64> = Vec::new();
    let mut lower = 0.0;
    let mut iterations = 0;
    // Hildreth state: rho = Σ λ_k c_k / (2 w)
    let mut qp_rho = vec![0.0; nf];

    for outer in 0..opts.max_outer {
        iterations = outer + 1;
        let s = shortest(family, &rho, &free);
        let t = best_sink(&s);
        let len = s.dist[t];
        if solved && len >= 1.0 - opts.tol {
            let r = finish(rho.clone(), len, weights, lower, iterations, chains.len());
            if r.duality_gap <= opts.gap_tol * r.value {
                return Ok(r);
            }
        }
        // add the violating chains to the cheapest sinks, distinct ones only
        let cutoff = if solved { 1.0 - opts.tol } else { f64::INFINITY };
        let mut ranked: Vec<usize> = family.sinks.iter().copied().filter(|&x| s.dist[x] < cutoff).collect();
        ranked.sort_by(|&a, &b| s.dist[a].total_cmp(&s.dist[b]).then(a.cmp(&b)));
        let mut added = 0;
        let stride = (ranked.len() / opts.batch.max(1)).max(1);
        for &x in ranked.iter().step_by(stride) {
            if added >= opts.batch {
                break;
            }
            let c = chain_to(family, &s, x, &free);
            if c.is_empty() || chains.contains(&c) {
                continue;
            }
            qnorm.push(c.iter().map(|&(f, l)| l * l / (2.0 * weights[f])).sum());
            chains.push(c);
            lambda.push(0.0);
            added += 1;
        }
        solved = true;
        lower = hildreth(&chains, &qnorm, &mut lambda, &mut qp_rho, weights, opts);
        rho.clone_from(&qp_rho);
    }
    let s = shortest(family, &rho, &free);
    let len = s.dist[best_sink(&s)];
    let r = finish(rho, len, weights, lower, iterations, chains.len());
    Err(Error::IterationLimit { upper: r.value, lower: r.lower_bound })
}

/// Coordinate ascent on the dual of `min Σ w ρ²` subject to `c_k·ρ ≥ 1`.
/// Returns the dual objective.
fn hildreth(
    chains: &[Chain],
    qnorm: &[f64],
    lambda: &mut [f64],
    rho: &mut [f64],
    weights: &[f64],
    opts: &SolverOptions,
) -> f64 {
    let dot = |c: &Chain, rho: &[f64]| c.iter().map(|&(f, l)| l * rho[f]).sum::<f64>();
    for _ in 0..opts.max_sweeps {
        let mut worst: f64 = 0.0;
        for k in 0..chains.len() {
            let slack = 1.0 - dot(&chains[k], rho);
            let step = (lambda[k] + slack / qnorm[k]).max(0.0) - lambda[k];
            if step != 0.0 {
                lambda[k] += step;
                for &(f, l) in &chains[k] {
                    rho[f] += step * l / (2.0 * weights[f]);
                }
            }
            if lambda[k] > 0.0 || slack > 0.0 {
                worst = worst.max(slack.abs());
            }
        }
        if worst < 0.1 * opts.tol {
            break;
        }
    }
    let energy: f64 = rho.iter().zip(weights).map(|(r, w)| r * r * w).sum();
    lambda.iter().sum::<f64>() - energy
}

fn finish(rho: Vec<f64>, len: f64, weights: &[f64], lower: f64, iterations: usize, n: usize) -> ModulusResult {
    let rho: Vec<f64> = rho.iter().map(|r| r / len).collect();
    let value: f64 = rho.iter().zip(weights).map(|(r, w)| r * r * w).sum();
    ModulusResult {
        value,
        lower_bound: lower,
        certificate: len,
        duality_gap: value - lower,
        iterations,
        n_constraints: n,
        rho,
    }
}

/// `H²` of each face.
pub fn face_weights(mesh: &MetricSurfaceMesh) -> Vec<f64> {
    (0..mesh.n_faces()).map(|f| mesh.face_area(f)).collect()
}

/// Faces with all three vertices where `keep` holds.
pub fn faces_within(mesh: &MetricSurfaceMesh, keep: impl Fn(usize) -> bool) -> Vec<bool> {
    mesh.faces().iter().map(|t| t.iter().all(|&v| keep(v))).collect()
}

/// Optional pieces of a connecting problem.
#[derive(Debug, Clone, Default)]
pub struct ConnectSetup<'a> {
    /// Face region `G` the curves stay in.
    pub region: Option<&'a [bool]>,
    /// Density support (for restricted moduli).
    pub support: Option<&'a [bool]>,
    /// Vertex classes of zero diameter.
    pub classes: &'a [Vec<usize>],
}

/// Modulus of the curves joining vertex sets `e` and `f`.
pub fn modulus_connect(
    mesh: &MetricSurfaceMesh,
    e: &[usize],
    f: &[usize],
    setup: &ConnectSetup,
    opts: &SolverOptions,
) -> Result<ModulusResult> {
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptyInput);
    }
    if e.iter().any(|v| f.contains(v)) {
        return Err(Error::ConfigInvalid("E and F must be disjoint".into()));
    }
    let graph = ChainGraph::new(mesh, setup.region, setup.classes, opts.edge_points);
    let class_nodes = |set: &[usize]| -> Vec<usize> {
        setup
            .classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().any(|v| set.contains(v)))
            .map(|(i, _)| graph.class_node(i))
            .collect()
    };
    let mut sources = graph.nodes_on(&edges_within(mesh, e));
    sources.extend(class_nodes(e));
    let mut sinks = graph.nodes_on(&edges_within(mesh, f));
    sinks.extend(class_nodes(f));
    if sources.is_empty() || sinks.is_empty() {
        return Err(Error::ConfigInvalid("E and F must each contain a mesh edge".into()));
    }
    let family = ChainFamily { graph: &graph, sources, sinks };
    solve_family(&family, &face_weights(mesh), setup.support, opts)
}

/// A quadrilateral: a face region with four boundary arcs in cyclic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quad {
    /// Faces of the region (`None` = the whole mesh).
    #[serde(default)]
    pub faces: Option<Vec<usize>>,
    pub sides: [Vec<usize>; 4],
}

impl Quad {
    pub fn region(&self, mesh: &MetricSurfaceMesh) -> Option<Vec<bool>> {
        self.faces.as_ref().map(|fs| {
            let mut r = vec![false; mesh.n_faces()];
            for &f in fs {
                r[f] = true;
            }
            r
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadModuli {
    pub primal: ModulusResult,
    pub conjugate: ModulusResult,
    pub product: f64,
}

/// Moduli of `Γ(ζ₁,ζ₃;Q)` and `Γ(ζ₂,ζ₄;Q)`.
pub fn modulus_quad(
    mesh: &MetricSurfaceMesh,
    q: &Quad,
    classes: &[Vec<usize>],
    opts: &SolverOptions,
) -> Result<QuadModuli> {
    let region = q.region(mesh);
    let setup = ConnectSetup { region: region.as_deref(), support: None, classes };
    let primal = modulus_connect(mesh, &q.sides[0], &q.sides[2], &setup, opts)?;
    let conjugate = modulus_connect(mesh, &q.sides[1], &q.sides[3], &setup, opts)?;
    let product = primal.value * conjugate.value;
    Ok(QuadModuli { primal, conjugate, product })
}

/// Annulus moduli `Mod Γ(B̄(a,r), X∖B(a,R))` along a decreasing schedule.
/// `dist_a[v]` is the distance from `a` to vertex `v`.
pub fn modulus_point_condition(
    mesh: &MetricSurfaceMesh,
    dist_a: &[f64],
    big_r: f64,
    radii: &[f64],
    classes: &[Vec<usize>],
    opts: &SolverOptions,
) -> Result<Vec<ModulusResult>> {
    if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| !(r > 0.0 && r < big_r)) {
        return Err(Error::RadiusOrder(format!("radii {radii:?} must decrease below R = {big_r}")));
    }
    // curves stop at the first vertex outside B(a,R)
    let region: Vec<bool> = mesh
        .faces()
        .iter()
        .map(|t| t.iter().any(|&v| dist_a[v] < big_r))
        .collect();
    let f: Vec<usize> = (0..mesh.n_vertices()).filter(|&v| dist_a[v] >= big_r).collect();
    radii
        .iter()
        .map(|&r| {
            let e: Vec<usize> = (0..mesh.n_vertices()).filter(|&v| dist_a[v] <= r).collect();
            let setup = ConnectSetup { region: Some(&region), support: None, classes };
            modulus_connect(mesh, &e, &f, &setup, opts)
        })
        .collect()
}

/// Modulus of closed curves in the region between `e` and `f` separating
/// them, through the cut-annulus reduction: cut along an edge path from
/// `e` to `f` and join the two sides of the cut.
pub fn modulus_separating(
    mesh: &MetricSurfaceMesh,
    e: &[usize],
    f: &[usize],
    opts: &SolverOptions,
) -> Result<ModulusResult> {
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptyInput);
    }
    let nv = mesh.n_vertices();
    let mut ds = DisjointSets::new(nv);
    for &[a, b] in mesh.edges() {
        ds.union(a, b);
    }
    let ce = ds.find(e[0]);
    if !f.iter().any(|&v| ds.find(v) == ce) {
        return Err(Error::NoSeparationNeeded);
    }
    let mut in_e = vec![false; nv];
    let mut in_f = vec![false; nv];
    e.iter().for_each(|&v| in_e[v] = true);
    f.iter().for_each(|&v| in_f[v] = true);
    // chains avoid E and F themselves: midpoints of edges inside either set
    let blocked: Vec<bool> =
        mesh.edges().iter().map(|&[a, b]| (in_e[a] && in_e[b]) || (in_f[a] && in_f[b])).collect();
    // cut: a shortest edge path from E to F
    let adj = mesh.edge_graph();
    let sp = crate::graph::dijkstra(&adj, e);
    let end = f
        .iter()
        .copied()
        .filter(|&v| sp.dist[v].is_finite())
        .min_by(|&a, &b| sp.dist[a].total_cmp(&sp.dist[b]).then(a.cmp(&b)))
        .ok_or(Error::NoSeparationNeeded)?;
    let path = sp.path_to(end).expect("reachable");
    // trim to the last E vertex and the first F vertex
    let start = path.iter().rposition(|&v| in_e[v]).unwrap_or(0);
    let stop = start + path[start..].iter().position(|&v| in_f[v]).unwrap_or(path.len() - 1 - start);
    let cut: Vec<(usize, usize, usize)> = path[start..=stop]
        .windows(2)
        .map(|w| (mesh.edge_between(w[0], w[1]).expect("path follows edges"), w[0], w[1]))
        .collect();
    let graph = ChainGraph::build(mesh, None, &[], &cut, &blocked, opts.edge_points);
    let sources = graph.nodes_on(&cut.iter().map(|c| c.0).collect::<Vec<_>>());
    let sinks: Vec<usize> =
        (0..cut.len()).flat_map(|i| (0..graph.k).map(move |j| (i, j))).map(|(i, j)| graph.copy_node(i, j)).collect();
    let family = ChainFamily { graph: &graph, sources, sinks };
    solve_family(&family, &face_weights(mesh), None, opts)
}

/// Quadrilateral products over a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReciprocityReport {
    pub products: Vec<f64>,
    pub min_product: f64,
    pub max_product: f64,
    pub kappa_prime: f64,
    /// Quads whose product exceeds `kappa_prime`.
    pub upper_failures: Vec<usize>,
}

/// Solves every quadrilateral and summarizes the products.
pub fn reciprocity_scan(
    mesh: &MetricSurfaceMesh,
    quads: &[Quad],
    classes: &[Vec<usize>],
    kappa_prime: f64,
    opts: &SolverOptions,
) -> Result<ReciprocityReport> {
    let products = quads
        .iter()
        .map(|q| modulus_quad(mesh, q, classes, opts).map(|m| m.product))
        .collect::<Result<Vec<_>>>()?;
    let min_product = products.iter().copied().fold(f64::INFINITY, f64::min);
    let max_product = products.iter().copied().fold(0.0, f64::max);
    let upper_failures = products
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > kappa_prime)
        .map(|(i, _)| i)
        .collect();
    Ok(ReciprocityReport { products, min_product, max_product, kappa_prime, upper_failures })
}

/// Boundary arcs of the lattice rectangle `[i0,i1]×[j0,j1]` of an `n×n`
/// unit-square grid: left, bottom, right, top.
pub fn lattice_quad(mesh: &MetricSurfaceMesh, n: usize, i0: usize, j0: usize, i1: usize, j1: usize) -> Quad {
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let faces = (0..mesh.n_faces())
        .filter(|&f| {
            mesh.faces()[f].iter().all(|&x| {
                let (i, j) = (x % (n + 1), x / (n + 1));
                (i0..=i1).contains(&i) && (j0..=j1).contains(&j)
            })
        })
        .collect();
    Quad {
        faces: Some(faces),
        sides: [
            (j0..=j1).map(|j| v(i0, j)).collect(),
            (i0..=i1).map(|i| v(i, j0)).collect(),
            (j0..=j1).map(|j| v(i1, j)).collect(),
            (i0..=i1).map(|i| v(i, j1)).collect(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Norm;
    use crate::spaces;

    fn square_sides(n: usize) -> (Vec<usize>, Vec<usize>) {
        let left = (0..=n).map(|j| spaces::square_vertex(n, 0, j)).collect();
        let right = (0..=n).map(|j| spaces::square_vertex(n, n, j)).collect();
        (left, right)
    }

    #[test]
    fn euclid_square_is_one() {
        let n = 16;
        let m = spaces::gen_euclid_square(n).unwrap();
        let (l, r) = square_sides(n);
        let res = modulus_connect(&m, &l, &r, &ConnectSetup::default(), &SolverOptions::default()).unwrap();
        assert!((res.value - 1.0).abs() < 0.03, "{res:?}");
        assert!(res.lower_bound <= res.value + 1e-12);
    }

    #[test]
    fn linf_square_is_quarter_pi() {
        let n = 16;
        let m = spaces::gen_linf_square(n).unwrap();
        let (l, r) = square_sides(n);
        let res = modulus_connect(&m, &l, &r, &ConnectSetup::default(), &SolverOptions::default()).unwrap();
        assert!((res.value / (std::f64::consts::PI / 4.0) - 1.0).abs() < 0.05, "{}", res.value);
    }

    #[test]
    fn scaling_is_exact() {
        let n = 8;
        let m = spaces::gen_euclid_square(n).unwrap();
        let (l, r) = square_sides(n);
        let o = SolverOptions::default();
        let a = modulus_connect(&m, &l, &r, &ConnectSetup::default(), &o).unwrap();
        let b = modulus_connect(&m.scaled(2.0), &l, &r, &ConnectSetup::default(), &o).unwrap();
        assert!((a.value - b.value).abs() <= 1e-9 * a.value);
    }

    #[test]
    fn rectangle_quad_product() {
        let n = 12;
        let m = spaces::gen_euclid_square(n).unwrap();
        let q = lattice_quad(&m, n, 0, 0, 12, 6);
        let r = modulus_quad(&m, &q, &[], &SolverOptions::default()).unwrap();
        assert!((r.primal.value - 0.5).abs() < 0.03, "{}", r.primal.value);
        assert!((r.conjugate.value - 2.0).abs() < 0.12, "{}", r.conjugate.value);
        assert!((r.product - 1.0).abs() < 0.06);
    }

    #[test]
    fn annulus_connect_and_separate() {
        let (r, big_r) = (1.0, std::f64::consts::E);
        let m = spaces::gen_annulus(r, big_r, 64, 16).unwrap();
        let c = m.coords().unwrap();
        let inner: Vec<usize> = (0..m.n_vertices()).filter(|&v| geom::euclid(c[v], [0.0, 0.0]) < r + 1e-9).collect();
        let outer: Vec<usize> =
            (0..m.n_vertices()).filter(|&v| geom::euclid(c[v], [0.0, 0.0]) > big_r - 1e-9).collect();
        let o = SolverOptions::default();
        let conn = modulus_connect(&m, &inner, &outer, &ConnectSetup::default(), &o).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        assert!((conn.value / tau - 1.0).abs() < 0.05, "{}", conn.value);
        let sep = modulus_separating(&m, &inner, &outer, &o).unwrap();
        assert!((sep.value * tau - 1.0).abs() < 0.07, "{}", sep.value);
    }

    #[test]
    fn restricted_support_dominates() {
        let n = 8;
        let m = spaces::gen_euclid_square(n).unwrap();
        let (l, r) = square_sides(n);
        let o = SolverOptions::default();
        let full = modulus_connect(&m, &l, &r, &ConnectSetup::default(), &o).unwrap();
        let c = m.coords().unwrap();
        let support = faces_within(&m, |v| c[v][0] <= 0.5 + 1e-9);
        let setup = ConnectSetup { support: Some(&support), ..Default::default() };
        let res = modulus_connect(&m, &l, &r, &setup, &o).unwrap();
        assert!(res.value >= full.value * (1.0 - 1e-3));
        assert!((res.value - 2.0).abs() < 0.06, "{}", res.value);
    }

    #[test]
    fn monotone_in_region_and_sets() {
        let n = 8;
        let m = spaces::gen_euclid_square(n).unwrap();
        let (l, r) = square_sides(n);
        let o = SolverOptions::default();
        let full = modulus_connect(&m, &l, &r, &ConnectSetup::default(), &o).unwrap().value;
        // the lower half strip: half the curves
        let c = m.coords().unwrap();
        let half = faces_within(&m, |v| c[v][1] <= 0.5 + 1e-9);
        let setup = ConnectSetup { region: Some(&half), ..Default::default() };
        let strip = modulus_connect(&m, &l, &r, &setup, &o).unwrap().value;
        assert!(strip <= full * (1.0 + o.gap_tol));
        assert!((strip - 0.5).abs() < 0.02, "{strip}");
        let shorter: Vec<usize> = l[..=n / 2].to_vec();
        let fewer = modulus_connect(&m, &shorter, &r, &ConnectSetup::default(), &o).unwrap().value;
        assert!(fewer <= full * (1.0 + o.gap_tol));
    }

    #[test]
    fn extra_edge_points_keep_aligned_values() {
        let n = 8;
        let m = spaces::gen_euclid_square(n).unwrap();
        let (l, r) = square_sides(n);
        let o = SolverOptions { edge_points: 3, ..SolverOptions::default() };
        let v = modulus_connect(&m, &l, &r, &ConnectSetup::default(), &o).unwrap().value;
        assert!((v - 1.0).abs() < 0.03, "{v}");
    }

    #[test]
    fn errors() {
        let m = spaces::gen_linf_square(4).unwrap();
        let (l, r) = square_sides(4);
        let o = SolverOptions::default();
        let region = vec![false; m.n_faces()];
        let setup = ConnectSetup { region: Some(&region), ..Default::default() };
        assert!(matches!(modulus_connect(&m, &l, &r, &setup, &o), Err(Error::NoCurve)));
        let d: Vec<f64> = m.coords().unwrap().iter().map(|p| Norm::Linf.dist(*p, [0.5, 0.5])).collect();
        assert!(matches!(
            modulus_point_condition(&m, &d, 0.4, &[0.1, 0.2], &[], &o),
            Err(Error::RadiusOrder(_))
        ));
    }
}
