//! Exit edges, paths around convex subgraphs, and empirical probes of the
//! Small Angle Property and of tight hexagons on finite complexes.
//!
//! Points at infinity cannot be reached in a finite complex; a probe lets
//! the far endpoints range over all vertices within its truncation radius of
//! `K` and records that radius.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex::{ekey, Complex, ComplexKind, Subcomplex, VertexId};
use crate::diagram::{reduced_diagram_search, validate_diagram, verify_tight, DiscDiagram};
use crate::error::{NpcError, Result};
use crate::metric::{count_geodesics_idx, geodesics_idx, is_convex_set, DistanceMatrix, OrientedGeodesic, INF};
use crate::par;
use crate::report::CheckReport;
use crate::wsys::{check_weakly_systolic, WsysContext};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitEdge {
    pub geodesic: OrientedGeodesic,
    /// Vertices of `K`, sorted.
    pub k: Vec<VertexId>,
    pub edge: [VertexId; 2],
    /// Position of the edge along the geodesic (edge `i` joins vertices `i` and `i+1`).
    pub index: usize,
}

/// Exit edge as an index along an index path, given membership in `K`.
fn exit_index(k: &Subcomplex<'_>, path: &[usize]) -> Result<usize> {
    let last_in = path.iter().rposition(|&x| k.has_vertex_idx(x)).ok_or(NpcError::DoesNotGoThrough)?;
    if last_in + 1 == path.len() {
        return Err(NpcError::EndsInside);
    }
    Ok(last_in)
}

/// The edge of `g` right after its last vertex in `k`. For geodesics that
/// start in a convex `k` this is the first edge outside `k` after which `g`
/// never returns to `k`.
pub fn exit_edge(k: &Subcomplex<'_>, g: &OrientedGeodesic) -> Result<ExitEdge> {
    let c = k.parent();
    let path = c.indices(g.vertices())?;
    let i = exit_index(k, &path)?;
    Ok(ExitEdge { geodesic: g.clone(), k: k.vertex_ids(), edge: [c.id(path[i]), c.id(path[i + 1])], index: i })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathAround {
    /// Boundary walks of `σ_1 .. σ_n`.
    pub cells: Vec<Vec<VertexId>>,
    /// `e_0 .. e_n`.
    pub edges: Vec<[VertexId; 2]>,
    pub length: usize,
}

impl PathAround {
    /// Checks the chain conditions against `k`.
    pub fn verify(&self, k: &Subcomplex<'_>) -> bool {
        let c = k.parent();
        let n = self.length;
        if self.cells.len() != n || self.edges.len() != n + 1 || n == 0 {
            return false;
        }
        let cell_has = |cell: &[VertexId], e: [VertexId; 2]| {
            let l = cell.len();
            (0..l).any(|i| {
                let (a, b) = (cell[i], cell[(i + 1) % l]);
                (a, b) == (e[0], e[1]) || (b, a) == (e[0], e[1])
            })
        };
        let edges_ok = self.edges.iter().all(|&[a, b]| {
            c.has_edge(a, b) && !k.contains_edge(a, b) && (k.contains_vertex(a) || k.contains_vertex(b))
        });
        edges_ok
            && (0..n).all(|i| cell_has(&self.cells[i], self.edges[i]) && cell_has(&self.cells[i], self.edges[i + 1]))
    }
}

/// Edges meeting `K` but not in it, joined when a 2-cell contains both.
struct AroundGraph {
    edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    /// `(cell, neighbour)`, sorted.
    adj: Vec<Vec<(usize, usize)>>,
    /// Whether some cell contains the edge.
    in_cell: Vec<bool>,
}

impl AroundGraph {
    fn new(k: &Subcomplex<'_>) -> Self {
        let c = k.parent();
        let mut edges = Vec::new();
        for i in k.vertex_indices() {
            for &j in c.nbrs(i) {
                if !k.has_edge_idx(i, j) {
                    edges.push(ekey(i, j));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let index: HashMap<_, _> = edges.iter().enumerate().map(|(n, &e)| (e, n)).collect();
        let mut adj = vec![Vec::new(); edges.len()];
        let mut in_cell = vec![false; edges.len()];
        let cells: BTreeSet<usize> = edges.iter().flat_map(|&(a, b)| c.cells_on_edge(a, b).iter().copied()).collect();
        for cell in cells {
            let w = c.cell_walk(cell);
            let l = w.len();
            let on: Vec<usize> = (0..l).filter_map(|t| index.get(&ekey(w[t], w[(t + 1) % l])).copied()).collect();
            for &x in &on {
                in_cell[x] = true;
                for &y in &on {
                    if x != y {
                        adj[x].push((cell, y));
                    }
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        AroundGraph { edges, index, adj, in_cell }
    }

    /// Path-around lengths from node `s` (`INF` when unreachable), with the
    /// BFS parent `(cell, previous node)` of every reached node.
    fn bfs(&self, s: usize) -> (Vec<u32>, Vec<Option<(usize, usize)>>) {
        let mut dist = vec![INF; self.edges.len()];
        let mut parent = vec![None; self.edges.len()];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for &(cell, y) in &self.adj[x] {
                if dist[y] == INF {
                    dist[y] = dist[x] + 1;
                    parent[y] = Some((cell, x));
                    q.push_back(y);
                }
            }
        }
        (dist, parent)
    }

    /// Minimal path-around length between nodes; a path needs one cell even
    /// when the two edges coincide.
    fn length(&self, dist: &[u32], s: usize, t: usize) -> u32 {
        if s == t {
            return if self.in_cell[s] { 1 } else { INF };
        }
        dist[t]
    }
}

pub fn path_around(
    k: &Subcomplex<'_>,
    e: [VertexId; 2],
    e_prime: [VertexId; 2],
    length_cap: usize,
) -> Result<PathAround> {
    let c = k.parent();
    let g = AroundGraph::new(k);
    let node = |e: [VertexId; 2]| -> Result<usize> {
        let (a, b) = (c.index_of(e[0])?, c.index_of(e[1])?);
        g.index
            .get(&ekey(a, b))
            .copied()
            .ok_or_else(|| NpcError::InvalidInput(format!("{e:?} is not an edge meeting K outside K")))
    };
    let (s, t) = (node(e)?, node(e_prime)?);
    let (dist, parent) = g.bfs(s);
    let len = g.length(&dist, s, t);
    if len == INF {
        return Err(NpcError::NoPath);
    }
    if len as usize > length_cap {
        return Err(NpcError::CapExceeded { count: len as u64, cap: length_cap as u64 });
    }
    let edge_ids = |n: usize| {
        let (a, b) = g.edges[n];
        [c.id(a), c.id(b)]
    };
    let cell_ids = |cell: usize| c.ids(c.cell_walk(cell));
    if s == t {
        let cell = c.cells_on_edge(g.edges[s].0, g.edges[s].1)[0];
        return Ok(PathAround { cells: vec![cell_ids(cell)], edges: vec![e, e], length: 1 });
    }
    let mut nodes = vec![t];
    let mut cells = Vec::new();
    let mut x = t;
    while let Some((cell, p)) = parent[x] {
        cells.push(cell);
        nodes.push(p);
        x = p;
    }
    nodes.reverse();
    cells.reverse();
    Ok(PathAround {
        cells: cells.into_iter().map(cell_ids).collect(),
        edges: nodes.into_iter().map(edge_ids).collect(),
        length: len as usize,
    })
}

/// The configuration attaining `r_emp(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SapWitness {
    pub k: Vec<VertexId>,
    pub v: VertexId,
    pub v_prime: VertexId,
    /// Geodesic from `w` to `w'` disjoint from `K`.
    pub gamma: Vec<VertexId>,
    pub w: VertexId,
    pub w_prime: VertexId,
    pub geodesic_vw: Vec<VertexId>,
    pub geodesic_vw_prime: Vec<VertexId>,
    pub exit: [VertexId; 2],
    pub exit_prime: [VertexId; 2],
    /// Minimal path-around length, `None` when there is none.
    pub length: Option<u32>,
}

impl SapWitness {
    /// Recomputes the exit edges and the minimal path around from scratch.
    pub fn reproduces(&self, c: &Complex) -> bool {
        let Ok(k) = Subcomplex::induced(c, &self.k) else { return false };
        let geo = |p: &[VertexId]| OrientedGeodesic::new(c, p.to_vec());
        let (Ok(g1), Ok(g2), Ok(gm)) = (geo(&self.geodesic_vw), geo(&self.geodesic_vw_prime), geo(&self.gamma)) else {
            return false;
        };
        let ends_ok = g1.start() == self.v
            && g1.end() == self.w
            && g2.start() == self.v_prime
            && g2.end() == self.w_prime
            && gm.start() == self.w
            && gm.end() == self.w_prime
            && gm.vertices().iter().all(|&x| !k.contains_vertex(x));
        let (Ok(x1), Ok(x2)) = (exit_edge(&k, &g1), exit_edge(&k, &g2)) else { return false };
        if !ends_ok || x1.edge != self.exit || x2.edge != self.exit_prime {
            return false;
        }
        match path_around(&k, x1.edge, x2.edge, usize::MAX) {
            Ok(p) => p.verify(&k) && Some(p.length as u32) == self.length,
            Err(NpcError::NoPath) => self.length.is_none(),
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SapProbeResult {
    pub n: usize,
    pub truncation_radius: u32,
    pub geodesic_cap: u64,
    /// Largest minimal path-around length over configurations that have one.
    pub r_emp: Option<u32>,
    pub subgraphs: usize,
    /// `(v, w, v', w')` tuples with `w, w'` on a common geodesic avoiding `K`.
    pub configurations: u64,
    /// Configurations whose exit edges admit no path around `K`.
    pub no_path: u64,
    /// `(v, w)` pairs skipped because they have more than `geodesic_cap` geodesics.
    pub cap_hits: u64,
    /// Vertices beyond the truncation radius of some `K`.
    pub truncated: u64,
    pub exhaustive: bool,
    pub witness: Option<SapWitness>,
}

impl SapProbeResult {
    pub fn to_report(&self) -> CheckReport {
        let ok = self.no_path == 0;
        let mut r = CheckReport::new("sap_probe", ok)
            .stat("n", self.n)
            .stat("r_emp", self.r_emp)
            .stat("subgraphs", self.subgraphs)
            .stat("configurations", self.configurations)
            .stat("no_path", self.no_path)
            .stat("cap_hits", self.cap_hits)
            .stat("truncation_radius", self.truncation_radius)
            .stat("exhaustive", self.exhaustive);
        if let Some(w) = &self.witness {
            r = r.with_witness(w);
        }
        r
    }
}

/// Connected vertex sets (sorted) whose induced subgraph has at most `n` edges.
fn connected_sets(c: &Complex, n: usize) -> Vec<Vec<usize>> {
    let induced_edges = |s: &[usize]| {
        s.iter().enumerate().map(|(a, &x)| s[a + 1..].iter().filter(|&&y| c.adjacent(x, y)).count()).sum::<usize>()
    };
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut frontier: Vec<Vec<usize>> = (0..c.num_vertices()).map(|v| vec![v]).collect();
    let mut out = Vec::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for s in frontier {
            if !seen.insert(s.clone()) {
                continue;
            }
            for &x in &s {
                for &y in c.nbrs(x) {
                    if s.binary_search(&y).is_err() {
                        let mut t = s.clone();
                        t.insert(t.binary_search(&y).unwrap_err(), y);
                        if induced_edges(&t) <= n && !seen.contains(&t) {
                            next.push(t);
                        }
                    }
                }
            }
            out.push(s);
        }
        frontier = next;
    }
    out.sort();
    out
}

/// Connected convex subgraphs with at most `n` edges, as sorted vertex index sets.
pub fn convex_subgraphs(c: &Complex, dm: &DistanceMatrix, n: usize) -> Vec<Vec<usize>> {
    connected_sets(c, n)
        .into_iter()
        .filter(|s| {
            let mut in_set = vec![false; c.num_vertices()];
            for &x in s {
                in_set[x] = true;
            }
            is_convex_set(dm, &in_set, s)
        })
        .collect()
}

struct KOutcome {
    worst: Option<(u32, SapWitness)>,
    unreachable: Option<SapWitness>,
    configurations: u64,
    no_path: u64,
    cap_hits: u64,
    truncated: u64,
}

fn probe_one(c: &Complex, dm: &DistanceMatrix, set: &[usize], radius_cap: u32, geodesic_cap: u64) -> KOutcome {
    let nv = c.num_vertices();
    let k = Subcomplex::induced_idx(c, set);
    let g = AroundGraph::new(&k);
    let mut out = KOutcome { worst: None, unreachable: None, configurations: 0, no_path: 0, cap_hits: 0, truncated: 0 };
    let dist_k: Vec<u32> = (0..nv).map(|x| set.iter().map(|&s| dm.get(s, x)).min().unwrap_or(INF)).collect();
    let far: Vec<usize> = (0..nv)
        .filter(|&x| dist_k[x] > 0 && dist_k[x] != INF)
        .filter(|&x| {
            let keep = dist_k[x] <= radius_cap;
            if !keep {
                out.truncated += 1;
            }
            keep
        })
        .collect();
    // exits[(v, w)] = exit edge node -> least geodesic realising it.
    let mut exits: BTreeMap<(usize, usize), BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
    for &v in set {
        for &w in &far {
            let dw = dm.row(w);
            if count_geodesics_idx(c, dw, v) > geodesic_cap {
                out.cap_hits += 1;
                continue;
            }
            let mut m = BTreeMap::new();
            for p in geodesics_idx(c, dw, v, geodesic_cap).expect("count checked") {
                let i = exit_index(&k, &p).expect("geodesic leaves K");
                let node = g.index[&ekey(p[i], p[i + 1])];
                m.entry(node).or_insert(p);
            }
            exits.insert((v, w), m);
        }
    }
    let mut lengths: HashMap<usize, Vec<u32>> = HashMap::new();
    for m in exits.values() {
        for &node in m.keys() {
            lengths.entry(node).or_insert_with(|| g.bfs(node).0);
        }
    }
    for &w in &far {
        let avoid = avoiding_geodesics(c, dm, &k, w);
        for &w2 in &far {
            if !avoid[w2] {
                continue;
            }
            for &v in set {
                let Some(m1) = exits.get(&(v, w)) else { continue };
                for &v2 in set {
                    let Some(m2) = exits.get(&(v2, w2)) else { continue };
                    out.configurations += 1;
                    for (&e1, p1) in m1 {
                        for (&e2, p2) in m2 {
                            let len = g.length(&lengths[&e1], e1, e2);
                            let make = |len: Option<u32>| SapWitness {
                                k: c.ids(set),
                                v: c.id(v),
                                v_prime: c.id(v2),
                                gamma: c.ids(&least_avoiding(c, dm, &k, w, w2)),
                                w: c.id(w),
                                w_prime: c.id(w2),
                                geodesic_vw: c.ids(p1),
                                geodesic_vw_prime: c.ids(p2),
                                exit: oriented_exit(c, &k, p1),
                                exit_prime: oriented_exit(c, &k, p2),
                                length: len,
                            };
                            if len == INF {
                                out.no_path += 1;
                                if out.unreachable.is_none() {
                                    out.unreachable = Some(make(None));
                                }
                            } else if out.worst.as_ref().is_none_or(|(l, _)| len > *l) {
                                out.worst = Some((len, make(Some(len))));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn oriented_exit(c: &Complex, k: &Subcomplex<'_>, p: &[usize]) -> [VertexId; 2] {
    let i = exit_index(k, p).expect("geodesic leaves K");
    [c.id(p[i]), c.id(p[i + 1])]
}

/// `avoid[x]`: some geodesic from `w` to `x` misses `K`.
fn avoiding_geodesics(c: &Complex, dm: &DistanceMatrix, k: &Subcomplex<'_>, w: usize) -> Vec<bool> {
    let dw = dm.row(w);
    let mut order: Vec<usize> = (0..c.num_vertices()).filter(|&x| dw[x] != INF).collect();
    order.sort_by_key(|&x| dw[x]);
    let mut avoid = vec![false; c.num_vertices()];
    for x in order {
        if k.has_vertex_idx(x) {
            continue;
        }
        avoid[x] = x == w || c.nbrs(x).iter().any(|&y| dw[y] + 1 == dw[x] && avoid[y]);
    }
    avoid
}

/// The least geodesic from `w` to `w2` avoiding `K` (one must exist).
fn least_avoiding(c: &Complex, dm: &DistanceMatrix, k: &Subcomplex<'_>, w: usize, w2: usize) -> Vec<usize> {
    let avoid = avoiding_geodesics(c, dm, k, w2);
    let d2 = dm.row(w2);
    let mut path = vec![w];
    let mut x = w;
    while x != w2 {
        x = *c.nbrs(x).iter().find(|&&y| d2[y] + 1 == d2[x] && avoid[y]).expect("avoiding geodesic");
        path.push(x);
    }
    path
}

/// Probes the Small Angle Property for convex subgraphs with at most `n`
/// edges, far endpoints within `radius_cap` of `K`, and at most
/// `geodesic_cap` geodesics per pair.
pub fn sap_probe(c: &Complex, n: usize, radius_cap: u32, geodesic_cap: u64) -> Result<SapProbeResult> {
    if !c.is_connected() {
        return Err(NpcError::InvalidInput("complex is not connected".into()));
    }
    let dm = DistanceMatrix::new(c);
    let ks = convex_subgraphs(c, &dm, n);
    let outcomes = par::map(&ks, |s| probe_one(c, &dm, s, radius_cap, geodesic_cap));
    let mut res = SapProbeResult {
        n,
        truncation_radius: radius_cap,
        geodesic_cap,
        r_emp: None,
        subgraphs: ks.len(),
        configurations: 0,
        no_path: 0,
        cap_hits: 0,
        truncated: 0,
        exhaustive: true,
        witness: None,
    };
    let mut unreachable = None;
    for o in outcomes {
        res.configurations += o.configurations;
        res.no_path += o.no_path;
        res.cap_hits += o.cap_hits;
        res.truncated += o.truncated;
        if let Some((len, w)) = o.worst {
            if res.r_emp.is_none_or(|r| len > r) {
                res.r_emp = Some(len);
                res.witness = Some(w);
            }
        }
        if unreachable.is_none() {
            unreachable = o.unreachable;
        }
    }
    if unreachable.is_some() {
        res.witness = unreachable;
    }
    res.exhaustive = res.cap_hits == 0 && res.truncated == 0;
    Ok(res)
}

/// `r_emp(n) ≤ n·N²`, with no configuration lacking a path around.
pub fn verify_sap_bound(probe: &SapProbeResult, tightness: usize) -> Result<CheckReport> {
    if !probe.exhaustive {
        return Err(NpcError::NonExhaustiveProbe);
    }
    let bound = (probe.n * tightness * tightness) as u64;
    let r = probe.r_emp.unwrap_or(0) as u64;
    let ok = probe.no_path == 0 && r <= bound;
    let mut rep = CheckReport::new("sap_bound", ok)
        .stat("n", probe.n)
        .stat("r_emp", probe.r_emp)
        .stat("bound", bound)
        .stat("tightness", tightness);
    if !ok {
        rep = rep.with_witness(
            json!({"r_emp": probe.r_emp, "no_path": probe.no_path, "bound": bound, "config": probe.witness}),
        );
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Tight hexagons

/// Which hexagons a probe visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SampleSpec {
    /// Every embedded cycle of length at most `max_len` that splits into at
    /// most six geodesics.
    Exhaustive { max_len: usize },
    /// Closed walks through six random corners along random geodesics, kept
    /// when embedded.
    Random { samples: usize, seed: u64 },
}

/// An embedded geodesic hexagon; sides may be single vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hexagon {
    pub sides: Vec<Vec<VertexId>>,
}

/// Simple cycles of length `3..=max_len` starting at their least vertex,
/// each listed once.
fn simple_cycles(c: &Complex, max_len: usize) -> Vec<Vec<usize>> {
    let per_start = par::map_range(c.num_vertices(), |s| {
        let mut out = Vec::new();
        let mut path = vec![s];
        let mut on = vec![false; c.num_vertices()];
        on[s] = true;
        fn rec(c: &Complex, max_len: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
            let s = path[0];
            let last = *path.last().unwrap();
            if path.len() >= 3 && path[1] < last && c.adjacent(last, s) {
                out.push(path.clone());
            }
            if path.len() == max_len {
                return;
            }
            for &y in c.nbrs(last) {
                if y > s && !on[y] {
                    on[y] = true;
                    path.push(y);
                    rec(c, max_len, path, on, out);
                    path.pop();
                    on[y] = false;
                }
            }
        }
        rec(c, max_len, &mut path, &mut on, &mut out);
        out
    });
    per_start.into_iter().flatten().collect()
}

/// Splits a cycle into as few geodesic arcs as possible (at most six),
/// padded with single-vertex sides to six.
fn hexagon_sides(dm: &DistanceMatrix, cyc: &[usize]) -> Option<Vec<Vec<usize>>> {
    let l = cyc.len();
    let mut best: Option<Vec<Vec<usize>>> = None;
    for start in 0..l {
        let mut sides = Vec::new();
        let mut p = 0;
        while p < l && sides.len() < 6 {
            let mut q = p + 1;
            while q < l && dm.get(cyc[(start + p) % l], cyc[(start + q + 1) % l]) as usize == q + 1 - p {
                q += 1;
            }
            sides.push((p..=q).map(|t| cyc[(start + t) % l]).collect::<Vec<_>>());
            p = q;
        }
        if p == l && best.as_ref().is_none_or(|b| sides.len() < b.len()) {
            best = Some(sides);
        }
    }
    let mut sides = best?;
    let x0 = sides[0][0];
    while sides.len() < 6 {
        sides.push(vec![x0]);
    }
    Some(sides)
}

fn random_hexagons(
    c: &Complex,
    dm: &DistanceMatrix,
    samples: usize,
    seed: u64,
) -> (Vec<Vec<Vec<usize>>>, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = c.num_vertices();
    let mut out = Vec::new();
    let (mut attempts, mut degenerate) = (0, 0);
    while out.len() < samples && attempts < samples.saturating_mul(200).max(1000) {
        attempts += 1;
        let corners: Vec<usize> = (0..6).map(|_| rng.gen_range(0..n)).collect();
        if corners.iter().any(|&x| dm.get(corners[0], x) == INF) {
            continue;
        }
        if corners.iter().all(|&x| x == corners[0]) {
            degenerate += 1;
            continue;
        }
        let sides: Vec<Vec<usize>> = (0..6)
            .map(|i| {
                let (a, b) = (corners[i], corners[(i + 1) % 6]);
                let db = dm.row(b);
                let mut p = vec![a];
                let mut x = a;
                while x != b {
                    let next: Vec<usize> = c.nbrs(x).iter().copied().filter(|&y| db[y] + 1 == db[x]).collect();
                    x = next[rng.gen_range(0..next.len())];
                    p.push(x);
                }
                p
            })
            .collect();
        let walk: Vec<usize> = sides.iter().flat_map(|s| s[..s.len() - 1].iter().copied()).collect();
        let distinct: BTreeSet<usize> = walk.iter().copied().collect();
        if walk.len() >= 3 && distinct.len() == walk.len() {
            out.push(sides);
        }
    }
    (out, attempts, degenerate)
}

struct HexOutcome {
    multiplicity: usize,
    max_degree: usize,
    area: usize,
    tight: CheckReport,
}

fn fill_one(
    c: &Complex,
    ctx: Option<&WsysContext<'_>>,
    sides: &[Vec<usize>],
    n: usize,
    area_cap: usize,
) -> Result<HexOutcome> {
    let structured = ctx.map(|x| x.fill_hexagon_idx(sides).map(|h| h.diagram));
    let d: DiscDiagram = match structured {
        Some(Ok(d)) => d,
        _ => {
            let lp: Vec<VertexId> = sides.iter().flat_map(|s| c.ids(&s[..s.len() - 1])).collect();
            let mut cap = 1;
            loop {
                match reduced_diagram_search(c, &lp, cap) {
                    Ok(d) => break d,
                    Err(NpcError::NotFillable(_)) if cap < area_cap => cap = (cap * 2).min(area_cap),
                    Err(e) => return Err(e),
                }
            }
        }
    };
    let valid = validate_diagram(&d, c);
    if !valid.passed() {
        return Err(NpcError::FillFailed(format!("invalid hexagon filling: {}", valid.witness)));
    }
    Ok(HexOutcome {
        multiplicity: d.multiplicity(),
        max_degree: d.max_degree(),
        area: d.area(),
        tight: verify_tight(&d, n),
    })
}

/// Fills the selected embedded hexagons and checks each filling is at most
/// `n`-to-1 with degrees at most `n`. The `tightness` stat is the least `N`
/// that all fillings found satisfy.
pub fn tight_hexagon_probe(c: &Complex, n: usize, spec: &SampleSpec, area_cap: usize) -> Result<CheckReport> {
    if !c.is_connected() {
        return Err(NpcError::InvalidInput("complex is not connected".into()));
    }
    let dm = DistanceMatrix::new(c);
    let (hexes, attempts, degenerate) = match *spec {
        SampleSpec::Exhaustive { max_len } => {
            let hs: Vec<Vec<Vec<usize>>> =
                simple_cycles(c, max_len).iter().filter_map(|cyc| hexagon_sides(&dm, cyc)).collect();
            let k = hs.len();
            (hs, k, c.num_vertices())
        }
        SampleSpec::Random { samples, seed } => random_hexagons(c, &dm, samples, seed),
    };
    let wsys = c.kind() == ComplexKind::Simplicial && check_weakly_systolic(c).map(|r| r.passed).unwrap_or(false);
    let ctx = wsys.then(|| WsysContext::new(c));
    let outcomes = par::map(&hexes, |h| fill_one(c, ctx.as_ref(), h, n, area_cap));
    let mut tightness = 0;
    let (mut max_mult, mut max_deg, mut max_area) = (0, 0, 0);
    let mut witness = None;
    for (h, o) in hexes.iter().zip(outcomes) {
        let o = o?;
        max_mult = max_mult.max(o.multiplicity);
        max_deg = max_deg.max(o.max_degree);
        max_area = max_area.max(o.area);
        tightness = tightness.max(o.multiplicity.max(o.max_degree));
        if witness.is_none() && !o.tight.passed() {
            let sides: Vec<Vec<VertexId>> = h.iter().map(|s| c.ids(s)).collect();
            witness = Some(json!({"hexagon": Hexagon { sides }, "filling": o.tight.witness}));
        }
    }
    let mut r = match witness {
        None => CheckReport::pass("tight_hexagons"),
        Some(w) => CheckReport::fail("tight_hexagons", w),
    };
    r = r
        .stat("bound", n)
        .stat("hexagons", hexes.len())
        .stat("attempts", attempts)
        .stat("degenerate", degenerate)
        .stat("route", if wsys { "layered" } else { "search" })
        .stat("tightness", tightness)
        .stat("max_multiplicity", max_mult)
        .stat("max_degree", max_deg)
        .stat("max_area", max_area);
    Ok(r)
}
