//! Weakly systolic complexes: the edge and vertex conditions, systolicity,
//! metric triangles and weak modularity, and layered disc fillings of
//! geodesic bigons, triangles and hexagons.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex::{Complex, VertexId};
use crate::diagram::{reduced_diagram_search, validate_diagram, DiagramCell, DiscDiagram, Gluer};
use crate::error::{NpcError, Result};
use crate::metric::{bfs, least_geodesic_idx, DistanceMatrix, OrientedGeodesic, INF};
use crate::par;
use crate::report::CheckReport;

// ---------------------------------------------------------------------------
// Conditions (E) and (V)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "E")]
    Edge,
    #[serde(rename = "V")]
    Vertex,
}

/// A failure of one condition at base vertex `vertex` and radius `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WsysWitness {
    pub vertex: VertexId,
    pub n: u32,
    pub condition: Condition,
    /// The edge with no common lower neighbour, for (E).
    pub edge: Option<[VertexId; 2]>,
    /// The vertex whose lower neighbours are not a clique, and two
    /// non-adjacent ones, for (V).
    pub w: Option<VertexId>,
    pub pair: Option<[VertexId; 2]>,
}

impl WsysWitness {
    /// Re-runs the single condition at the witness radius.
    pub fn reproduces(&self, c: &Complex) -> bool {
        let Ok(v) = c.index_of(self.vertex) else { return false };
        let d = bfs(c, v);
        let found = match self.condition {
            Condition::Edge => edge_failure(c, v, &d, self.n..=self.n),
            Condition::Vertex => vertex_failure(c, v, &d, self.n..=self.n),
        };
        found.as_ref() == Some(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexOutcome {
    pub vertex: VertexId,
    /// Largest radius at which some vertex exists.
    pub eccentricity: u32,
    /// First radius where (E) fails, if any.
    pub edge_failure: Option<u32>,
    /// First radius where (V) fails, if any.
    pub vertex_failure: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WsysReport {
    /// Radii restricted to 1..=3.
    pub local: bool,
    pub passed: bool,
    pub outcomes: Vec<VertexOutcome>,
    pub witness: Option<WsysWitness>,
}

impl WsysReport {
    pub fn to_report(&self) -> CheckReport {
        let name = if self.local { "locally_weakly_systolic" } else { "weakly_systolic" };
        let failing = self.outcomes.iter().filter(|o| o.edge_failure.is_some() || o.vertex_failure.is_some()).count();
        let mut r =
            CheckReport::new(name, self.passed).stat("vertices", self.outcomes.len()).stat("failing_vertices", failing);
        if let Some(w) = &self.witness {
            r = r.with_witness(w);
        }
        r
    }
}

fn edge_failure(c: &Complex, v: usize, d: &[u32], radii: std::ops::RangeInclusive<u32>) -> Option<WsysWitness> {
    for (a, b) in c.edge_list() {
        let n = d[a];
        if n == 0 || n == INF || d[b] != n || !radii.contains(&n) {
            continue;
        }
        let ok = c.nbrs(a).iter().any(|&x| d[x] == n - 1 && c.adjacent(x, b));
        if !ok {
            return Some(WsysWitness {
                vertex: c.id(v),
                n,
                condition: Condition::Edge,
                edge: Some([c.id(a), c.id(b)]),
                w: None,
                pair: None,
            });
        }
    }
    None
}

fn vertex_failure(c: &Complex, v: usize, d: &[u32], radii: std::ops::RangeInclusive<u32>) -> Option<WsysWitness> {
    for w in 0..c.num_vertices() {
        let n = d[w];
        if n == 0 || n == INF || !radii.contains(&n) {
            continue;
        }
        let lower: Vec<usize> = c.nbrs(w).iter().copied().filter(|&x| d[x] == n - 1).collect();
        for (i, &x) in lower.iter().enumerate() {
            for &y in &lower[i + 1..] {
                if !c.adjacent(x, y) {
                    return Some(WsysWitness {
                        vertex: c.id(v),
                        n,
                        condition: Condition::Vertex,
                        edge: None,
                        w: Some(c.id(w)),
                        pair: Some([c.id(x), c.id(y)]),
                    });
                }
            }
        }
    }
    None
}

fn condition_report(
    c: &Complex,
    v: VertexId,
    name: &str,
    f: fn(&Complex, usize, &[u32], std::ops::RangeInclusive<u32>) -> Option<WsysWitness>,
) -> Result<CheckReport> {
    c.require_flag()?;
    let i = c.index_of(v)?;
    let d = bfs(c, i);
    let ecc = d.iter().copied().filter(|&x| x != INF).max().unwrap_or(0);
    Ok(match f(c, i, &d, 1..=u32::MAX) {
        None => CheckReport::pass(name),
        Some(w) => CheckReport::fail(name, w),
    }
    .stat("radius", ecc))
}

/// (E) at base vertex `v`, for every radius.
pub fn check_edge_condition(c: &Complex, v: VertexId) -> Result<CheckReport> {
    condition_report(c, v, "edge_condition", edge_failure)
}

/// (V) at base vertex `v`, for every radius.
pub fn check_vertex_condition(c: &Complex, v: VertexId) -> Result<CheckReport> {
    condition_report(c, v, "vertex_condition", vertex_failure)
}

fn wsys_report(c: &Complex, local: bool) -> Result<WsysReport> {
    c.require_flag()?;
    let max_n = if local { 3 } else { u32::MAX };
    let outcomes: Vec<(VertexOutcome, Option<WsysWitness>)> = par::map_range(c.num_vertices(), |v| {
        let d = bfs(c, v);
        let ecc = d.iter().copied().filter(|&x| x != INF).max().unwrap_or(0);
        let mut e = None;
        let mut vf = None;
        for n in 1..=ecc.min(max_n) {
            if e.is_none() {
                e = edge_failure(c, v, &d, n..=n);
            }
            if vf.is_none() {
                vf = vertex_failure(c, v, &d, n..=n);
            }
        }
        let o = VertexOutcome {
            vertex: c.id(v),
            eccentricity: ecc,
            edge_failure: e.as_ref().map(|w| w.n),
            vertex_failure: vf.as_ref().map(|w| w.n),
        };
        // Report the failure at the smaller radius, (E) first on ties.
        let w = match (e, vf) {
            (Some(a), Some(b)) => Some(if b.n < a.n { b } else { a }),
            (a, b) => a.or(b),
        };
        (o, w)
    });
    let witness = outcomes.iter().find_map(|(_, w)| w.clone());
    Ok(WsysReport { local, passed: witness.is_none(), outcomes: outcomes.into_iter().map(|x| x.0).collect(), witness })
}

/// (E) and (V) at every vertex and every radius.
pub fn check_weakly_systolic(c: &Complex) -> Result<WsysReport> {
    wsys_report(c, false)
}

/// (E) and (V) at every vertex for radii 1, 2 and 3.
pub fn check_locally(c: &Complex) -> Result<WsysReport> {
    wsys_report(c, true)
}

/// Every embedded 4- or 5-cycle of the 1-skeleton has a chord.
pub fn check_systolic(c: &Complex) -> Result<CheckReport> {
    c.require_flag()?;
    let found = par::map_range(c.num_vertices(), |s| chordless_cycle_from(c, s));
    let cycles_checked: usize = found.iter().map(|x| x.1).sum();
    let witness = found.into_iter().find_map(|x| x.0);
    Ok(match witness {
        None => CheckReport::pass("systolic"),
        Some(cyc) => CheckReport::fail("systolic", c.ids(&cyc)),
    }
    .stat("short_cycles", cycles_checked))
}

/// First chordless 4- or 5-cycle whose least vertex is `s`, and the number
/// of 4- and 5-cycles examined.
fn chordless_cycle_from(c: &Complex, s: usize) -> (Option<Vec<usize>>, usize) {
    let mut path = vec![s];
    let mut count = 0;
    fn rec(c: &Complex, path: &mut Vec<usize>, count: &mut usize) -> Option<Vec<usize>> {
        let s = path[0];
        let last = *path.last().unwrap();
        let l = path.len();
        if l >= 4 && path[1] < last && c.adjacent(last, s) {
            *count += 1;
            let chord = (0..l).any(|i| (i + 2..l).any(|j| !(i == 0 && j == l - 1) && c.adjacent(path[i], path[j])));
            if !chord {
                return Some(path.clone());
            }
        }
        if l == 5 {
            return None;
        }
        for &y in c.nbrs(last) {
            if y > s && !path.contains(&y) {
                path.push(y);
                if let Some(w) = rec(c, path, count) {
                    return Some(w);
                }
                path.pop();
            }
        }
        None
    }
    let w = rec(c, &mut path, &mut count);
    (w, count)
}

// ---------------------------------------------------------------------------
// Metric triangles

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricTriangle {
    pub input: [VertexId; 3],
    /// The quasi-median `(u', v', w')`.
    pub median: [VertexId; 3],
    /// `d(u',v')`, `d(v',w')`, `d(w',u')`.
    pub sizes: [u32; 3],
}

impl MetricTriangle {
    pub fn is_equilateral(&self) -> bool {
        self.sizes[0] == self.sizes[1] && self.sizes[1] == self.sizes[2]
    }
}

/// Intervals of the triple meet pairwise only in their common ends.
fn is_metric_triangle(dm: &DistanceMatrix, t: [usize; 3]) -> bool {
    let [a, b, c] = t;
    (0..dm.len()).all(|x| {
        let ab = dm.in_interval(a, b, x);
        let bc = dm.in_interval(b, c, x);
        let ca = dm.in_interval(c, a, x);
        (!ab || !bc || x == b) && (!bc || !ca || x == c) && (!ca || !ab || x == a)
    })
}

/// The vertex of `I(a,b) ∩ I(a,c)` farthest from `a`, least index on ties.
fn quasi_median_corner(dm: &DistanceMatrix, a: usize, b: usize, c: usize) -> usize {
    (0..dm.len())
        .filter(|&x| dm.in_interval(a, b, x) && dm.in_interval(a, c, x))
        .max_by_key(|&x| (dm.get(a, x), std::cmp::Reverse(x)))
        .expect("a lies in both intervals")
}

fn quasi_median(dm: &DistanceMatrix, t: [usize; 3]) -> [usize; 3] {
    let [u, v, w] = t;
    [quasi_median_corner(dm, u, v, w), quasi_median_corner(dm, v, w, u), quasi_median_corner(dm, w, u, v)]
}

pub fn metric_triangle(c: &Complex, u: VertexId, v: VertexId, w: VertexId) -> Result<MetricTriangle> {
    let ctx = WsysContext::new(c);
    ctx.metric_triangle(u, v, w)
}

/// Metric triangles are equidistant: for every metric triangle `u'v'w'`,
/// all of `I(v',w')` is at one distance from `u'`; all are equilateral.
pub fn check_weak_modularity(c: &Complex) -> CheckReport {
    let dm = DistanceMatrix::new(c);
    let n = c.num_vertices();
    let per_a = par::map_range(n, |a| {
        let mut count = 0usize;
        let mut max_size = 0u32;
        for b in a + 1..n {
            for cc in b + 1..n {
                let t = [a, b, cc];
                if t.iter().any(|&x| dm.get(t[0], x) == INF) || !is_metric_triangle(&dm, t) {
                    continue;
                }
                count += 1;
                let sizes = [dm.get(a, b), dm.get(b, cc), dm.get(cc, a)];
                max_size = max_size.max(sizes[0]).max(sizes[1]).max(sizes[2]);
                for r in 0..3 {
                    let (p, q, s) = (t[r], t[(r + 1) % 3], t[(r + 2) % 3]);
                    let iv = dm.interval(q, s);
                    let d0 = dm.get(p, iv[0]);
                    if let Some(&y) = iv.iter().find(|&&y| dm.get(p, y) != d0) {
                        let w = json!({"triangle": c.ids(&t), "apex": c.id(p), "x": c.id(iv[0]), "y": c.id(y)});
                        return (count, max_size, Some(w));
                    }
                }
                if sizes[0] != sizes[1] || sizes[1] != sizes[2] {
                    let w = json!({"triangle": c.ids(&t), "sizes": sizes});
                    return (count, max_size, Some(w));
                }
            }
        }
        (count, max_size, None)
    });
    let count: usize = per_a.iter().map(|x| x.0).sum();
    let max_size = per_a.iter().map(|x| x.1).max().unwrap_or(0);
    let witness = per_a.into_iter().find_map(|x| x.2);
    let mut r = match witness {
        None => CheckReport::pass("weak_modularity"),
        Some(w) => CheckReport::fail("weak_modularity", w),
    };
    r = r.stat("metric_triangles", count).stat("max_size", max_size);
    r
}

// ---------------------------------------------------------------------------
// Layered fillings

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillBackend {
    /// Layer-by-layer construction, falling back to the search when a layer
    /// cannot be ordered.
    #[default]
    Structured,
    /// Exhaustive minimal-area search.
    Oracle,
}

/// Flat filling of a simple geodesic bigon: layer `i` lists the interval
/// vertices at distance `i` from the first endpoint, from the first
/// geodesic's vertex to the second's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatDisc {
    pub layers: Vec<Vec<VertexId>>,
    pub diagram: DiscDiagram,
}

impl FlatDisc {
    /// Checks the layer distances, the end columns, the adjacency pattern
    /// between and within layers, and the degree bounds of the diagram.
    pub fn verify(&self, c: &Complex) -> Result<CheckReport> {
        let n = self.layers.len() - 1;
        let (v, u) = (self.layers[0][0], self.layers[n][0]);
        let dv = bfs(c, c.index_of(v)?);
        let du = bfs(c, c.index_of(u)?);
        let fail = |what: &str, detail: serde_json::Value| {
            Ok(CheckReport::fail("flat_disc", json!({"violation": what, "detail": detail})))
        };
        let mut pos: HashMap<usize, (usize, usize)> = HashMap::new();
        for (i, layer) in self.layers.iter().enumerate() {
            for (j, &x) in layer.iter().enumerate() {
                let xi = c.index_of(x)?;
                if dv[xi] != i as u32 || du[xi] != (n - i) as u32 {
                    return fail("distance", json!([i, j, x]));
                }
            }
        }
        let d = &self.diagram;
        for (k, &x) in d.vertex_map.iter().enumerate() {
            let i = dv[c.index_of(x)?] as usize;
            let Some(j) = self.layers[i].iter().position(|&y| y == x) else {
                return fail("vertex_outside_layers", json!(x));
            };
            pos.insert(k, (i, j));
        }
        for (a, b) in d.edges() {
            let ((i, j), (i2, j2)) = (pos[&a], pos[&b]);
            let ((i, j), (i2, j2)) = if i <= i2 { ((i, j), (i2, j2)) } else { ((i2, j2), (i, j)) };
            let ok = match i2 - i {
                0 => j.abs_diff(j2) == 1,
                1 => j.abs_diff(j2) <= 1,
                _ => false,
            };
            if !ok {
                return fail("adjacency", json!([[i, j], [i2, j2]]));
            }
        }
        let mut up: HashMap<usize, Vec<usize>> = HashMap::new();
        for (a, b) in d.edges() {
            let (pa, pb) = (pos[&a], pos[&b]);
            if pb.0 == pa.0 + 1 {
                up.entry(a).or_default().push(pb.1);
            } else if pa.0 == pb.0 + 1 {
                up.entry(b).or_default().push(pa.1);
            }
        }
        for (k, js) in &up {
            let (lo, hi) = (js.iter().min().unwrap(), js.iter().max().unwrap());
            if hi - lo > 1 {
                return fail("upper_neighbours", json!({"vertex": pos[k], "columns": js}));
            }
        }
        let bset: BTreeSet<usize> = d.boundary.iter().copied().collect();
        for (k, &deg) in d.degrees().iter().enumerate() {
            let bad = if bset.contains(&k) { deg > 5 } else { deg != 6 };
            if bad {
                return fail("degree", json!({"vertex": d.vertex_map[k], "degree": deg}));
            }
        }
        if d.multiplicity() != 1 {
            return fail("not_embedded", json!(d.multiplicity()));
        }
        Ok(CheckReport::pass("flat_disc").stat("layers", self.layers.len()).stat("area", d.area()))
    }
}

/// A filled geodesic triangle with its sides in diagram form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexagonFill {
    pub diagram: DiscDiagram,
    pub multiplicity: usize,
    pub max_degree: usize,
}

impl HexagonFill {
    /// The tightness constant this filling achieves.
    pub fn tightness(&self) -> usize {
        self.multiplicity.max(self.max_degree)
    }
}

/// Why a layered construction gave up.
#[derive(Debug)]
enum LayerError {
    Ambiguous,
    Invalid,
}

/// Distances and adjacency used by the fillings of one complex.
pub struct WsysContext<'a> {
    c: &'a Complex,
    dm: DistanceMatrix,
}

fn dedup_consecutive(v: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(v.len());
    for x in v {
        if out.last() != Some(&x) {
            out.push(x);
        }
    }
    out
}

fn rev(p: &[usize]) -> Vec<usize> {
    p.iter().rev().copied().collect()
}

/// `a` followed by `b` without its first vertex (which must equal `a`'s last).
fn join(a: &[usize], b: &[usize]) -> Vec<usize> {
    debug_assert_eq!(a.last(), b.first());
    let mut out = a.to_vec();
    out.extend_from_slice(&b[1..]);
    out
}

/// Like [`join`] for diagram ids, whose shared ends may only be unioned.
fn glue_ids(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = a.to_vec();
    out.extend_from_slice(&b[1..]);
    out
}

/// Closed loop `g1` then `g2` backwards, without repeating the ends.
fn bigon_loop(g1: &[usize], g2: &[usize]) -> Vec<usize> {
    let n = g1.len() - 1;
    let mut l = g1.to_vec();
    if n > 0 {
        l.extend(g2[1..n].iter().rev());
    }
    l
}

/// Boundary of a closed walk given by consecutive sides, each starting where
/// the previous one ends.
fn sides_loop(sides: &[&[usize]]) -> Vec<usize> {
    let mut l: Vec<usize> = Vec::new();
    for s in sides {
        l.extend_from_slice(&s[..s.len() - 1]);
    }
    if l.is_empty() {
        l.push(sides[0][0]);
    }
    l
}

/// Adds `d` to `gl`, identifying its boundary walk with `loop_ids`.
fn attach(gl: &mut Gluer, d: &DiscDiagram, loop_ids: &[usize]) -> Result<()> {
    if d.boundary.len() != loop_ids.len() {
        return Err(NpcError::FillFailed(format!(
            "piece boundary has length {} but the loop has length {}",
            d.boundary.len(),
            loop_ids.len()
        )));
    }
    let off = gl.add(d);
    for (k, &b) in d.boundary.iter().enumerate() {
        gl.union(off + b, loop_ids[k])?;
    }
    Ok(())
}

impl<'a> WsysContext<'a> {
    pub fn new(c: &'a Complex) -> Self {
        WsysContext { c, dm: DistanceMatrix::new(c) }
    }

    pub fn complex(&self) -> &'a Complex {
        self.c
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dm
    }

    fn geodesic_indices(&self, g: &OrientedGeodesic) -> Result<Vec<usize>> {
        self.c.indices(g.vertices())
    }

    fn is_geodesic(&self, p: &[usize]) -> bool {
        p.windows(2).all(|w| self.c.adjacent(w[0], w[1]))
            && self.dm.get(p[0], *p.last().unwrap()) as usize + 1 == p.len()
    }

    fn least(&self, from: usize, to: usize) -> Vec<usize> {
        least_geodesic_idx(self.c, self.dm.row(to), from)
    }

    pub fn metric_triangle(&self, u: VertexId, v: VertexId, w: VertexId) -> Result<MetricTriangle> {
        let t = [self.c.index_of(u)?, self.c.index_of(v)?, self.c.index_of(w)?];
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            if self.dm.get(t[a], t[b]) == INF {
                return Err(NpcError::Disconnected(self.c.id(t[a]), self.c.id(t[b])));
            }
        }
        let m = quasi_median(&self.dm, t);
        if !is_metric_triangle(&self.dm, m) {
            return Err(NpcError::NotMetricTriangle([self.c.id(m[0]), self.c.id(m[1]), self.c.id(m[2])]));
        }
        Ok(MetricTriangle {
            input: [u, v, w],
            median: [self.c.id(m[0]), self.c.id(m[1]), self.c.id(m[2])],
            sizes: [self.dm.get(m[0], m[1]), self.dm.get(m[1], m[2]), self.dm.get(m[2], m[0])],
        })
    }

    /// The unique lower common neighbour of an edge, relative to distances `d`.
    fn lower_common(&self, d: &[u32], a: usize, b: usize) -> std::result::Result<usize, LayerError> {
        let level = d[a] - 1;
        let mut it = self.c.nbrs(a).iter().copied().filter(|&x| d[x] == level && self.c.adjacent(x, b));
        match (it.next(), it.next()) {
            (Some(x), None) => Ok(x),
            (Some(_), Some(_)) => Err(LayerError::Ambiguous),
            (None, _) => Err(LayerError::Invalid),
        }
    }

    /// Triangulates the strip between `upper` and `lower`, which start at
    /// adjacent vertices and end at adjacent vertices.
    fn zip(&self, upper: &[usize], lower: &[usize]) -> std::result::Result<Vec<[usize; 3]>, LayerError> {
        let (p, q) = (upper.len() - 1, lower.len() - 1);
        let (mut s, mut t) = (0, 0);
        let mut tris = Vec::with_capacity(p + q);
        while s < p || t < q {
            let up = s < p && self.c.adjacent(upper[s + 1], lower[t]);
            let down = t < q && self.c.adjacent(upper[s], lower[t + 1]);
            match (up, down) {
                (true, false) => {
                    tris.push([upper[s], upper[s + 1], lower[t]]);
                    s += 1;
                }
                (false, true) => {
                    tris.push([upper[s], lower[t], lower[t + 1]]);
                    t += 1;
                }
                (true, true) => return Err(LayerError::Ambiguous),
                (false, false) => return Err(LayerError::Invalid),
            }
        }
        Ok(tris)
    }

    /// Diagram of an embedded triangulated disc from its layers' triangles,
    /// oriented so that the boundary walk `boundary` is traversed along
    /// the cells.
    fn layered_diagram(&self, tris: &[[usize; 3]], boundary: &[usize]) -> std::result::Result<DiscDiagram, LayerError> {
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut vmap = Vec::new();
        for &x in boundary.iter().chain(tris.iter().flatten()) {
            ids.entry(x).or_insert_with(|| {
                vmap.push(self.c.id(x));
                vmap.len() - 1
            });
        }
        // Orient every triangle against the boundary by propagation.
        let mut dart_owner: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, t) in tris.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                edge_tris.entry((a.min(b), a.max(b))).or_default().push(k);
            }
        }
        let mut oriented: Vec<Option<[usize; 3]>> = vec![None; tris.len()];
        let mut stack = Vec::new();
        let l = boundary.len();
        for i in 0..l {
            let (a, b) = (boundary[i], boundary[(i + 1) % l]);
            if let Some(ts) = edge_tris.get(&(a.min(b), a.max(b))) {
                if let [k] = ts[..] {
                    let t = tris[k];
                    let third = *t.iter().find(|&&x| x != a && x != b).unwrap();
                    let want = [a, b, third];
                    match oriented[k] {
                        None => {
                            oriented[k] = Some(want);
                            stack.push(k);
                        }
                        Some(have) if !same_cycle(have, want) => return Err(LayerError::Invalid),
                        _ => {}
                    }
                }
            }
        }
        while let Some(k) = stack.pop() {
            let w = oriented[k].unwrap();
            for i in 0..3 {
                let (a, b) = (w[i], w[(i + 1) % 3]);
                dart_owner.insert((a, b), k);
                for &o in &edge_tris[&(a.min(b), a.max(b))] {
                    if o == k {
                        continue;
                    }
                    let third = *tris[o].iter().find(|&&x| x != a && x != b).unwrap();
                    let want = [b, a, third];
                    match oriented[o] {
                        None => {
                            oriented[o] = Some(want);
                            stack.push(o);
                        }
                        Some(have) if !same_cycle(have, want) => return Err(LayerError::Invalid),
                        _ => {}
                    }
                }
            }
        }
        let mut cells = Vec::with_capacity(tris.len());
        for o in oriented {
            let t = o.ok_or(LayerError::Invalid)?;
            let walk: Vec<usize> = t.iter().map(|x| ids[x]).collect();
            let image: Vec<VertexId> = t.iter().map(|&x| self.c.id(x)).collect();
            cells.push(DiagramCell::onto(self.c, walk, &image).map_err(|_| LayerError::Invalid)?);
        }
        let d =
            DiscDiagram { vertex_map: vmap, cells, boundary: boundary.iter().map(|x| ids[x]).collect(), target: None };
        if !validate_diagram(&d, self.c).passed() {
            return Err(LayerError::Invalid);
        }
        Ok(d)
    }

    /// Layers of a simple bigon, built from the far end using (E).
    fn flat_layers(&self, g1: &[usize], g2: &[usize]) -> std::result::Result<Vec<Vec<usize>>, LayerError> {
        let n = g1.len() - 1;
        let d = self.dm.row(g1[0]);
        let mut layers: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        layers[n] = vec![g1[n]];
        for i in (0..n).rev() {
            let upper = &layers[i + 1];
            let mut row = vec![g1[i]];
            for w in upper.windows(2) {
                row.push(self.lower_common(d, w[0], w[1])?);
            }
            row.push(g2[i]);
            let row = dedup_consecutive(row);
            let distinct: BTreeSet<_> = row.iter().collect();
            if distinct.len() != row.len() || !row.windows(2).all(|w| self.c.adjacent(w[0], w[1])) {
                return Err(LayerError::Invalid);
            }
            layers[i] = row;
        }
        if layers[0] != [g1[0]] {
            return Err(LayerError::Invalid);
        }
        Ok(layers)
    }

    /// Structured filling of a simple bigon (`g1`, `g2` share only their ends).
    pub fn flat_disc(&self, g1: &OrientedGeodesic, g2: &OrientedGeodesic) -> Result<FlatDisc> {
        let (a, b) = (self.geodesic_indices(g1)?, self.geodesic_indices(g2)?);
        self.flat_disc_idx(&a, &b).map_err(|e| NpcError::FillFailed(format!("layered construction failed: {e:?}")))
    }

    fn flat_disc_idx(&self, g1: &[usize], g2: &[usize]) -> std::result::Result<FlatDisc, LayerError> {
        let layers = self.flat_layers(g1, g2)?;
        let mut tris = Vec::new();
        for i in 0..layers.len() - 1 {
            tris.extend(self.zip(&layers[i + 1], &layers[i])?);
        }
        let all: Vec<usize> = layers.iter().flatten().copied().collect();
        if all.iter().collect::<BTreeSet<_>>().len() != all.len() {
            return Err(LayerError::Invalid);
        }
        let diagram = self.layered_diagram(&tris, &bigon_loop(g1, g2))?;
        Ok(FlatDisc { layers: layers.iter().map(|l| self.c.ids(l)).collect(), diagram })
    }

    fn search_fill(&self, loop_idx: &[usize], cap: usize) -> Result<DiscDiagram> {
        let ids = self.c.ids(loop_idx);
        reduced_diagram_search(self.c, &ids, cap).map_err(|e| match e {
            NpcError::NotFillable(cap) => NpcError::FillFailed(format!("no filling of area at most {cap}")),
            other => other,
        })
    }

    fn simple_bigon(&self, g1: &[usize], g2: &[usize], backend: FillBackend) -> Result<DiscDiagram> {
        if backend == FillBackend::Structured {
            if let Ok(fd) = self.flat_disc_idx(g1, g2) {
                return Ok(fd.diagram);
            }
        }
        let n = g1.len() - 1;
        self.search_fill(&bigon_loop(g1, g2), n * n / 2)
    }

    fn bigon_idx(&self, g1: &[usize], g2: &[usize], backend: FillBackend) -> Result<DiscDiagram> {
        let n = g1.len() - 1;
        if g2.len() != n + 1 || g1[0] != g2[0] || g1[n] != g2[n] {
            return Err(NpcError::FillFailed("geodesics do not share both endpoints".into()));
        }
        if !self.is_geodesic(g1) || !self.is_geodesic(g2) {
            return Err(NpcError::FillFailed("sides are not geodesics".into()));
        }
        let mut gl = Gluer::new();
        let id1: Vec<usize> = g1.iter().map(|&x| gl.fresh(self.c.id(x))).collect();
        let id2: Vec<usize> =
            (0..=n).map(|i| if g1[i] == g2[i] { id1[i] } else { gl.fresh(self.c.id(g2[i])) }).collect();
        let cuts: Vec<usize> = (0..=n).filter(|&i| g1[i] == g2[i]).collect();
        for w in cuts.windows(2) {
            let (i, j) = (w[0], w[1]);
            if j == i + 1 {
                continue;
            }
            let piece = self.simple_bigon(&g1[i..=j], &g2[i..=j], backend)?;
            attach(&mut gl, &piece, &bigon_loop(&id1[i..=j], &id2[i..=j]))?;
        }
        Ok(gl.finish(&bigon_loop(&id1, &id2)))
    }

    /// Filling of `g1 · g2⁻¹`, split at common vertices into simple bigons.
    pub fn fill_bigon(
        &self,
        g1: &OrientedGeodesic,
        g2: &OrientedGeodesic,
        backend: FillBackend,
    ) -> Result<DiscDiagram> {
        let d = self.bigon_idx(&self.geodesic_indices(g1)?, &self.geodesic_indices(g2)?, backend)?;
        Ok(d)
    }

    /// Equilateral filling of a metric triangle `a b c`, with the three sides
    /// it uses (`a→b`, `b→c`, `c→a`).
    fn metric_triangle_fill(&self, t: [usize; 3]) -> Result<(DiscDiagram, [Vec<usize>; 3])> {
        let [a, b, c] = t;
        let k = self.dm.get(a, b) as usize;
        if k == 0 {
            return Ok((DiscDiagram::single_vertex(self.c.id(a)), [vec![a], vec![a], vec![a]]));
        }
        match self.equilateral_layers(t) {
            Ok((d, sides)) => Ok((d, sides)),
            Err(_) => {
                let sides = [self.least(a, b), self.least(b, c), self.least(c, a)];
                let l = sides_loop(&[&sides[0], &sides[1], &sides[2]]);
                Ok((self.search_fill(&l, k * k)?, sides))
            }
        }
    }

    fn equilateral_layers(&self, t: [usize; 3]) -> std::result::Result<(DiscDiagram, [Vec<usize>; 3]), LayerError> {
        let [a, b, c] = t;
        let k = self.dm.get(a, b) as usize;
        let d = self.dm.row(a);
        let base = self.least(b, c);
        if base.iter().any(|&x| d[x] as usize != k) {
            return Err(LayerError::Invalid);
        }
        let mut layers: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
        layers[k] = base;
        for i in (0..k).rev() {
            let row: Vec<usize> = layers[i + 1]
                .windows(2)
                .map(|w| self.lower_common(d, w[0], w[1]))
                .collect::<std::result::Result<_, _>>()?;
            if !row.windows(2).all(|w| self.c.adjacent(w[0], w[1])) {
                return Err(LayerError::Invalid);
            }
            layers[i] = row;
        }
        let all: Vec<usize> = layers.iter().flatten().copied().collect();
        if all.iter().collect::<BTreeSet<_>>().len() != all.len() {
            return Err(LayerError::Invalid);
        }
        let mut tris = Vec::new();
        for i in 0..k {
            tris.extend(self.zip(&layers[i + 1], &layers[i])?);
        }
        let ab: Vec<usize> = layers.iter().map(|l| l[0]).collect();
        let ca: Vec<usize> = layers.iter().rev().map(|l| *l.last().unwrap()).collect();
        let bc = layers[k].clone();
        let d = self.layered_diagram(&tris, &sides_loop(&[&ab, &bc, &ca]))?;
        Ok((d, [ab, bc, ca]))
    }

    /// Filling of the geodesic triangle with sides `u→v`, `v→w`, `w→u`,
    /// assembled from the metric-triangle core and three bigons. The
    /// boundary walk is the three sides in order.
    pub fn fill_geodesic_triangle(&self, sides: [&[usize]; 3]) -> Result<DiscDiagram> {
        for i in 0..3 {
            let (s, t) = (sides[i], sides[(i + 1) % 3]);
            if s.is_empty() || s.last() != t.first() || !self.is_geodesic(s) {
                return Err(NpcError::FillFailed("sides do not form a geodesic triangle".into()));
            }
        }
        let corners = [sides[0][0], sides[1][0], sides[2][0]];
        let m = quasi_median(&self.dm, corners);
        if !is_metric_triangle(&self.dm, m) {
            return Err(NpcError::NotMetricTriangle([self.c.id(m[0]), self.c.id(m[1]), self.c.id(m[2])]));
        }
        let (core, inner) = self.metric_triangle_fill(m)?;
        let chains: Vec<Vec<usize>> = (0..3).map(|i| self.least(corners[i], m[i])).collect();

        let mut gl = Gluer::new();
        let fresh_path = |gl: &mut Gluer, p: &[usize], first: Option<usize>, last: Option<usize>| {
            let l = p.len();
            if let (1, Some(f), Some(e)) = (l, first, last) {
                gl.union(f, e).expect("ends map to the same vertex");
                return vec![f];
            }
            (0..l)
                .map(|k| match (k, first, last) {
                    (0, Some(f), _) => f,
                    (k, _, Some(e)) if k + 1 == l => e,
                    _ => gl.fresh(self.c.id(p[k])),
                })
                .collect::<Vec<usize>>()
        };
        let p0 = fresh_path(&mut gl, sides[0], None, None);
        let p1 = fresh_path(&mut gl, sides[1], Some(*p0.last().unwrap()), None);
        let p2 = fresh_path(&mut gl, sides[2], Some(*p1.last().unwrap()), Some(p0[0]));
        let ps = [&p0, &p1, &p2];
        let ch: Vec<Vec<usize>> = (0..3).map(|i| fresh_path(&mut gl, &chains[i], Some(ps[i][0]), None)).collect();
        let s: Vec<Vec<usize>> = (0..3)
            .map(|i| {
                let (f, e) = (*ch[i].last().unwrap(), *ch[(i + 1) % 3].last().unwrap());
                fresh_path(&mut gl, &inner[i], Some(f), Some(e))
            })
            .collect();
        attach(&mut gl, &core, &sides_loop(&[&s[0], &s[1], &s[2]]))?;
        for i in 0..3 {
            let j = (i + 1) % 3;
            let g2 = join(&join(&chains[i], &inner[i]), &rev(&chains[j]));
            let g2_ids = glue_ids(&glue_ids(&ch[i], &s[i]), &rev(&ch[j]));
            if !self.is_geodesic(&g2) || g2.len() != sides[i].len() {
                return Err(NpcError::FillFailed("quasi-median decomposition is not geodesic".into()));
            }
            let d = self.bigon_idx(sides[i], &g2, FillBackend::Structured)?;
            attach(&mut gl, &d, &bigon_loop(ps[i], &g2_ids))?;
        }
        let out = gl.finish(&sides_loop(&[&p0, &p1, &p2]));
        let rep = validate_diagram(&out, self.c);
        if !rep.passed() {
            return Err(NpcError::FillFailed(format!("assembled triangle is invalid: {}", rep.witness)));
        }
        Ok(out)
    }

    /// Triangle filling along least geodesics, without the bound check.
    pub fn fill_triangle_unchecked(&self, u: VertexId, v: VertexId, w: VertexId) -> Result<DiscDiagram> {
        let t = [self.c.index_of(u)?, self.c.index_of(v)?, self.c.index_of(w)?];
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            if self.dm.get(t[a], t[b]) == INF {
                return Err(NpcError::Disconnected(self.c.id(t[a]), self.c.id(t[b])));
            }
        }
        let sides = [self.least(t[0], t[1]), self.least(t[1], t[2]), self.least(t[2], t[0])];
        self.fill_geodesic_triangle([&sides[0], &sides[1], &sides[2]])
    }

    /// Triangle filling, failing with `BoundViolated` when it is more than
    /// 4-to-1 or has a vertex of degree above 14.
    pub fn fill_triangle(&self, u: VertexId, v: VertexId, w: VertexId) -> Result<DiscDiagram> {
        let d = self.fill_triangle_unchecked(u, v, w)?;
        check_triangle_bounds(&d)?;
        Ok(d)
    }

    /// Filling of a geodesic hexagon (`sides[i]` runs from corner `i` to
    /// corner `i+1`) from four triangles along diagonals out of corner 0.
    pub fn fill_hexagon(&self, sides: &[OrientedGeodesic; 6]) -> Result<HexagonFill> {
        let s: Vec<Vec<usize>> = sides.iter().map(|g| self.geodesic_indices(g)).collect::<Result<_>>()?;
        self.fill_hexagon_idx(&s)
    }

    pub(crate) fn fill_hexagon_idx(&self, s: &[Vec<usize>]) -> Result<HexagonFill> {
        for i in 0..6 {
            if s[i].last() != s[(i + 1) % 6].first() || !self.is_geodesic(&s[i]) {
                return Err(NpcError::FillFailed("sides do not form a geodesic hexagon".into()));
            }
        }
        let x0 = s[0][0];
        let diag: Vec<Vec<usize>> = (2..5).map(|k| self.least(x0, s[k][0])).collect();
        let tri_sides: [[Vec<usize>; 3]; 4] = [
            [s[0].clone(), s[1].clone(), rev(&diag[0])],
            [diag[0].clone(), s[2].clone(), rev(&diag[1])],
            [diag[1].clone(), s[3].clone(), rev(&diag[2])],
            [diag[2].clone(), s[4].clone(), s[5].clone()],
        ];
        let mut gl = Gluer::new();
        let mut corner_ids: Vec<usize> = s.iter().map(|p| gl.fresh(self.c.id(p[0]))).collect();
        corner_ids.push(corner_ids[0]);
        let path_ids = |gl: &mut Gluer, p: &[usize], a: usize, b: usize| -> Vec<usize> {
            let l = p.len();
            if l == 1 {
                gl.union(a, b).expect("same corner");
                return vec![a];
            }
            (0..l)
                .map(|k| {
                    if k == 0 {
                        a
                    } else if k + 1 == l {
                        b
                    } else {
                        gl.fresh(self.c.id(p[k]))
                    }
                })
                .collect()
        };
        let h: Vec<Vec<usize>> = (0..6).map(|i| path_ids(&mut gl, &s[i], corner_ids[i], corner_ids[i + 1])).collect();
        let dg: Vec<Vec<usize>> =
            (0..3).map(|k| path_ids(&mut gl, &diag[k], corner_ids[0], corner_ids[k + 2])).collect();
        let tri_ids: [[Vec<usize>; 3]; 4] = [
            [h[0].clone(), h[1].clone(), rev(&dg[0])],
            [dg[0].clone(), h[2].clone(), rev(&dg[1])],
            [dg[1].clone(), h[3].clone(), rev(&dg[2])],
            [dg[2].clone(), h[4].clone(), h[5].clone()],
        ];
        for (ts, ti) in tri_sides.iter().zip(&tri_ids) {
            let d = self.fill_geodesic_triangle([&ts[0], &ts[1], &ts[2]])?;
            attach(&mut gl, &d, &sides_loop(&[&ti[0], &ti[1], &ti[2]]))?;
        }
        let refs: Vec<&[usize]> = h.iter().map(|p| p.as_slice()).collect();
        let diagram = gl.finish(&sides_loop(&refs));
        let rep = validate_diagram(&diagram, self.c);
        if !rep.passed() {
            return Err(NpcError::FillFailed(format!("assembled hexagon is invalid: {}", rep.witness)));
        }
        Ok(HexagonFill { multiplicity: diagram.multiplicity(), max_degree: diagram.max_degree(), diagram })
    }
}

fn same_cycle(a: [usize; 3], b: [usize; 3]) -> bool {
    (0..3).any(|s| (0..3).all(|i| a[(s + i) % 3] == b[i]))
}

/// The triangle bounds: at most 4-to-1 and every degree at most 14.
pub fn check_triangle_bounds(d: &DiscDiagram) -> Result<()> {
    let m = d.multiplicity();
    if m > 4 {
        return Err(NpcError::BoundViolated { bound: "multiplicity", value: m });
    }
    let deg = d.max_degree();
    if deg > 14 {
        return Err(NpcError::BoundViolated { bound: "degree", value: deg });
    }
    Ok(())
}

pub fn fill_bigon(
    c: &Complex,
    g1: &OrientedGeodesic,
    g2: &OrientedGeodesic,
    backend: FillBackend,
) -> Result<DiscDiagram> {
    WsysContext::new(c).fill_bigon(g1, g2, backend)
}

pub fn fill_triangle(c: &Complex, u: VertexId, v: VertexId, w: VertexId) -> Result<DiscDiagram> {
    WsysContext::new(c).fill_triangle(u, v, w)
}

pub fn fill_hexagon(c: &Complex, sides: &[OrientedGeodesic; 6]) -> Result<HexagonFill> {
    WsysContext::new(c).fill_hexagon(sides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{gauss_bonnet_audit, is_reduced};
    use crate::generators::{disc_coords, gen_equilateral_disc, gen_flat_parallelogram, gen_polygon, gen_tree};
    use crate::metric::enumerate_geodesics;

    fn square() -> Complex {
        Complex::simplicial(0..4, [(0, 1), (1, 2), (2, 3), (0, 3)], [])
    }

    fn hexagon_graph() -> Complex {
        Complex::simplicial(0..6, (0..6).map(|i| (i, (i + 1) % 6)), [])
    }

    fn id_of(q: i32, r: i32, rad: u32) -> VertexId {
        disc_coords(rad).iter().position(|&p| p == (q, r)).unwrap() as VertexId
    }

    #[test]
    fn conditions_on_the_disc_and_the_square() {
        let d2 = gen_equilateral_disc(2);
        assert!(check_edge_condition(&d2, 0).unwrap().passed());
        assert!(check_vertex_condition(&d2, 0).unwrap().passed());
        let sq = square();
        let r = check_vertex_condition(&sq, 0).unwrap();
        assert!(!r.passed());
        assert_eq!(r.witness["n"], 2);
        assert_eq!(r.witness["w"], 2);
        assert!(check_edge_condition(&sq, 0).unwrap().passed());
        let rep = check_weakly_systolic(&sq).unwrap();
        assert!(!rep.passed);
        assert!(rep.witness.as_ref().unwrap().reproduces(&sq));
        let t = gen_tree(2, 3).unwrap();
        assert!(check_weakly_systolic(&t).unwrap().passed);
        assert!(matches!(check_edge_condition(&gen_polygon(7).unwrap(), 0), Err(NpcError::KindMismatch { .. })));
    }

    #[test]
    fn systolic_cycles() {
        assert!(check_systolic(&gen_equilateral_disc(2)).unwrap().passed());
        let r = check_systolic(&square()).unwrap();
        assert!(!r.passed());
        assert_eq!(r.witness, json!([0, 1, 2, 3]));
        assert!(check_systolic(&gen_tree(2, 2).unwrap()).unwrap().passed());
    }

    #[test]
    fn metric_triangles() {
        let t = gen_tree(2, 2).unwrap();
        let m = metric_triangle(&t, 3, 4, 5).unwrap();
        assert_eq!(m.median, [1, 1, 1]);
        let m = metric_triangle(&t, 3, 4, 2).unwrap();
        assert_eq!(m.sizes, [0, 0, 0]);
        let d = gen_equilateral_disc(3);
        let (a, b, c) = (id_of(0, 0, 3), id_of(2, 0, 3), id_of(0, 2, 3));
        let m = metric_triangle(&d, a, b, c).unwrap();
        assert_eq!(m.median, [a, b, c]);
        assert_eq!(m.sizes, [2, 2, 2]);
        let m = metric_triangle(&d, a, a, c).unwrap();
        assert_eq!(m.median[0], a);
        assert_eq!(m.sizes[0], 0);
    }

    #[test]
    fn weak_modularity() {
        assert!(check_weak_modularity(&gen_tree(2, 2).unwrap()).passed());
        assert!(check_weak_modularity(&gen_equilateral_disc(2)).passed());
        assert!(!check_weak_modularity(&hexagon_graph()).passed());
    }

    #[test]
    fn parallelogram_bigon() {
        let c = gen_flat_parallelogram(2, 3).unwrap();
        let ctx = WsysContext::new(&c);
        // Corners (0,0) and (2,3): id = a*(q+1)+b.
        let g1 = OrientedGeodesic::new(&c, vec![0, 4, 8, 9, 10, 11]).unwrap();
        let g2 = OrientedGeodesic::new(&c, vec![0, 1, 2, 3, 7, 11]).unwrap();
        let s = ctx.fill_bigon(&g1, &g2, FillBackend::Structured).unwrap();
        let o = ctx.fill_bigon(&g1, &g2, FillBackend::Oracle).unwrap();
        assert_eq!(s.area(), 12);
        assert_eq!(o.area(), 12);
        assert!(validate_diagram(&s, &c).passed());
        assert!(is_reduced(&s).passed());
        assert_eq!(gauss_bonnet_audit(&s).unwrap().total, 6);
        let fd = ctx.flat_disc(&g1, &g2).unwrap();
        assert!(fd.verify(&c).unwrap().passed());
    }

    #[test]
    fn identical_geodesics_give_a_path() {
        let c = gen_equilateral_disc(2);
        let g = enumerate_geodesics(&c, 7, 13, 100).unwrap().remove(0);
        let d = fill_bigon(&c, &g, &g, FillBackend::Structured).unwrap();
        assert_eq!(d.area(), 0);
        assert!(validate_diagram(&d, &c).passed());
    }

    #[test]
    fn flat_triangle_filling() {
        let c = gen_equilateral_disc(3);
        let (a, b, cc) = (id_of(0, 0, 3), id_of(3, 0, 3), id_of(0, 3, 3));
        let d = fill_triangle(&c, a, b, cc).unwrap();
        assert_eq!(d.area(), 9);
        assert_eq!(d.multiplicity(), 1);
        assert_eq!(d.max_degree(), 6);
        assert_eq!(gauss_bonnet_audit(&d).unwrap().total, 6);
        let single = fill_triangle(&c, a, a, a).unwrap();
        assert_eq!(single.area(), 0);
        assert_eq!(single.num_vertices(), 1);
    }

    #[test]
    fn every_triangle_of_the_small_disc_fills() {
        let c = gen_equilateral_disc(2);
        let ctx = WsysContext::new(&c);
        let n = c.num_vertices() as VertexId;
        for u in 0..n {
            for v in u..n {
                for w in v..n {
                    let d = ctx.fill_triangle(u, v, w).unwrap();
                    assert!(validate_diagram(&d, &c).passed(), "{u} {v} {w}");
                    assert_eq!(gauss_bonnet_audit(&d).unwrap().total, 6);
                }
            }
        }
    }

    #[test]
    fn hexagon_filling() {
        let c = gen_equilateral_disc(2);
        let ctx = WsysContext::new(&c);
        let rim: Vec<VertexId> = (1..=6).collect();
        let sides: Vec<OrientedGeodesic> =
            (0..6).map(|i| OrientedGeodesic::new(&c, vec![rim[i], rim[(i + 1) % 6]]).unwrap()).collect();
        let h = ctx.fill_hexagon(&sides.try_into().unwrap()).unwrap();
        assert_eq!(h.diagram.area(), 6);
        assert_eq!(h.multiplicity, 1);
    }
}
