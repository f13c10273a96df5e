//! Graph metric on the 1-skeleton: BFS distances, intervals, geodesics,
//! convexity and exhaustive hyperbolicity constants.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex::{Complex, Subcomplex, VertexId};
use crate::error::{NpcError, Result};
use crate::par;
use crate::report::CheckReport;

pub const INF: u32 = u32::MAX;
pub const DEFAULT_GEODESIC_CAP: u64 = 1_000_000;

/// BFS distances (by vertex index) from `src`; unreachable vertices get [`INF`].
pub fn bfs(c: &Complex, src: usize) -> Vec<u32> {
    let mut d = vec![INF; c.num_vertices()];
    let mut q = VecDeque::new();
    d[src] = 0;
    q.push_back(src);
    while let Some(x) = q.pop_front() {
        for &y in c.nbrs(x) {
            if d[y] == INF {
                d[y] = d[x] + 1;
                q.push_back(y);
            }
        }
    }
    d
}

/// All-pairs distances, one BFS per source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    pub fn new(c: &Complex) -> Self {
        let n = c.num_vertices();
        let rows = par::map_range(n, |s| bfs(c, s));
        DistanceMatrix { n, d: rows.concat() }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn diameter(&self) -> u32 {
        self.d.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn in_interval(&self, u: usize, v: usize, x: usize) -> bool {
        let (a, b, t) = (self.get(u, x), self.get(x, v), self.get(u, v));
        a != INF && b != INF && a + b == t
    }

    /// Interval vertex indices, sorted.
    pub fn interval(&self, u: usize, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&x| self.in_interval(u, v, x)).collect()
    }
}

pub fn distances(c: &Complex, u: VertexId) -> Result<BTreeMap<VertexId, u32>> {
    let d = bfs(c, c.index_of(u)?);
    Ok(d.iter().enumerate().filter(|(_, &x)| x != INF).map(|(i, &x)| (c.id(i), x)).collect())
}

pub fn distance(c: &Complex, u: VertexId, v: VertexId) -> Result<u32> {
    let (i, j) = (c.index_of(u)?, c.index_of(v)?);
    match bfs(c, i)[j] {
        INF => Err(NpcError::Disconnected(u, v)),
        d => Ok(d),
    }
}

/// A vertex sequence whose length equals the distance between its ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrientedGeodesic(Vec<VertexId>);

impl OrientedGeodesic {
    /// Certifies `vertices` against BFS distances.
    pub fn new(c: &Complex, vertices: Vec<VertexId>) -> Result<Self> {
        let Some(&first) = vertices.first() else {
            return Err(NpcError::InvalidInput("empty geodesic".into()));
        };
        let idx = c.indices(&vertices)?;
        for w in idx.windows(2) {
            if !c.adjacent(w[0], w[1]) {
                return Err(NpcError::InvalidInput(format!("{} and {} are not adjacent", c.id(w[0]), c.id(w[1]))));
            }
        }
        let last = *vertices.last().unwrap();
        let d = distance(c, first, last)?;
        if d as usize + 1 != vertices.len() {
            return Err(NpcError::InvalidInput(format!(
                "path of length {} between vertices at distance {d}",
                vertices.len() - 1
            )));
        }
        Ok(OrientedGeodesic(vertices))
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn start(&self) -> VertexId {
        self.0[0]
    }

    pub fn end(&self) -> VertexId {
        *self.0.last().unwrap()
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.0.clone();
        v.reverse();
        OrientedGeodesic(v)
    }
}

/// The vertex set I(u,v) with both distances for every member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub source: VertexId,
    pub target: VertexId,
    pub distance: u32,
    /// `(x, d(u,x), d(x,v))`, sorted by `x`.
    pub members: Vec<(VertexId, u32, u32)>,
}

impl Interval {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn vertex_ids(&self) -> Vec<VertexId> {
        self.members.iter().map(|m| m.0).collect()
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.members.binary_search_by_key(&x, |m| m.0).is_ok()
    }
}

pub fn interval(c: &Complex, u: VertexId, v: VertexId) -> Result<Interval> {
    let (i, j) = (c.index_of(u)?, c.index_of(v)?);
    let (du, dv) = (bfs(c, i), bfs(c, j));
    let t = du[j];
    if t == INF {
        return Err(NpcError::Disconnected(u, v));
    }
    let members = (0..c.num_vertices())
        .filter(|&x| du[x] != INF && dv[x] != INF && du[x] + dv[x] == t)
        .map(|x| (c.id(x), du[x], dv[x]))
        .collect();
    Ok(Interval { source: u, target: v, distance: t, members })
}

/// Successors of `x` in the geodesic DAG towards the vertex with distances `dv`.
fn dag_next<'c>(c: &'c Complex, dv: &'c [u32], x: usize) -> impl Iterator<Item = usize> + 'c {
    let want = dv[x].wrapping_sub(1);
    c.nbrs(x).iter().copied().filter(move |&y| dv[y] == want)
}

/// Number of geodesics from index `i` to index `j` (saturating).
pub fn count_geodesics_idx(c: &Complex, dv: &[u32], i: usize) -> u64 {
    if dv[i] == INF {
        return 0;
    }
    let mut order: Vec<usize> = (0..c.num_vertices()).filter(|&x| dv[x] <= dv[i]).collect();
    order.sort_by_key(|&x| dv[x]);
    let mut cnt = vec![0u64; c.num_vertices()];
    for &x in &order {
        cnt[x] = if dv[x] == 0 { 1 } else { dag_next(c, dv, x).fold(0u64, |s, y| s.saturating_add(cnt[y])) };
    }
    cnt[i]
}

pub fn count_geodesics(c: &Complex, u: VertexId, v: VertexId) -> Result<u64> {
    let (i, j) = (c.index_of(u)?, c.index_of(v)?);
    let dv = bfs(c, j);
    if dv[i] == INF {
        return Err(NpcError::Disconnected(u, v));
    }
    Ok(count_geodesics_idx(c, &dv, i))
}

/// All geodesics from `i` to the vertex with distances `dv`, as index paths in
/// lexicographic order. Fails once more than `cap` would be produced.
pub fn geodesics_idx(c: &Complex, dv: &[u32], i: usize, cap: u64) -> Result<Vec<Vec<usize>>> {
    let total = count_geodesics_idx(c, dv, i);
    if total > cap {
        return Err(NpcError::CapExceeded { count: total, cap });
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut path = vec![i];
    fn rec(c: &Complex, dv: &[u32], path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let x = *path.last().unwrap();
        if dv[x] == 0 {
            out.push(path.clone());
            return;
        }
        for y in dag_next(c, dv, x) {
            path.push(y);
            rec(c, dv, path, out);
            path.pop();
        }
    }
    if dv[i] != INF {
        rec(c, dv, &mut path, &mut out);
    }
    Ok(out)
}

pub fn enumerate_geodesics(c: &Complex, u: VertexId, v: VertexId, cap: u64) -> Result<Vec<OrientedGeodesic>> {
    let (i, j) = (c.index_of(u)?, c.index_of(v)?);
    let dv = bfs(c, j);
    if dv[i] == INF {
        return Err(NpcError::Disconnected(u, v));
    }
    Ok(geodesics_idx(c, &dv, i, cap)?.into_iter().map(|p| OrientedGeodesic(c.ids(&p))).collect())
}

/// The lexicographically least geodesic (by vertex id), as indices.
pub fn least_geodesic_idx(c: &Complex, dv: &[u32], i: usize) -> Vec<usize> {
    let mut path = vec![i];
    let mut x = i;
    while dv[x] > 0 {
        x = dag_next(c, dv, x).next().expect("geodesic DAG step");
        path.push(x);
    }
    path
}

pub fn least_geodesic(c: &Complex, u: VertexId, v: VertexId) -> Result<OrientedGeodesic> {
    let (i, j) = (c.index_of(u)?, c.index_of(v)?);
    let dv = bfs(c, j);
    if dv[i] == INF {
        return Err(NpcError::Disconnected(u, v));
    }
    Ok(OrientedGeodesic(c.ids(&least_geodesic_idx(c, &dv, i))))
}

/// Exhaustive convexity check over all vertex pairs of `k`.
pub fn is_convex(c: &Complex, k: &Subcomplex<'_>, cap: u64) -> Result<CheckReport> {
    let vs = k.vertex_indices();
    let mut checked = 0u64;
    for (a, &x) in vs.iter().enumerate() {
        let dx = bfs(c, x);
        for &y in &vs[a + 1..] {
            if dx[y] == INF {
                return Err(NpcError::Disconnected(c.id(x), c.id(y)));
            }
            for g in geodesics_idx(c, &dx, y, cap)? {
                checked += 1;
                let inside = g.iter().all(|&z| k.has_vertex_idx(z)) && g.windows(2).all(|w| k.has_edge_idx(w[0], w[1]));
                if !inside {
                    let mut ids = c.ids(&g);
                    ids.reverse();
                    return Ok(CheckReport::fail("is_convex", ids).stat("geodesics_checked", checked));
                }
            }
        }
    }
    Ok(CheckReport::pass("is_convex").stat("geodesics_checked", checked).stat("vertices", vs.len()))
}

/// Convexity of the full subgraph on `set` (sorted indices): every interval
/// between members stays inside. Equivalent to [`is_convex`] for induced
/// subcomplexes.
pub fn is_convex_set(dm: &DistanceMatrix, in_set: &[bool], set: &[usize]) -> bool {
    for (a, &x) in set.iter().enumerate() {
        for &y in &set[a + 1..] {
            if dm.get(x, y) == INF {
                return false;
            }
            if (0..dm.len()).any(|z| !in_set[z] && dm.in_interval(x, y, z)) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMethod {
    SlimTrianglesExhaustive,
    FourPointExhaustive,
}

/// A non-negative half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt(pub u64);

impl HalfInt {
    pub fn from_twice(t: u64) -> Self {
        HalfInt(t)
    }

    pub fn twice(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub method: DeltaMethod,
    pub value: HalfInt,
    /// Slim: `[x, y, z, p]` with `p` on a side from x to y. Four-point: the quadruple.
    pub witness: Vec<VertexId>,
}

impl DeltaEstimate {
    /// Recomputes the value on the witness alone.
    pub fn reverify(&self, c: &Complex) -> Result<bool> {
        let idx = c.indices(&self.witness)?;
        let dm = DistanceMatrix::new(c);
        Ok(match self.method {
            DeltaMethod::FourPointExhaustive => {
                idx.len() == 4 && four_point_twice(&dm, idx[0], idx[1], idx[2], idx[3]) == self.value.0
            }
            DeltaMethod::SlimTrianglesExhaustive => {
                if idx.len() != 4 {
                    return Ok(false);
                }
                let (x, y, z, p) = (idx[0], idx[1], idx[2], idx[3]);
                let f = far_table(c, &dm, p);
                let n = c.num_vertices();
                dm.in_interval(x, y, p) && 2 * u64::from(f[y * n + z].min(f[z * n + x])) == self.value.0
            }
        })
    }
}

fn four_point_twice(dm: &DistanceMatrix, x: usize, y: usize, z: usize, w: usize) -> u64 {
    let mut s = [
        dm.get(x, y) as u64 + dm.get(z, w) as u64,
        dm.get(x, z) as u64 + dm.get(y, w) as u64,
        dm.get(x, w) as u64 + dm.get(y, z) as u64,
    ];
    s.sort_unstable();
    s[2] - s[1]
}

/// `f[a*n+b]` = max over geodesics σ from a to b of min over q ∈ σ of d(p,q).
fn far_table(c: &Complex, dm: &DistanceMatrix, p: usize) -> Vec<u32> {
    let n = c.num_vertices();
    let dp = dm.row(p);
    let mut f = vec![0u32; n * n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for a in 0..n {
        let da = dm.row(a);
        order.clear();
        order.extend(0..n);
        order.sort_by_key(|&x| da[x]);
        let row = &mut f[a * n..(a + 1) * n];
        for &b in &order {
            row[b] = if b == a {
                dp[a]
            } else {
                let best = c
                    .nbrs(b)
                    .iter()
                    .filter(|&&q| da[q] != INF && da[q] + 1 == da[b])
                    .map(|&q| row[q])
                    .max()
                    .unwrap_or(0);
                best.min(dp[b])
            };
        }
    }
    f
}

pub fn delta_estimate(c: &Complex, method: DeltaMethod) -> Result<DeltaEstimate> {
    let n = c.num_vertices();
    if n == 0 {
        return Ok(DeltaEstimate { method, value: HalfInt(0), witness: Vec::new() });
    }
    let dm = DistanceMatrix::new(c);
    if let Some(j) = (0..n).find(|&j| dm.get(0, j) == INF) {
        return Err(NpcError::Disconnected(c.id(0), c.id(j)));
    }
    // Each work item returns (twice value, witness indices); ties keep the least witness.
    let best = match method {
        DeltaMethod::FourPointExhaustive => {
            let rows = par::map_range(n, |x| {
                let mut best = (0u64, vec![x, x, x, x]);
                for y in x + 1..n {
                    for z in y + 1..n {
                        for w in z + 1..n {
                            let t = four_point_twice(&dm, x, y, z, w);
                            if t > best.0 {
                                best = (t, vec![x, y, z, w]);
                            }
                        }
                    }
                }
                best
            });
            reduce_best(rows)
        }
        DeltaMethod::SlimTrianglesExhaustive => {
            let rows = par::map_range(n, |p| {
                let f = far_table(c, &dm, p);
                let mut best = (0u64, vec![p, p, p, p]);
                for x in 0..n {
                    for y in 0..n {
                        if !dm.in_interval(x, y, p) {
                            continue;
                        }
                        for z in 0..n {
                            let t = 2 * u64::from(f[y * n + z].min(f[z * n + x]));
                            let cand = vec![x, y, z, p];
                            if t > best.0 || (t == best.0 && t > 0 && cand < best.1) {
                                best = (t, cand);
                            }
                        }
                    }
                }
                best
            });
            reduce_best(rows)
        }
    };
    Ok(DeltaEstimate { method, value: HalfInt(best.0), witness: c.ids(&best.1) })
}

fn reduce_best(rows: Vec<(u64, Vec<usize>)>) -> (u64, Vec<usize>) {
    rows.into_iter().reduce(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }).unwrap()
}

/// Stats-friendly summary of an interval.
pub fn interval_report(iv: &Interval) -> serde_json::Value {
    json!({"source": iv.source, "target": iv.target, "distance": iv.distance, "size": iv.len(), "vertices": iv.vertex_ids()})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: u64) -> Complex {
        Complex::simplicial(0..n, (0..n).map(|i| (i, (i + 1) % n)), [])
    }

    #[test]
    fn path_distance() {
        let p = Complex::simplicial([0, 1, 2], [(0, 1), (1, 2)], []);
        assert_eq!(distance(&p, 0, 2).unwrap(), 2);
        let two = Complex::simplicial([0, 1], [], []);
        assert!(matches!(distance(&two, 0, 1), Err(NpcError::Disconnected(0, 1))));
    }

    #[test]
    fn hexagon_antipodes_have_two_geodesics() {
        let h = cycle(6);
        let gs = enumerate_geodesics(&h, 0, 3, 10).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0].vertices(), &[0, 1, 2, 3]);
        assert_eq!(gs[1].vertices(), &[0, 5, 4, 3]);
        assert!(matches!(enumerate_geodesics(&h, 0, 3, 1), Err(NpcError::CapExceeded { count: 2, cap: 1 })));
    }

    #[test]
    fn convexity_witness_is_a_geodesic() {
        let h = cycle(6);
        let k = Subcomplex::induced(&h, &[0, 3]).unwrap();
        let r = is_convex(&h, &k, DEFAULT_GEODESIC_CAP).unwrap();
        assert!(!r.passed());
        assert_eq!(r.witness, json!([0, 1, 2, 3]));
        let e = Subcomplex::induced(&h, &[0, 1]).unwrap();
        assert!(is_convex(&h, &e, DEFAULT_GEODESIC_CAP).unwrap().passed());
    }

    #[test]
    fn single_vertex_delta_is_zero() {
        let c = Complex::simplicial([5], [], []);
        for m in [DeltaMethod::SlimTrianglesExhaustive, DeltaMethod::FourPointExhaustive] {
            assert_eq!(delta_estimate(&c, m).unwrap().value, HalfInt(0));
        }
    }

    #[test]
    fn geodesic_certificate_rejects_long_paths() {
        let h = cycle(6);
        assert!(OrientedGeodesic::new(&h, vec![0, 1, 2, 3]).is_ok());
        assert!(OrientedGeodesic::new(&h, vec![0, 1, 2, 3, 4]).is_err());
        assert!(OrientedGeodesic::new(&h, vec![0, 2]).is_err());
    }

    #[test]
    fn half_int_display() {
        assert_eq!(HalfInt(3).to_string(), "1.5");
        assert_eq!(HalfInt(4).to_string(), "2");
    }
}
