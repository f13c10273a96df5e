use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{NpcError, Result};
use crate::report::CheckReport;

pub type VertexId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    Simplicial,
    Polygonal,
}

impl ComplexKind {
    pub fn name(self) -> &'static str {
        match self {
            ComplexKind::Simplicial => "simplicial",
            ComplexKind::Polygonal => "polygonal",
        }
    }
}

impl fmt::Display for ComplexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Least rotation of `walk` or of its reversal.
pub fn canonical_walk<T: Ord + Copy>(walk: &[T]) -> Vec<T> {
    let n = walk.len();
    if n == 0 {
        return Vec::new();
    }
    let mut rev: Vec<T> = walk.to_vec();
    rev.reverse();
    let mut best: Option<Vec<T>> = None;
    for w in [walk, &rev[..]] {
        for s in 0..n {
            let cand: Vec<T> = (0..n).map(|i| w[(s + i) % n]).collect();
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}

#[inline]
pub(crate) fn ekey(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A finite 2-complex with a simplicial 1-skeleton.
///
/// Input lists are kept as given (after sorting) so that [`Complex::validate`]
/// can report loops, parallel edges and broken cells. The derived adjacency
/// only uses well-formed edges.
#[derive(Debug, Clone)]
pub struct Complex {
    kind: ComplexKind,
    vertices: Vec<VertexId>,
    edges: Vec<[VertexId; 2]>,
    cells: Vec<Vec<VertexId>>,
    index: HashMap<VertexId, usize>,
    adj: Vec<Vec<usize>>,
    edge_cells: HashMap<(usize, usize), Vec<usize>>,
    vertex_cells: Vec<Vec<usize>>,
    cell_idx: Vec<Vec<usize>>,
}

impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.vertices == other.vertices
            && self.edges == other.edges
            && self.cells == other.cells
    }
}

impl Eq for Complex {}

impl Complex {
    pub fn new(
        kind: ComplexKind,
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        cells: impl IntoIterator<Item = Vec<VertexId>>,
    ) -> Result<Self> {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        let vertices: Vec<VertexId> = vertices.into_iter().collect();
        let mut edges: Vec<[VertexId; 2]> =
            edges.into_iter().map(|(a, b)| if a <= b { [a, b] } else { [b, a] }).collect();
        edges.sort_unstable();
        let mut cs: Vec<Vec<VertexId>> = Vec::new();
        for c in cells {
            if kind == ComplexKind::Simplicial && c.len() != 3 {
                return Err(NpcError::InvalidInput(format!("simplicial cell {c:?} is not a triangle")));
            }
            cs.push(canonical_walk(&c));
        }
        cs.sort();
        if kind == ComplexKind::Simplicial {
            cs.dedup();
        }
        Ok(Self::build(kind, vertices, edges, cs))
    }

    pub fn simplicial(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        triangles: impl IntoIterator<Item = [VertexId; 3]>,
    ) -> Self {
        Self::new(ComplexKind::Simplicial, vertices, edges, triangles.into_iter().map(|t| t.to_vec()))
            .expect("triangles have three vertices")
    }

    pub fn polygonal(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        polygons: impl IntoIterator<Item = Vec<VertexId>>,
    ) -> Self {
        Self::new(ComplexKind::Polygonal, vertices, edges, polygons).expect("polygonal input")
    }

    /// Simplicial complex whose edges are the given ones plus all triangle sides.
    pub fn from_triangles(
        vertices: impl IntoIterator<Item = VertexId>,
        extra_edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        triangles: &[[VertexId; 3]],
    ) -> Self {
        let mut es: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
        for (a, b) in extra_edges {
            es.insert((a.min(b), a.max(b)));
        }
        for t in triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                es.insert((a.min(b), a.max(b)));
            }
        }
        Self::simplicial(vertices, es, triangles.iter().copied())
    }

    fn build(kind: ComplexKind, vertices: Vec<VertexId>, edges: Vec<[VertexId; 2]>, cells: Vec<Vec<VertexId>>) -> Self {
        let index: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &[a, b] in &edges {
            if a == b {
                continue;
            }
            if let (Some(&i), Some(&j)) = (index.get(&a), index.get(&b)) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        let mut edge_cells: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut vertex_cells = vec![Vec::new(); n];
        let mut cell_idx = Vec::with_capacity(cells.len());
        for (ci, c) in cells.iter().enumerate() {
            let idx: Option<Vec<usize>> = c.iter().map(|v| index.get(v).copied()).collect();
            let Some(idx) = idx else {
                cell_idx.push(Vec::new());
                continue;
            };
            let mut seen = BTreeSet::new();
            for &i in &idx {
                if seen.insert(i) {
                    vertex_cells[i].push(ci);
                }
            }
            let m = idx.len();
            for k in 0..m {
                let (a, b) = (idx[k], idx[(k + 1) % m]);
                if a != b {
                    let e = edge_cells.entry(ekey(a, b)).or_default();
                    if e.last() != Some(&ci) {
                        e.push(ci);
                    }
                }
            }
            cell_idx.push(idx);
        }
        Complex { kind, vertices, edges, cells, index, adj, edge_cells, vertex_cells, cell_idx }
    }

    pub fn kind(&self) -> ComplexKind {
        self.kind
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Edges as sorted pairs, in sorted order (duplicates kept as given).
    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    /// Cells as canonical walks, in sorted order.
    pub fn cells(&self) -> &[Vec<VertexId>] {
        &self.cells
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn index_of(&self, v: VertexId) -> Result<usize> {
        self.index.get(&v).copied().ok_or(NpcError::UnknownVertex(v))
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.index.contains_key(&v)
    }

    #[inline]
    pub fn id(&self, i: usize) -> VertexId {
        self.vertices[i]
    }

    pub fn ids(&self, idx: &[usize]) -> Vec<VertexId> {
        idx.iter().map(|&i| self.vertices[i]).collect()
    }

    pub fn indices(&self, ids: &[VertexId]) -> Result<Vec<usize>> {
        ids.iter().map(|&v| self.index_of(v)).collect()
    }

    /// Sorted neighbour indices of vertex index `i`.
    #[inline]
    pub fn nbrs(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(&i), Some(&j)) => self.adjacent(i, j),
            _ => false,
        }
    }

    /// Cells whose boundary uses the edge between indices `i` and `j`.
    pub fn cells_on_edge(&self, i: usize, j: usize) -> &[usize] {
        self.edge_cells.get(&ekey(i, j)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Cells whose boundary passes through vertex index `i`.
    pub fn cells_at(&self, i: usize) -> &[usize] {
        &self.vertex_cells[i]
    }

    /// Boundary walk of cell `c` as vertex indices.
    pub fn cell_walk(&self, c: usize) -> &[usize] {
        &self.cell_idx[c]
    }

    /// Undirected edges of the well-formed 1-skeleton as index pairs.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, l) in self.adj.iter().enumerate() {
            for &j in l {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }

    /// Checks the structural invariants; the first violation is the witness.
    pub fn validate(&self) -> CheckReport {
        let mut violations: Vec<serde_json::Value> = Vec::new();
        let mut prev: Option<[VertexId; 2]> = None;
        for &[a, b] in &self.edges {
            if a == b {
                violations.push(json!({"violation": "loop_edge", "edge": [a, b]}));
            } else if prev == Some([a, b]) {
                violations.push(json!({"violation": "parallel_edge", "edge": [a, b]}));
            }
            for v in [a, b] {
                if !self.index.contains_key(&v) {
                    violations.push(json!({"violation": "missing_endpoint", "edge": [a, b], "vertex": v}));
                }
            }
            prev = Some([a, b]);
        }
        for (ci, c) in self.cells.iter().enumerate() {
            if c.len() < 3 {
                violations.push(json!({"violation": "short_cell", "cell": ci, "walk": c}));
                continue;
            }
            let distinct: BTreeSet<_> = c.iter().collect();
            if distinct.len() != c.len() {
                violations.push(json!({"violation": "non_embedded_cell", "cell": ci, "walk": c}));
                continue;
            }
            for k in 0..c.len() {
                let (a, b) = (c[k], c[(k + 1) % c.len()]);
                if !self.has_edge(a, b) {
                    violations.push(json!({
                        "violation": "missing_cell_edge", "cell": ci, "walk": c, "edge": [a.min(b), a.max(b)]
                    }));
                    break;
                }
            }
        }
        let ok = violations.is_empty();
        let mut r = CheckReport::new("validate", ok)
            .stat("vertices", self.num_vertices())
            .stat("edges", self.num_edges())
            .stat("cells", self.num_cells())
            .stat("violations", violations.len());
        if let Some(w) = violations.into_iter().next() {
            r.witness = w;
        }
        r
    }

    /// Every 3-clique of the 1-skeleton must span a triangle cell.
    pub fn is_flag(&self) -> Result<CheckReport> {
        self.require_simplicial()?;
        let (count, empty) = self.three_cliques();
        let mut r = CheckReport::new("is_flag", empty.is_none()).stat("three_cliques", count);
        if let Some(w) = empty {
            r = r.with_witness(w);
        }
        Ok(r)
    }

    /// Number of 3-cliques and the least one without a triangle cell.
    fn three_cliques(&self) -> (usize, Option<[VertexId; 3]>) {
        let tri: BTreeSet<&[VertexId]> = self.cells.iter().map(|c| c.as_slice()).collect();
        let mut count = 0;
        let mut empty = None;
        for a in 0..self.num_vertices() {
            for &b in self.adj[a].iter().filter(|&&b| b > a) {
                for &c in self.adj[b].iter().filter(|&&c| c > b) {
                    if self.adjacent(a, c) {
                        count += 1;
                        let t = [self.id(a), self.id(b), self.id(c)];
                        if empty.is_none() && !tri.contains(&t[..]) {
                            empty = Some(t);
                        }
                    }
                }
            }
        }
        (count, empty)
    }

    pub(crate) fn require_simplicial(&self) -> Result<()> {
        if self.kind != ComplexKind::Simplicial {
            return Err(NpcError::KindMismatch { expected: "simplicial", found: self.kind.name() });
        }
        Ok(())
    }

    pub(crate) fn require_flag(&self) -> Result<()> {
        self.require_simplicial()?;
        if let (_, Some(w)) = self.three_cliques() {
            return Err(NpcError::NotFlag(w));
        }
        Ok(())
    }

    /// All cells containing `v` together with their faces, plus the edges at `v`.
    pub fn star(&self, v: VertexId) -> Result<Subcomplex<'_>> {
        let i = self.index_of(v)?;
        let mut k = Subcomplex::empty(self);
        k.add_vertex_closure(i);
        Ok(k)
    }

    /// `k` plus every edge and cell meeting `k`, closed under faces.
    pub fn neighborhood<'a>(&'a self, k: &Subcomplex<'a>) -> Result<Subcomplex<'a>> {
        if !std::ptr::eq(k.parent, self) && k.parent != self {
            return Err(NpcError::InvalidInput("subcomplex of another complex".into()));
        }
        let mut out = k.clone();
        for i in 0..self.num_vertices() {
            if k.vertices[i] {
                out.add_vertex_closure(i);
            }
        }
        Ok(out)
    }
}

/// A face-closed subcomplex, stored as membership flags over the parent.
#[derive(Debug, Clone)]
pub struct Subcomplex<'a> {
    parent: &'a Complex,
    vertices: Vec<bool>,
    edges: BTreeSet<(usize, usize)>,
    cells: Vec<bool>,
}

impl PartialEq for Subcomplex<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent
            && self.vertices == other.vertices
            && self.edges == other.edges
            && self.cells == other.cells
    }
}

impl<'a> Subcomplex<'a> {
    pub fn empty(parent: &'a Complex) -> Self {
        Subcomplex {
            parent,
            vertices: vec![false; parent.num_vertices()],
            edges: BTreeSet::new(),
            cells: vec![false; parent.num_cells()],
        }
    }

    /// Full subcomplex spanned by `ids`: all edges and cells with every vertex in `ids`.
    pub fn induced(parent: &'a Complex, ids: &[VertexId]) -> Result<Self> {
        let idx = parent.indices(ids)?;
        Ok(Self::induced_idx(parent, &idx))
    }

    pub(crate) fn induced_idx(parent: &'a Complex, idx: &[usize]) -> Self {
        let mut k = Self::empty(parent);
        for &i in idx {
            k.vertices[i] = true;
        }
        for &i in idx {
            for &j in parent.nbrs(i) {
                if i < j && k.vertices[j] {
                    k.edges.insert((i, j));
                }
            }
        }
        for c in 0..parent.num_cells() {
            let w = parent.cell_walk(c);
            if !w.is_empty() && w.iter().all(|&x| k.vertices[x]) {
                k.cells[c] = true;
            }
        }
        k
    }

    /// Subcomplex from explicit vertices and edges (edge endpoints are added).
    pub fn from_parts(parent: &'a Complex, vertices: &[VertexId], edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut k = Self::empty(parent);
        for &v in vertices {
            k.vertices[parent.index_of(v)?] = true;
        }
        for &(a, b) in edges {
            let (i, j) = (parent.index_of(a)?, parent.index_of(b)?);
            if !parent.adjacent(i, j) {
                return Err(NpcError::InvalidInput(format!("({a},{b}) is not an edge")));
            }
            k.vertices[i] = true;
            k.vertices[j] = true;
            k.edges.insert(ekey(i, j));
        }
        Ok(k)
    }

    fn add_vertex_closure(&mut self, i: usize) {
        let p = self.parent;
        self.vertices[i] = true;
        for &j in p.nbrs(i) {
            self.vertices[j] = true;
            self.edges.insert(ekey(i, j));
        }
        for &c in p.cells_at(i) {
            self.add_cell(c);
        }
    }

    fn add_cell(&mut self, c: usize) {
        let w = self.parent.cell_walk(c);
        self.cells[c] = true;
        for k in 0..w.len() {
            let (a, b) = (w[k], w[(k + 1) % w.len()]);
            self.vertices[a] = true;
            self.edges.insert(ekey(a, b));
        }
    }

    pub fn parent(&self) -> &'a Complex {
        self.parent
    }

    #[inline]
    pub fn has_vertex_idx(&self, i: usize) -> bool {
        self.vertices[i]
    }

    #[inline]
    pub fn has_edge_idx(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&ekey(i, j))
    }

    pub fn has_cell(&self, c: usize) -> bool {
        self.cells[c]
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.parent.index_of(v).map(|i| self.vertices[i]).unwrap_or(false)
    }

    pub fn contains_edge(&self, a: VertexId, b: VertexId) -> bool {
        match (self.parent.index_of(a), self.parent.index_of(b)) {
            (Ok(i), Ok(j)) => self.has_edge_idx(i, j),
            _ => false,
        }
    }

    pub fn vertex_indices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| self.vertices[i]).collect()
    }

    pub fn vertex_ids(&self) -> Vec<VertexId> {
        self.vertex_indices().into_iter().map(|i| self.parent.id(i)).collect()
    }

    pub fn edge_ids(&self) -> Vec<[VertexId; 2]> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (self.parent.id(i), self.parent.id(j));
                [a.min(b), a.max(b)]
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn cell_indices(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&c| self.cells[c]).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_subset_of(&self, other: &Subcomplex<'_>) -> bool {
        self.vertices.iter().zip(&other.vertices).all(|(a, b)| !a || *b)
            && self.edges.is_subset(&other.edges)
            && self.cells.iter().zip(&other.cells).all(|(a, b)| !a || *b)
    }

    /// Face-closure: every edge's endpoints and every cell's sides are present.
    pub fn is_closed(&self) -> bool {
        self.edges.iter().all(|&(i, j)| self.vertices[i] && self.vertices[j])
            && self.cell_indices().iter().all(|&c| {
                let w = self.parent.cell_walk(c);
                (0..w.len()).all(|k| self.has_edge_idx(w[k], w[(k + 1) % w.len()]))
            })
    }

    /// Connectivity of the vertex set through the subcomplex's own edges.
    pub fn is_connected(&self) -> bool {
        let vs = self.vertex_indices();
        let Some(&start) = vs.first() else { return true };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in self.parent.nbrs(x) {
                if self.has_edge_idx(x, y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.len() == vs.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Complex {
        Complex::simplicial([1, 2, 3], [(1, 2), (2, 3), (1, 3)], [[1, 2, 3]])
    }

    #[test]
    fn canonical_walk_picks_least_rotation_or_reflection() {
        assert_eq!(canonical_walk(&[3, 1, 2]), vec![1, 2, 3]);
        assert_eq!(canonical_walk(&[3, 2, 1]), vec![1, 2, 3]);
        assert_eq!(canonical_walk(&[2, 4, 1, 3]), vec![1, 3, 2, 4]);
    }

    #[test]
    fn single_triangle_validates() {
        assert!(triangle().validate().passed());
    }

    #[test]
    fn loop_edge_is_reported() {
        let c = Complex::simplicial([1, 2], [(1, 1), (1, 2)], []);
        let r = c.validate();
        assert!(!r.passed());
        assert_eq!(r.witness["violation"], "loop_edge");
        assert_eq!(r.witness["edge"], json!([1, 1]));
    }

    #[test]
    fn missing_polygon_edge_names_the_cell() {
        let c = Complex::polygonal([1, 2, 3, 4], [(1, 2), (2, 3), (3, 4)], [vec![1, 2, 3, 4]]);
        let r = c.validate();
        assert!(!r.passed());
        assert_eq!(r.witness["cell"], 0);
        assert_eq!(r.witness["edge"], json!([1, 4]));
    }

    #[test]
    fn parallel_edges_and_missing_endpoints_fail() {
        let c = Complex::simplicial([1, 2], [(1, 2), (2, 1)], []);
        assert_eq!(c.validate().witness["violation"], "parallel_edge");
        let c = Complex::simplicial([1], [(1, 2)], []);
        assert_eq!(c.validate().witness["violation"], "missing_endpoint");
    }

    #[test]
    fn flag_checks() {
        let c3 = Complex::simplicial([1, 2, 3], [(1, 2), (2, 3), (1, 3)], []);
        let r = c3.is_flag().unwrap();
        assert!(!r.passed());
        assert_eq!(r.witness, json!([1, 2, 3]));
        let c6 = Complex::simplicial(0..6, (0..6).map(|i| (i, (i + 1) % 6)), []);
        assert!(c6.is_flag().unwrap().passed());
        let p = Complex::polygonal([1, 2, 3], [(1, 2), (2, 3), (1, 3)], [vec![1, 2, 3]]);
        assert!(matches!(p.is_flag(), Err(NpcError::KindMismatch { .. })));
    }

    #[test]
    fn star_of_a_path_leaf_is_one_edge() {
        let p = Complex::simplicial([0, 1, 2], [(0, 1), (1, 2)], []);
        let s = p.star(0).unwrap();
        assert_eq!(s.vertex_ids(), vec![0, 1]);
        assert_eq!(s.edge_ids(), vec![[0, 1]]);
        assert!(s.is_closed());
        assert!(matches!(p.star(9), Err(NpcError::UnknownVertex(9))));
    }
}
