//! Disc diagrams over a target complex.
//!
//! A diagram is a list of cells (embedded cycles of diagram vertices) plus the
//! outer boundary walk. Every cell is oriented the same way as the boundary:
//! a boundary edge is traversed by the boundary walk in the same direction as
//! by the cell next to it, so the cells together with the reversed boundary
//! use every directed edge exactly once.

mod glue;
mod search;
mod structure;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex::{canonical_walk, Complex, VertexId};
use crate::error::{NpcError, Result};
use crate::report::CheckReport;

pub use glue::Gluer;
pub use search::{reduce_walk, DiagramSearch, DEFAULT_NODE_CAP};
pub use structure::{
    classify, find_shells, find_spurs, ladder_decomposition, shell_off, Classification, Ladder, LadderPiece, Shell,
    SingleKind, Spur,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagramCell {
    pub walk: Vec<usize>,
    pub target_cell: usize,
    /// The image of `walk[i]` is `target[(offset ± i) mod len]`, minus when `reflected`.
    pub offset: usize,
    pub reflected: bool,
}

impl DiagramCell {
    /// The cell with diagram walk `walk` whose vertex images are `image`.
    pub fn onto(target: &Complex, walk: Vec<usize>, image: &[VertexId]) -> Result<Self> {
        let key = canonical_walk(image);
        let tc = target
            .cells()
            .binary_search(&key)
            .map_err(|_| NpcError::InvalidInput(format!("{image:?} is not a target cell")))?;
        let t = &target.cells()[tc];
        let l = t.len();
        let p0 = t.iter().position(|&x| x == image[0]).unwrap();
        let reflected = l > 1 && t[(p0 + 1) % l] != image[1 % image.len()];
        Ok(DiagramCell { walk, target_cell: tc, offset: p0, reflected })
    }

    /// Target vertex the `i`-th walk position maps to.
    pub fn image_at(&self, target: &Complex, i: usize) -> Option<VertexId> {
        let t = target.cells().get(self.target_cell)?;
        let l = t.len();
        let k = if self.reflected { (self.offset + l - i % l) % l } else { (self.offset + i) % l };
        Some(t[k])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscDiagram {
    /// Target vertex of each diagram vertex.
    pub vertex_map: Vec<VertexId>,
    pub cells: Vec<DiagramCell>,
    pub boundary: Vec<usize>,
    /// Reference to the target complex file, when known.
    pub target: Option<String>,
}

impl DiscDiagram {
    pub fn single_vertex(v: VertexId) -> Self {
        DiscDiagram { vertex_map: vec![v], cells: Vec::new(), boundary: vec![0], target: None }
    }

    /// Tree-shaped diagram traced by a path: the path followed by its reverse.
    pub fn from_path(path: &[VertexId]) -> Self {
        let n = path.len();
        let mut boundary: Vec<usize> = (0..n).collect();
        boundary.extend((1..n.saturating_sub(1)).rev());
        DiscDiagram { vertex_map: path.to_vec(), cells: Vec::new(), boundary, target: None }
    }

    /// Builds the boundary from coherently oriented cells of a non-singular
    /// disc. Returns `None` when the boundary darts do not form one simple cycle.
    pub fn from_oriented_cells(vertex_map: Vec<VertexId>, cells: Vec<DiagramCell>) -> Option<Self> {
        let mut darts: HashSet<(usize, usize)> = HashSet::new();
        for c in &cells {
            let l = c.walk.len();
            for k in 0..l {
                darts.insert((c.walk[k], c.walk[(k + 1) % l]));
            }
        }
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &darts {
            if !darts.contains(&(b, a)) {
                out.entry(a).or_default().push(b);
            }
        }
        if out.values().any(|v| v.len() != 1) {
            return None;
        }
        let (&start, _) = out.iter().next()?;
        let mut boundary = vec![start];
        let mut x = out[&start][0];
        while x != start {
            boundary.push(x);
            x = *out.get(&x)?.first()?;
            if boundary.len() > out.len() {
                return None;
            }
        }
        if boundary.len() != out.len() {
            return None;
        }
        Some(DiscDiagram { vertex_map, cells, boundary, target: None })
    }

    /// Diagram of a simplicial complex that is itself a non-singular disc,
    /// mapped identically onto it. Triangles are oriented coherently by
    /// propagation from the first one.
    pub fn of_disc_complex(c: &Complex) -> Option<Self> {
        let nt = c.num_cells();
        if nt == 0 {
            return None;
        }
        let mut orient: Vec<Option<Vec<usize>>> = vec![None; nt];
        orient[0] = Some(c.cell_walk(0).to_vec());
        let mut stack = vec![0];
        while let Some(t) = stack.pop() {
            let w = orient[t].clone().unwrap();
            for k in 0..3 {
                let (a, b) = (w[k], w[(k + 1) % 3]);
                for &u in c.cells_on_edge(a, b) {
                    if u == t {
                        continue;
                    }
                    let cw = c.cell_walk(u);
                    let third = *cw.iter().find(|&&x| x != a && x != b).unwrap();
                    let want = vec![b, a, third];
                    match &orient[u] {
                        None => {
                            orient[u] = Some(want);
                            stack.push(u);
                        }
                        Some(have) => {
                            let ok = (0..3).any(|s| (0..3).all(|i| have[(s + i) % 3] == want[i]));
                            if !ok {
                                return None;
                            }
                        }
                    }
                }
            }
        }
        let cells: Option<Vec<DiagramCell>> = orient
            .into_iter()
            .map(|w| {
                let w = w?;
                let image: Vec<VertexId> = c.ids(&w);
                DiagramCell::onto(c, w, &image).ok()
            })
            .collect();
        Self::from_oriented_cells(c.vertices().to_vec(), cells?)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_map.len()
    }

    pub fn area(&self) -> usize {
        self.cells.len()
    }

    /// Undirected edges as sorted pairs.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut es = BTreeSet::new();
        let mut add = |w: &[usize]| {
            let l = w.len();
            if l < 2 {
                return;
            }
            for k in 0..l {
                let (a, b) = (w[k], w[(k + 1) % l]);
                if a != b {
                    es.insert((a.min(b), a.max(b)));
                }
            }
        };
        for c in &self.cells {
            add(&c.walk);
        }
        add(&self.boundary);
        es
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vertices()];
        for (a, b) in self.edges() {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Largest number of diagram vertices over one target vertex.
    pub fn multiplicity(&self) -> usize {
        let mut count: HashMap<VertexId, usize> = HashMap::new();
        for &v in &self.vertex_map {
            *count.entry(v).or_insert(0) += 1;
        }
        count.into_values().max().unwrap_or(0)
    }

    /// Image of the boundary walk in the target.
    pub fn boundary_image(&self) -> Vec<VertexId> {
        self.boundary.iter().map(|&x| self.vertex_map[x]).collect()
    }

    /// Renumbers vertices by first appearance (boundary, then cells) and
    /// drops unused ones.
    pub fn compact(&self) -> Self {
        let mut new_id: HashMap<usize, usize> = HashMap::new();
        let mut vmap = Vec::new();
        let mut get = |x: usize, vmap: &mut Vec<VertexId>| -> usize {
            *new_id.entry(x).or_insert_with(|| {
                vmap.push(self.vertex_map[x]);
                vmap.len() - 1
            })
        };
        let boundary: Vec<usize> = self.boundary.iter().map(|&x| get(x, &mut vmap)).collect();
        let cells = self
            .cells
            .iter()
            .map(|c| DiagramCell { walk: c.walk.iter().map(|&x| get(x, &mut vmap)).collect(), ..c.clone() })
            .collect();
        DiscDiagram { vertex_map: vmap, cells, boundary, target: self.target.clone() }
    }
}

fn violation(kind: &str, detail: serde_json::Value) -> CheckReport {
    let mut w = json!({"violation": kind});
    if let (Some(obj), serde_json::Value::Object(extra)) = (w.as_object_mut(), detail) {
        obj.extend(extra);
    }
    CheckReport::fail("validate_diagram", w)
}

/// Checks every structural invariant of a disc diagram and its map to `target`.
pub fn validate_diagram(d: &DiscDiagram, target: &Complex) -> CheckReport {
    let r = validate_inner(d, target);
    r.stat("vertices", d.num_vertices())
        .stat("edges", d.edges().len())
        .stat("cells", d.area())
        .stat("boundary_length", d.boundary.len())
}

fn validate_inner(d: &DiscDiagram, target: &Complex) -> CheckReport {
    let n = d.num_vertices();
    if n == 0 || d.boundary.is_empty() {
        return violation("empty", json!({}));
    }
    let in_range = |w: &[usize]| w.iter().all(|&x| x < n);
    if !in_range(&d.boundary) || !d.cells.iter().all(|c| in_range(&c.walk)) {
        return violation("vertex_out_of_range", json!({}));
    }
    for &v in &d.vertex_map {
        if !target.contains_vertex(v) {
            return violation("unknown_target_vertex", json!({"vertex": v}));
        }
    }
    if d.boundary.len() == 1 {
        return if n == 1 && d.cells.is_empty() {
            CheckReport::pass("validate_diagram")
        } else {
            violation("euler", json!({"detail": "one-vertex boundary with extra structure"}))
        };
    }
    for (ci, c) in d.cells.iter().enumerate() {
        let distinct: BTreeSet<_> = c.walk.iter().collect();
        if c.walk.len() < 3 || distinct.len() != c.walk.len() {
            return violation("cell_not_embedded", json!({"cell": ci, "walk": c.walk}));
        }
    }
    // Faces: cells plus the reversed boundary; each dart exactly once.
    let mut faces: Vec<Vec<usize>> = d.cells.iter().map(|c| c.walk.clone()).collect();
    faces.push(d.boundary.iter().rev().copied().collect());
    let mut darts: HashSet<(usize, usize)> = HashSet::new();
    for (fi, f) in faces.iter().enumerate() {
        let l = f.len();
        for k in 0..l {
            let dart = (f[k], f[(k + 1) % l]);
            if dart.0 == dart.1 {
                return violation("degenerate_step", json!({"face": fi, "vertex": dart.0}));
            }
            if !darts.insert(dart) {
                return violation("repeated_dart", json!({"face": fi, "dart": [dart.0, dart.1]}));
            }
        }
    }
    for &(a, b) in &darts {
        if !darts.contains(&(b, a)) {
            return violation("unpaired_dart", json!({"dart": [a, b]}));
        }
    }
    let e = darts.len() / 2;
    let mut used = vec![false; n];
    for &(a, _) in &darts {
        used[a] = true;
    }
    if let Some(v) = used.iter().position(|u| !u) {
        return violation("unused_vertex", json!({"vertex": v}));
    }
    let chi = n as i64 - e as i64 + d.cells.len() as i64;
    if chi != 1 {
        return violation("euler", json!({"chi": chi}));
    }
    // Connectivity.
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &darts {
        nbrs[a].push(b);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &nbrs[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return violation("disconnected", json!({"vertex": v}));
    }
    // Rotation at every vertex must be one cycle.
    let mut rot: Vec<HashMap<usize, usize>> = vec![HashMap::new(); n];
    for f in &faces {
        let l = f.len();
        for k in 0..l {
            let (p, v, q) = (f[(k + l - 1) % l], f[k], f[(k + 1) % l]);
            rot[v].insert(p, q);
        }
    }
    for (v, r) in rot.iter().enumerate() {
        let Some((&s, _)) = r.iter().min_by_key(|(k, _)| **k) else { continue };
        let mut x = s;
        let mut len = 0;
        loop {
            x = r[&x];
            len += 1;
            if x == s || len > r.len() {
                break;
            }
        }
        if len != r.len() {
            return violation("vertex_not_disc", json!({"vertex": v}));
        }
    }
    // The map.
    for &(a, b) in &darts {
        if !target.has_edge(d.vertex_map[a], d.vertex_map[b]) {
            return violation("edge_not_mapped", json!({"edge": [a, b]}));
        }
    }
    for (ci, c) in d.cells.iter().enumerate() {
        let Some(t) = target.cells().get(c.target_cell) else {
            return violation("cell_map_mismatch", json!({"cell": ci}));
        };
        if t.len() != c.walk.len() || (0..c.walk.len()).any(|i| c.image_at(target, i) != Some(d.vertex_map[c.walk[i]]))
        {
            return violation("cell_map_mismatch", json!({"cell": ci}));
        }
    }
    CheckReport::pass("validate_diagram")
}

/// Fails on a cancellable pair: two cells across an edge that map to the
/// same target cell as mirror images.
pub fn is_reduced(d: &DiscDiagram) -> CheckReport {
    let mut side: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (ci, c) in d.cells.iter().enumerate() {
        let l = c.walk.len();
        for k in 0..l {
            side.insert((c.walk[k], c.walk[(k + 1) % l]), (ci, k));
        }
    }
    let mut pairs = 0usize;
    for (&(a, b), &(x, i)) in &side {
        let Some(&(y, j)) = side.get(&(b, a)) else { continue };
        if x >= y || d.cells[x].target_cell != d.cells[y].target_cell {
            continue;
        }
        pairs += 1;
        let (cx, cy) = (&d.cells[x], &d.cells[y]);
        let l = cx.walk.len();
        let mirror = (0..l).all(|k| {
            let u = cx.walk[(i + k) % l];
            let v = cy.walk[(j + 1 + l - k % l) % l];
            d.vertex_map[u] == d.vertex_map[v]
        });
        if mirror {
            let mut w = [x, y];
            w.sort_unstable();
            return CheckReport::fail("is_reduced", json!({"cells": w, "edge": [a.min(b), a.max(b)]}))
                .stat("same_target_adjacencies", pairs);
        }
    }
    CheckReport::pass("is_reduced").stat("same_target_adjacencies", pairs)
}

/// Per-vertex curvature defects of a triangulated diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectTable {
    /// `(diagram vertex, defect)` for every vertex.
    pub defects: Vec<(usize, i64)>,
    pub total: i64,
}

impl DefectTable {
    pub fn passed(&self) -> bool {
        self.total == 6
    }

    pub fn to_report(&self) -> CheckReport {
        let nonzero: Vec<_> = self.defects.iter().filter(|d| d.1 != 0).collect();
        CheckReport::new("gauss_bonnet", self.passed())
            .with_witness(json!({"total": self.total}))
            .stat("total", self.total)
            .stat("nonzero_defects", nonzero.len())
    }
}

/// `def(v) = 6 - t(v) - 3 c(v)`, where `t` counts incident triangles and `c`
/// counts visits of the boundary walk. For a non-singular disc this is
/// `3 - t` on the boundary and `6 - t` inside.
pub fn gauss_bonnet_audit(d: &DiscDiagram) -> Result<DefectTable> {
    if let Some(i) = d.cells.iter().position(|c| c.walk.len() != 3) {
        return Err(NpcError::NotTriangulated(i));
    }
    let n = d.num_vertices();
    let mut t = vec![0i64; n];
    for c in &d.cells {
        for &v in &c.walk {
            t[v] += 1;
        }
    }
    let mut visits = vec![0i64; n];
    if d.boundary.len() > 1 {
        for &v in &d.boundary {
            visits[v] += 1;
        }
    }
    let defects: Vec<(usize, i64)> = (0..n).map(|v| (v, 6 - t[v] - 3 * visits[v])).collect();
    let total = defects.iter().map(|x| x.1).sum();
    Ok(DefectTable { defects, total })
}

/// Passes iff the diagram is at most `n`-to-1 and every degree is at most `n`.
pub fn verify_tight(d: &DiscDiagram, n: usize) -> CheckReport {
    let (m, deg) = (d.multiplicity(), d.max_degree());
    let ok = m <= n && deg <= n;
    let mut r = CheckReport::new("verify_tight", ok).stat("multiplicity", m).stat("max_degree", deg).stat("bound", n);
    if !ok {
        r = r.with_witness(json!({"multiplicity": m, "max_degree": deg, "bound": n}));
    }
    r
}

pub fn reduced_diagram_search(target: &Complex, loop_ids: &[VertexId], area_cap: usize) -> Result<DiscDiagram> {
    DiagramSearch::new(target).search(loop_ids, area_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_equilateral_disc;

    fn tri_complex() -> Complex {
        Complex::simplicial([1, 2, 3], [(1, 2), (2, 3), (1, 3)], [[1, 2, 3]])
    }

    fn single_triangle() -> DiscDiagram {
        let t = tri_complex();
        let cell = DiagramCell::onto(&t, vec![0, 1, 2], &[1, 2, 3]).unwrap();
        DiscDiagram::from_oriented_cells(vec![1, 2, 3], vec![cell]).unwrap()
    }

    #[test]
    fn single_triangle_measures() {
        let d = single_triangle();
        assert!(validate_diagram(&d, &tri_complex()).passed());
        assert_eq!((d.area(), d.multiplicity(), d.max_degree()), (1, 1, 2));
        let gb = gauss_bonnet_audit(&d).unwrap();
        assert_eq!(gb.defects.iter().map(|x| x.1).collect::<Vec<_>>(), vec![2, 2, 2]);
        assert!(verify_tight(&d, 3).passed());
        assert!(!verify_tight(&d, 0).passed());
        assert!(is_reduced(&d).passed());
    }

    #[test]
    fn sphere_like_input_fails_euler() {
        // Two triangles glued along their whole boundary, with a fake boundary.
        let t = tri_complex();
        let a = DiagramCell::onto(&t, vec![0, 1, 2], &[1, 2, 3]).unwrap();
        let b = DiagramCell::onto(&t, vec![2, 1, 0], &[3, 2, 1]).unwrap();
        let d = DiscDiagram { vertex_map: vec![1, 2, 3], cells: vec![a, b], boundary: vec![0, 1], target: None };
        assert!(!validate_diagram(&d, &t).passed());
    }

    #[test]
    fn hexagonal_fan_defects() {
        let c = gen_equilateral_disc(1);
        let d = DiscDiagram::of_disc_complex(&c).unwrap();
        assert!(validate_diagram(&d, &c).passed());
        let gb = gauss_bonnet_audit(&d).unwrap();
        assert_eq!(gb.defects[0].1, 0);
        assert!(gb.defects[1..].iter().all(|x| x.1 == 1));
        assert_eq!(gb.total, 6);
    }

    #[test]
    fn mirror_pair_is_not_reduced() {
        // Fold the single triangle across edge 1-2: cells (a,b,c) and (b,a,c').
        let t = tri_complex();
        let x = DiagramCell::onto(&t, vec![0, 1, 2], &[1, 2, 3]).unwrap();
        let y = DiagramCell::onto(&t, vec![1, 0, 3], &[2, 1, 3]).unwrap();
        let d = DiscDiagram::from_oriented_cells(vec![1, 2, 3, 3], vec![x, y]).unwrap();
        assert!(validate_diagram(&d, &t).passed());
        let r = is_reduced(&d);
        assert!(!r.passed());
        assert_eq!(r.witness["cells"], json!([0, 1]));
    }

    #[test]
    fn path_diagrams_are_valid() {
        let c = gen_equilateral_disc(1);
        let d = DiscDiagram::from_path(&[1, 0, 4]);
        assert!(validate_diagram(&d, &c).passed());
        assert_eq!(gauss_bonnet_audit(&d).unwrap().total, 6);
        assert!(validate_diagram(&DiscDiagram::single_vertex(0), &c).passed());
    }
}
