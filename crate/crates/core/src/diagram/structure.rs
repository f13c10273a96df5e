//! Spurs, shells, ladders and the trichotomy for reduced diagrams.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{NpcError, Result};

use super::DiscDiagram;

/// An edge with a vertex of degree 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spur {
    pub edge: (usize, usize),
    pub leaf: usize,
}

/// A cell whose outer component is connected and whose inner path is a
/// union of at most three internal arcs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shell {
    pub cell: usize,
    /// Vertices of the outer path, in the cell's orientation.
    pub outer: Vec<usize>,
    pub inner_arcs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderPiece {
    Face(usize),
    Edge(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ladder {
    pub order: Vec<LadderPiece>,
    /// `c_i ∩ c_{i+1}` for consecutive faces, as vertex paths.
    pub rungs: Vec<Vec<usize>>,
    /// `(face, path)` for each rail of a middle face.
    pub rails: Vec<(usize, Vec<usize>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleKind {
    Vertex,
    Edge,
    Polygon,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Classification {
    SingleCell { cell: SingleKind },
    Ladder { ladder: Ladder },
    ThreeShellsOrSpurs { shells: Vec<Shell>, spurs: Vec<Spur> },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::SingleCell { .. } => "single_cell",
            Classification::Ladder { .. } => "ladder",
            Classification::ThreeShellsOrSpurs { .. } => "three_shells_or_spurs",
        }
    }
}

pub fn find_spurs(d: &DiscDiagram) -> Vec<Spur> {
    let deg = d.degrees();
    d.edges()
        .into_iter()
        .filter_map(|(a, b)| {
            let leaf = [a, b].into_iter().find(|&x| deg[x] == 1)?;
            Some(Spur { edge: (a, b), leaf })
        })
        .collect()
}

fn boundary_sets(d: &DiscDiagram) -> (HashSet<usize>, HashSet<(usize, usize)>) {
    let verts: HashSet<usize> = d.boundary.iter().copied().collect();
    let l = d.boundary.len();
    let mut edges = HashSet::new();
    if l > 1 {
        for k in 0..l {
            let (a, b) = (d.boundary[k], d.boundary[(k + 1) % l]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    (verts, edges)
}

/// Outer path of cell `ci` as walk positions `start..=start+len` (cyclic),
/// when the outer component is a nonempty connected proper subpath.
fn outer_span(d: &DiscDiagram, ci: usize, bv: &HashSet<usize>, be: &HashSet<(usize, usize)>) -> Option<(usize, usize)> {
    let w = &d.cells[ci].walk;
    let l = w.len();
    let slots: Vec<bool> = (0..2 * l)
        .map(|s| {
            let k = s / 2;
            if s % 2 == 0 {
                bv.contains(&w[k])
            } else {
                let (a, b) = (w[k], w[(k + 1) % l]);
                be.contains(&(a.min(b), a.max(b)))
            }
        })
        .collect();
    let starts: Vec<usize> = (0..2 * l).filter(|&s| slots[s] && !slots[(s + 2 * l - 1) % (2 * l)]).collect();
    if starts.len() != 1 {
        return None;
    }
    let s0 = starts[0];
    let mut len = 0;
    while slots[(s0 + len + 1) % (2 * l)] {
        len += 1;
    }
    // Marked intervals start and end at vertex slots.
    Some((s0 / 2, len / 2))
}

pub fn find_shells(d: &DiscDiagram) -> Vec<Shell> {
    let (bv, be) = boundary_sets(d);
    let deg = d.degrees();
    (0..d.cells.len())
        .filter_map(|ci| {
            let (start, len) = outer_span(d, ci, &bv, &be)?;
            let w = &d.cells[ci].walk;
            let l = w.len();
            let outer: Vec<usize> = (0..=len).map(|k| w[(start + k) % l]).collect();
            let inner_interior = (len + 1..l).map(|k| w[(start + k) % l]);
            let inner_arcs = 1 + inner_interior.filter(|&v| deg[v] >= 3).count();
            (inner_arcs <= 3).then_some(Shell { cell: ci, outer, inner_arcs })
        })
        .collect()
}

struct Uf(Vec<usize>);

impl Uf {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra.max(rb)] = ra.min(rb);
    }
}

/// Open cells of `d` as union-find elements: vertices, then edges, then faces.
struct OpenCells {
    nv: usize,
    edges: Vec<(usize, usize)>,
    face_edges: Vec<Vec<usize>>,
    free: Vec<usize>,
}

impl OpenCells {
    fn new(d: &DiscDiagram) -> Self {
        let edges: Vec<(usize, usize)> = d.edges().into_iter().collect();
        let eidx = |a: usize, b: usize| edges.binary_search(&(a.min(b), a.max(b))).unwrap();
        let mut in_face = vec![false; edges.len()];
        let face_edges: Vec<Vec<usize>> = d
            .cells
            .iter()
            .map(|c| {
                let l = c.walk.len();
                (0..l)
                    .map(|k| {
                        let e = eidx(c.walk[k], c.walk[(k + 1) % l]);
                        in_face[e] = true;
                        e
                    })
                    .collect()
            })
            .collect();
        let free = (0..edges.len()).filter(|&e| !in_face[e]).collect();
        OpenCells { nv: d.num_vertices(), edges, face_edges, free }
    }

    fn pieces(&self) -> Vec<LadderPiece> {
        let mut p: Vec<LadderPiece> = (0..self.face_edges.len()).map(LadderPiece::Face).collect();
        p.extend(self.free.iter().map(|&e| LadderPiece::Edge(self.edges[e].0, self.edges[e].1)));
        p
    }

    fn closure(&self, d: &DiscDiagram, p: LadderPiece) -> (BTreeSet<usize>, BTreeSet<usize>) {
        match p {
            LadderPiece::Face(f) => {
                (d.cells[f].walk.iter().copied().collect(), self.face_edges[f].iter().copied().collect())
            }
            LadderPiece::Edge(a, b) => {
                let e = self.edges.binary_search(&(a, b)).unwrap();
                ([a, b].into_iter().collect(), [e].into_iter().collect())
            }
        }
    }

    fn element(&self, p: LadderPiece) -> usize {
        match p {
            LadderPiece::Face(f) => self.nv + self.edges.len() + f,
            LadderPiece::Edge(a, b) => self.nv + self.edges.binary_search(&(a, b)).unwrap(),
        }
    }

    /// Union-find over `D \ closure(p)` plus the surviving element list.
    fn complement(&self, d: &DiscDiagram, p: LadderPiece) -> (Uf, Vec<usize>) {
        let (cv, ce) = self.closure(d, p);
        let removed_face = match p {
            LadderPiece::Face(f) => Some(f),
            LadderPiece::Edge(..) => None,
        };
        let ne = self.edges.len();
        let mut uf = Uf((0..self.nv + ne + self.face_edges.len()).collect());
        let mut alive = Vec::new();
        alive.extend((0..self.nv).filter(|v| !cv.contains(v)));
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if ce.contains(&e) {
                continue;
            }
            alive.push(self.nv + e);
            for x in [a, b] {
                if !cv.contains(&x) {
                    uf.union(self.nv + e, x);
                }
            }
        }
        for (f, fe) in self.face_edges.iter().enumerate() {
            if Some(f) == removed_face {
                continue;
            }
            let id = self.nv + ne + f;
            alive.push(id);
            for &e in fe {
                if !ce.contains(&e) {
                    uf.union(id, self.nv + e);
                }
            }
            for &v in &d.cells[f].walk {
                if !cv.contains(&v) {
                    uf.union(id, v);
                }
            }
        }
        (uf, alive)
    }
}

fn cyclic_runs(marks: &[bool]) -> Vec<(usize, usize)> {
    let n = marks.len();
    if marks.iter().all(|&m| m) {
        return vec![(0, n)];
    }
    (0..n)
        .filter(|&s| marks[s] && !marks[(s + n - 1) % n])
        .map(|s| {
            let mut len = 1;
            while marks[(s + len) % n] {
                len += 1;
            }
            (s, len)
        })
        .collect()
}

/// Vertex paths of the closed components of `walk` covered (or not) by `inside`.
fn walk_paths(walk: &[usize], covered: impl Fn(usize, Option<usize>) -> bool, want: bool) -> Vec<Vec<usize>> {
    let l = walk.len();
    let slots: Vec<bool> = (0..2 * l)
        .map(|s| {
            let k = s / 2;
            let c = if s % 2 == 0 { covered(walk[k], None) } else { covered(walk[k], Some(walk[(k + 1) % l])) };
            c == want
        })
        .collect();
    cyclic_runs(&slots)
        .into_iter()
        .map(|(s, len)| {
            // Closure: extend open runs to the neighbouring vertex slots.
            let (mut s, mut len) = (s, len);
            if s % 2 == 1 {
                s -= 1;
                len += 1;
            }
            if (s + len) % 2 == 0 {
                len += 1;
            }
            (0..len.div_ceil(2)).map(|k| walk[(s / 2 + k) % l]).collect()
        })
        .collect()
}

/// A verified ladder decomposition into faces and free edges.
pub fn ladder_decomposition(d: &DiscDiagram) -> Option<Ladder> {
    let oc = OpenCells::new(d);
    let pieces = oc.pieces();
    let n = pieces.len();
    if n < 2 {
        return None;
    }
    let splits: Vec<(Uf, Vec<usize>)> = pieces.iter().map(|&p| oc.complement(d, p)).collect();
    let ncomp = |i: usize| -> usize {
        let (uf, alive) = &splits[i];
        let mut uf = Uf(uf.0.clone());
        alive.iter().map(|&x| uf.find(x)).collect::<BTreeSet<_>>().len()
    };
    let comps: Vec<usize> = (0..n).map(ncomp).collect();
    let ends: Vec<usize> = (0..n).filter(|&i| comps[i] == 1).collect();
    if ends.len() != 2 || (0..n).any(|i| comps[i] != 1 && comps[i] != 2) {
        return None;
    }
    let first = ends[0];
    let first_el = oc.element(pieces[first]);
    let mut rank = vec![0usize; n];
    for i in 0..n {
        if i == first {
            continue;
        }
        let mut uf = Uf(splits[i].0 .0.clone());
        let root = uf.find(first_el);
        rank[i] = (0..n).filter(|&j| j != i && uf.find(oc.element(pieces[j])) == root).count();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| rank[i]);
    if idx.iter().enumerate().any(|(k, &i)| rank[i] != k) {
        return None;
    }
    let order: Vec<LadderPiece> = idx.iter().map(|&i| pieces[i]).collect();
    let closures: Vec<_> = order.iter().map(|&p| oc.closure(d, p)).collect();
    if closures.windows(2).any(|w| w[0].0.is_disjoint(&w[1].0)) {
        return None;
    }
    let mut rungs = Vec::new();
    for k in 0..n - 1 {
        if let (LadderPiece::Face(f), LadderPiece::Face(_)) = (order[k], order[k + 1]) {
            let (nv, ne) = &closures[k + 1];
            let covered = |a: usize, b: Option<usize>| match b {
                None => nv.contains(&a),
                Some(b) => ne.contains(&oc.edges.binary_search(&(a.min(b), a.max(b))).unwrap()),
            };
            rungs.extend(walk_paths(&d.cells[f].walk, covered, true));
        }
    }
    let mut rails = Vec::new();
    for k in 1..n - 1 {
        let LadderPiece::Face(f) = order[k] else { continue };
        let (pv, pe) = &closures[k - 1];
        let (qv, qe) = &closures[k + 1];
        let covered = |a: usize, b: Option<usize>| match b {
            None => pv.contains(&a) || qv.contains(&a),
            Some(b) => {
                let e = oc.edges.binary_search(&(a.min(b), a.max(b))).unwrap();
                pe.contains(&e) || qe.contains(&e)
            }
        };
        rails.extend(walk_paths(&d.cells[f].walk, covered, false).into_iter().map(|p| (f, p)));
    }
    Some(Ladder { order, rungs, rails })
}

/// Trichotomy for reduced diagrams: a single cell, a ladder, or at least
/// three shells and spurs. Singular diagrams are classified as they are.
pub fn classify(d: &DiscDiagram) -> Result<Classification> {
    let ne = d.edges().len();
    if d.cells.is_empty() && ne == 0 {
        return Ok(Classification::SingleCell { cell: SingleKind::Vertex });
    }
    if d.cells.is_empty() && ne == 1 {
        return Ok(Classification::SingleCell { cell: SingleKind::Edge });
    }
    if d.cells.len() == 1 && ne == d.cells[0].walk.len() {
        return Ok(Classification::SingleCell { cell: SingleKind::Polygon });
    }
    if let Some(ladder) = ladder_decomposition(d) {
        return Ok(Classification::Ladder { ladder });
    }
    let (shells, spurs) = (find_shells(d), find_spurs(d));
    if shells.len() + spurs.len() >= 3 {
        return Ok(Classification::ThreeShellsOrSpurs { shells, spurs });
    }
    Err(NpcError::Unclassifiable(format!(
        "area {}, {} shells, {} spurs, not a ladder",
        d.area(),
        shells.len(),
        spurs.len()
    )))
}

/// Removes a shell whose outer path is longer than half the boundary,
/// replacing the outer path by the inner path.
pub fn shell_off(d: &DiscDiagram) -> Option<DiscDiagram> {
    let bl = d.boundary.len();
    for sh in find_shells(d) {
        let k = sh.outer.len() - 1;
        let l = d.cells[sh.cell].walk.len();
        if 2 * k <= bl || k >= l {
            continue;
        }
        let Some(i) = (0..bl).find(|&i| (0..=k).all(|j| d.boundary[(i + j) % bl] == sh.outer[j])) else {
            continue;
        };
        let w = &d.cells[sh.cell].walk;
        let p = w.iter().position(|&x| x == sh.outer[0]).unwrap();
        let inner: Vec<usize> = (0..=l - k).map(|j| w[(p + l - j) % l]).collect();
        let mut boundary: Vec<usize> = inner;
        boundary.extend((k + 1..bl).map(|j| d.boundary[(i + j) % bl]));
        let mut cells = d.cells.clone();
        cells.remove(sh.cell);
        let out = DiscDiagram { vertex_map: d.vertex_map.clone(), cells, boundary, target: d.target.clone() };
        return Some(out.compact());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::validate_diagram;
    use crate::generators::{gen_equilateral_disc, gen_ladder_diagram, LadderSpec};

    #[test]
    fn path_diagram_has_two_spurs_and_is_a_ladder() {
        let d = DiscDiagram::from_path(&[1, 0, 4]);
        assert_eq!(find_spurs(&d).len(), 2);
        let c = classify(&d).unwrap();
        assert_eq!(c.name(), "ladder");
    }

    #[test]
    fn star_of_three_edges_has_three_spurs() {
        // Boundary of the tree 0-1, 0-2, 0-3.
        let d =
            DiscDiagram { vertex_map: vec![0, 1, 2, 3], cells: vec![], boundary: vec![0, 1, 0, 2, 0, 3], target: None };
        match classify(&d).unwrap() {
            Classification::ThreeShellsOrSpurs { spurs, .. } => assert_eq!(spurs.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn heptagon_chain_is_a_ladder() {
        let (d, t) = gen_ladder_diagram(&LadderSpec::chain(&[7, 7, 7])).unwrap();
        assert!(validate_diagram(&d, &t).passed());
        let l = ladder_decomposition(&d).unwrap();
        assert_eq!(l.order.len(), 3);
        assert_eq!(l.rungs.len(), 2);
        assert!(l.rungs.iter().all(|r| r.len() == 2));
        assert_eq!(l.rails.len(), 2);
        assert_eq!(find_shells(&d).len(), 2);
    }

    #[test]
    fn single_cell_spec_classifies_as_polygon() {
        let (d, _) = gen_ladder_diagram(&LadderSpec::chain(&[7])).unwrap();
        assert_eq!(classify(&d).unwrap(), Classification::SingleCell { cell: SingleKind::Polygon });
    }

    #[test]
    fn fan_is_neither_ladder_nor_shelled() {
        let c = gen_equilateral_disc(1);
        let d = DiscDiagram::of_disc_complex(&c).unwrap();
        assert!(ladder_decomposition(&d).is_none());
        // Every rim triangle has a single inner arc through the center.
        assert_eq!(find_shells(&d).len(), 6);
    }

    #[test]
    fn shell_off_shortens_the_boundary() {
        let (d, t) = gen_ladder_diagram(&LadderSpec::chain(&[7, 5])).unwrap();
        let bl = d.boundary.len();
        let e = shell_off(&d).unwrap();
        assert!(validate_diagram(&e, &t).passed());
        assert_eq!(e.area(), 1);
        assert!(e.boundary.len() < bl);
    }
}
