//! Exhaustive minimal-area filling by A* over boundary walks.
//!
//! A state is the closed walk still to be filled, freely and cyclically
//! reduced. A move attaches one target cell along a maximal segment of the
//! walk that matches its boundary, replacing the segment by the rest of the
//! cell. States are memoized by the least rotation of the walk or its
//! reversal. The heuristic is the l1-norm of the unique rational 2-chain
//! bounding the walk, used only when the cellular boundary map is injective.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use nalgebra::DMatrix;

use crate::complex::{canonical_walk, ekey, Complex, VertexId};
use crate::error::{NpcError, Result};

use super::{DiagramCell, DiscDiagram, Gluer};

pub const DEFAULT_NODE_CAP: usize = 2_000_000;
const HEURISTIC_MAX_CELLS: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Move {
    start: u32,
    len: u32,
    cell: u32,
    /// Position in the target cell walk of the segment's first vertex.
    p0: u32,
    reflected: bool,
}

struct Heuristic {
    nf: usize,
    edge_index: HashMap<(usize, usize), usize>,
    /// Row `e` holds column `e` of the pseudo-inverse of the boundary map.
    pinv: Vec<f64>,
    cell_edges: Vec<Vec<(usize, i64)>>,
}

const PRIME: u64 = 2_147_483_647;

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    b %= PRIME;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    r
}

/// Full rank over GF(p) certifies full rank over the rationals.
fn full_rank_mod_p(m: &[i64], n: usize) -> bool {
    let mut a: Vec<u64> = m.iter().map(|&x| x.rem_euclid(PRIME as i64) as u64).collect();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else { return false };
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
        }
        let inv = pow_mod(a[col * n + col], PRIME - 2);
        for r in col + 1..n {
            let f = a[r * n + col] * inv % PRIME;
            if f == 0 {
                continue;
            }
            for k in col..n {
                let sub = f * a[col * n + k] % PRIME;
                a[r * n + k] = (a[r * n + k] + PRIME - sub) % PRIME;
            }
        }
    }
    true
}

impl Heuristic {
    fn new(t: &Complex) -> Option<Self> {
        let nf = t.num_cells();
        if nf == 0 || nf > HEURISTIC_MAX_CELLS {
            return None;
        }
        let edges = t.edge_list();
        let edge_index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut cell_edges: Vec<Vec<(usize, i64)>> = Vec::with_capacity(nf);
        let mut edge_cells: Vec<Vec<(usize, i64)>> = vec![Vec::new(); edges.len()];
        for f in 0..nf {
            let w = t.cell_walk(f);
            let mut ce = Vec::new();
            for k in 0..w.len() {
                let (a, b) = (w[k], w[(k + 1) % w.len()]);
                let e = *edge_index.get(&ekey(a, b))?;
                let s = if a < b { 1 } else { -1 };
                ce.push((e, s));
                edge_cells[e].push((f, s));
            }
            cell_edges.push(ce);
        }
        let mut gram = vec![0i64; nf * nf];
        for ec in &edge_cells {
            for &(f, s) in ec {
                for &(g, r) in ec {
                    gram[f * nf + g] += s * r;
                }
            }
        }
        if !full_rank_mod_p(&gram, nf) {
            return None;
        }
        let m = DMatrix::from_fn(nf, nf, |i, j| gram[i * nf + j] as f64);
        let minv = m.cholesky()?.inverse();
        let mut pinv = vec![0.0; edges.len() * nf];
        for (e, ec) in edge_cells.iter().enumerate() {
            for &(f, s) in ec {
                for g in 0..nf {
                    pinv[e * nf + g] += s as f64 * minv[(g, f)];
                }
            }
        }
        Some(Heuristic { nf, edge_index, pinv, cell_edges })
    }

    /// Lower bound on the area of any filling of `walk`.
    fn bound(&self, walk: &[u32]) -> u32 {
        let m = walk.len();
        if m < 2 {
            return 0;
        }
        let mut z: HashMap<usize, i64> = HashMap::new();
        for k in 0..m {
            let (a, b) = (walk[k] as usize, walk[(k + 1) % m] as usize);
            let Some(&e) = self.edge_index.get(&ekey(a, b)) else { return 0 };
            *z.entry(e).or_insert(0) += if a < b { 1 } else { -1 };
        }
        z.retain(|_, v| *v != 0);
        let mut c = vec![0.0; self.nf];
        for (&e, &v) in &z {
            let row = &self.pinv[e * self.nf..(e + 1) * self.nf];
            for (ci, r) in c.iter_mut().zip(row) {
                *ci += v as f64 * r;
            }
        }
        let ci: Vec<i64> = c.iter().map(|x| x.round() as i64).collect();
        let mut back: HashMap<usize, i64> = HashMap::new();
        for (f, &k) in ci.iter().enumerate() {
            if k != 0 {
                for &(e, s) in &self.cell_edges[f] {
                    *back.entry(e).or_insert(0) += k * s;
                }
            }
        }
        back.retain(|_, v| *v != 0);
        if back != z {
            return 0;
        }
        ci.iter().map(|x| x.unsigned_abs() as u32).sum()
    }
}

/// Free and cyclic reduction of a closed walk. When `ids` is given, the
/// removed backtracks are folded in `gl`. Search and replay share this so
/// that recorded move positions stay valid.
pub fn reduce_walk(walk: &mut Vec<u32>, mut ids: Option<(&mut Vec<usize>, &mut Gluer)>) {
    loop {
        let m = walk.len();
        if m <= 1 {
            return;
        }
        if m == 2 {
            walk.truncate(1);
            if let Some((ids, _)) = ids.as_mut() {
                ids.truncate(1);
            }
            return;
        }
        let Some(i) = (0..m).find(|&i| walk[i] == walk[(i + 2) % m]) else { return };
        let (r1, r2) = ((i + 1) % m, (i + 2) % m);
        if let Some((ids, gl)) = ids.as_mut() {
            gl.union(ids[r2], ids[i]).expect("folded vertices share an image");
            let keep: Vec<usize> = (0..m).filter(|&k| k != r1 && k != r2).map(|k| ids[k]).collect();
            **ids = keep;
        }
        *walk = (0..m).filter(|&k| k != r1 && k != r2).map(|k| walk[k]).collect();
    }
}

struct Node {
    walk: Vec<u32>,
    g: u32,
    parent: u32,
    mv: Option<Move>,
}

/// Reusable search context for one target complex.
pub struct DiagramSearch<'a> {
    target: &'a Complex,
    heuristic: Option<Heuristic>,
    node_cap: usize,
}

impl<'a> DiagramSearch<'a> {
    pub fn new(target: &'a Complex) -> Self {
        DiagramSearch { target, heuristic: Heuristic::new(target), node_cap: DEFAULT_NODE_CAP }
    }

    pub fn with_node_cap(mut self, cap: usize) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn has_heuristic(&self) -> bool {
        self.heuristic.is_some()
    }

    /// Lower bound used by the search for the given loop (0 when unavailable).
    pub fn lower_bound(&self, loop_ids: &[VertexId]) -> Result<u32> {
        let w = self.loop_indices(loop_ids)?;
        Ok(self.heuristic.as_ref().map_or(0, |h| h.bound(&w)))
    }

    fn loop_indices(&self, loop_ids: &[VertexId]) -> Result<Vec<u32>> {
        let mut ids = loop_ids.to_vec();
        if ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        if ids.is_empty() {
            return Err(NpcError::InvalidInput("empty loop".into()));
        }
        let idx = self.target.indices(&ids)?;
        let m = idx.len();
        if m > 1 {
            for k in 0..m {
                if !self.target.adjacent(idx[k], idx[(k + 1) % m]) {
                    return Err(NpcError::InvalidInput(format!(
                        "loop step {} -> {} is not an edge",
                        ids[k],
                        ids[(k + 1) % m]
                    )));
                }
            }
        }
        Ok(idx.into_iter().map(|x| x as u32).collect())
    }

    fn h(&self, w: &[u32]) -> u32 {
        self.heuristic.as_ref().map_or(0, |h| h.bound(w))
    }

    /// Moves at the maximal segment through the edge starting at position `i`.
    fn moves_at(&self, w: &[u32], i: usize, out: &mut BTreeSet<Move>) {
        let m = w.len();
        let (a, b) = (w[i] as usize, w[(i + 1) % m] as usize);
        for &cell in self.target.cells_on_edge(a, b) {
            let t = self.target.cell_walk(cell);
            let l = t.len();
            let p = t.iter().position(|&x| x == a).unwrap();
            let reflected = t[(p + 1) % l] != b;
            let at = |k: isize| -> u32 {
                let step = if reflected { -k } else { k };
                t[(p as isize + step).rem_euclid(l as isize) as usize] as u32
            };
            let lim = l.min(m);
            let (mut back, mut fwd) = (0usize, 1usize);
            while back + fwd < lim && w[(i + m - back - 1) % m] == at(-(back as isize) - 1) {
                back += 1;
            }
            while back + fwd < lim && w[(i + fwd + 1) % m] == at(fwd as isize + 1) {
                fwd += 1;
            }
            let start = (i + m - back) % m;
            let step = if reflected { back as isize } else { -(back as isize) };
            let p0 = (p as isize + step).rem_euclid(l as isize) as u32;
            out.insert(Move { start: start as u32, len: (back + fwd) as u32, cell: cell as u32, p0, reflected });
        }
    }

    fn moves(&self, w: &[u32]) -> BTreeSet<Move> {
        let m = w.len();
        let mut count: HashMap<(u32, u32), u32> = HashMap::new();
        for k in 0..m {
            let (a, b) = (w[k], w[(k + 1) % m]);
            *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        let mut out = BTreeSet::new();
        let forced = (0..m).find(|&k| {
            let (a, b) = (w[k], w[(k + 1) % m]);
            count[&(a.min(b), a.max(b))] == 1
        });
        match forced {
            Some(i) => self.moves_at(w, i, &mut out),
            None => (0..m).for_each(|i| self.moves_at(w, i, &mut out)),
        }
        out
    }

    /// Applies `mv` to `w`; with `ids`, records the new cell in `gl`.
    fn apply(&self, w: &mut Vec<u32>, mv: Move, mut ids: Option<(&mut Vec<usize>, &mut Gluer)>) {
        let m = w.len();
        let t = self.target.cell_walk(mv.cell as usize);
        let l = t.len();
        let (s, len) = (mv.start as usize, mv.len as usize);
        let c = |k: usize| -> usize {
            let k = k % l;
            if mv.reflected {
                t[(mv.p0 as usize + l - k) % l]
            } else {
                t[(mv.p0 as usize + k) % l]
            }
        };
        let rest: Vec<usize> = (0..m - len).map(|k| (s + len + k) % m).collect();
        let mut nw: Vec<u32> = rest.iter().map(|&k| w[k]).collect();
        if len == m {
            nw = vec![w[s]];
        } else if len < l {
            nw.push(w[s]);
            nw.extend((len + 1..l).rev().map(|k| c(k) as u32));
        }
        if let Some((ids, gl)) = ids.as_mut() {
            let mut cell_walk: Vec<usize> = (0..len.min(l)).map(|k| ids[(s + k) % m]).collect();
            let mut fresh: Vec<usize> = Vec::new();
            if len < l {
                cell_walk.push(ids[(s + len) % m]);
                for k in len + 1..l {
                    let v = gl.fresh(self.target.id(c(k)));
                    fresh.push(v);
                    cell_walk.push(v);
                }
            } else if len < m {
                gl.union(ids[(s + len) % m], ids[s]).expect("closed cell");
            }
            let image: Vec<VertexId> = (0..l).map(|k| self.target.id(c(k))).collect();
            let cell = DiagramCell::onto(self.target, cell_walk, &image).expect("target cell");
            gl.push_cell(cell);
            let mut nids: Vec<usize> = rest.iter().map(|&k| ids[k]).collect();
            if len == m {
                nids = vec![ids[s]];
            } else if len < l {
                nids.push(ids[s]);
                nids.extend(fresh.iter().rev());
            }
            **ids = nids;
        }
        *w = nw;
    }

    /// Area-minimal diagram for the closed walk `loop_ids` with at most
    /// `area_cap` cells. The walk may repeat its first vertex at the end.
    pub fn search(&self, loop_ids: &[VertexId], area_cap: usize) -> Result<DiscDiagram> {
        let w0 = self.loop_indices(loop_ids)?;
        let mut start = w0.clone();
        reduce_walk(&mut start, None);
        let h0 = self.h(&start);
        if h0 as usize > area_cap {
            return Err(NpcError::NotFillable(area_cap));
        }
        let mut nodes: Vec<Node> = vec![Node { walk: start, g: 0, parent: u32::MAX, mv: None }];
        let mut best: HashMap<Vec<u32>, u32> = HashMap::new();
        best.insert(canonical_walk(&nodes[0].walk), 0);
        let mut heap: BinaryHeap<Reverse<(u32, u32, u32)>> = BinaryHeap::new();
        heap.push(Reverse((h0, h0, 0)));
        let mut goal = None;
        while let Some(Reverse((_, _, id))) = heap.pop() {
            let (walk, g) = (nodes[id as usize].walk.clone(), nodes[id as usize].g);
            if best.get(&canonical_walk(&walk)).is_some_and(|&b| b < g) {
                continue;
            }
            if walk.len() == 1 {
                goal = Some(id);
                break;
            }
            for mv in self.moves(&walk) {
                let mut nw = walk.clone();
                self.apply(&mut nw, mv, None);
                reduce_walk(&mut nw, None);
                let ng = g + 1;
                let key = canonical_walk(&nw);
                if best.get(&key).is_some_and(|&b| b <= ng) {
                    continue;
                }
                let h = self.h(&nw);
                if (ng + h) as usize > area_cap {
                    continue;
                }
                best.insert(key, ng);
                if nodes.len() >= self.node_cap {
                    return Err(NpcError::CapExceeded { count: nodes.len() as u64, cap: self.node_cap as u64 });
                }
                nodes.push(Node { walk: nw, g: ng, parent: id, mv: Some(mv) });
                heap.push(Reverse((ng + h, h, nodes.len() as u32 - 1)));
            }
        }
        let Some(goal) = goal else { return Err(NpcError::NotFillable(area_cap)) };
        let mut moves = Vec::new();
        let mut cur = goal;
        while let Some(mv) = nodes[cur as usize].mv {
            moves.push(mv);
            cur = nodes[cur as usize].parent;
        }
        moves.reverse();
        Ok(self.replay(&w0, &moves))
    }

    fn replay(&self, w0: &[u32], moves: &[Move]) -> DiscDiagram {
        let mut gl = Gluer::new();
        let orig: Vec<usize> = w0.iter().map(|&x| gl.fresh(self.target.id(x as usize))).collect();
        let mut ids = orig.clone();
        let mut w = w0.to_vec();
        reduce_walk(&mut w, Some((&mut ids, &mut gl)));
        for &mv in moves {
            self.apply(&mut w, mv, Some((&mut ids, &mut gl)));
            reduce_walk(&mut w, Some((&mut ids, &mut gl)));
        }
        debug_assert_eq!(w.len(), 1);
        gl.finish(&orig)
    }
}
