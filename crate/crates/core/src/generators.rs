//! Deterministic fixture complexes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{canonical_walk, Complex, VertexId};
use crate::diagram::{DiagramCell, DiscDiagram};
use crate::error::{NpcError, Result};
use crate::presentation::{Letter, Presentation, Word};
use crate::smallcancel::{check_c16_presentation, Dehn};

/// Axial directions of the triangular lattice, counter-clockwise.
pub const HEX_DIRS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

pub fn hex_norm((q, r): (i32, i32)) -> i32 {
    (q.abs() + r.abs() + (q + r).abs()) / 2
}

/// Axial coordinates of the vertices of `gen_equilateral_disc(r)`, indexed by id:
/// the center first, then each ring.
pub fn disc_coords(r: u32) -> Vec<(i32, i32)> {
    let mut out = vec![(0, 0)];
    for k in 1..=r as i32 {
        let (mut q, mut s) = (HEX_DIRS[4].0 * k, HEX_DIRS[4].1 * k);
        for d in HEX_DIRS {
            for _ in 0..k {
                out.push((q, s));
                q += d.0;
                s += d.1;
            }
        }
    }
    out
}

/// Simplicial complex on a set of lattice points: all unit edges and all
/// unit triangles with corners in the set. Ids are positions in `pts`.
pub fn lattice_patch(pts: &[(i32, i32)]) -> Complex {
    let pos: HashMap<(i32, i32), VertexId> = pts.iter().enumerate().map(|(i, &p)| (p, i as VertexId)).collect();
    let mut edges = Vec::new();
    let mut tris = Vec::new();
    for (&(q, r), &i) in &pos {
        for d in [(1, 0), (0, 1), (1, -1)] {
            if let Some(&j) = pos.get(&(q + d.0, r + d.1)) {
                edges.push((i, j));
            }
        }
        for (a, b) in [((1, 0), (0, 1)), ((1, 0), (1, -1))] {
            if let (Some(&j), Some(&k)) = (pos.get(&(q + a.0, r + a.1)), pos.get(&(q + b.0, r + b.1))) {
                tris.push([i, j, k]);
            }
        }
    }
    Complex::simplicial(0..pts.len() as VertexId, edges, tris)
}

/// Radius-`r` ball around a vertex of the equilateral triangulation of the plane.
pub fn gen_equilateral_disc(r: u32) -> Complex {
    lattice_patch(&disc_coords(r))
}

/// Rooted tree with ids in breadth-first order (root 0).
pub fn gen_tree(branching: u32, depth: u32) -> Result<Complex> {
    if branching < 1 {
        return Err(NpcError::InvalidSpec("branching must be at least 1".into()));
    }
    let mut edges = Vec::new();
    let mut level = vec![0u64];
    let mut next_id = 1u64;
    for _ in 0..depth {
        let mut nl = Vec::new();
        for &p in &level {
            for _ in 0..branching {
                edges.push((p, next_id));
                nl.push(next_id);
                next_id += 1;
            }
        }
        level = nl;
    }
    Ok(Complex::simplicial(0..next_id, edges, []))
}

/// A single `k`-gon on vertices `0..k`.
pub fn gen_polygon(k: u32) -> Result<Complex> {
    if k < 3 {
        return Err(NpcError::InvalidSpec("polygon needs k >= 3".into()));
    }
    let k = k as u64;
    Ok(Complex::polygonal(0..k, (0..k).map(|i| (i, (i + 1) % k)), [(0..k).collect()]))
}

/// The p×q parallelogram patch; vertex (a,b) has id `a*(q+1)+b`.
pub fn gen_flat_parallelogram(p: u32, q: u32) -> Result<Complex> {
    if p < 1 || q < 1 {
        return Err(NpcError::InvalidSpec("parallelogram needs p, q >= 1".into()));
    }
    let pts: Vec<(i32, i32)> = (0..=p as i32).flat_map(|a| (0..=q as i32).map(move |b| (a, b))).collect();
    Ok(lattice_patch(&pts))
}

/// Two paths of `2r+1` vertices (ids `0..=2r` and `2r+1..=4r+1`) joined by all
/// cross edges, with the flag triangles.
pub fn gen_join_lines(r: u32) -> Result<Complex> {
    if r < 1 {
        return Err(NpcError::InvalidSpec("join-lines needs r >= 1".into()));
    }
    let m = 2 * r as u64 + 1;
    let (a, b) = (|i: u64| i, |j: u64| m + j);
    let mut edges = Vec::new();
    let mut tris = Vec::new();
    for i in 0..m - 1 {
        edges.push((a(i), a(i + 1)));
        edges.push((b(i), b(i + 1)));
    }
    for i in 0..m {
        for j in 0..m {
            edges.push((a(i), b(j)));
        }
    }
    for i in 0..m - 1 {
        for j in 0..m {
            tris.push([a(i), a(i + 1), b(j)]);
            tris.push([b(i), b(i + 1), a(j)]);
        }
    }
    Ok(Complex::simplicial(0..2 * m, edges, tris))
}

/// Random triangulated disc grown triangle by triangle in the lattice,
/// keeping the region a non-singular disc. Ids are relabelled in order of
/// first appearance.
pub fn gen_random_disc(triangles: usize, seed: u64) -> Complex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut region: BTreeSet<[(i32, i32); 3]> = BTreeSet::new();
    region.insert(sorted3([(0, 0), (1, 0), (0, 1)]));
    let mut attempts = 0;
    while region.len() < triangles && attempts < 50 * triangles.max(1) {
        attempts += 1;
        let bdry: Vec<((i32, i32), (i32, i32))> = boundary_edges(&region);
        let &(x, y) = bdry.choose(&mut rng).expect("non-empty boundary");
        let cands: Vec<[(i32, i32); 3]> =
            lattice_triangles_on(x, y).into_iter().filter(|t| !region.contains(t)).collect();
        let Some(&t) = cands.first() else { continue };
        region.insert(t);
        if !is_lattice_disc(&region) {
            region.remove(&t);
        }
    }
    let mut order: Vec<(i32, i32)> = Vec::new();
    let mut seen = HashMap::new();
    for t in &region {
        for &p in t {
            seen.entry(p).or_insert_with(|| {
                order.push(p);
                order.len() - 1
            });
        }
    }
    lattice_patch_of(&order, &region)
}

fn lattice_patch_of(pts: &[(i32, i32)], region: &BTreeSet<[(i32, i32); 3]>) -> Complex {
    let pos: HashMap<(i32, i32), VertexId> = pts.iter().enumerate().map(|(i, &p)| (p, i as VertexId)).collect();
    let tris: Vec<[VertexId; 3]> = region.iter().map(|t| [pos[&t[0]], pos[&t[1]], pos[&t[2]]]).collect();
    Complex::from_triangles(0..pts.len() as VertexId, [], &tris)
}

fn sorted3(mut t: [(i32, i32); 3]) -> [(i32, i32); 3] {
    t.sort_unstable();
    t
}

fn lattice_triangles_on(x: (i32, i32), y: (i32, i32)) -> Vec<[(i32, i32); 3]> {
    let d = (y.0 - x.0, y.1 - x.1);
    let i = HEX_DIRS.iter().position(|&h| h == d).expect("unit edge");
    [HEX_DIRS[(i + 1) % 6], HEX_DIRS[(i + 5) % 6]].iter().map(|h| sorted3([x, y, (x.0 + h.0, x.1 + h.1)])).collect()
}

type HexEdge = ((i32, i32), (i32, i32));

fn region_edges(region: &BTreeSet<[(i32, i32); 3]>) -> BTreeMap<HexEdge, usize> {
    let mut count = BTreeMap::new();
    for t in region {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
            *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    count
}

fn boundary_edges(region: &BTreeSet<[(i32, i32); 3]>) -> Vec<((i32, i32), (i32, i32))> {
    region_edges(region).into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect()
}

/// A region is a non-singular disc iff its boundary edges form one simple cycle
/// and V - E + F = 1.
fn is_lattice_disc(region: &BTreeSet<[(i32, i32); 3]>) -> bool {
    let edges = region_edges(region);
    let bdry: Vec<_> = edges.iter().filter(|(_, &c)| c == 1).map(|(e, _)| *e).collect();
    let mut deg: HashMap<(i32, i32), Vec<(i32, i32)>> = HashMap::new();
    for &(a, b) in &bdry {
        deg.entry(a).or_default().push(b);
        deg.entry(b).or_default().push(a);
    }
    if deg.values().any(|v| v.len() != 2) {
        return false;
    }
    let start = bdry[0].0;
    let (mut prev, mut cur, mut len) = (start, bdry[0].1, 1);
    while cur != start {
        let nx = deg[&cur].iter().copied().find(|&z| z != prev).unwrap();
        prev = cur;
        cur = nx;
        len += 1;
    }
    let verts: BTreeSet<(i32, i32)> = region.iter().flatten().copied().collect();
    len == bdry.len() && verts.len() as i64 - edges.len() as i64 + region.len() as i64 == 1
}

/// A Cayley-graph ball with the words naming its vertices.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    pub complex: Complex,
    /// Normal-form word of vertex id `i` (first found in BFS order).
    pub words: Vec<Word>,
    /// `(vertex, letter) -> vertex` for every edge inside the ball.
    pub step: HashMap<(usize, Letter), usize>,
}

impl CayleyBall {
    /// Vertex reached by reading `w` from `start`, if the walk stays in the ball.
    pub fn walk(&self, start: usize, w: &Word) -> Option<Vec<usize>> {
        let mut out = vec![start];
        let mut x = start;
        for &l in w.letters() {
            x = *self.step.get(&(x, l))?;
            out.push(x);
        }
        Some(out)
    }
}

/// Letters in the fixed order a, A, b, B, ...
pub fn alphabet(p: &Presentation) -> Vec<Letter> {
    (1..=p.num_generators() as Letter).flat_map(|g| [g, -g]).collect()
}

pub fn cayley_ball(p: &Presentation, r: u32) -> Result<CayleyBall> {
    if let Some(rel) = p.relators().iter().find(|w| w.len() <= 2) {
        return Err(NpcError::NotSimplicial(format!("relator {} has length {}", p.format_word(rel), rel.len())));
    }
    let rep = check_c16_presentation(p);
    if !rep.passed() {
        return Err(NpcError::NotC16(format!("{}", p)));
    }
    let dehn = Dehn::new(p)?;
    let letters = alphabet(p);
    let mut words: Vec<Word> = vec![Word::empty()];
    let mut buckets: HashMap<Vec<i32>, Vec<usize>> = HashMap::new();
    buckets.insert(p.abelianize(&Word::empty()), vec![0]);
    let mut step: HashMap<(usize, Letter), usize> = HashMap::new();
    let mut sphere = vec![0usize];
    for k in 0..=r {
        let mut next = Vec::new();
        for &g in &sphere {
            for &x in &letters {
                let w = words[g].concat(&Word(vec![x])).free_reduce();
                let key = p.abelianize(&w);
                let found = buckets
                    .get(&key)
                    .and_then(|b| b.iter().copied().find(|&e| dehn.is_trivial(&w.concat(&words[e].inverse()))));
                let h = match found {
                    Some(h) => h,
                    None if k < r => {
                        let h = words.len();
                        words.push(w);
                        buckets.entry(key).or_default().push(h);
                        next.push(h);
                        h
                    }
                    None => continue,
                };
                if h == g {
                    return Err(NpcError::NotSimplicial(format!("generator {} is trivial", p.letter_char(x))));
                }
                step.insert((g, x), h);
            }
        }
        sphere = next;
    }
    let n = words.len();
    for g in 0..n {
        for &x in &letters {
            if x > 0 {
                if let (Some(a), Some(b)) = (step.get(&(g, x)), step.get(&(g, -x))) {
                    if a == b {
                        return Err(NpcError::NotSimplicial(format!(
                            "generator {} equals its inverse",
                            p.letter_char(x)
                        )));
                    }
                }
            }
        }
    }
    let mut edges = BTreeSet::new();
    for (&(g, _), &h) in &step {
        edges.insert((g.min(h) as VertexId, g.max(h) as VertexId));
    }
    let mut polys: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    let ball = CayleyBall { complex: Complex::polygonal([], [], []), words, step };
    for g in 0..n {
        for rel in p.relators() {
            if let Some(path) = ball.walk(g, rel) {
                let cyc = &path[..path.len() - 1];
                let distinct: BTreeSet<_> = cyc.iter().collect();
                if path[0] == path[path.len() - 1] && distinct.len() == cyc.len() {
                    let ids: Vec<VertexId> = cyc.iter().map(|&x| x as VertexId).collect();
                    polys.insert(canonical_walk(&ids));
                }
            }
        }
    }
    let complex = Complex::polygonal(0..n as VertexId, edges, polys);
    Ok(CayleyBall { complex, ..ball })
}

pub fn gen_cayley_ball(p: &Presentation, r: u32) -> Result<Complex> {
    Ok(cayley_ball(p, r)?.complex)
}

/// Cells of a ladder and which consecutive cells share a rung of given length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub cells: Vec<usize>,
    /// `(i, j, rung_length)`: cells `i` and `j` share a path of that many edges.
    pub shares: Vec<(usize, usize, usize)>,
}

impl LadderSpec {
    /// Consecutive cells sharing single edges.
    pub fn chain(cells: &[usize]) -> Self {
        LadderSpec { cells: cells.to_vec(), shares: (1..cells.len()).map(|i| (i - 1, i, 1)).collect() }
    }
}

/// A ladder of polygons as a diagram over the ladder itself.
pub fn gen_ladder_diagram(spec: &LadderSpec) -> Result<(DiscDiagram, Complex)> {
    let n = spec.cells.len();
    if n == 0 {
        return Err(NpcError::InvalidSpec("no cells".into()));
    }
    let mut rung = vec![0usize; n.saturating_sub(1)];
    for &(i, j, len) in &spec.shares {
        let (i, j) = (i.min(j), i.max(j));
        if j >= n {
            return Err(NpcError::InvalidSpec(format!("cell {j} does not exist")));
        }
        if j != i + 1 {
            return Err(NpcError::InvalidSpec(format!("non-consecutive cells {i} and {j} share an edge")));
        }
        if len == 0 || rung[i] != 0 {
            return Err(NpcError::InvalidSpec(format!("bad rung between {i} and {j}")));
        }
        rung[i] = len;
    }
    if rung.contains(&0) {
        return Err(NpcError::InvalidSpec("consecutive cells must share a rung".into()));
    }
    for (i, &len) in spec.cells.iter().enumerate() {
        let used = if i > 0 { rung[i - 1] } else { 0 } + if i + 1 < n { rung[i] } else { 0 };
        if len < (used + 2).max(3) {
            return Err(NpcError::InvalidSpec(format!("cell {i} of length {len} is too short")));
        }
    }
    let mut next = 0u64;
    let mut fresh = |k: usize| -> Vec<VertexId> {
        let v: Vec<VertexId> = (next..next + k as u64).collect();
        next += k as u64;
        v
    };
    // Rung i runs from its top vertex to its bottom vertex.
    let rungs: Vec<Vec<VertexId>> = rung.iter().map(|&l| fresh(l + 1)).collect();
    let mut walks: Vec<Vec<VertexId>> = Vec::new();
    for i in 0..n {
        let len = spec.cells[i];
        let mut w: Vec<VertexId> = Vec::new();
        match (i.checked_sub(1).map(|k| &rungs[k]), rungs.get(i).filter(|_| i + 1 < n)) {
            (None, None) => w = fresh(len),
            (None, Some(right)) => {
                w.extend(right.iter());
                w.extend(fresh(len - (right.len() - 1) - 1));
            }
            (Some(left), None) => {
                w.extend(left.iter().rev());
                w.extend(fresh(len - (left.len() - 1) - 1));
            }
            (Some(left), Some(right)) => {
                let rem = len - (left.len() - 1) - (right.len() - 1);
                let (a, b) = (rem.div_ceil(2), rem / 2);
                w.push(left[0]);
                w.extend(fresh(a - 1));
                w.extend(right.iter());
                w.extend(fresh(b - 1));
                w.extend(left.iter().rev().take(left.len() - 1));
            }
        }
        walks.push(w);
    }
    let mut edges = BTreeSet::new();
    for w in &walks {
        for k in 0..w.len() {
            let (a, b) = (w[k], w[(k + 1) % w.len()]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let target = Complex::polygonal(0..next, edges, walks.clone());
    let cells = walks
        .iter()
        .map(|w| DiagramCell::onto(&target, w.iter().map(|&v| v as usize).collect(), w))
        .collect::<Result<Vec<_>>>()?;
    let d = DiscDiagram::from_oriented_cells((0..next).collect(), cells)
        .ok_or_else(|| NpcError::InvalidSpec("ladder boundary is not a simple walk".into()))?;
    Ok((d, target))
}

/// Name, integer parameters and seed of a fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub params: Vec<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub fn generate(spec: &GeneratorSpec) -> Result<Complex> {
    let arg = |i: usize| -> Result<u32> {
        spec.params
            .get(i)
            .map(|&x| x as u32)
            .ok_or_else(|| NpcError::InvalidSpec(format!("{} needs parameter {}", spec.name, i + 1)))
    };
    match spec.name.as_str() {
        "equilateral-disc" => Ok(gen_equilateral_disc(arg(0)?)),
        "tree" => gen_tree(arg(0)?, arg(1)?),
        "polygon" => gen_polygon(arg(0)?),
        "parallelogram" => gen_flat_parallelogram(arg(0)?, arg(1)?),
        "join-lines" => gen_join_lines(arg(0)?),
        "random-disc" => Ok(gen_random_disc(arg(0)? as usize, spec.seed.unwrap_or(0))),
        other => Err(NpcError::InvalidSpec(format!("unknown generator {other:?}"))),
    }
}
