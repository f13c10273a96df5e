//! Pieces, the C'(1/6) condition and Dehn's algorithm.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex::{Complex, ComplexKind, VertexId};
use crate::error::{NpcError, Result};
use crate::presentation::{Letter, Presentation, Word};
use crate::report::CheckReport;

/// Where a piece sits: a polygon (or relator) read from `offset`, backwards
/// when `reflected` (for relators: inside the inverse relator).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub cell: usize,
    pub offset: usize,
    pub reflected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Path(Vec<VertexId>),
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Piece {
    pub length: usize,
    pub carrier: Carrier,
    pub first: Occurrence,
    pub second: Occurrence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct C16Report {
    /// `(boundary length, longest piece)` per polygon or relator.
    pub cells: Vec<(usize, usize)>,
    pub passed: bool,
    /// Polygon with the largest piece-to-boundary ratio.
    pub worst: Option<usize>,
    pub note: Option<String>,
}

impl C16Report {
    fn new(cells: Vec<(usize, usize)>, note: Option<String>) -> Self {
        let passed = cells.iter().all(|&(l, m)| 6 * m < l);
        // Compare m/l by cross-multiplication; ties go to the lower index.
        let worst = (0..cells.len()).reduce(|a, b| {
            let (la, ma) = cells[a];
            let (lb, mb) = cells[b];
            if mb * la > ma * lb {
                b
            } else {
                a
            }
        });
        C16Report { cells, passed, worst, note }
    }

    pub fn passed(&self) -> bool {
        self.passed
    }

    pub fn max_piece(&self) -> usize {
        self.cells.iter().map(|c| c.1).max().unwrap_or(0)
    }

    pub fn to_report(&self, check: &str) -> CheckReport {
        let mut r =
            CheckReport::new(check, self.passed).stat("cells", self.cells.len()).stat("max_piece", self.max_piece());
        if let Some(w) = self.worst {
            let (l, m) = self.cells[w];
            r = r.stat("worst", json!({"cell": w, "boundary": l, "piece": m}));
            if !self.passed {
                r = r.with_witness(json!({"cell": w, "boundary": l, "piece": m}));
            }
        }
        if let Some(n) = &self.note {
            r = r.stat("note", n);
        }
        r
    }
}

// ---------------------------------------------------------------------------
// Complexes

fn require_polygonal(c: &Complex) -> Result<()> {
    if c.kind() != ComplexKind::Polygonal {
        return Err(NpcError::KindMismatch { expected: "polygonal", found: c.kind().name() });
    }
    Ok(())
}

/// Vertex of cell `c` at step `k` from occurrence `o`.
fn cell_at(c: &Complex, o: Occurrence, k: isize) -> usize {
    let w = c.cell_walk(o.cell);
    let l = w.len() as isize;
    let s = if o.reflected { -k } else { k };
    w[(o.offset as isize + s).rem_euclid(l) as usize]
}

/// Maximal common paths between distinct polygons, each reported once per
/// ordered pair with the first occurrence read forwards.
fn common_paths(c: &Complex) -> Vec<Piece> {
    let mut seen: BTreeSet<(Occurrence, Occurrence)> = BTreeSet::new();
    let mut out = Vec::new();
    for (a, b) in c.edge_list() {
        let cells = c.cells_on_edge(a, b);
        for &x in cells {
            for &y in cells {
                if x == y {
                    continue;
                }
                let (wx, wy) = (c.cell_walk(x), c.cell_walk(y));
                let (lx, ly) = (wx.len(), wy.len());
                let px = wx.iter().position(|&v| v == a).unwrap();
                let py = wy.iter().position(|&v| v == a).unwrap();
                let mut ox = Occurrence { cell: x, offset: px, reflected: wx[(px + 1) % lx] != b };
                let mut oy = Occurrence { cell: y, offset: py, reflected: wy[(py + 1) % ly] != b };
                let cap = lx.min(ly);
                let mut len = 1;
                while len < cap && cell_at(c, ox, len as isize + 1) == cell_at(c, oy, len as isize + 1) {
                    len += 1;
                }
                let mut back = 0;
                while len + back < cap && cell_at(c, ox, -(back as isize) - 1) == cell_at(c, oy, -(back as isize) - 1) {
                    back += 1;
                }
                let shift = |o: &mut Occurrence, l: usize| {
                    let s = if o.reflected { back as isize } else { -(back as isize) };
                    o.offset = (o.offset as isize + s).rem_euclid(l as isize) as usize;
                };
                shift(&mut ox, lx);
                shift(&mut oy, ly);
                let len = len + back;
                // Read the first occurrence forwards.
                if ox.reflected {
                    let s = |o: &mut Occurrence, l: usize| {
                        let step = if o.reflected { -(len as isize) } else { len as isize };
                        o.offset = (o.offset as isize + step).rem_euclid(l as isize) as usize;
                        o.reflected = !o.reflected;
                    };
                    s(&mut ox, lx);
                    s(&mut oy, ly);
                }
                // Identical boundaries matched all the way round are one polygon twice.
                if len >= lx && lx == ly {
                    continue;
                }
                if seen.insert((ox, oy)) {
                    let path = (0..=len).map(|k| c.id(cell_at(c, ox, k as isize))).collect();
                    out.push(Piece { length: len, carrier: Carrier::Path(path), first: ox, second: oy });
                }
            }
        }
    }
    out
}

/// All maximal pieces of a polygonal complex: common paths of two polygons,
/// plus every polygon edge.
pub fn enumerate_pieces_complex(c: &Complex) -> Result<Vec<Piece>> {
    require_polygonal(c)?;
    let mut out = common_paths(c);
    for f in 0..c.num_cells() {
        let w = c.cell_walk(f);
        for k in 0..w.len() {
            let o = Occurrence { cell: f, offset: k, reflected: false };
            out.push(Piece {
                length: 1,
                carrier: Carrier::Path(vec![c.id(w[k]), c.id(w[(k + 1) % w.len()])]),
                first: o,
                second: o,
            });
        }
    }
    out.sort();
    Ok(out)
}

pub fn check_c16_complex(c: &Complex) -> Result<C16Report> {
    require_polygonal(c)?;
    let mut cells: Vec<(usize, usize)> = (0..c.num_cells()).map(|f| (c.cell_walk(f).len(), 1)).collect();
    for p in common_paths(c) {
        for f in [p.first.cell, p.second.cell] {
            cells[f].1 = cells[f].1.max(p.length);
        }
    }
    Ok(C16Report::new(cells, None))
}

// ---------------------------------------------------------------------------
// Presentations

/// Signed relator words indexed by occurrence: relator `i`, inverse if `reflected`.
fn signed_words(p: &Presentation) -> Vec<(usize, bool, Vec<Letter>)> {
    p.relators().iter().enumerate().flat_map(|(i, r)| [(i, false, r.0.clone()), (i, true, r.inverse().0)]).collect()
}

/// Longest common prefix allowed between two occurrences. Two positions in
/// the same signed word `d` apart may overlap in at most `len - min(d, len-d)`
/// letters, which only binds for periodic relators.
fn overlap_cap(len1: usize, len2: usize, same_word: Option<usize>) -> usize {
    match same_word {
        Some(d) => len1 - d.min(len1 - d),
        None => len1.min(len2),
    }
}

fn presentation_pairs(p: &Presentation) -> Vec<Piece> {
    let words = signed_words(p);
    let mut out = Vec::new();
    for (wi, (ri, inv_i, u)) in words.iter().enumerate() {
        for (wj, (rj, inv_j, v)) in words.iter().enumerate() {
            let (lu, lv) = (u.len(), v.len());
            for i in 0..lu {
                for j in 0..lv {
                    if wi == wj && i == j {
                        continue;
                    }
                    let same = (wi == wj).then(|| (j + lu - i) % lu);
                    let cap = overlap_cap(lu, lv, same);
                    let mut m = 0;
                    while m < cap && u[(i + m) % lu] == v[(j + m) % lv] {
                        m += 1;
                    }
                    if m == 0 {
                        continue;
                    }
                    let left_max = m == cap || u[(i + lu - 1) % lu] != v[(j + lv - 1) % lv];
                    if !left_max {
                        continue;
                    }
                    let word: Word = Word((0..m).map(|k| u[(i + k) % lu]).collect());
                    out.push(Piece {
                        length: m,
                        carrier: Carrier::Word(p.format_word(&word)),
                        first: Occurrence { cell: *ri, offset: i, reflected: *inv_i },
                        second: Occurrence { cell: *rj, offset: j, reflected: *inv_j },
                    });
                }
            }
        }
    }
    out
}

/// Maximal common subwords between distinct positions of the cyclic
/// relators and their inverses.
pub fn enumerate_pieces_presentation(p: &Presentation) -> Vec<Piece> {
    let mut out = presentation_pairs(p);
    out.sort();
    out
}

pub fn check_c16_presentation(p: &Presentation) -> C16Report {
    let mut cells: Vec<(usize, usize)> = p.relators().iter().map(|r| (r.len(), 0)).collect();
    for piece in presentation_pairs(p) {
        for o in [piece.first, piece.second] {
            cells[o.cell].1 = cells[o.cell].1.max(piece.length);
        }
    }
    let note = (!cells.is_empty() && cells.iter().all(|c| c.1 == 0))
        .then(|| "no pieces between distinct positions".to_string());
    C16Report::new(cells, note)
}

// ---------------------------------------------------------------------------
// Dehn's algorithm

/// Dehn's algorithm for a presentation verified to satisfy C'(1/6).
#[derive(Debug, Clone)]
pub struct Dehn {
    /// Every cyclic shift of every relator and its inverse.
    symmetrized: Vec<Vec<Letter>>,
}

impl Dehn {
    pub fn new(p: &Presentation) -> Result<Self> {
        if !check_c16_presentation(p).passed() {
            return Err(NpcError::NotC16(p.to_string()));
        }
        let mut set = BTreeSet::new();
        for r in p.relators() {
            for w in [r.clone(), r.inverse()] {
                for s in 0..w.len() {
                    set.insert(w.rotate(s).0);
                }
            }
        }
        Ok(Dehn { symmetrized: set.into_iter().collect() })
    }

    /// Leftmost, then longest, subword that is more than half a relator.
    fn find(&self, w: &[Letter]) -> Option<(usize, usize, &[Letter])> {
        for i in 0..w.len() {
            let mut best: Option<(usize, &[Letter])> = None;
            for s in &self.symmetrized {
                let m = w[i..].iter().zip(s).take_while(|(a, b)| a == b).count();
                if 2 * m > s.len() && best.is_none_or(|(bm, _)| m > bm) {
                    best = Some((m, s));
                }
            }
            if let Some((m, s)) = best {
                return Some((i, m, s));
            }
        }
        None
    }

    pub fn reduce(&self, w: &Word) -> Word {
        let mut cur = w.cyclic_reduce();
        while let Some((i, m, s)) = self.find(&cur.0) {
            let complement: Vec<Letter> = s[m..].iter().rev().map(|&x| -x).collect();
            let mut next = cur.0[..i].to_vec();
            next.extend(complement);
            next.extend_from_slice(&cur.0[i + m..]);
            cur = Word(next).cyclic_reduce();
        }
        cur
    }

    pub fn is_trivial(&self, w: &Word) -> bool {
        self.reduce(w).is_empty()
    }
}

pub fn dehn_reduce(p: &Presentation, w: &Word) -> Result<Word> {
    Ok(Dehn::new(p)?.reduce(w))
}

pub fn is_trivial(p: &Presentation, w: &Word) -> Result<bool> {
    Ok(Dehn::new(p)?.is_trivial(w))
}
