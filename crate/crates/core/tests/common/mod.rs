//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's algorithms: distances come from a
//! plain BFS over the edge list, pieces from a string scan, and triviality of
//! surface-group words from a faithful Möbius representation.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_complex::Complex64;

use npc_core::complex::{Complex, VertexId};

pub type Adj = BTreeMap<VertexId, BTreeSet<VertexId>>;

pub fn adjacency(c: &Complex) -> Adj {
    let mut adj: Adj = c.vertices().iter().map(|&v| (v, BTreeSet::new())).collect();
    for &[a, b] in c.edges() {
        adj.get_mut(&a).unwrap().insert(b);
        adj.get_mut(&b).unwrap().insert(a);
    }
    adj
}

pub fn bfs(adj: &Adj, s: VertexId) -> BTreeMap<VertexId, u32> {
    let mut d = BTreeMap::from([(s, 0)]);
    let mut q = VecDeque::from([s]);
    while let Some(x) = q.pop_front() {
        let dx = d[&x];
        for &y in &adj[&x] {
            d.entry(y).or_insert_with(|| {
                q.push_back(y);
                dx + 1
            });
        }
    }
    d
}

pub fn all_distances(adj: &Adj) -> BTreeMap<VertexId, BTreeMap<VertexId, u32>> {
    adj.keys().map(|&v| (v, bfs(adj, v))).collect()
}

/// Vertices `x` with `d(u,x) + d(x,v) = d(u,v)`.
pub fn interval(adj: &Adj, u: VertexId, v: VertexId) -> BTreeSet<VertexId> {
    let (du, dv) = (bfs(adj, u), bfs(adj, v));
    let d = du[&v];
    adj.keys().copied().filter(|x| matches!((du.get(x), dv.get(x)), (Some(a), Some(b)) if a + b == d)).collect()
}

/// All paths with `d(u,v)` edges from `u` to `v`, by plain DFS.
pub fn geodesics(adj: &Adj, u: VertexId, v: VertexId) -> Vec<Vec<VertexId>> {
    fn rec(adj: &Adj, v: VertexId, left: u32, path: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        let x = *path.last().unwrap();
        if left == 0 {
            if x == v {
                out.push(path.clone());
            }
            return;
        }
        for &y in &adj[&x] {
            if !path.contains(&y) {
                path.push(y);
                rec(adj, v, left - 1, path, out);
                path.pop();
            }
        }
    }
    let d = bfs(adj, u)[&v];
    let mut out = Vec::new();
    rec(adj, v, d, &mut vec![u], &mut out);
    out
}

/// Four-point hyperbolicity constant, doubled to stay integral.
pub fn four_point_twice(adj: &Adj) -> u64 {
    let dm = all_distances(adj);
    let vs: Vec<VertexId> = adj.keys().copied().collect();
    let mut best = 0u64;
    for &x in &vs {
        for &y in &vs {
            for &z in &vs {
                for &w in &vs {
                    let d = |a: VertexId, b: VertexId| dm[&a][&b] as u64;
                    let mut s = [d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)];
                    s.sort_unstable();
                    best = best.max(s[2] - s[1]);
                }
            }
        }
    }
    best
}

/// Inverse of a word written with lowercase generators and uppercase inverses.
pub fn invert(w: &str) -> String {
    w.chars()
        .rev()
        .map(|c| if c.is_ascii_lowercase() { c.to_ascii_uppercase() } else { c.to_ascii_lowercase() })
        .collect()
}

fn cyclic(w: &[char], start: usize, len: usize) -> String {
    (0..len).map(|k| w[(start + k) % w.len()]).collect()
}

/// Longest piece per relator by comparing every pair of cyclic subwords of
/// the relators and their inverses. Two occurrences in the same signed word
/// `d` positions apart only count up to `len - min(d, len - d)` letters.
pub fn max_piece_per_relator(relators: &[&str]) -> Vec<usize> {
    let signed: Vec<(usize, Vec<char>)> = relators
        .iter()
        .enumerate()
        .flat_map(|(i, r)| [(i, r.chars().collect()), (i, invert(r).chars().collect())])
        .collect();
    let mut best = vec![0; relators.len()];
    for (a, (ra, u)) in signed.iter().enumerate() {
        for (b, (_, v)) in signed.iter().enumerate() {
            for i in 0..u.len() {
                for j in 0..v.len() {
                    if a == b && i == j {
                        continue;
                    }
                    let limit = if a == b {
                        let d = (j + u.len() - i) % u.len();
                        u.len() - d.min(u.len() - d)
                    } else {
                        u.len().min(v.len())
                    };
                    for m in (1..=limit).rev() {
                        if cyclic(u, i, m) == cyclic(v, j, m) {
                            best[*ra] = best[*ra].max(m);
                            break;
                        }
                    }
                }
            }
        }
    }
    best
}

/// A 2×2 complex matrix acting on the Poincaré disc.
#[derive(Debug, Clone, Copy)]
pub struct Mobius([[Complex64; 2]; 2]);

impl Mobius {
    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Mobius([[o, z], [z, o]])
    }

    pub fn rotation(phi: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Mobius([[Complex64::from_polar(1.0, phi / 2.0), z], [z, Complex64::from_polar(1.0, -phi / 2.0)]])
    }

    /// Hyperbolic translation by distance `t` along the real diameter.
    pub fn translation(t: f64) -> Self {
        let (c, s) = (Complex64::new((t / 2.0).cosh(), 0.0), Complex64::new((t / 2.0).sinh(), 0.0));
        Mobius([[c, s], [s, c]])
    }

    pub fn mul(&self, o: &Mobius) -> Mobius {
        let (a, b) = (self.0, o.0);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Mobius([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn inverse(&self) -> Mobius {
        let [[a, b], [c, d]] = self.0;
        Mobius([[d, -b], [-c, a]])
    }

    /// Image of the disc centre.
    pub fn orbit_of_origin(&self) -> Complex64 {
        self.0[0][1] / self.0[1][1]
    }
}

/// Side pairings of the regular octagon with angles π/4, glued by the
/// pattern `a b a⁻¹ b⁻¹ c d c⁻¹ d⁻¹`. They generate a Fuchsian group
/// isomorphic to `⟨a,b,c,d | abABcdCD⟩`.
pub struct SurfaceGroup {
    gens: [Mobius; 4],
}

impl SurfaceGroup {
    pub fn genus_two() -> Self {
        use std::f64::consts::PI;
        // Distance from the centre to a side midpoint.
        let d = ((PI / 8.0).cos() / (PI / 8.0).sin()).acosh();
        let side = |j: usize| 2.0 * PI * j as f64 / 8.0;
        // Maps side `s` onto side `t`, carrying the octagon across `t`.
        let pair = |s: usize, t: usize| {
            Mobius::rotation(side(t)).mul(&Mobius::translation(2.0 * d)).mul(&Mobius::rotation(PI - side(s)))
        };
        let raw = [pair(0, 2), pair(1, 3), pair(4, 6), pair(5, 7)];
        // Pick inverses so that the relator holds literally.
        for mask in 0..16u32 {
            let gens = std::array::from_fn(|i| if mask >> i & 1 == 1 { raw[i].inverse() } else { raw[i] });
            let g = SurfaceGroup { gens };
            if g.is_identity("abABcdCD") {
                return g;
            }
        }
        panic!("no orientation of the side pairings satisfies the surface relator");
    }

    pub fn eval(&self, w: &str) -> Mobius {
        w.chars().fold(Mobius::identity(), |m, ch| {
            let i = "abcd".find(ch.to_ascii_lowercase()).expect("letter a-d");
            let g = if ch.is_ascii_lowercase() { self.gens[i] } else { self.gens[i].inverse() };
            m.mul(&g)
        })
    }

    /// Every non-identity element moves the centre by at least the octagon's
    /// inradius, so a small threshold separates the identity cleanly.
    pub fn is_identity(&self, w: &str) -> bool {
        self.eval(w).orbit_of_origin().norm() < 1e-6
    }
}
