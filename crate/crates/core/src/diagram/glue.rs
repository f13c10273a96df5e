use crate::complex::VertexId;
use crate::error::{NpcError, Result};

use super::{DiagramCell, DiscDiagram};

/// Assembles a diagram from pieces by identifying vertices.
#[derive(Debug, Default, Clone)]
pub struct Gluer {
    parent: Vec<usize>,
    vmap: Vec<VertexId>,
    cells: Vec<DiagramCell>,
}

impl Gluer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, v: VertexId) -> usize {
        self.parent.push(self.parent.len());
        self.vmap.push(v);
        self.vmap.len() - 1
    }

    /// Copies all vertices and cells of `d`; returns the id offset.
    pub fn add(&mut self, d: &DiscDiagram) -> usize {
        let off = self.vmap.len();
        for &v in &d.vertex_map {
            self.fresh(v);
        }
        for c in &d.cells {
            self.cells.push(DiagramCell { walk: c.walk.iter().map(|&x| x + off).collect(), ..c.clone() });
        }
        off
    }

    pub fn push_cell(&mut self, c: DiagramCell) {
        self.cells.push(c);
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Identifies two vertices; they must map to the same target vertex.
    pub fn union(&mut self, a: usize, b: usize) -> Result<()> {
        if self.vmap[a] != self.vmap[b] {
            return Err(NpcError::FillFailed(format!(
                "cannot identify vertices over {} and {}",
                self.vmap[a], self.vmap[b]
            )));
        }
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
        Ok(())
    }

    /// Identifies two equally long paths position by position.
    pub fn union_paths(&mut self, a: &[usize], b: &[usize]) -> Result<()> {
        if a.len() != b.len() {
            return Err(NpcError::FillFailed("glued paths differ in length".into()));
        }
        for (&x, &y) in a.iter().zip(b) {
            self.union(x, y)?;
        }
        Ok(())
    }

    /// The glued diagram with the given boundary, compacted.
    pub fn finish(mut self, boundary: &[usize]) -> DiscDiagram {
        let boundary: Vec<usize> = boundary.iter().map(|&x| self.find(x)).collect();
        let cells: Vec<DiagramCell> = std::mem::take(&mut self.cells)
            .into_iter()
            .map(|c| DiagramCell { walk: c.walk.iter().map(|&x| self.find(x)).collect(), ..c })
            .collect();
        DiscDiagram { vertex_map: self.vmap, cells, boundary, target: None }.compact()
    }
}
