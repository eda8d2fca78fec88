//! Undirected multigraph with unit edge capacities and optional edge lengths.

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Relative tolerance for all length/distance comparisons. Edge lengths come
/// out of an LP solve, so exact comparisons are meaningless.
pub const DIST_REL_TOL: f64 = 1e-9;

/// `a <= b` up to [`DIST_REL_TOL`] relative slack.
#[inline]
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + DIST_REL_TOL * a.abs().max(b.abs())
}

/// An undirected multigraph. Vertices are dense ids `0..n`. Edges have unit
/// capacity; parallel edges are allowed and each has a distinct [`EdgeId`]
/// (its index in the edge list). Self-loops are rejected.
///
/// Immutable after construction; safe to share across threads.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    endpoints: Vec<(VertexId, VertexId)>,
    lengths: Option<Vec<f64>>,
    adj: Vec<Vec<(VertexId, EdgeId)>>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Domain(format!(
                    "edge {id} ({u},{v}) references a vertex >= n={n}"
                )));
            }
            if u == v {
                return Err(Error::Domain(format!("edge {id} is a self-loop at {u}")));
            }
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        Ok(Graph {
            n,
            endpoints: edges,
            lengths: None,
            adj,
        })
    }

    /// Attach a nonnegative length to every edge (the dual LP's `l_e`).
    pub fn with_lengths(mut self, lengths: Vec<f64>) -> Result<Self> {
        if lengths.len() != self.endpoints.len() {
            return Err(Error::Domain(format!(
                "{} lengths for {} edges",
                lengths.len(),
                self.endpoints.len()
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !l.is_finite() || **l < 0.0) {
            return Err(Error::Domain(format!("edge length {l} is not in [0, inf)")));
        }
        self.lengths = Some(lengths);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.endpoints[e]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.endpoints
    }

    /// `(neighbor, edge id)` pairs around `v`, one entry per parallel edge.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn lengths(&self) -> Option<&[f64]> {
        self.lengths.as_deref()
    }

    pub fn length(&self, e: EdgeId) -> Option<f64> {
        self.lengths.as_ref().map(|l| l[e])
    }

    pub fn require_lengths(&self) -> Result<&[f64]> {
        self.lengths
            .as_deref()
            .ok_or_else(|| Error::Config("graph has no edge lengths assigned".into()))
    }

    pub fn total_length(&self) -> Result<f64> {
        Ok(self.require_lengths()?.iter().sum())
    }

    /// All edges with exactly one endpoint in `side`. Parallel edges each
    /// appear once per edge id. Output sorted by edge id.
    pub fn boundary(&self, side: &[VertexId]) -> Vec<EdgeId> {
        let mask = self.membership(side);
        self.boundary_of_mask(&mask)
    }

    pub fn boundary_of_mask(&self, mask: &[bool]) -> Vec<EdgeId> {
        self.endpoints
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| mask[u] != mask[v])
            .map(|(id, _)| id)
            .collect()
    }

    pub fn membership(&self, verts: &[VertexId]) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for &v in verts {
            mask[v] = true;
        }
        mask
    }

    /// Connected components of the graph with `removed` edges deleted,
    /// ordered by smallest contained vertex id; vertices sorted within each.
    pub fn components(&self, removed: &[EdgeId]) -> Vec<Vec<VertexId>> {
        let mut gone = vec![false; self.edge_count()];
        for &e in removed {
            gone[e] = true;
        }
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(w, e) in &self.adj[v] {
                    if !gone[e] && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components(&[]).len() == 1
    }

    /// Induced subgraph on `verts` plus the id remapping back to `self`.
    /// `verts` must be distinct; the subgraph keeps their sorted order.
    /// Lengths are not inherited (recursive callers assign fresh ones).
    pub fn induced(&self, verts: &[VertexId]) -> (Graph, SubgraphMap) {
        let mut sorted: Vec<VertexId> = verts.to_vec();
        sorted.sort_unstable();
        let mut to_sub = vec![usize::MAX; self.n];
        for (i, &v) in sorted.iter().enumerate() {
            to_sub[v] = i;
        }
        let mut edges = Vec::new();
        let mut edge_to_parent = Vec::new();
        for (id, &(u, v)) in self.endpoints.iter().enumerate() {
            if to_sub[u] != usize::MAX && to_sub[v] != usize::MAX {
                edges.push((to_sub[u], to_sub[v]));
                edge_to_parent.push(id);
            }
        }
        let g = Graph::new(sorted.len(), edges).expect("induced subgraph is valid");
        (
            g,
            SubgraphMap {
                vertex_to_parent: sorted,
                edge_to_parent,
            },
        )
    }
}

/// Id remapping from an induced subgraph back to its parent graph. Kept in
/// the recursion audit trail.
#[derive(Clone, Debug)]
pub struct SubgraphMap {
    pub vertex_to_parent: Vec<VertexId>,
    pub edge_to_parent: Vec<EdgeId>,
}

/// A vertex set together with its boundary edges.
#[derive(Clone, Debug)]
pub struct Cut {
    pub side: Vec<VertexId>,
    pub boundary: Vec<EdgeId>,
}

impl Cut {
    pub fn of(g: &Graph, side: Vec<VertexId>) -> Cut {
        let boundary = g.boundary(&side);
        Cut { side, boundary }
    }
}
