//! Integral node-weightings and the product demand they induce.

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// A nonnegative integral mass per vertex. Integrality is load-bearing: the
/// scale-validity argument of the decomposition needs `A(B) >= 1` for any
/// ball around a support vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeWeighting {
    mass: Vec<u64>,
}

impl NodeWeighting {
    pub fn new(mass: Vec<u64>) -> Self {
        NodeWeighting { mass }
    }

    pub fn uniform(n: usize, value: u64) -> Self {
        NodeWeighting {
            mass: vec![value; n],
        }
    }

    /// The degree weighting `A = deg_G`, counting parallel edges.
    pub fn degrees(g: &Graph) -> Self {
        NodeWeighting {
            mass: (0..g.vertex_count()).map(|v| g.degree(v) as u64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self, v: VertexId) -> u64 {
        self.mass[v]
    }

    /// `|A|`, the total mass.
    pub fn total(&self) -> u64 {
        self.mass.iter().sum()
    }

    /// `A(S)` for a vertex set.
    pub fn mass_of(&self, verts: &[VertexId]) -> u64 {
        verts.iter().map(|&v| self.mass[v]).sum()
    }

    /// Vertices with positive mass, ascending.
    pub fn support(&self) -> Vec<VertexId> {
        (0..self.mass.len()).filter(|&v| self.mass[v] > 0).collect()
    }

    pub fn support_size(&self) -> usize {
        self.mass.iter().filter(|&&m| m > 0).count()
    }

    /// The restriction `A_S`: same index space, zero outside `verts`.
    pub fn restrict(&self, verts: &[VertexId]) -> NodeWeighting {
        let mut mass = vec![0u64; self.mass.len()];
        for &v in verts {
            mass[v] = self.mass[v];
        }
        NodeWeighting { mass }
    }

    /// Reindex into a subgraph: `vertex_to_parent[i]` gives the parent id of
    /// subgraph vertex `i`.
    pub fn reindex(&self, vertex_to_parent: &[VertexId]) -> NodeWeighting {
        NodeWeighting {
            mass: vertex_to_parent.iter().map(|&p| self.mass[p]).collect(),
        }
    }

    /// The product demand `D_A(u,v) = A(u) A(v) / |A|` for an unordered pair.
    /// Zero for `u == v` (there is no self-demand).
    pub fn product_demand(&self, u: VertexId, v: VertexId) -> Result<f64> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Domain("product demand of an all-zero weighting".into()));
        }
        if u == v {
            return Ok(0.0);
        }
        Ok(self.mass[u] as f64 * self.mass[v] as f64 / total as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_demand_formula() {
        // A = (1,1,2): D(v1,v3) = 1*2/4 = 0.5
        let a = NodeWeighting::new(vec![1, 1, 2]);
        assert_eq!(a.product_demand(0, 2).unwrap(), 0.5);
    }

    #[test]
    fn product_demand_zero_mass_endpoint() {
        let a = NodeWeighting::new(vec![0, 3, 1]);
        assert_eq!(a.product_demand(0, 1).unwrap(), 0.0);
    }

    #[test]
    fn product_demand_rejects_zero_total() {
        let a = NodeWeighting::new(vec![0, 0]);
        assert!(a.product_demand(0, 1).is_err());
    }

    #[test]
    fn product_demand_respects_weighting_on_k2() {
        // A=(1,1): D = 1/2; row sums <= A(u)
        let a = NodeWeighting::new(vec![1, 1]);
        assert_eq!(a.product_demand(0, 1).unwrap(), 0.5);
        let row: f64 = (0..2)
            .filter(|&v| v != 0)
            .map(|v| a.product_demand(0, v).unwrap())
            .sum();
        assert!(row <= a.mass(0) as f64);
    }

    #[test]
    fn restrict_zeroes_outside() {
        let a = NodeWeighting::new(vec![5, 7, 9]);
        let r = a.restrict(&[0, 2]);
        assert_eq!(r.mass(0), 5);
        assert_eq!(r.mass(1), 0);
        assert_eq!(r.total(), 14);
    }
}
