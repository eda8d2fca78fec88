//! Concurrent multicommodity flow for the product demand: an exact LP
//! solver, a multiplicative-weights approximation, and the routability gate
//! that decides between "expanding" and "here is a spreading metric".
//!
//! Commodities are grouped by source: each unordered demand pair is assigned
//! to its smaller endpoint, so every pair is routed exactly once. Flows are
//! stored per commodity on directed arcs; arc `2e` runs `u -> v` for edge
//! `e = (u, v)` and arc `2e + 1` runs the other way.

mod exact;
mod mwu;

pub use exact::solve_exact;
pub use mwu::solve_mwu;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::metric::distances_with;
use crate::weighting::NodeWeighting;

/// Strong-duality tolerance for the exact solver.
pub const DUALITY_GAP_TOL: f64 = 1e-6;

/// One source commodity: the demands `D_A(source, v)` for assigned sinks.
#[derive(Clone, Debug)]
pub struct Commodity {
    pub source: VertexId,
    /// `(sink, demand)` with demand > 0.
    pub sinks: Vec<(VertexId, f64)>,
}

impl Commodity {
    pub fn total_demand(&self) -> f64 {
        self.sinks.iter().map(|&(_, d)| d).sum()
    }
}

/// A feasible routing of the product demand with congestion `kappa`.
#[derive(Clone, Debug)]
pub struct FlowCertificate {
    /// Max edge load of the stored flows (recomputed, not a solver report).
    pub kappa: f64,
    /// Relative accuracy of the solve that produced this routing.
    pub epsilon: f64,
    pub commodities: Vec<Commodity>,
    /// `flows[c][arc]`, nonnegative, `arc` in `0..2m`.
    pub flows: Vec<Vec<f64>>,
}

impl FlowCertificate {
    /// Total flow per undirected edge across both directions and all
    /// commodities.
    pub fn edge_loads(&self, m: usize) -> Vec<f64> {
        let mut loads = vec![0.0; m];
        for f in &self.flows {
            for e in 0..m {
                loads[e] += f[2 * e] + f[2 * e + 1];
            }
        }
        loads
    }

    pub fn max_load(&self, m: usize) -> f64 {
        self.edge_loads(m).into_iter().fold(0.0, f64::max)
    }

    /// Worst conservation residual over commodities and vertices, relative
    /// to the commodity's total demand.
    pub fn max_conservation_residual(&self, g: &Graph) -> f64 {
        let mut worst: f64 = 0.0;
        for (c, com) in self.commodities.iter().enumerate() {
            let mut net = vec![0.0f64; g.vertex_count()];
            for e in 0..g.edge_count() {
                let (u, v) = g.endpoints(e);
                let fwd = self.flows[c][2 * e];
                let bwd = self.flows[c][2 * e + 1];
                net[u] += bwd - fwd;
                net[v] += fwd - bwd;
            }
            let total = com.total_demand().max(f64::MIN_POSITIVE);
            let mut want = vec![0.0f64; g.vertex_count()];
            for &(v, d) in &com.sinks {
                want[v] += d;
            }
            want[com.source] = -com.total_demand();
            for v in 0..g.vertex_count() {
                worst = worst.max((net[v] - want[v]).abs() / total);
            }
        }
        worst
    }
}

/// A length function with `sum l_e <= 1` whose demand-weighted distance sum
/// lower-bounds the optimal congestion (weak duality).
#[derive(Clone, Debug)]
pub struct DualLengths {
    pub lengths: Vec<f64>,
    /// `sum_{u,v} D(u,v) dist_l(u,v)`, recomputed from `lengths` with a
    /// fresh shortest-path pass.
    pub objective: f64,
}

/// Outcome of the gate: either the demand routes comfortably (with the
/// routing as witness) or the dual metric certifies it cannot.
#[derive(Clone, Debug)]
pub enum Routability {
    Expanding(FlowCertificate),
    NotExpanding(DualLengths),
}

/// Which solver a caller wants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverSelect {
    Exact,
    Mwu { epsilon: f64 },
    /// Exact LP up to `exact_max_n` vertices, MWU beyond.
    Auto { epsilon: f64, exact_max_n: usize },
}

impl SolverSelect {
    pub const DEFAULT_EXACT_MAX_N: usize = 256;

    pub fn auto(epsilon: f64) -> Self {
        SolverSelect::Auto {
            epsilon,
            exact_max_n: Self::DEFAULT_EXACT_MAX_N,
        }
    }

    /// Resolve Auto for a concrete instance size.
    pub fn resolve(&self, n: usize) -> SolverSelect {
        match *self {
            SolverSelect::Auto { epsilon, exact_max_n } => {
                if n <= exact_max_n {
                    SolverSelect::Exact
                } else {
                    SolverSelect::Mwu { epsilon }
                }
            }
            other => other,
        }
    }

    /// The epsilon by which the expansion guarantee degrades under this
    /// solver (zero for exact).
    pub fn guarantee_epsilon(&self) -> f64 {
        match *self {
            SolverSelect::Exact => 0.0,
            SolverSelect::Mwu { epsilon } | SolverSelect::Auto { epsilon, .. } => epsilon,
        }
    }
}

/// Build the per-source commodities of the product demand. Pairs with zero
/// demand are dropped; each unordered pair goes to its smaller endpoint.
pub fn product_commodities(a: &NodeWeighting) -> Result<Vec<Commodity>> {
    let total = a.total();
    if total == 0 {
        return Err(Error::Domain("product demand needs |A| > 0".into()));
    }
    let support = a.support();
    let mut out = Vec::new();
    for (i, &u) in support.iter().enumerate() {
        let sinks: Vec<(VertexId, f64)> = support[i + 1..]
            .iter()
            .map(|&v| (v, a.mass(u) as f64 * a.mass(v) as f64 / total as f64))
            .collect();
        if !sinks.is_empty() {
            out.push(Commodity { source: u, sinks });
        }
    }
    Ok(out)
}

/// `sum_{u<v} D_A(u,v) dist_l(u,v)` by one Dijkstra per support vertex.
pub fn demand_weighted_distance(g: &Graph, a: &NodeWeighting, lengths: &[f64]) -> Result<f64> {
    let total = a.total();
    if total == 0 {
        return Err(Error::Domain("demand objective needs |A| > 0".into()));
    }
    let support = a.support();
    let mut obj = 0.0;
    for (i, &u) in support.iter().enumerate() {
        if i + 1 == support.len() {
            break;
        }
        let dist = distances_with(g, lengths, &[u]);
        for &v in &support[i + 1..] {
            if !dist[v].is_finite() {
                return Err(Error::Infeasible(format!(
                    "demand pair ({u},{v}) spans disconnected components"
                )));
            }
            obj += a.mass(u) as f64 * a.mass(v) as f64 / total as f64 * dist[v];
        }
    }
    Ok(obj)
}

/// Fail fast when some demand pair is unroutable.
pub(crate) fn check_demand_connected(g: &Graph, a: &NodeWeighting) -> Result<()> {
    if g.is_connected() {
        return Ok(());
    }
    let comps = g.components(&[]);
    let with_mass = comps.iter().filter(|c| a.mass_of(c) > 0).count();
    if with_mass > 1 {
        return Err(Error::Infeasible(
            "demand across disconnected components; split components first".into(),
        ));
    }
    Ok(())
}

/// A trivial certificate for instances with no demand pairs.
pub(crate) fn trivial_output(g: &Graph) -> (FlowCertificate, DualLengths) {
    (
        FlowCertificate {
            kappa: 0.0,
            epsilon: 0.0,
            commodities: Vec::new(),
            flows: Vec::new(),
        },
        DualLengths {
            lengths: vec![0.0; g.edge_count()],
            objective: 0.0,
        },
    )
}

/// Clamp tiny solver negatives, then push per-commodity imbalances down a
/// BFS tree so conservation holds to accumulation accuracy.
pub(crate) fn repair_conservation(g: &Graph, commodities: &[Commodity], flows: &mut [Vec<f64>]) {
    let n = g.vertex_count();
    // BFS tree from each source (trees are cheap; one per commodity).
    for (c, com) in commodities.iter().enumerate() {
        for f in flows[c].iter_mut() {
            if *f < 0.0 {
                *f = 0.0;
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut parent_arc: Vec<Option<(VertexId, EdgeId)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[com.source] = true;
        order.push(com.source);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(w, e) in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent_arc[w] = Some((v, e));
                    order.push(w);
                }
            }
        }
        // net inflow minus required demand, per vertex
        let mut excess = vec![0.0f64; n];
        for e in 0..g.edge_count() {
            let (u, v) = g.endpoints(e);
            let fwd = flows[c][2 * e];
            let bwd = flows[c][2 * e + 1];
            excess[u] += bwd - fwd;
            excess[v] += fwd - bwd;
        }
        for &(v, d) in &com.sinks {
            excess[v] -= d;
        }
        // Push the residual of each non-source vertex onto its tree arc,
        // deepest first; the source absorbs the rounding dust.
        for &v in order.iter().skip(1).rev() {
            let (p, e) = parent_arc[v].expect("tree vertex has a parent");
            let need = -excess[v]; // extra inflow v still needs
            if need == 0.0 {
                continue;
            }
            let (eu, _ev) = g.endpoints(e);
            // arc p->v
            let arc_in = if eu == p { 2 * e } else { 2 * e + 1 };
            let arc_out = arc_in ^ 1;
            if need > 0.0 {
                flows[c][arc_in] += need;
            } else {
                flows[c][arc_out] += -need;
            }
            excess[v] = 0.0;
            excess[p] -= need;
        }
    }
}

/// Decide routability at `phi`. The verdict uses the dual lower bound: a
/// NotExpanding answer is always certified by an explicit length function
/// whose recomputed objective is at least `1/phi`; an Expanding answer
/// carries the primal routing.
pub fn routability_gate(
    g: &Graph,
    a: &NodeWeighting,
    phi: f64,
    solver: SolverSelect,
) -> Result<Routability> {
    if phi <= 0.0 {
        return Err(Error::Domain(format!("phi must be positive, got {phi}")));
    }
    let (cert, dual) = solve(g, a, solver)?;
    if dual.objective >= 1.0 / phi {
        Ok(Routability::NotExpanding(dual))
    } else {
        Ok(Routability::Expanding(cert))
    }
}

/// Dispatch on the (resolved) solver selection.
pub fn solve(
    g: &Graph,
    a: &NodeWeighting,
    solver: SolverSelect,
) -> Result<(FlowCertificate, DualLengths)> {
    match solver.resolve(g.vertex_count()) {
        SolverSelect::Exact => solve_exact(g, a),
        SolverSelect::Mwu { epsilon } => solve_mwu(g, a, epsilon),
        SolverSelect::Auto { .. } => unreachable!("resolve() removes Auto"),
    }
}

/// Shared post-solve checks: weak duality and conservation. Returns an
/// invariant error rather than panicking so callers can attach context.
pub(crate) fn check_output(
    g: &Graph,
    cert: &FlowCertificate,
    dual: &DualLengths,
) -> Result<()> {
    let sum_l: f64 = dual.lengths.iter().sum();
    if sum_l > 1.0 {
        return Err(Error::invariant(
            "dual-lengths-budget",
            format!("sum of lengths {sum_l} > 1"),
            "flow solve",
        ));
    }
    if dual.objective > cert.kappa * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::invariant(
            "weak-duality",
            format!(
                "dual objective {} exceeds primal congestion {}",
                dual.objective, cert.kappa
            ),
            "flow solve",
        ));
    }
    let resid = cert.max_conservation_residual(g);
    if resid > 1e-9 {
        return Err(Error::invariant(
            "flow-conservation",
            format!("relative conservation residual {resid} > 1e-9"),
            "flow solve",
        ));
    }
    Ok(())
}
