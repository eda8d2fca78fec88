//! Exact concurrent-flow LP via an interior-point solve of the compact
//! edge-flow formulation.
//!
//! Variables: per-commodity directed arc flows, then the congestion bound
//! `kappa`. Constraints: flow conservation at every non-source vertex
//! (equalities), one capacity row per undirected edge, and nonnegativity.
//! The capacity rows' dual multipliers are exactly the spreading-metric
//! edge lengths of the dual LP.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT::*,
};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::weighting::NodeWeighting;

use super::{
    check_demand_connected, check_output, demand_weighted_distance, product_commodities,
    repair_conservation, trivial_output, Commodity, DualLengths, FlowCertificate, DUALITY_GAP_TOL,
};

/// Solve the concurrent-flow LP for the product demand of `a` to optimality
/// (within solver tolerance). Intended for instances up to a few hundred
/// vertices; the decomposition switches to the MWU solver above that.
pub fn solve_exact(g: &Graph, a: &NodeWeighting) -> Result<(FlowCertificate, DualLengths)> {
    if a.total() == 0 {
        return Err(Error::Domain("solve_exact needs |A| > 0".into()));
    }
    check_demand_connected(g, a)?;
    let commodities = product_commodities(a)?;
    if commodities.is_empty() {
        return Ok(trivial_output(g));
    }

    let lp = build_lp(g, &commodities);
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .max_iter(200)
        .build()
        .map_err(|e| Error::Solver(format!("bad solver settings: {e}")))?;
    let mut solver = DefaultSolver::new(&lp.p, &lp.q, &lp.a, &lp.b, &lp.cones, settings)
        .map_err(|e| Error::Solver(format!("LP setup failed: {e:?}")))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        other => return Err(Error::Solver(format!("LP terminated with status {other:?}"))),
    }

    let m = g.edge_count();
    let mut flows: Vec<Vec<f64>> = (0..commodities.len())
        .map(|c| solver.solution.x[c * 2 * m..(c + 1) * 2 * m].to_vec())
        .collect();
    repair_conservation(g, &commodities, &mut flows);

    // Spreading metric = capacity-row duals, normalized to sum just under 1.
    let mut lengths: Vec<f64> = (0..m)
        .map(|e| solver.solution.z[lp.cons_rows + e].max(0.0))
        .collect();
    let s: f64 = lengths.iter().sum();
    if s > 0.0 {
        let scale = (1.0 - 1e-12) / s;
        for l in &mut lengths {
            *l *= scale;
        }
    }
    let objective = demand_weighted_distance(g, a, &lengths)?;

    let cert = FlowCertificate {
        kappa: 0.0,
        epsilon: DUALITY_GAP_TOL,
        commodities,
        flows,
    };
    let kappa = cert.max_load(m);
    let cert = FlowCertificate { kappa, ..cert };
    let dual = DualLengths { lengths, objective };

    check_output(g, &cert, &dual)?;
    if (kappa - objective).abs() > DUALITY_GAP_TOL * kappa.max(1.0) {
        return Err(Error::invariant(
            "strong-duality",
            format!("kappa {kappa} vs dual objective {objective}"),
            "solve_exact",
        ));
    }
    Ok((cert, dual))
}

struct Lp {
    p: CscMatrix<f64>,
    q: Vec<f64>,
    a: CscMatrix<f64>,
    b: Vec<f64>,
    cones: Vec<clarabel::solver::SupportedConeT<f64>>,
    cons_rows: usize,
}

fn build_lp(g: &Graph, commodities: &[Commodity]) -> Lp {
    let n = g.vertex_count();
    let m = g.edge_count();
    let k = commodities.len();
    let nvars = k * 2 * m + 1;
    let kappa_col = k * 2 * m;

    // Conservation rows: per commodity, every vertex except the source
    // (whose balance is implied). Row ids are compact.
    let cons_rows = k * (n - 1);
    let cap_base = cons_rows;
    let nonneg_base = cons_rows + m;
    let nrows = nonneg_base + k * 2 * m;

    let cons_row = |c: usize, v: usize, src: usize| -> usize {
        debug_assert!(v != src);
        c * (n - 1) + v - usize::from(v > src)
    };

    let mut b = vec![0.0; nrows];
    for (c, com) in commodities.iter().enumerate() {
        for &(v, d) in &com.sinks {
            b[cons_row(c, v, com.source)] += d;
        }
    }

    // CSC, column by column. f-var columns carry at most two conservation
    // entries (inflow +1 at head, outflow -1 at tail), one capacity entry,
    // and one nonnegativity entry.
    let mut colptr = Vec::with_capacity(nvars + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for (c, com) in commodities.iter().enumerate() {
        let src = com.source;
        for e in 0..m {
            let (u, v) = g.endpoints(e);
            for (tail, head) in [(u, v), (v, u)] {
                let arc = 2 * e + usize::from(tail != u);
                let mut entries: Vec<(usize, f64)> = Vec::with_capacity(4);
                if head != src {
                    entries.push((cons_row(c, head, src), 1.0));
                }
                if tail != src {
                    entries.push((cons_row(c, tail, src), -1.0));
                }
                entries.push((cap_base + e, 1.0));
                entries.push((nonneg_base + c * 2 * m + arc, -1.0));
                entries.sort_by_key(|&(r, _)| r);
                for (r, val) in entries {
                    rowval.push(r);
                    nzval.push(val);
                }
                colptr.push(rowval.len());
            }
        }
    }
    // kappa column: -1 in every capacity row
    for e in 0..m {
        rowval.push(cap_base + e);
        nzval.push(-1.0);
    }
    colptr.push(rowval.len());
    debug_assert_eq!(colptr.len(), nvars + 1);

    let mut q = vec![0.0; nvars];
    q[kappa_col] = 1.0;

    Lp {
        p: CscMatrix::zeros((nvars, nvars)),
        q,
        a: CscMatrix::new(nrows, nvars, colptr, rowval, nzval),
        b,
        cones: vec![ZeroConeT(cons_rows), NonnegativeConeT(m + k * 2 * m)],
        cons_rows,
    }
}
