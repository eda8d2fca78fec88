//! Shared helpers for the integration suites: seeded instance generators,
//! a memoizing wrapper around the exact solver, and an independent
//! path-formulation LP oracle for cross-checking congestion values.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use expd::flow::solve_exact;
use expd::graph::{Graph, VertexId};
use expd::weighting::NodeWeighting;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A connected random graph: a random spanning tree plus `extra` more
/// edges, no self-loops, parallels allowed.
pub fn random_connected_graph(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Graph {
    assert!(n >= 2);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v));
    }
    let mut added = 0;
    while added < extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u.min(v), u.max(v)));
            added += 1;
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Random masses in `lo..=hi` with at least two support vertices.
pub fn random_masses(n: usize, lo: u64, hi: u64, rng: &mut ChaCha8Rng) -> NodeWeighting {
    loop {
        let mass: Vec<u64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
        let w = NodeWeighting::new(mass);
        if w.support_size() >= 2 {
            return w;
        }
    }
}

type CacheKey = (Vec<(usize, usize)>, Vec<u64>);

static KAPPA_CACHE: Mutex<Option<HashMap<CacheKey, (f64, f64)>>> = Mutex::new(None);

/// Exact congestion and recomputed dual objective for `(g, a)`, memoized by
/// content. Decomposition components repeat across phi values, so this
/// saves most of the verification solves.
pub fn cached_kappa(g: &Graph, a: &NodeWeighting) -> (f64, f64) {
    let key: CacheKey = (
        g.edges().to_vec(),
        (0..a.len()).map(|v| a.mass(v)).collect(),
    );
    if let Some(hit) = KAPPA_CACHE
        .lock()
        .unwrap()
        .get_or_insert_with(HashMap::new)
        .get(&key)
    {
        return *hit;
    }
    let (cert, dual) = solve_exact(g, a).expect("exact solve");
    let out = (cert.kappa, dual.objective);
    KAPPA_CACHE
        .lock()
        .unwrap()
        .as_mut()
        .unwrap()
        .insert(key, out);
    out
}

/// All simple paths between `s` and `t` (edge-id sequences), for tiny
/// graphs only.
fn simple_paths(g: &Graph, s: VertexId, t: VertexId) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut visited = vec![false; g.vertex_count()];
    let mut path = Vec::new();
    fn dfs(
        g: &Graph,
        v: VertexId,
        t: VertexId,
        visited: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == t {
            out.push(path.clone());
            return;
        }
        visited[v] = true;
        for &(w, e) in g.neighbors(v) {
            if !visited[w] {
                path.push(e);
                dfs(g, w, t, visited, path, out);
                path.pop();
            }
        }
        visited[v] = false;
    }
    dfs(g, s, t, &mut visited, &mut path, &mut out);
    out
}

/// Independent concurrent-flow oracle: the literal path formulation
/// (`min kappa` over per-path flows), solved directly. Exponential in the
/// path count; keep `n <= 8`.
pub fn oracle_kappa_paths(g: &Graph, a: &NodeWeighting) -> f64 {
    use clarabel::algebra::CscMatrix;
    use clarabel::solver::{
        DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT::*,
    };

    let total = a.total();
    assert!(total > 0);
    let support = a.support();
    let mut pairs = Vec::new();
    for (i, &u) in support.iter().enumerate() {
        for &v in &support[i + 1..] {
            pairs.push((u, v, a.mass(u) as f64 * a.mass(v) as f64 / total as f64));
        }
    }
    if pairs.is_empty() {
        return 0.0;
    }
    let m = g.edge_count();
    // columns: one flow var per (pair, path), then kappa
    let mut pair_paths: Vec<Vec<Vec<usize>>> = Vec::new();
    for &(u, v, _) in &pairs {
        let paths = simple_paths(g, u, v);
        assert!(!paths.is_empty(), "disconnected demand pair");
        pair_paths.push(paths);
    }
    let nvars: usize = pair_paths.iter().map(|p| p.len()).sum::<usize>() + 1;
    let kappa_col = nvars - 1;
    let neq = pairs.len();
    let nrows = neq + m + (nvars - 1);

    let mut colptr = vec![0usize];
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    let mut col = 0usize;
    for (p, paths) in pair_paths.iter().enumerate() {
        for path in paths {
            let mut entries = vec![(p, 1.0)];
            let mut edge_count: HashMap<usize, f64> = HashMap::new();
            for &e in path {
                *edge_count.entry(e).or_insert(0.0) += 1.0;
            }
            for (&e, &c) in &edge_count {
                entries.push((neq + e, c));
            }
            entries.push((neq + m + col, -1.0));
            entries.sort_by_key(|&(r, _)| r);
            for (r, val) in entries {
                rowval.push(r);
                nzval.push(val);
            }
            colptr.push(rowval.len());
            col += 1;
        }
    }
    for e in 0..m {
        rowval.push(neq + e);
        nzval.push(-1.0);
    }
    colptr.push(rowval.len());

    let mut b = vec![0.0; nrows];
    for (p, &(_, _, d)) in pairs.iter().enumerate() {
        b[p] = d;
    }
    let mut q = vec![0.0; nvars];
    q[kappa_col] = 1.0;

    let a_mat = CscMatrix::new(nrows, nvars, colptr, rowval, nzval);
    let p_mat = CscMatrix::<f64>::zeros((nvars, nvars));
    let cones = [ZeroConeT(neq), NonnegativeConeT(m + nvars - 1)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .build()
        .unwrap();
    let mut solver = DefaultSolver::new(&p_mat, &q, &a_mat, &b, &cones, settings).unwrap();
    solver.solve();
    assert!(
        matches!(
            solver.solution.status,
            SolverStatus::Solved | SolverStatus::AlmostSolved
        ),
        "oracle LP status {:?}",
        solver.solution.status
    );
    solver.solution.x[kappa_col]
}
