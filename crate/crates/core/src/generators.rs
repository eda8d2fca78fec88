//! Deterministic instance generators for tests and benchmarks.
//!
//! Randomized constructions use ChaCha8 with a caller-provided seed, so a
//! corpus is byte-identical across platforms.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// The d-dimensional hypercube: `2^dim` vertices, vertex `i` adjacent to
/// `i ^ (1 << b)` for each bit `b`.
pub fn hypercube(dim: u32) -> Result<Graph> {
    if !(1..=16).contains(&dim) {
        return Err(Error::Domain(format!("hypercube dim {dim} not in 1..=16")));
    }
    let n = 1usize << dim;
    let mut edges = Vec::with_capacity(dim as usize * n / 2);
    for i in 0..n {
        for b in 0..dim {
            let j = i ^ (1usize << b);
            if i < j {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges)
}

/// A rows x cols grid; `grid(1, k)` is a path on k vertices.
pub fn grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(Error::Domain("grid dimensions must be positive".into()));
    }
    let idx = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((idx(r, c), idx(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((idx(r, c), idx(r + 1, c)));
            }
        }
    }
    Graph::new(rows * cols, edges)
}

/// A random d-regular simple graph via the pairing model, resampled until
/// simple. Deterministic given the seed.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if !(n * d).is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "random_regular({n},{d}): n*d must be even"
        )));
    }
    if d >= n {
        return Err(Error::Domain(format!("random_regular({n},{d}): need d < n")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..1000 {
        let mut stubs: Vec<usize> = (0..n * d).map(|s| s / d).collect();
        stubs.shuffle(&mut rng);
        let mut edges = Vec::with_capacity(n * d / 2);
        let mut seen = std::collections::HashSet::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return Graph::new(n, edges);
    }
    Err(Error::Domain(format!(
        "random_regular({n},{d}): no simple pairing found in 1000 attempts"
    )))
}

/// Two k-cliques joined by a single bridge edge between vertices `k-1` and `k`.
pub fn dumbbell(k: usize) -> Result<Graph> {
    if k < 2 {
        return Err(Error::Domain("dumbbell needs cliques of size >= 2".into()));
    }
    let mut edges = Vec::new();
    for base in [0, k] {
        for i in 0..k {
            for j in (i + 1)..k {
                edges.push((base + i, base + j));
            }
        }
    }
    edges.push((k - 1, k));
    edges.sort_unstable();
    Graph::new(2 * k, edges)
}

/// The benchmark/acceptance corpus: hypercubes dim 3..=7, grids up to 8x8,
/// random regular graphs up to n = 64, and dumbbells. Deterministic given
/// the seed; names are stable identifiers.
pub fn standard_corpus(seed: u64) -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for dim in 3..=7u32 {
        out.push((format!("hypercube-{dim}"), hypercube(dim).unwrap()));
    }
    for (r, c) in [(2, 4), (3, 3), (3, 5), (4, 4), (4, 6), (5, 5), (6, 6), (7, 7), (2, 8), (8, 8)]
    {
        out.push((format!("grid-{r}x{c}"), grid(r, c).unwrap()));
    }
    for (i, (n, d)) in [
        (8, 3),
        (16, 3),
        (16, 4),
        (24, 3),
        (32, 3),
        (32, 4),
        (40, 4),
        (48, 3),
        (56, 3),
        (64, 3),
        (64, 4),
    ]
    .into_iter()
    .enumerate()
    {
        out.push((
            format!("rr-{n}x{d}"),
            random_regular(n, d, seed.wrapping_add(i as u64)).unwrap(),
        ));
    }
    for k in 3..=8 {
        out.push((format!("dumbbell-{k}"), dumbbell(k).unwrap()));
    }
    out
}
