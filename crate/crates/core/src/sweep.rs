//! Heavy-component sweep cut: when a small-diameter core carries at least a
//! third of the mass and the spreading metric keeps the demand stretched,
//! thresholding on distance-to-core yields a `12*phi`-sparse cut.

use crate::error::{Error, Result};
use crate::graph::{approx_le, Graph, VertexId};
use crate::metric::{ball, distances_from, set_diameter};
use crate::weighting::NodeWeighting;

/// Outcome of a sweep. `side` is a prefix of `order` or its complement;
/// `sparsity` is `|delta(side)| / min{A(side), A(V - side)}`.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub side: Vec<VertexId>,
    pub sparsity: f64,
    /// `pi[v] = dist(v, core)`.
    pub pi: Vec<f64>,
    /// Vertices sorted by descending `pi`, ties by ascending id.
    pub order: Vec<VertexId>,
}

/// Smallest support vertex whose `Delta_0 = 1/(4 phi |A|)` ball holds at
/// least half the mass, if any.
pub fn heavy_core(g: &Graph, a: &NodeWeighting, phi: f64) -> Result<Option<VertexId>> {
    let total = a.total();
    if phi <= 0.0 || total == 0 {
        return Err(Error::Domain(format!(
            "heavy_core needs phi > 0 and |A| > 0 (phi={phi}, |A|={total})"
        )));
    }
    let delta0 = 1.0 / (4.0 * phi * total as f64);
    for x in a.support() {
        let b = ball(g, x, delta0)?;
        if 2 * a.mass_of(&b) >= total {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Sweep cut from `core`. Preconditions (the caller must guarantee them;
/// the recursion does):
///   sum of lengths <= 1, demand-weighted distance >= 1/phi,
///   A(core) >= |A|/3, diam(core) <= 1/(2 phi |A|).
/// Postcondition: sparsity <= 12*phi with both sides carrying mass.
pub fn sweep_cut(
    g: &Graph,
    a: &NodeWeighting,
    core: &[VertexId],
    phi: f64,
) -> Result<SweepResult> {
    let lengths = g.require_lengths()?;
    let n = g.vertex_count();
    let total = a.total();
    if phi <= 0.0 || total == 0 {
        return Err(Error::Domain(format!(
            "sweep_cut needs phi > 0 and |A| > 0 (phi={phi}, |A|={total})"
        )));
    }
    if !g.is_connected() {
        return Err(Error::contract(
            "sweep-connected",
            "sweep_cut requires a connected graph",
        ));
    }

    // Preconditions, each named so violations are actionable.
    let sum_l: f64 = lengths.iter().sum();
    if !approx_le(sum_l, 1.0) {
        return Err(Error::contract(
            "sum-lengths",
            format!("sum of edge lengths {sum_l} > 1"),
        ));
    }
    let objective = crate::flow::demand_weighted_distance(g, a, lengths)?;
    if objective < (1.0 - 1e-6) / phi {
        return Err(Error::contract(
            "spreading-objective",
            format!("demand-weighted distance {objective} < 1/phi = {}", 1.0 / phi),
        ));
    }
    let core_mass = a.mass_of(core);
    if 3 * core_mass < total {
        return Err(Error::contract(
            "core-mass",
            format!("A(core) = {core_mass} < |A|/3 = {}", total as f64 / 3.0),
        ));
    }
    let diam = set_diameter(g, core)?;
    let diam_cap = 1.0 / (2.0 * phi * total as f64);
    if !approx_le(diam, diam_cap) {
        return Err(Error::contract(
            "core-diameter",
            format!("diam(core) = {diam} > 1/(2 phi |A|) = {diam_cap}"),
        ));
    }

    let pi = distances_from(g, core)?;
    let mut order: Vec<VertexId> = (0..n).collect();
    order.sort_by(|&x, &y| pi[y].partial_cmp(&pi[x]).unwrap().then_with(|| x.cmp(&y)));

    // Edge-level total variation of pi: the numerator of the sweep bound.
    let numerator: f64 = g
        .edges()
        .iter()
        .map(|&(u, v)| (pi[u] - pi[v]).abs())
        .sum();
    if !approx_le(numerator, sum_l) {
        return Err(Error::invariant(
            "sweep-numerator",
            format!("sum |pi(u)-pi(v)| = {numerator} > sum of lengths {sum_l}"),
            "sweep_cut",
        ));
    }
    // Demand-weighted total variation: the denominator. O(n^2) pairs.
    let mut denominator = 0.0;
    let support = a.support();
    for (i, &u) in support.iter().enumerate() {
        for &v in &support[i + 1..] {
            denominator +=
                a.mass(u) as f64 * a.mass(v) as f64 / total as f64 * (pi[u] - pi[v]).abs();
        }
    }
    let denom_floor = 1.0 / (12.0 * phi);
    if denominator < denom_floor * (1.0 - 1e-6) {
        return Err(Error::invariant(
            "sweep-denominator",
            format!("demand variation {denominator} < 1/(12 phi) = {denom_floor}"),
            "sweep_cut",
        ));
    }

    // Prefix scan: cut size incrementally, masses exactly.
    let mut in_prefix = vec![false; n];
    let mut cut = 0usize;
    let mut prefix_mass = 0u64;
    let mut telescoped = 0.0;
    let mut best: Option<(f64, usize, usize, u64)> = None; // (ratio, k, cut, mass)
    for k in 1..n {
        let v = order[k - 1];
        in_prefix[v] = true;
        for &(w, _) in g.neighbors(v) {
            if in_prefix[w] {
                cut -= 1;
            } else {
                cut += 1;
            }
        }
        prefix_mass += a.mass(v);
        telescoped += cut as f64 * (pi[order[k - 1]] - pi[order[k]]);
        let demand_across = prefix_mass as f64 * (total - prefix_mass) as f64 / total as f64;
        if demand_across <= 0.0 {
            continue;
        }
        let ratio = cut as f64 / demand_across;
        if best.is_none_or(|(r, ..)| ratio < r) {
            best = Some((ratio, k, cut, prefix_mass));
        }
    }
    if !(approx_le(telescoped, numerator) && approx_le(numerator, telescoped)) {
        return Err(Error::invariant(
            "sweep-telescoping",
            format!("prefix-cut sum {telescoped} != edge variation {numerator}"),
            "sweep_cut",
        ));
    }
    let (best_ratio, best_k, best_cut, best_mass) = best.ok_or_else(|| {
        Error::invariant(
            "sweep-nontrivial",
            "no prefix separates the mass (|supp(A)| < 2?)".to_string(),
            "sweep_cut",
        )
    })?;
    if best_ratio * denominator > numerator * (1.0 + 1e-9) + 1e-15 {
        return Err(Error::invariant(
            "sweep-averaging",
            format!("min ratio {best_ratio} > numerator/denominator"),
            "sweep_cut",
        ));
    }

    let min_mass = best_mass.min(total - best_mass);
    let sparsity = best_cut as f64 / min_mass as f64;
    if sparsity > 12.0 * phi * (1.0 + 1e-9) {
        return Err(Error::invariant(
            "sweep-sparsity",
            format!("sparsity {sparsity} > 12 phi = {}", 12.0 * phi),
            "sweep_cut",
        ));
    }

    // The argmin prefix holds the vertices farthest from the core; hand back
    // the complement when that keeps the core inside the returned side.
    let prefix: Vec<VertexId> = order[..best_k].to_vec();
    let core_in_prefix = {
        let mask = g.membership(&prefix);
        core.iter().any(|&v| mask[v])
    };
    let side = if core_in_prefix {
        let mut s = prefix;
        s.sort_unstable();
        s
    } else {
        let mut s = order[best_k..].to_vec();
        s.sort_unstable();
        s
    };

    Ok(SweepResult {
        side,
        sparsity,
        pi,
        order,
    })
}
