//! Exact edge-marginal monotonicity of the UST under edge deletion and under
//! conditioning on more edges of a fixed set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Largest vertex count accepted by the monotonicity checks.
pub const MONOTONICITY_LIMIT: usize = 7;

/// A graph and a spanning subgraph on the same vertices (simple, unit weights).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphPair {
    pub vertices: usize,
    pub larger: Vec<(usize, usize)>,
    pub smaller: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub pairs: usize,
    pub comparisons: usize,
    /// First few offending `(pair index, edge)` cases.
    pub violations: Vec<(usize, (usize, usize))>,
    pub violation_count: usize,
}

impl MonotonicityReport {
    pub fn ok(&self) -> bool {
        self.violation_count == 0
    }
}

/// Number of spanning trees via an integer Bareiss elimination of the
/// reduced Laplacian.
fn tree_count(n: usize, edges: &[(usize, usize)]) -> i128 {
    if n <= 1 {
        return 1;
    }
    let m = n - 1;
    let mut a = vec![vec![0i128; m]; m];
    for &(u, v) in edges {
        if u < m {
            a[u][u] += 1;
        }
        if v < m {
            a[v][v] += 1;
        }
        if u < m && v < m {
            a[u][v] -= 1;
            a[v][u] -= 1;
        }
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..m {
        if a[k][k] == 0 {
            match (k + 1..m).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..m {
            for j in k + 1..m {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[m - 1][m - 1]
}

fn without(edges: &[(usize, usize)], e: (usize, usize)) -> Vec<(usize, usize)> {
    edges.iter().copied().filter(|&f| f != e).collect()
}

fn normalize(e: (usize, usize)) -> (usize, usize) {
    (e.0.min(e.1), e.0.max(e.1))
}

/// Checks `P(e ∈ UST(larger)) ≤ P(e ∈ UST(smaller))` for every shared edge,
/// with integer tree counts compared by cross-multiplication.
pub fn edge_marginal_monotonicity_check(pairs: impl IntoIterator<Item = GraphPair>) -> Result<MonotonicityReport> {
    let mut rep = MonotonicityReport::default();
    for (idx, pair) in pairs.into_iter().enumerate() {
        let n = pair.vertices;
        if n > MONOTONICITY_LIMIT {
            return Err(Error::TooLarge {
                what: "monotonicity check",
                size: n,
                limit: MONOTONICITY_LIMIT,
            });
        }
        let big: Vec<_> = pair.larger.iter().map(|&e| normalize(e)).collect();
        let small: Vec<_> = pair.smaller.iter().map(|&e| normalize(e)).collect();
        if small.iter().any(|e| !big.contains(e)) {
            return Err(Error::Precondition(format!("pair {idx}: smaller graph is not a subgraph")));
        }
        let (kb, ks) = (tree_count(n, &big), tree_count(n, &small));
        if kb == 0 || ks == 0 {
            return Err(Error::Precondition(format!("pair {idx}: graph is disconnected")));
        }
        rep.pairs += 1;
        for &e in &small {
            let in_big = kb - tree_count(n, &without(&big, e));
            let in_small = ks - tree_count(n, &without(&small, e));
            rep.comparisons += 1;
            if in_big * ks > in_small * kb {
                rep.violation_count += 1;
                if rep.violations.len() < 16 {
                    rep.violations.push((idx, e));
                }
            }
        }
    }
    Ok(rep)
}

/// Every connected simple graph on the labelled vertex set `0..n`.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    (0u64..1 << slots.len())
        .filter_map(|mask| {
            let edges: Vec<_> = (0..slots.len()).filter(|i| mask >> i & 1 == 1).map(|i| slots[i]).collect();
            let mut d = crate::dsu::DisjointSets::new(n);
            for &(u, v) in &edges {
                d.union(u, v);
            }
            (d.sets() == 1).then_some(edges)
        })
        .collect()
}

/// All pairs `(G, G − f)` with `G` connected on at most `max_vertices`
/// labelled vertices and `G − f` still connected. Every connected spanning
/// subgraph is reached from `G` by such deletions, so monotonicity on these
/// pairs gives it for every subgraph pair.
pub fn deletion_pairs(max_vertices: usize) -> impl Iterator<Item = GraphPair> {
    (2..=max_vertices).flat_map(|n| {
        connected_graphs(n).into_iter().flat_map(move |g| {
            let candidates: Vec<GraphPair> = g
                .iter()
                .filter_map(|&f| {
                    let h = without(&g, f);
                    (tree_count(n, &h) > 0).then(|| GraphPair {
                        vertices: n,
                        larger: g.clone(),
                        smaller: h,
                    })
                })
                .collect();
            candidates
        })
    })
}

/// For every pair `I₁ ⊆ I₂ ⊆ interest` such that both `T ∩ interest = I₁` and
/// `T ∩ interest = I₂` are possible, checks that each edge outside `interest`
/// is at most as likely in the tree conditioned on `I₂` as on `I₁`. Counts
/// come from explicit enumeration. Returns `(comparisons, violations)`.
pub fn conditional_monotonicity_check(g: &WeightedGraph, interest: &[usize]) -> Result<(usize, usize)> {
    if interest.len() > 16 {
        return Err(Error::TooLarge {
            what: "conditioning set",
            size: interest.len(),
            limit: 16,
        });
    }
    if g.edges().iter().any(|e| e.conductance != 1.0) {
        return Err(Error::Precondition("unit conductances expected".into()));
    }
    let trees = g.enumerate_spanning_trees()?;
    let k = interest.len();
    let outside: Vec<usize> = (0..g.edge_count()).filter(|e| !interest.contains(e)).collect();
    let mut total = vec![0u64; 1 << k];
    let mut with = vec![vec![0u64; outside.len()]; 1 << k];
    for t in &trees {
        let mask = (0..k).filter(|&i| t.edges.contains(&interest[i])).fold(0usize, |m, i| m | 1 << i);
        total[mask] += 1;
        for (j, e) in outside.iter().enumerate() {
            if t.edges.contains(e) {
                with[mask][j] += 1;
            }
        }
    }
    let (mut comparisons, mut violations) = (0, 0);
    for small in 0..1usize << k {
        if total[small] == 0 {
            continue;
        }
        for large in 0..1usize << k {
            if large & small != small || large == small || total[large] == 0 {
                continue;
            }
            for j in 0..outside.len() {
                comparisons += 1;
                // P(e | I₂) ≤ P(e | I₁)
                if with[large][j] as u128 * total[small] as u128 > with[small][j] as u128 * total[large] as u128 {
                    violations += 1;
                }
            }
        }
    }
    Ok((comparisons, violations))
}

/// Fixed corpus for the conditional check: graphs with a conditioning set.
pub fn conditional_fixtures() -> Vec<(WeightedGraph, Vec<usize>)> {
    use crate::graph::fixtures::*;
    vec![
        (complete(4), vec![0, 1, 2]),
        (complete(5), vec![0, 3, 5, 9]),
        (grid(3, 3), vec![0, 2, 5, 7, 11]),
        (cycle(6), vec![0, 3]),
        (grid(2, 4), vec![1, 4, 6, 9]),
    ]
}
