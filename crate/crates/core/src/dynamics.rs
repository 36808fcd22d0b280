//! Poissonian cutting of a spanning tree, interface cycles and length
//! statistics of the resulting clusters.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{ForestAdjacency, ForestHost, SpanningForest};
use crate::geometry::{self, Point};
use crate::lattice::{Duality, LatticeDomain};
use crate::sampling::edge_length_scale;

/// Negative cut times of the edges of a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSchedule {
    /// Cut intensity per edge per unit of `|t|`.
    pub rate: f64,
    /// Sorted tree edge ids.
    pub edges: Vec<usize>,
    /// `times[i]` is the cut time of `edges[i]`.
    pub times: Vec<f64>,
}

impl CutSchedule {
    pub fn time_of(&self, e: usize) -> Option<f64> {
        self.edges.binary_search(&e).ok().map(|i| self.times[i])
    }

    /// Edges cut in `(t, 0]`, most recent first (the order seen when looking
    /// back from time 0).
    pub fn cut_events(&self, t: f64) -> Vec<(f64, usize)> {
        let mut ev: Vec<(f64, usize)> = self
            .times
            .iter()
            .zip(&self.edges)
            .filter(|(&tau, _)| tau > t)
            .map(|(&tau, &e)| (tau, e))
            .collect();
        ev.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        ev
    }
}

/// Per-edge cut rate `δ^{5/4}`.
pub fn cut_rate(mesh: f64) -> f64 {
    edge_length_scale(mesh)
}

/// Independent times `τ(e) = −Exp(rate δ^{5/4})` on the tree edges.
pub fn sample_cut_schedule<R: Rng + ?Sized>(tree: &SpanningForest, mesh: f64, rng: &mut R) -> Result<CutSchedule> {
    if tree.edge_count() == 0 {
        return Err(Error::Precondition("cannot cut an edgeless forest".into()));
    }
    let rate = cut_rate(mesh);
    let times = tree
        .edges()
        .iter()
        .map(|_| {
            let x: f64 = rng.sample(Exp1);
            // Exp1 can return 0; keep times strictly negative
            -(x.max(f64::MIN_POSITIVE)) / rate
        })
        .collect();
    Ok(CutSchedule {
        rate,
        edges: tree.edges().to_vec(),
        times,
    })
}

/// The forest at time `t ≤ 0`: tree edges with `τ(e) ≤ t`. `t = −∞` gives the
/// edgeless forest.
pub fn forest_at<H: ForestHost + ?Sized>(host: &H, sched: &CutSchedule, t: f64) -> Result<SpanningForest> {
    if t.is_nan() || t > 0.0 {
        return Err(Error::Precondition(format!("time {t} must be ≤ 0")));
    }
    let edges = sched
        .edges
        .iter()
        .zip(&sched.times)
        .filter(|(_, &tau)| tau <= t)
        .map(|(&e, _)| e)
        .collect();
    SpanningForest::new(host, edges)
}

/// The branch edge cut most recently before 0 within `(t, 0]`. Ties go to the
/// smaller edge id.
pub fn first_cut_on_branch(sched: &CutSchedule, branch: &[usize], t: f64) -> Result<Option<usize>> {
    let mut best: Option<(f64, usize)> = None;
    for &e in branch {
        let tau = sched.time_of(e).ok_or(Error::EdgeNotFound(e))?;
        if tau > t {
            let better = match best {
                None => true,
                Some((bt, be)) => tau > bt || (tau == bt && e < be),
            };
            if better {
                best = Some((tau, e));
            }
        }
    }
    Ok(best.map(|(_, e)| e))
}

/// The dual cycle closed by a tree edge: its dual edge followed by the
/// dual-tree path joining the dual edge's endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceCycle {
    pub primal_edge: usize,
    /// Dual edge ids; the first is the dual of `primal_edge`, the rest run
    /// along the dual tree in path order.
    pub dual_edges: Vec<usize>,
    pub renormalized_length: f64,
}

impl InterfaceCycle {
    pub fn edge_count(&self) -> usize {
        self.dual_edges.len()
    }
}

pub fn interface_cycle(
    tree: &SpanningForest,
    dual_tree: &SpanningForest,
    duality: &Duality,
    e: usize,
    mesh: f64,
) -> Result<InterfaceCycle> {
    if !tree.contains(e) {
        return Err(Error::Precondition(format!("edge {e} is not a tree edge")));
    }
    let star = duality
        .dual_edge(e)
        .ok_or_else(|| Error::Duality(format!("tree edge {e} has no dual")))?;
    let [a, b] = duality.dual.edges()[star];
    let (_, path) = ForestAdjacency::new(&duality.dual, dual_tree).path(a, b)?;
    let mut dual_edges = vec![star];
    dual_edges.extend(path);
    let renormalized_length = dual_edges.len() as f64 * edge_length_scale(mesh);
    Ok(InterfaceCycle {
        primal_edge: e,
        dual_edges,
        renormalized_length,
    })
}

/// Host edges joining the two sides of `tree ∖ {e}`, i.e. the fundamental cut
/// of `e`. Under a wired boundary the identified boundary lies on one side.
pub fn fundamental_cut<H: ForestHost + ?Sized>(host: &H, tree: &SpanningForest, e: usize) -> Result<Vec<usize>> {
    let side = tree_side(host, tree, e)?;
    Ok((0..host.edge_count())
        .filter(|&f| {
            let [x, y] = host.endpoints(f);
            side.side[x] != side.side[y]
        })
        .collect())
}

/// The two sides of a tree after removing one edge, with parent pointers
/// rooted at each endpoint of the removed edge.
struct TreeSide {
    /// `true` on the side of the first endpoint.
    side: Vec<bool>,
    /// Parent `(vertex, edge)` toward the endpoint of the vertex's side; the
    /// virtual boundary vertex has id `host.vertex_count()`.
    parent: Vec<Option<(usize, Option<usize>)>>,
}

fn tree_side<H: ForestHost + ?Sized>(host: &H, tree: &SpanningForest, e: usize) -> Result<TreeSide> {
    if !tree.contains(e) {
        return Err(Error::Precondition(format!("edge {e} is not a tree edge")));
    }
    let adjacency = ForestAdjacency::with_edges(host, tree.edges().iter().copied().filter(|&f| f != e));
    let total = host.vertex_count() + 1;
    let [a, b] = host.endpoints(e);
    let mut side = vec![false; total];
    let mut parent = vec![None; total];
    let mut seen = vec![false; total];
    for (root, flag) in [(a, true), (b, false)] {
        seen[root] = true;
        side[root] = flag;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for &(y, f) in adjacency.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    side[y] = flag;
                    parent[y] = Some((x, f));
                    stack.push(y);
                }
            }
        }
    }
    if seen.iter().take(host.vertex_count()).any(|&s| !s) {
        return Err(Error::NotSpanningTree("tree does not span the host".into()));
    }
    Ok(TreeSide { side, parent })
}

/// `δ^{5/4}` times the number of host edges between components `c0` and `c1`.
pub fn interface_length<H: ForestHost + ?Sized>(
    host: &H,
    forest: &SpanningForest,
    c0: usize,
    c1: usize,
    mesh: f64,
) -> Result<f64> {
    forest.component(c0)?;
    forest.component(c1)?;
    if c0 == c1 {
        return Err(Error::Precondition("interface of a component with itself".into()));
    }
    let count = (0..host.edge_count())
        .filter(|&f| {
            let [x, y] = host.endpoints(f);
            let (p, q) = (forest.component_of(x), forest.component_of(y));
            (p == c0 && q == c1) || (p == c1 && q == c0)
        })
        .count();
    Ok(count as f64 * edge_length_scale(mesh))
}

fn edge_point(domain: &LatticeDomain, duality: &Duality, dual_edge: usize) -> Option<Point> {
    match duality.primal_edge(dual_edge) {
        Some(p) => domain.edge_midpoint(p),
        None => duality.dual.edge_midpoint(dual_edge),
    }
}

/// Parameters of the cut-out statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutOutWindow {
    pub t: f64,
    /// Detached subtrees of diameter below this scale cut points out.
    pub epsilon: f64,
    /// The window is `B(0, 1/η) ∖ B(e, η)`.
    pub eta: f64,
}

/// Renormalized length of the points of the interface cycle of the
/// first-cut edge `e` (inside the window) that are cut out at a scale
/// smaller than `ε`.
///
/// A dual edge of the cycle crosses a primal edge `(x, y)` with `x` on the
/// side of one endpoint of `e` and `y` on the other. It is cut out when some
/// other edge cut in `(t, 0]` on the tree path from `x` (or `y`) to its
/// endpoint of `e` detaches a subtree of at least two vertices and diameter
/// below `ε`. Single-vertex subtrees never count.
pub fn cut_out_length(
    domain: &LatticeDomain,
    tree: &SpanningForest,
    duality: &Duality,
    cycle: &InterfaceCycle,
    sched: &CutSchedule,
    window: CutOutWindow,
) -> Result<f64> {
    let e = cycle.primal_edge;
    let sides = tree_side(domain, tree, e)?;
    let virt = domain.vertex_count();
    let centre = domain
        .edge_midpoint(e)
        .ok_or_else(|| Error::Geometry("first-cut edge has no embedding".into()))?;
    let is_cut = |f: usize| f != e && sched.time_of(f).is_some_and(|tau| tau > window.t);

    // Children lists from the parent pointers, for subtree extraction.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); virt + 1];
    for (v, p) in sides.parent.iter().enumerate() {
        if let Some((u, _)) = p {
            children[*u].push(v);
        }
    }
    let mut memo: std::collections::HashMap<usize, bool> = std::collections::HashMap::new();
    let mut small_subtree = |child: usize| -> bool {
        *memo.entry(child).or_insert_with(|| {
            let mut pts = Vec::new();
            let mut count = 0usize;
            let mut stack = vec![child];
            let mut unembedded = false;
            while let Some(x) = stack.pop() {
                count += 1;
                match domain.positions().get(x).copied().flatten() {
                    Some(p) => pts.push(p),
                    None => unembedded = true,
                }
                stack.extend(children[x].iter().copied());
            }
            count >= 2 && !unembedded && geometry::diameter(&pts) < window.epsilon
        })
    };
    let mut cut_out = |start: usize| -> bool {
        let mut x = start;
        while let Some((p, f)) = sides.parent[x] {
            if let Some(f) = f {
                if is_cut(f) && small_subtree(x) {
                    return true;
                }
            }
            x = p;
        }
        false
    };
    let mut count = 0usize;
    for &d in &cycle.dual_edges[1..] {
        let Some(f) = duality.primal_edge(d) else { continue };
        let Some(m) = edge_point(domain, duality, d) else { continue };
        if m[0].hypot(m[1]) >= 1.0 / window.eta || geometry::dist(m, centre) < window.eta {
            continue;
        }
        let [x, y] = domain.edges()[f];
        if cut_out(x) || cut_out(y) {
            count += 1;
        }
    }
    Ok(count as f64 * edge_length_scale(domain.mesh()))
}

/// Renormalized length of the two arcs of the interface cycle running from
/// the dual of `e` until they first leave `B(e, η)`, counting the dual of
/// `e` itself.
pub fn stub_length(domain: &LatticeDomain, duality: &Duality, cycle: &InterfaceCycle, eta: f64) -> Result<f64> {
    let centre = domain
        .edge_midpoint(cycle.primal_edge)
        .ok_or_else(|| Error::Geometry("edge has no embedding".into()))?;
    let inside = |d: usize| edge_point(domain, duality, d).is_some_and(|m| geometry::dist(m, centre) < eta);
    let arc = &cycle.dual_edges[1..];
    let forward = arc.iter().take_while(|&&d| inside(d)).count();
    let backward = if forward == arc.len() {
        0
    } else {
        arc.iter().rev().take_while(|&&d| inside(d)).count()
    };
    Ok((1 + forward + backward) as f64 * edge_length_scale(domain.mesh()))
}
