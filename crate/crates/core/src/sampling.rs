//! Random walks, loop erasure, Wilson's algorithm and dual trees.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{ForestAdjacency, ForestHost, SpanningForest};
use crate::graph::WeightedGraph;
use crate::lattice::{Duality, LatticeDomain};

/// `δ^{5/4}`, the length carried by one lattice edge.
pub fn edge_length_scale(mesh: f64) -> f64 {
    mesh.powf(1.25)
}

/// A simple path in a host graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LerwPath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    /// Length of the walk before erasure (0 for tree branches).
    pub steps_of_walk: u64,
    /// Edge count times `δ^{5/4}`.
    pub renormalized_length: f64,
}

impl LerwPath {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Recomputes the renormalized length for mesh `δ`.
    pub fn with_mesh(mut self, mesh: f64) -> Self {
        self.renormalized_length = self.edges.len() as f64 * edge_length_scale(mesh);
        self
    }
}

/// One walk step from `u`: an incident edge chosen with probability
/// proportional to its conductance. Returns `(neighbor, edge id)`.
#[inline]
pub fn walk_step<R: Rng + ?Sized>(g: &WeightedGraph, u: usize, rng: &mut R) -> (usize, usize) {
    let nbrs = g.neighbors(u);
    if g.has_uniform_conductance() {
        return nbrs[rng.random_range(0..nbrs.len())];
    }
    let mut x = rng.random::<f64>() * g.total_conductance(u);
    for &(w, e) in nbrs {
        x -= g.edges()[e].conductance;
        if x < 0.0 {
            return (w, e);
        }
    }
    *nbrs.last().expect("walk from an isolated vertex")
}

/// Vertices that can reach one of `targets`.
fn reaches(g: &WeightedGraph, targets: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; g.vertex_count()];
    let mut stack = Vec::new();
    for &t in targets {
        if !seen[t] {
            seen[t] = true;
            stack.push(t);
        }
    }
    while let Some(x) = stack.pop() {
        for &(y, _) in g.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

/// Chronological loop erasure of a random walk from `start`, stopped when it
/// first hits `targets`.
pub fn loop_erased_walk<R: Rng + ?Sized>(
    g: &WeightedGraph,
    start: usize,
    targets: &[usize],
    rng: &mut R,
) -> Result<LerwPath> {
    let n = g.vertex_count();
    if start >= n {
        return Err(Error::VertexNotFound(start));
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= n) {
        return Err(Error::VertexNotFound(t));
    }
    if targets.is_empty() || !reaches(g, targets)[start] {
        return Err(Error::Unreachable(start));
    }
    let mut is_target = vec![false; n];
    for &t in targets {
        is_target[t] = true;
    }
    // position of each vertex on the current erased path
    let mut slot: Vec<usize> = vec![usize::MAX; n];
    let mut vertices = vec![start];
    let mut edges = Vec::new();
    slot[start] = 0;
    let mut steps = 0u64;
    let mut u = start;
    while !is_target[u] {
        let (w, e) = walk_step(g, u, rng);
        steps += 1;
        if slot[w] != usize::MAX {
            let keep = slot[w];
            for &x in &vertices[keep + 1..] {
                slot[x] = usize::MAX;
            }
            vertices.truncate(keep + 1);
            edges.truncate(keep);
        } else {
            slot[w] = vertices.len();
            vertices.push(w);
            edges.push(e);
        }
        u = w;
    }
    let renormalized_length = edges.len() as f64;
    Ok(LerwPath {
        vertices,
        edges,
        steps_of_walk: steps,
        renormalized_length,
    })
}

/// Where Wilson's algorithm starts its tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Root {
    Vertex(usize),
    /// A set of vertices treated as one (wired) root.
    Set(Vec<usize>),
}

impl Root {
    fn vertices(&self) -> &[usize] {
        match self {
            Root::Vertex(v) => std::slice::from_ref(v),
            Root::Set(vs) => vs,
        }
    }
}

/// Wilson's algorithm with next-pointer loop erasure. Returns the tree edge
/// ids; with a root set the result is a forest in which every component
/// contains exactly one root. `order` defaults to increasing vertex id.
pub fn wilson_ust<R: Rng + ?Sized>(
    g: &WeightedGraph,
    root: &Root,
    order: Option<&[usize]>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = g.vertex_count();
    let roots = root.vertices();
    if roots.is_empty() {
        return Err(Error::Precondition("empty root set".into()));
    }
    if let Some(&r) = roots.iter().find(|&&r| r >= n) {
        return Err(Error::VertexNotFound(r));
    }
    if reaches(g, roots).iter().any(|&s| !s) {
        return Err(Error::Disconnected);
    }
    let mut in_tree = vec![false; n];
    for &r in roots {
        in_tree[r] = true;
    }
    let mut next = vec![(usize::MAX, usize::MAX); n];
    let mut tree = Vec::with_capacity(n.saturating_sub(roots.len()));
    let mut visit = |v: usize, rng: &mut R| {
        let mut u = v;
        while !in_tree[u] {
            next[u] = walk_step(g, u, rng);
            u = next[u].0;
        }
        let mut u = v;
        while !in_tree[u] {
            in_tree[u] = true;
            tree.push(next[u].1);
            u = next[u].0;
        }
    };
    match order {
        Some(ord) => {
            for &v in ord {
                if v >= n {
                    return Err(Error::VertexNotFound(v));
                }
                visit(v, rng);
            }
            for v in 0..n {
                visit(v, rng);
            }
        }
        None => {
            for v in 0..n {
                visit(v, rng);
            }
        }
    }
    tree.sort_unstable();
    Ok(tree)
}

/// UST of a lattice domain: rooted at the identified boundary when wired,
/// at the central vertex when free.
pub fn boundary_ust<R: Rng + ?Sized>(d: &LatticeDomain, rng: &mut R) -> Result<SpanningForest> {
    let g = d.graph()?;
    let root = match d.identified_vertices() {
        [] => Root::Vertex(d.central_vertex()),
        vs => Root::Set(vs.to_vec()),
    };
    let edges = wilson_ust(g, &root, None, rng)?;
    SpanningForest::new(d, edges)
}

/// The complementary dual edge set of a primal spanning tree, checked to be a
/// spanning tree of the dual.
pub fn dual_tree(tree: &SpanningForest, duality: &Duality) -> Result<SpanningForest> {
    if !tree.is_spanning_tree() {
        return Err(Error::NotSpanningTree("primal forest has several components".into()));
    }
    let edges: Vec<usize> = duality
        .dualized_edges()
        .filter(|&e| !tree.contains(e))
        .map(|e| duality.dual_edge(e).expect("dualized"))
        .collect();
    let dual = SpanningForest::new(&duality.dual, edges)
        .map_err(|e| Error::NotSpanningTree(format!("dual edge set has a cycle: {e}")))?;
    if !dual.is_spanning_tree() {
        return Err(Error::NotSpanningTree(format!(
            "dual edge set has {} components",
            dual.component_count()
        )));
    }
    Ok(dual)
}

/// The tree path between `z0` and `z1`. Under a wired boundary the path may
/// pass through the identified boundary, in which case the vertex list jumps
/// between two boundary vertices.
pub fn tree_branch<H: ForestHost + ?Sized>(
    host: &H,
    tree: &SpanningForest,
    z0: usize,
    z1: usize,
    mesh: f64,
) -> Result<LerwPath> {
    if tree.component_of(z0) != tree.component_of(z1) {
        return Err(Error::DifferentComponents(z0, z1));
    }
    let (vertices, edges) = ForestAdjacency::new(host, tree).path(z0, z1)?;
    Ok(LerwPath {
        vertices,
        edges,
        steps_of_walk: 0,
        renormalized_length: 0.0,
    }
    .with_mesh(mesh))
}

/// Edge-list form of a forest sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestDump {
    pub vertex_count: usize,
    pub edges: Vec<usize>,
}

impl ForestDump {
    pub fn of(forest: &SpanningForest) -> Self {
        Self {
            vertex_count: forest.vertex_count(),
            edges: forest.edges().to_vec(),
        }
    }
}

const DUMP_MAGIC: &[u8; 4] = b"USTF";

/// Writes a batch of forests as little-endian `u32` records:
/// magic, forest count, then per forest its edge count and edge ids.
pub fn write_forest_batch<W: Write>(mut w: W, forests: &[Vec<usize>]) -> std::io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(forests.len() as u32).to_le_bytes())?;
    for f in forests {
        w.write_all(&(f.len() as u32).to_le_bytes())?;
        for &e in f {
            w.write_all(&(e as u32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_forest_batch<R: Read>(mut r: R) -> std::io::Result<Vec<Vec<usize>>> {
    let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    if &word != DUMP_MAGIC {
        return Err(bad("not a forest batch"));
    }
    let mut next = |r: &mut R| -> std::io::Result<usize> {
        r.read_exact(&mut word)?;
        Ok(u32::from_le_bytes(word) as usize)
    };
    let count = next(&mut r)?;
    let mut out = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let len = next(&mut r)?;
        let mut f = Vec::with_capacity(len.min(1 << 24));
        for _ in 0..len {
            f.push(next(&mut r)?);
        }
        out.push(f);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures;
    use crate::lattice::{build_box_domain, build_rect_domain, BoundaryCondition};
    use crate::rng::stream;
    use crate::stats::{chi_square_gof, chi_square_two_sample};
    use std::collections::HashMap;

    fn tree_law(g: &WeightedGraph) -> (Vec<Vec<usize>>, Vec<f64>) {
        let trees = g.enumerate_spanning_trees().unwrap();
        let z: f64 = trees.iter().map(|t| t.weight).sum();
        (
            trees.iter().map(|t| t.edges.clone()).collect(),
            trees.iter().map(|t| t.weight / z).collect(),
        )
    }

    fn wilson_counts(g: &WeightedGraph, keys: &[Vec<usize>], root: &Root, order: Option<&[usize]>, n: usize, seed: u64) -> Vec<u64> {
        let index: HashMap<&Vec<usize>, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut counts = vec![0u64; keys.len()];
        let mut rng = stream(seed, 0);
        for _ in 0..n {
            let t = wilson_ust(g, root, order, &mut rng).unwrap();
            counts[index[&t]] += 1;
        }
        counts
    }

    #[test]
    fn walk_from_target_is_trivial() {
        let g = fixtures::triangle();
        let p = loop_erased_walk(&g, 1, &[1], &mut stream(0, 0)).unwrap();
        assert_eq!(p.vertices, vec![1]);
        assert_eq!(p.steps_of_walk, 0);
    }

    #[test]
    fn walk_on_path_graph() {
        let g = fixtures::path(3);
        let mut rng = stream(3, 0);
        for _ in 0..100 {
            let p = loop_erased_walk(&g, 0, &[2], &mut rng).unwrap();
            assert_eq!(p.vertices, vec![0, 1, 2]);
            assert!(p.steps_of_walk >= 2);
        }
    }

    #[test]
    fn unreachable_target() {
        let g = WeightedGraph::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(loop_erased_walk(&g, 0, &[3], &mut stream(0, 0)), Err(Error::Unreachable(0)));
        assert!(loop_erased_walk(&g, 0, &[], &mut stream(0, 0)).is_err());
    }

    /// Law of the erased path from vertex 0 to vertex 2 of the triangle,
    /// obtained by summing the walk measure over all walks of at most
    /// `max_len` steps; the tail beyond is geometric with ratio 1/2.
    fn triangle_lerw_oracle(max_len: u32) -> (f64, f64, f64) {
        let mut direct = 0.0;
        let mut via = 0.0;
        // walks that have not hit 2: they alternate 0,1,0,1,...
        let mut frontier: Vec<Vec<usize>> = vec![vec![0]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in frontier {
                let u = *w.last().unwrap();
                for x in [0usize, 1, 2] {
                    if x == u {
                        continue;
                    }
                    let mut w2 = w.clone();
                    w2.push(x);
                    if x == 2 {
                        let prob = 0.5f64.powi(w2.len() as i32 - 1);
                        let mut erased: Vec<usize> = Vec::new();
                        for &v in &w2 {
                            if let Some(i) = erased.iter().position(|&y| y == v) {
                                erased.truncate(i + 1);
                            } else {
                                erased.push(v);
                            }
                        }
                        if erased == [0, 2] {
                            direct += prob;
                        } else {
                            assert_eq!(erased, [0, 1, 2]);
                            via += prob;
                        }
                    } else {
                        next.push(w2);
                    }
                }
            }
            frontier = next;
        }
        let tail = 0.5f64.powi(max_len as i32);
        (direct, via, tail)
    }

    #[test]
    fn triangle_lerw_law() {
        let (direct, via, tail) = triangle_lerw_oracle(40);
        assert!(tail < 1e-11);
        assert!((direct - 2.0 / 3.0).abs() < 2.0 * tail + 1e-12);
        assert!((via - 1.0 / 3.0).abs() < 2.0 * tail + 1e-12);
        let g = fixtures::triangle();
        let mut rng = stream(11, 0);
        let mut counts = [0u64; 2];
        for _ in 0..60_000 {
            let p = loop_erased_walk(&g, 0, &[2], &mut rng).unwrap();
            counts[p.vertices.len() - 2] += 1;
        }
        let t = chi_square_gof(&counts, &[direct, via]).unwrap();
        assert!(t.p_value > 0.001, "{t:?}");
    }

    #[test]
    fn wilson_single_edge() {
        let g = fixtures::path(2);
        assert_eq!(wilson_ust(&g, &Root::Vertex(0), None, &mut stream(0, 0)).unwrap(), vec![0]);
    }

    #[test]
    fn wilson_matches_enumeration_small_graphs() {
        let graphs = [
            fixtures::triangle(),
            fixtures::weighted_triangle(),
            fixtures::cycle(5),
            fixtures::grid(3, 2),
            fixtures::complete(4),
            WeightedGraph::from_weighted_pairs(5, &[(0, 1, 1.5), (1, 2, 0.5), (2, 0, 2.0), (2, 3, 1.0), (3, 4, 3.0), (4, 2, 1.0), (0, 1, 1.0)]).unwrap(),
        ];
        for (i, g) in graphs.iter().enumerate() {
            let (keys, probs) = tree_law(g);
            let counts = wilson_counts(g, &keys, &Root::Vertex(0), None, 40_000, 100 + i as u64);
            let t = chi_square_gof(&counts, &probs).unwrap();
            assert!(t.p_value > 0.001, "graph {i}: {t:?}");
        }
    }

    #[test]
    fn weighted_triangle_frequencies() {
        let g = fixtures::weighted_triangle();
        let (keys, probs) = tree_law(&g);
        let mut sorted = probs.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] - 0.2).abs() < 1e-15 && (sorted[2] - 0.4).abs() < 1e-15);
        let n = 100_000;
        let counts = wilson_counts(&g, &keys, &Root::Vertex(2), None, n, 5);
        for (c, p) in counts.iter().zip(&probs) {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn wilson_law_ignores_order_and_root() {
        let g = fixtures::grid(3, 3);
        let trees = g.enumerate_spanning_trees().unwrap();
        assert_eq!(trees.len(), 192);
        let keys: Vec<Vec<usize>> = trees.into_iter().map(|t| t.edges).collect();
        let raster: Vec<usize> = (0..9).collect();
        let reversed: Vec<usize> = (0..9).rev().collect();
        let a = wilson_counts(&g, &keys, &Root::Vertex(0), Some(&raster), 60_000, 1);
        let b = wilson_counts(&g, &keys, &Root::Vertex(4), Some(&reversed), 60_000, 2);
        let t = chi_square_two_sample(&a, &b).unwrap();
        assert!(t.p_value > 0.001, "{t:?}");
        let u = chi_square_gof(&b, &vec![1.0 / 192.0; 192]).unwrap();
        assert!(u.p_value > 0.001, "{u:?}");
    }

    #[test]
    fn wired_box_matches_contracted_enumeration() {
        let d = build_box_domain(1, 1.0, BoundaryCondition::Wired).unwrap();
        // identify the 8 boundary vertices by hand: vertex 0 is the centre, 1 the boundary
        let centre = d.central_vertex();
        let mut pairs = Vec::new();
        let mut ids = Vec::new();
        for (id, e) in d.edges().iter().enumerate() {
            let m = |v: usize| usize::from(v != centre);
            if m(e[0]) != m(e[1]) {
                pairs.push((m(e[0]), m(e[1])));
                ids.push(id);
            }
        }
        let contracted = WeightedGraph::from_pairs(2, &pairs).unwrap();
        let trees = contracted.enumerate_spanning_trees().unwrap();
        assert_eq!(trees.len(), 4);
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        let mut rng = stream(9, 0);
        for _ in 0..20_000 {
            let f = boundary_ust(&d, &mut rng).unwrap();
            assert!(f.is_spanning_tree());
            *counts.entry(f.edges().to_vec()).or_default() += 1;
        }
        let observed: Vec<u64> = trees.iter().map(|t| counts.get(&vec![ids[t.edges[0]]]).copied().unwrap_or(0)).collect();
        assert_eq!(observed.iter().sum::<u64>(), 20_000);
        let t = chi_square_gof(&observed, &[0.25; 4]).unwrap();
        assert!(t.p_value > 0.001, "{t:?}");
    }

    #[test]
    fn conditioning_on_an_edge_is_contraction() {
        for g in [fixtures::complete(4), fixtures::grid(3, 2), fixtures::weighted_triangle()] {
            for e in 0..g.edge_count() {
                let trees = g.enumerate_spanning_trees().unwrap();
                let with: Vec<_> = trees.iter().filter(|t| t.edges.contains(&e)).collect();
                let z: f64 = with.iter().map(|t| t.weight).sum();
                let (h, _) = g.contract_edge_mapped(e).unwrap();
                let sub = h.enumerate_spanning_trees().unwrap();
                let zh: f64 = sub.iter().map(|t| t.weight).sum();
                assert_eq!(with.len(), sub.len());
                for t in &sub {
                    let mut labels: Vec<usize> = t.edges.iter().map(|&i| h.edges()[i].label).collect();
                    labels.push(g.edges()[e].label);
                    labels.sort_unstable();
                    let orig = with
                        .iter()
                        .find(|w| {
                            let mut l: Vec<usize> = w.edges.iter().map(|&i| g.edges()[i].label).collect();
                            l.sort_unstable();
                            l == labels
                        })
                        .expect("contracted tree plus the edge is a tree of the original");
                    assert!((orig.weight / z - t.weight / zh).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lerw_is_a_ust_branch() {
        let g = fixtures::grid(3, 3);
        let trees = g.enumerate_spanning_trees().unwrap();
        let f = |edges: &[usize]| {
            let forest = SpanningForest::new(&g, edges.to_vec()).unwrap();
            tree_branch(&g, &forest, 0, 8, 1.0).unwrap().vertices
        };
        let mut law: HashMap<Vec<usize>, f64> = HashMap::new();
        for t in &trees {
            *law.entry(f(&t.edges)).or_default() += 1.0 / trees.len() as f64;
        }
        let keys: Vec<Vec<usize>> = law.keys().cloned().collect();
        let probs: Vec<f64> = keys.iter().map(|k| law[k]).collect();
        let mut counts = vec![0u64; keys.len()];
        let mut rng = stream(21, 0);
        for _ in 0..50_000 {
            let p = loop_erased_walk(&g, 0, &[8], &mut rng).unwrap();
            counts[keys.iter().position(|k| *k == p.vertices).unwrap()] += 1;
        }
        let t = chi_square_gof(&counts, &probs).unwrap();
        assert!(t.p_value > 0.001, "{t:?}");
    }

    #[test]
    fn free_box_is_uniform_over_192() {
        let d = build_box_domain(1, 1.0, BoundaryCondition::Free).unwrap();
        let keys: Vec<Vec<usize>> = d.graph().unwrap().enumerate_spanning_trees().unwrap().into_iter().map(|t| t.edges).collect();
        let index: HashMap<Vec<usize>, usize> = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut counts = vec![0u64; 192];
        let mut rng = stream(4, 0);
        for _ in 0..50_000 {
            counts[index[boundary_ust(&d, &mut rng).unwrap().edges()]] += 1;
        }
        let t = chi_square_gof(&counts, &[1.0 / 192.0; 192]).unwrap();
        assert!(t.p_value > 0.001, "{t:?}");
    }

    #[test]
    fn smallest_domain() {
        let d = build_rect_domain(2, 1, 1.0, BoundaryCondition::Free).unwrap();
        let f = boundary_ust(&d, &mut stream(0, 0)).unwrap();
        assert_eq!(f.edges(), &[0]);
        let dual = d.dual().unwrap();
        let t = dual_tree(&f, &dual).unwrap();
        assert_eq!(t.edge_count(), 0);
        assert_eq!(t.vertex_count(), 1);
    }

    #[test]
    fn dual_trees_span() {
        for bc in [BoundaryCondition::Free, BoundaryCondition::Wired] {
            let d = build_box_domain(2, 1.0, bc).unwrap();
            let dual = d.dual().unwrap();
            let mut rng = stream(8, 0);
            for _ in 0..500 {
                let f = boundary_ust(&d, &mut rng).unwrap();
                let t = dual_tree(&f, &dual).unwrap();
                assert_eq!(t.edge_count() + 1, dual.dual.vertex_count() - dual.dual.identified_vertices().len().saturating_sub(1));
            }
        }
    }

    #[test]
    fn branches() {
        let g = fixtures::path(5);
        let f = SpanningForest::new(&g, vec![0, 1, 2, 3]).unwrap();
        let b = tree_branch(&g, &f, 0, 4, 0.5).unwrap();
        assert_eq!(b.vertices, vec![0, 1, 2, 3, 4]);
        assert!((b.renormalized_length - 4.0 * 0.5f64.powf(1.25)).abs() < 1e-15);
        let z = tree_branch(&g, &f, 2, 2, 1.0).unwrap();
        assert!(z.edges.is_empty() && z.renormalized_length == 0.0);
        let f2 = SpanningForest::new(&g, vec![0, 3]).unwrap();
        assert_eq!(tree_branch(&g, &f2, 0, 4, 1.0), Err(Error::DifferentComponents(0, 4)));
    }

    #[test]
    fn batch_round_trip() {
        let forests = vec![vec![0, 3, 7], vec![], vec![1]];
        let mut buf = Vec::new();
        write_forest_batch(&mut buf, &forests).unwrap();
        assert_eq!(read_forest_batch(buf.as_slice()).unwrap(), forests);
        assert!(read_forest_batch(&b"nope"[..]).is_err());
    }
}
