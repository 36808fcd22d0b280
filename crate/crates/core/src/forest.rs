//! Spanning forests with component bookkeeping.

use serde::{Deserialize, Serialize};

use crate::dsu::DisjointSets;
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::graph::WeightedGraph;
use crate::lattice::LatticeDomain;

/// Anything a forest can live on: a plain weighted graph or a lattice domain.
pub trait ForestHost {
    fn vertex_count(&self) -> usize;
    fn edge_count(&self) -> usize;
    fn endpoints(&self, e: usize) -> [usize; 2];
    fn position(&self, _v: usize) -> Option<Point> {
        None
    }
    /// Vertices identified into a single one (a wired boundary).
    fn identified(&self) -> &[usize] {
        &[]
    }
}

impl ForestHost for WeightedGraph {
    fn vertex_count(&self) -> usize {
        WeightedGraph::vertex_count(self)
    }
    fn edge_count(&self) -> usize {
        WeightedGraph::edge_count(self)
    }
    fn endpoints(&self, e: usize) -> [usize; 2] {
        let e = &self.edges()[e];
        [e.u, e.v]
    }
}

impl ForestHost for LatticeDomain {
    fn vertex_count(&self) -> usize {
        LatticeDomain::vertex_count(self)
    }
    fn edge_count(&self) -> usize {
        LatticeDomain::edge_count(self)
    }
    fn endpoints(&self, e: usize) -> [usize; 2] {
        self.edges()[e]
    }
    fn position(&self, v: usize) -> Option<Point> {
        LatticeDomain::position(self, v)
    }
    fn identified(&self) -> &[usize] {
        self.identified_vertices()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub size: usize,
    /// Smallest vertex id in the component.
    pub representative: usize,
    pub bbox: Option<BoundingBox>,
    pub diameter: f64,
}

/// An acyclic edge subset with its components (after identification of the
/// host's identified vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningForest {
    vertex_count: usize,
    edges: Vec<usize>,
    in_forest: Vec<bool>,
    labels: Vec<usize>,
    components: Vec<Component>,
}

impl SpanningForest {
    /// Validates acyclicity and computes components. Edge ids refer to `host`.
    pub fn new<H: ForestHost + ?Sized>(host: &H, mut edges: Vec<usize>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        let n = host.vertex_count();
        let mut dsu = DisjointSets::new(n);
        if let Some((&first, rest)) = host.identified().split_first() {
            for &v in rest {
                dsu.union(first, v);
            }
        }
        let mut in_forest = vec![false; host.edge_count()];
        for &e in &edges {
            if e >= host.edge_count() {
                return Err(Error::EdgeNotFound(e));
            }
            let [a, b] = host.endpoints(e);
            if !dsu.union(a, b) {
                return Err(Error::Cycle(e));
            }
            in_forest[e] = true;
        }
        let labels = dsu.labels();
        let k = dsu.sets();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for v in 0..n {
            members[labels[v]].push(v);
        }
        let components = members
            .iter()
            .map(|vs| {
                let pts: Vec<Point> = vs.iter().filter_map(|&v| host.position(v)).collect();
                let bbox = (!pts.is_empty()).then(|| {
                    let mut b = BoundingBox {
                        min: pts[0],
                        max: pts[0],
                    };
                    for p in &pts {
                        b.min = [b.min[0].min(p[0]), b.min[1].min(p[1])];
                        b.max = [b.max[0].max(p[0]), b.max[1].max(p[1])];
                    }
                    b
                });
                Component {
                    size: vs.len(),
                    representative: vs[0],
                    bbox,
                    diameter: geometry::diameter(&pts),
                }
            })
            .collect();
        Ok(Self {
            vertex_count: n,
            edges,
            in_forest,
            labels,
            components,
        })
    }

    /// Forest with no edges.
    pub fn empty<H: ForestHost + ?Sized>(host: &H) -> Self {
        Self::new(host, Vec::new()).expect("edgeless forest is acyclic")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Sorted host edge ids.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.in_forest.get(e).copied().unwrap_or(false)
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, id: usize) -> Result<&Component> {
        self.components.get(id).ok_or(Error::UnknownComponent(id))
    }

    pub fn is_spanning_tree(&self) -> bool {
        self.components.len() == 1
    }

    /// Vertex lists per component.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.components.len()];
        for (v, &c) in self.labels.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Adjacency of a forest, with one virtual vertex (id = host vertex count)
/// joined to every identified vertex so that tree paths may pass through a
/// wired boundary.
#[derive(Debug, Clone)]
pub struct ForestAdjacency {
    n: usize,
    adj: Vec<Vec<(usize, Option<usize>)>>,
}

impl ForestAdjacency {
    pub fn new<H: ForestHost + ?Sized>(host: &H, forest: &SpanningForest) -> Self {
        Self::with_edges(host, forest.edges().iter().copied())
    }

    pub fn with_edges<H: ForestHost + ?Sized>(host: &H, edges: impl Iterator<Item = usize>) -> Self {
        let n = host.vertex_count();
        let mut adj = vec![Vec::new(); n + 1];
        for e in edges {
            let [a, b] = host.endpoints(e);
            adj[a].push((b, Some(e)));
            adj[b].push((a, Some(e)));
        }
        for &v in host.identified() {
            adj[n].push((v, None));
            adj[v].push((n, None));
        }
        Self { n, adj }
    }

    pub fn virtual_vertex(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, Option<usize>)] {
        &self.adj[v]
    }

    /// The unique path from `a` to `b` as `(vertices, real edges)`; the
    /// virtual vertex is left out of the vertex list.
    pub fn path(&self, a: usize, b: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        if a >= self.n {
            return Err(Error::VertexNotFound(a));
        }
        if b >= self.n {
            return Err(Error::VertexNotFound(b));
        }
        let total = self.adj.len();
        let mut parent: Vec<Option<(usize, Option<usize>)>> = vec![None; total];
        let mut seen = vec![false; total];
        seen[a] = true;
        let mut queue = std::collections::VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            if x == b {
                break;
            }
            for &(y, e) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, e));
                    queue.push_back(y);
                }
            }
        }
        if !seen[b] {
            return Err(Error::DifferentComponents(a, b));
        }
        let mut verts = vec![b];
        let mut edges = Vec::new();
        let mut x = b;
        while let Some((p, e)) = parent[x] {
            if let Some(e) = e {
                edges.push(e);
            }
            if p != self.n {
                verts.push(p);
            }
            x = p;
        }
        verts.reverse();
        edges.reverse();
        Ok((verts, edges))
    }
}
