//! Structure graphs of forests and the gluing chains that run on them.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{ForestHost, SpanningForest};
use crate::geometry::{self, Point};
use crate::graph::{GraphEdge, WeightedGraph};
use crate::sampling::{edge_length_scale, wilson_ust, Root};

/// Largest graph accepted by the resistance-rate chain.
pub const RESISTANCE_CHAIN_LIMIT: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSite {
    /// Component id in the forest the graph was extracted from; after a
    /// collapse, the label of the surviving site.
    pub label: usize,
    pub vertex_count: usize,
    pub diameter: f64,
    /// Smallest host vertex in the cluster.
    pub representative: usize,
    /// Convex hull of the embedded cluster vertices.
    pub hull: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureEdge {
    /// Site indices, `a < b`.
    pub a: usize,
    pub b: usize,
    /// Number of host edges between the two clusters.
    pub multiplicity: u64,
    /// Those host edges, sorted.
    pub lattice_edges: Vec<usize>,
}

/// Cluster-level graph. Weights are `multiplicity · δ^{5/4}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureGraph {
    pub mesh: f64,
    pub sites: Vec<StructureSite>,
    /// Sorted by `(a, b)`; at most one edge per site pair.
    pub edges: Vec<StructureEdge>,
}

impl StructureGraph {
    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn unit_weight(&self) -> f64 {
        edge_length_scale(self.mesh)
    }

    pub fn weight(&self, edge: usize) -> f64 {
        self.edges[edge].multiplicity as f64 * self.unit_weight()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.edges.len()).map(|i| self.weight(i)).collect()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.edges.iter().map(|e| e.multiplicity).sum()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search_by(|e| (e.a, e.b).cmp(&key)).ok()
    }

    /// The graph with conductance `multiplicity` on each edge and labels
    /// equal to structure edge indices. The weighted spanning tree law does
    /// not depend on the global factor `δ^{5/4}`.
    pub fn to_weighted_graph(&self) -> Result<WeightedGraph> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| GraphEdge {
                u: e.a,
                v: e.b,
                conductance: e.multiplicity as f64,
                label: i,
            })
            .collect();
        WeightedGraph::new(self.sites.len(), edges)
    }

    pub fn is_connected(&self) -> bool {
        let mut d = crate::dsu::DisjointSets::new(self.sites.len());
        for e in &self.edges {
            d.union(e.a, e.b);
        }
        d.sets() <= 1
    }

    pub fn summary(&self) -> GraphSummary {
        GraphSummary {
            sites: self.sites.len(),
            edges: self.edges.len(),
            total_multiplicity: self.total_multiplicity(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("structure graphs serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidGraph(e.to_string()))
    }
}

/// One site per forest component; one edge per adjacent pair, with the host
/// edges between them.
pub fn extract_structure_graph<H: ForestHost + ?Sized>(host: &H, forest: &SpanningForest, mesh: f64) -> StructureGraph {
    let k = forest.component_count();
    let mut points: Vec<Vec<Point>> = vec![Vec::new(); k];
    for v in 0..host.vertex_count() {
        if let Some(p) = host.position(v) {
            points[forest.component_of(v)].push(p);
        }
    }
    let sites = forest
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| StructureSite {
            label: i,
            vertex_count: c.size,
            diameter: c.diameter,
            representative: c.representative,
            hull: geometry::convex_hull(&points[i]),
        })
        .collect();
    let mut pairs: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
    for f in 0..host.edge_count() {
        let [x, y] = host.endpoints(f);
        let (p, q) = (forest.component_of(x), forest.component_of(y));
        if p != q {
            pairs.entry((p.min(q), p.max(q))).or_default().push(f);
        }
    }
    let edges = pairs
        .into_iter()
        .map(|((a, b), lattice_edges)| StructureEdge {
            a,
            b,
            multiplicity: lattice_edges.len() as u64,
            lattice_edges,
        })
        .collect();
    StructureGraph { mesh, sites, edges }
}

/// Induced subgraph on sites of diameter at least `epsilon`.
pub fn truncate(s: &StructureGraph, epsilon: f64) -> Result<StructureGraph> {
    if !(epsilon >= 0.0) {
        return Err(Error::Precondition(format!("truncation scale {epsilon} must be ≥ 0")));
    }
    let mut index = vec![usize::MAX; s.sites.len()];
    let mut sites = Vec::new();
    for (i, site) in s.sites.iter().enumerate() {
        if site.diameter >= epsilon {
            index[i] = sites.len();
            sites.push(site.clone());
        }
    }
    let edges = s
        .edges
        .iter()
        .filter(|e| index[e.a] != usize::MAX && index[e.b] != usize::MAX)
        .map(|e| StructureEdge {
            a: index[e.a],
            b: index[e.b],
            ..e.clone()
        })
        .collect();
    Ok(StructureGraph {
        mesh: s.mesh,
        sites,
        edges,
    })
}

/// Merges the endpoints of structure edge `edge`. The merged site takes the
/// smaller index; multiplicities toward common neighbors add.
pub fn collapse(s: &StructureGraph, edge: usize) -> Result<StructureGraph> {
    let e = s.edges.get(edge).ok_or(Error::EdgeNotFound(edge))?;
    let (keep, gone) = (e.a, e.b);
    let map = |x: usize| -> usize {
        match x.cmp(&gone) {
            std::cmp::Ordering::Less => x,
            std::cmp::Ordering::Equal => keep,
            std::cmp::Ordering::Greater => x - 1,
        }
    };
    let mut sites = s.sites.clone();
    let removed = sites.remove(gone);
    {
        let merged = &mut sites[keep];
        merged.vertex_count += removed.vertex_count;
        merged.representative = merged.representative.min(removed.representative);
        let mut pts = merged.hull.clone();
        pts.extend_from_slice(&removed.hull);
        merged.diameter = geometry::diameter(&pts);
        merged.hull = geometry::convex_hull(&pts);
    }
    let mut pairs: std::collections::BTreeMap<(usize, usize), StructureEdge> = Default::default();
    for (i, f) in s.edges.iter().enumerate() {
        if i == edge {
            continue;
        }
        let (a, b) = (map(f.a), map(f.b));
        let key = (a.min(b), a.max(b));
        match pairs.get_mut(&key) {
            Some(acc) => {
                acc.multiplicity += f.multiplicity;
                acc.lattice_edges.extend_from_slice(&f.lattice_edges);
                acc.lattice_edges.sort_unstable();
            }
            None => {
                pairs.insert(
                    key,
                    StructureEdge {
                        a: key.0,
                        b: key.1,
                        multiplicity: f.multiplicity,
                        lattice_edges: f.lattice_edges.clone(),
                    },
                );
            }
        }
    }
    Ok(StructureGraph {
        mesh: s.mesh,
        sites,
        edges: pairs.into_values().collect(),
    })
}

/// Checks the weight-addition rule on integer multiplicities: every edge of
/// `after` from the merged site carries the sum of the two old edges, and
/// every other edge is unchanged.
pub fn addition_rule_holds(before: &StructureGraph, edge: usize, after: &StructureGraph) -> bool {
    let Some(e) = before.edges.get(edge) else { return false };
    let (s, s2) = (e.a, e.b);
    if after.site_count() + 1 != before.site_count() {
        return false;
    }
    let old = |x: usize, y: usize| before.edge_between(x, y).map_or(0, |i| before.edges[i].multiplicity);
    // new index -> old indices
    let back = |x: usize| if x < s2 { x } else { x + 1 };
    let n = after.site_count();
    for x in 0..n {
        for y in x + 1..n {
            let now = after.edge_between(x, y).map_or(0, |i| after.edges[i].multiplicity);
            let (ox, oy) = (back(x), back(y));
            let expected = if ox == s {
                old(s, oy) + old(s2, oy)
            } else if oy == s {
                old(ox, s) + old(ox, s2)
            } else {
                old(ox, oy)
            };
            if now != expected {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClockScheme {
    Uniform,
    Homogeneous,
    Resistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub sites: usize,
    pub edges: usize,
    pub total_multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueEvent {
    pub time: f64,
    /// Index of the opened edge in the graph just before the merge.
    pub edge: usize,
    /// Sites it joined, in that graph.
    pub sites: (usize, usize),
    /// Multiplicity of the opened edge at the time it opened.
    pub multiplicity: u64,
    /// Host edge chosen uniformly among the `multiplicity` candidates.
    pub lattice_edge: usize,
    pub after: GraphSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingTrajectory {
    pub scheme: ClockScheme,
    pub initial: StructureGraph,
    pub events: Vec<GlueEvent>,
}

impl GluingTrajectory {
    /// Replays the merges, checking the addition rule at every step; returns
    /// the final graph.
    pub fn replay(&self) -> Result<StructureGraph> {
        let mut g = self.initial.clone();
        for (k, ev) in self.events.iter().enumerate() {
            let next = collapse(&g, ev.edge)?;
            if !addition_rule_holds(&g, ev.edge, &next) {
                return Err(Error::Invariant(format!("addition rule broken at merge {k}")));
            }
            g = next;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trajectories serialize")
    }
}

/// Opens the edges of `tree` (structure edge indices of `s`) at the given
/// times, in time order with ties broken by edge index.
fn replay_openings<R: Rng + ?Sized>(
    s: &StructureGraph,
    scheme: ClockScheme,
    mut openings: Vec<(f64, usize)>,
    rng: &mut R,
) -> Result<GluingTrajectory> {
    openings.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    // original site -> current site
    let mut at: Vec<usize> = (0..s.site_count()).collect();
    let mut g = s.clone();
    let mut events = Vec::with_capacity(openings.len());
    for (time, orig) in openings {
        let e = &s.edges[orig];
        let (a, b) = (at[e.a], at[e.b]);
        let edge = g
            .edge_between(a, b)
            .ok_or_else(|| Error::Invariant("opened edge joins merged sites".into()))?;
        let cur = &g.edges[edge];
        let lattice_edge = cur.lattice_edges[rng.random_range(0..cur.lattice_edges.len())];
        let multiplicity = cur.multiplicity;
        let sites = (cur.a, cur.b);
        let gone = cur.b;
        g = collapse(&g, edge)?;
        for x in at.iter_mut() {
            if *x == gone {
                *x = sites.0;
            } else if *x > gone {
                *x -= 1;
            }
        }
        events.push(GlueEvent {
            time,
            edge,
            sites,
            multiplicity,
            lattice_edge,
            after: g.summary(),
        });
    }
    Ok(GluingTrajectory {
        scheme,
        initial: s.clone(),
        events,
    })
}

/// Weighted spanning tree of `s` (conductance = multiplicity), as structure
/// edge indices.
pub fn structure_spanning_tree<R: Rng + ?Sized>(s: &StructureGraph, rng: &mut R) -> Result<Vec<usize>> {
    if s.site_count() <= 1 {
        return Ok(Vec::new());
    }
    if !s.is_connected() {
        return Err(Error::Disconnected);
    }
    let g = s.to_weighted_graph()?;
    wilson_ust(&g, &Root::Vertex(0), None, rng)
}

/// Gluing with i.i.d. uniform opening times on `(t, 0)`.
pub fn glue_uniform<R: Rng + ?Sized>(s: &StructureGraph, t: f64, rng: &mut R) -> Result<GluingTrajectory> {
    if !(t < 0.0) {
        return Err(Error::Precondition(format!("start time {t} must be negative")));
    }
    let tree = structure_spanning_tree(s, rng)?;
    let openings = tree.into_iter().map(|e| (t * rng.random::<f64>(), e)).collect();
    replay_openings(s, ClockScheme::Uniform, openings, rng)
}

/// Gluing with i.i.d. Exp(1) opening clocks; edges whose clock exceeds
/// `duration` stay closed. `duration` may be infinite.
pub fn glue_homogeneous<R: Rng + ?Sized>(s: &StructureGraph, duration: f64, rng: &mut R) -> Result<GluingTrajectory> {
    if !(duration > 0.0) {
        return Err(Error::Precondition(format!("duration {duration} must be positive")));
    }
    let tree = structure_spanning_tree(s, rng)?;
    let openings = tree
        .into_iter()
        .map(|e| (rng.sample::<f64, _>(Exp1), e))
        .filter(|&(xi, _)| xi <= duration)
        .collect();
    replay_openings(s, ClockScheme::Homogeneous, openings, rng)
}

/// Homogeneous clock equivalent to a cut time `tau` in `[t, 0)`.
pub fn homogeneous_clock(t: f64, tau: f64) -> f64 {
    (t / tau).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEvent {
    pub time: f64,
    /// Edge id in the original graph.
    pub edge: usize,
    /// Total opening rate just before the event.
    pub total_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceTrajectory {
    pub events: Vec<RateEvent>,
}

impl ResistanceTrajectory {
    /// Opened edges, sorted.
    pub fn opened(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.events.iter().map(|e| e.edge).collect();
        v.sort_unstable();
        v
    }
}

/// Continuous-time chain opening each edge at rate `c(e) · R_eff(e)` in the
/// graph contracted along the edges already open. Runs until one vertex
/// remains or `duration` elapses (`f64::INFINITY` runs to completion).
pub fn glue_resistance_rates<R: Rng + ?Sized>(g: &WeightedGraph, duration: f64, rng: &mut R) -> Result<ResistanceTrajectory> {
    if g.vertex_count() > RESISTANCE_CHAIN_LIMIT {
        return Err(Error::TooLarge {
            what: "resistance-rate chain",
            size: g.vertex_count(),
            limit: RESISTANCE_CHAIN_LIMIT,
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let labelled = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| GraphEdge { label: i, ..*e })
        .collect();
    let mut h = WeightedGraph::new(g.vertex_count(), labelled)?;
    let mut time = 0.0;
    let mut events = Vec::new();
    while h.vertex_count() > 1 {
        let r = h.edge_resistances()?;
        let rates: Vec<f64> = h.edges().iter().zip(&r).map(|(e, r)| e.conductance * r).collect();
        let total: f64 = rates.iter().sum();
        let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
        if time + wait > duration {
            break;
        }
        time += wait;
        let mut x = rng.random::<f64>() * total;
        let mut pick = rates.len() - 1;
        for (i, &q) in rates.iter().enumerate() {
            x -= q;
            if x < 0.0 {
                pick = i;
                break;
            }
        }
        events.push(RateEvent {
            time,
            edge: h.edges()[pick].label,
            total_rate: total,
        });
        h = h.contract_edge(pick)?;
    }
    Ok(ResistanceTrajectory { events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{forest_at, sample_cut_schedule};
    use crate::graph::fixtures;
    use crate::lattice::{build_box_domain, build_rect_domain, BoundaryCondition};
    use crate::rng::stream;
    use crate::sampling::boundary_ust;
    use crate::stats::chi_square_gof;
    use std::collections::HashMap;

    fn star() -> StructureGraph {
        // centre 0 joined to 1, 2, 3 with multiplicities 1, 2, 3
        let site = |i: usize| StructureSite {
            label: i,
            vertex_count: 1,
            diameter: 0.0,
            representative: i,
            hull: vec![[i as f64, 0.0]],
        };
        StructureGraph {
            mesh: 0.5,
            sites: (0..4).map(site).collect(),
            edges: (1..4)
                .map(|b| StructureEdge {
                    a: 0,
                    b,
                    multiplicity: b as u64,
                    lattice_edges: (0..b).map(|k| 10 * b + k).collect(),
                })
                .collect(),
        }
    }

    fn triangle_sites() -> StructureGraph {
        let g = fixtures::triangle();
        let f = SpanningForest::empty(&g);
        extract_structure_graph(&g, &f, 1.0)
    }

    #[test]
    fn extraction_examples() {
        let d = build_box_domain(2, 1.0, BoundaryCondition::Free).unwrap();
        let tree = boundary_ust(&d, &mut stream(0, 0)).unwrap();
        let s = extract_structure_graph(&d, &tree, 1.0);
        assert_eq!((s.site_count(), s.edge_count()), (1, 0));

        let bar = build_rect_domain(2, 1, 0.25, BoundaryCondition::Free).unwrap();
        let s = extract_structure_graph(&bar, &SpanningForest::empty(&bar), 0.25);
        assert_eq!((s.site_count(), s.edge_count()), (2, 1));
        assert_eq!(s.edges[0].multiplicity, 1);
        assert_eq!(s.weight(0), 0.25f64.powf(1.25));

        let r = build_rect_domain(3, 2, 1.0, BoundaryCondition::Free).unwrap();
        let rows: Vec<usize> = (0..r.edge_count())
            .filter(|&e| {
                let [a, b] = r.edges()[e];
                r.lattice_coords(a).unwrap()[1] == r.lattice_coords(b).unwrap()[1]
            })
            .collect();
        let s = extract_structure_graph(&r, &SpanningForest::new(&r, rows).unwrap(), 1.0);
        assert_eq!((s.site_count(), s.edge_count()), (2, 1));
        assert_eq!(s.edges[0].multiplicity, 3);
        assert_eq!(s.weight(0), 3.0);
    }

    #[test]
    fn truncation() {
        let d = build_box_domain(4, 0.25, BoundaryCondition::Free).unwrap();
        let mut rng = stream(1, 0);
        let tree = boundary_ust(&d, &mut rng).unwrap();
        let sched = sample_cut_schedule(&tree, d.mesh(), &mut rng).unwrap();
        let f = forest_at(&d, &sched, -30.0).unwrap();
        let s = extract_structure_graph(&d, &f, d.mesh());
        assert!(s.site_count() > 3);
        assert_eq!(truncate(&s, 0.0).unwrap(), s);
        assert_eq!(truncate(&s, 10.0).unwrap().site_count(), 0);
        let mut prev = truncate(&s, 0.0).unwrap();
        for eps in [0.2, 0.3, 0.6, 1.0, 3.0] {
            let cur = truncate(&s, eps).unwrap();
            let labels: Vec<usize> = cur.sites.iter().map(|x| x.label).collect();
            assert!(labels.iter().all(|l| prev.sites.iter().any(|p| p.label == *l)));
            assert!(cur.edges.iter().all(|e| {
                let (la, lb) = (cur.sites[e.a].label, cur.sites[e.b].label);
                let i = s.edge_between(la, lb).unwrap();
                s.edges[i].multiplicity == e.multiplicity
            }));
            prev = cur;
        }
    }

    #[test]
    fn collapse_examples() {
        let s = star();
        let c = collapse(&s, 0).unwrap();
        assert_eq!(c.site_count(), 3);
        assert_eq!(c.edges.iter().map(|e| e.multiplicity).collect::<Vec<_>>(), vec![2, 3]);
        assert!(addition_rule_holds(&s, 0, &c));
        assert_eq!(collapse(&s, 9), Err(Error::EdgeNotFound(9)));

        let t = triangle_sites();
        assert_eq!(t.edges.iter().map(|e| e.multiplicity).collect::<Vec<_>>(), vec![1, 1, 1]);
        let c = collapse(&t, 0).unwrap();
        assert_eq!(c.edge_count(), 1);
        assert_eq!(c.edges[0].multiplicity, 2);
        assert_eq!(c.weight(0), 2.0);
        assert_eq!(c.edges[0].lattice_edges.len(), 2);
    }

    #[test]
    fn collapse_conserves_cut_multiplicity() {
        let s = star();
        // cut {0,1} | {2,3}: total multiplicity 2 + 3
        let c = collapse(&s, 0).unwrap();
        assert_eq!(c.total_multiplicity(), 5);
        let broken = StructureGraph {
            edges: vec![StructureEdge { multiplicity: 9, ..c.edges[0].clone() }, c.edges[1].clone()],
            ..c.clone()
        };
        assert!(!addition_rule_holds(&s, 0, &broken));
    }

    #[test]
    fn extraction_commutes_with_collapse() {
        for bc in [BoundaryCondition::Free, BoundaryCondition::Wired] {
            let d = build_box_domain(4, 0.5, bc).unwrap();
            let mut rng = stream(2, 0);
            for _ in 0..40 {
                let tree = boundary_ust(&d, &mut rng).unwrap();
                let sched = sample_cut_schedule(&tree, d.mesh(), &mut rng).unwrap();
                let f = forest_at(&d, &sched, -3.0).unwrap();
                let s = extract_structure_graph(&d, &f, d.mesh());
                for (_, e) in sched.cut_events(-3.0) {
                    let [x, y] = d.edges()[e];
                    let (cx, cy) = (f.component_of(x), f.component_of(y));
                    let mut edges = f.edges().to_vec();
                    edges.push(e);
                    let merged = SpanningForest::new(&d, edges).unwrap();
                    let direct = extract_structure_graph(&d, &merged, d.mesh());
                    let via = collapse(&s, s.edge_between(cx, cy).unwrap()).unwrap();
                    assert_eq!(direct.edges, via.edges);
                    for (p, q) in direct.sites.iter().zip(&via.sites) {
                        assert_eq!(
                            (p.vertex_count, p.representative, p.diameter),
                            (q.vertex_count, q.representative, q.diameter)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn uniform_gluing() {
        let mut rng = stream(3, 0);
        let single = StructureGraph {
            mesh: 1.0,
            sites: star().sites[..1].to_vec(),
            edges: vec![],
        };
        assert!(glue_uniform(&single, -1.0, &mut rng).unwrap().events.is_empty());
        let pair = collapse(&collapse(&star(), 2).unwrap(), 1).unwrap();
        assert_eq!(pair.site_count(), 2);
        let tr = glue_uniform(&pair, -2.0, &mut rng).unwrap();
        assert_eq!(tr.events.len(), 1);
        assert!(tr.events[0].time > -2.0 && tr.events[0].time < 0.0);
        // path of three sites: both edges open, order uniform
        let path = collapse(&star(), 2).unwrap();
        assert_eq!(path.edge_count(), 2);
        let mut first = [0u64; 2];
        for _ in 0..20_000 {
            let tr = glue_uniform(&path, -1.0, &mut rng).unwrap();
            assert_eq!(tr.events.len(), 2);
            assert!(tr.events[0].time < tr.events[1].time);
            assert_eq!(tr.replay().unwrap().site_count(), 1);
            let m = tr.events[0].multiplicity;
            first[usize::from(m != 1)] += 1;
        }
        let t = chi_square_gof(&first, &[0.5, 0.5]).unwrap();
        assert!(t.p_value > 0.001, "{t:?}");
        let mut disconnected = star();
        disconnected.edges.pop();
        assert_eq!(glue_uniform(&disconnected, -1.0, &mut rng), Err(Error::Disconnected));
    }

    #[test]
    fn structure_tree_law_is_weighted() {
        // triangle of sites with multiplicities (2,1,1) against enumeration
        let g = fixtures::triangle();
        let mut s = extract_structure_graph(&g, &SpanningForest::empty(&g), 1.0);
        s.edges[0].multiplicity = 2;
        let oracle = fixtures::weighted_triangle().enumerate_spanning_trees().unwrap();
        let z: f64 = oracle.iter().map(|t| t.weight).sum();
        let mut rng = stream(4, 0);
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for _ in 0..30_000 {
            *counts.entry(structure_spanning_tree(&s, &mut rng).unwrap()).or_default() += 1;
        }
        let observed: Vec<u64> = oracle.iter().map(|t| counts.get(&t.edges).copied().unwrap_or(0)).collect();
        let probs: Vec<f64> = oracle.iter().map(|t| t.weight / z).collect();
        assert!(chi_square_gof(&observed, &probs).unwrap().p_value > 0.001);
    }

    #[test]
    fn homogeneous_gluing() {
        assert_eq!(homogeneous_clock(-std::f64::consts::E, -1.0), 1.0);
        let pair = collapse(&collapse(&star(), 2).unwrap(), 1).unwrap();
        let mut rng = stream(5, 0);
        let u = 0.7;
        let n = 40_000;
        let merged = (0..n)
            .filter(|_| !glue_homogeneous(&pair, u, &mut rng).unwrap().events.is_empty())
            .count();
        let p = 1.0 - (-u).exp();
        assert!((merged as f64 / n as f64 - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
        let tr = glue_homogeneous(&star(), f64::INFINITY, &mut rng).unwrap();
        assert_eq!(tr.replay().unwrap().site_count(), 1);
    }

    #[test]
    fn rescaled_weights_leave_gluing_law_unchanged() {
        let s = star();
        let mut scaled = s.clone();
        scaled.mesh = s.mesh * 16.0;
        let a = glue_homogeneous(&s, 1.5, &mut stream(6, 3)).unwrap();
        let b = glue_homogeneous(&scaled, 1.5, &mut stream(6, 3)).unwrap();
        let strip = |t: &GluingTrajectory| t.events.iter().map(|e| (e.time, e.edge, e.lattice_edge)).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn resistance_chain() {
        let mut rng = stream(7, 0);
        let one = fixtures::path(2);
        let tr = glue_resistance_rates(&one, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(tr.events.len(), 1);
        assert!((tr.events[0].total_rate - 1.0).abs() < 1e-12);
        let k3 = fixtures::triangle();
        let tr = glue_resistance_rates(&k3, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(tr.events.len(), 2);
        assert!((tr.events[0].total_rate - 2.0).abs() < 1e-12);
        let r = k3.edge_resistances().unwrap();
        assert!(r.iter().all(|x| (x - 2.0 / 3.0).abs() < 1e-12));
        assert!(glue_resistance_rates(&fixtures::grid(21, 20), 1.0, &mut rng).is_err());
    }

    #[test]
    fn resistance_chain_completes_to_ust() {
        for g in [fixtures::triangle(), fixtures::cycle(4), fixtures::weighted_triangle(), fixtures::grid(3, 2)] {
            let trees = g.enumerate_spanning_trees().unwrap();
            let z: f64 = trees.iter().map(|t| t.weight).sum();
            let mut rng = stream(8, 0);
            let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
            for _ in 0..20_000 {
                *counts.entry(glue_resistance_rates(&g, f64::INFINITY, &mut rng).unwrap().opened()).or_default() += 1;
            }
            let observed: Vec<u64> = trees.iter().map(|t| counts.get(&t.edges).copied().unwrap_or(0)).collect();
            assert_eq!(observed.iter().sum::<u64>(), 20_000);
            let probs: Vec<f64> = trees.iter().map(|t| t.weight / z).collect();
            let t = chi_square_gof(&observed, &probs).unwrap();
            assert!(t.p_value > 0.001, "{t:?}");
        }
    }

    #[test]
    fn json_round_trip() {
        let s = star();
        assert_eq!(StructureGraph::from_json(&s.to_json()).unwrap(), s);
    }
}
