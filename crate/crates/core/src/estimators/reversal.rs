//! Backward cutting against forward gluing: exact enumeration on tiny
//! domains and an empirical total-variation test on small ones.
//!
//! Cut times run backward as truncated exponentials while gluing opens edges
//! at uniform times, so the two are compared through the order of merges and
//! the clusters involved, which is where the laws must agree.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Replicates;
use crate::dsu::DisjointSets;
use crate::dynamics::{forest_at, sample_cut_schedule};
use crate::error::{Error, Result};
use crate::forest::{ForestHost, SpanningForest};
use crate::lattice::LatticeDomain;
use crate::rng::replicate_map;
use crate::sampling::boundary_ust;
use crate::structure::{collapse, extract_structure_graph, glue_uniform, GluingTrajectory, StructureGraph};

/// Largest domain (in vertices) for the exact enumeration.
pub const EXACT_REVERSAL_LIMIT: usize = 6;

/// One merge seen at cluster level: the sizes of the two clusters (smaller
/// first) and the number of lattice edges between them at that moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MergeStep {
    pub sizes: (usize, usize),
    pub multiplicity: u64,
}

fn step(g: &StructureGraph, edge: usize) -> MergeStep {
    let e = &g.edges[edge];
    let (x, y) = (g.sites[e.a].vertex_count, g.sites[e.b].vertex_count);
    MergeStep {
        sizes: (x.min(y), x.max(y)),
        multiplicity: e.multiplicity,
    }
}

/// Merge trace of the backward dynamics: `reappearing` lists the cut edges of
/// `forest` in the order they come back.
pub fn merge_trace_backward<H: ForestHost + ?Sized>(
    host: &H,
    forest: &SpanningForest,
    mesh: f64,
    reappearing: &[usize],
) -> Result<Vec<MergeStep>> {
    let mut g = extract_structure_graph(host, forest, mesh);
    let mut at: Vec<usize> = (0..g.site_count()).collect();
    let mut out = Vec::with_capacity(reappearing.len());
    for &e in reappearing {
        if e >= host.edge_count() {
            return Err(Error::EdgeNotFound(e));
        }
        let [x, y] = host.endpoints(e);
        let (a, b) = (at[forest.component_of(x)], at[forest.component_of(y)]);
        let edge = g
            .edge_between(a, b)
            .ok_or_else(|| Error::Invariant(format!("edge {e} does not join two clusters")))?;
        out.push(step(&g, edge));
        let (keep, gone) = (g.edges[edge].a, g.edges[edge].b);
        g = collapse(&g, edge)?;
        for s in at.iter_mut() {
            if *s == gone {
                *s = keep;
            } else if *s > gone {
                *s -= 1;
            }
        }
    }
    Ok(out)
}

/// Merge trace of a gluing trajectory.
pub fn merge_trace_forward(traj: &GluingTrajectory) -> Result<Vec<MergeStep>> {
    let mut g = traj.initial.clone();
    let mut out = Vec::with_capacity(traj.events.len());
    for ev in &traj.events {
        out.push(step(&g, ev.edge));
        g = collapse(&g, ev.edge)?;
    }
    Ok(out)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// A merge recorded by the vertex sets it joins (lexicographically smaller set first).
type ExactStep = (Vec<usize>, Vec<usize>);

/// Replays merges of clusters, given each merge as a pair of vertices.
fn exact_trace(clusters: &[Vec<usize>], labels: &[usize], merges: impl Iterator<Item = (usize, usize)>) -> Vec<ExactStep> {
    let mut dsu = DisjointSets::new(clusters.len());
    let mut sets: Vec<Vec<usize>> = clusters.to_vec();
    let mut out = Vec::new();
    for (x, y) in merges {
        let (a, b) = (dsu.find(labels[x]), dsu.find(labels[y]));
        let (sa, sb) = (sets[a].clone(), sets[b].clone());
        out.push(if sa <= sb { (sa, sb) } else { (sb, sa) });
        dsu.union(a, b);
        let r = dsu.find(a);
        let mut merged = [sets[a].as_slice(), sets[b].as_slice()].concat();
        merged.sort_unstable();
        sets[r] = merged;
    }
    out
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

type Law<K> = BTreeMap<K, BigRational>;

fn normalize<K: Ord>(counts: BTreeMap<K, BigInt>) -> Law<K> {
    let total: BigInt = counts.values().sum();
    counts
        .into_iter()
        .map(|(k, c)| (k, BigRational::new(c, total.clone())))
        .collect()
}

fn tv<K: Ord + Clone>(a: &Law<K>, b: &Law<K>) -> BigRational {
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let zero = BigRational::zero();
    let sum: BigRational = keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero)).abs())
        .sum();
    sum / BigRational::from_integer(BigInt::from(2))
}

/// Outcome of the exact comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactReversal {
    /// Conditional trace laws agree for every forest.
    pub ok: bool,
    /// Largest conditional total variation, as a reduced fraction.
    pub max_tv: String,
    /// Total variation of the joint (forest, trace) laws at the given time.
    pub tv: f64,
    pub forests: usize,
    pub outcomes: usize,
    /// Law of the cluster-level merge trace at the given time, for the noise
    /// floor of the sampled test.
    #[serde(skip)]
    pub summary_law: Vec<(Vec<MergeStep>, f64)>,
}

/// Enumerates every (tree, cut set, cut order) outcome of the backward
/// dynamics on `domain` and compares, forest by forest, the induced merge
/// trace law with that of gluing along a weighted spanning tree of the
/// structure graph in uniform order.
pub fn exact_time_reversal(domain: &LatticeDomain, t: f64) -> Result<ExactReversal> {
    exact_compare(domain, t, true)
}

/// `weighted = false` glues along uniform spanning trees of the structure
/// graph instead, a deliberately wrong law used as a negative control.
fn exact_compare(domain: &LatticeDomain, t: f64, weighted: bool) -> Result<ExactReversal> {
    if !(t < 0.0) {
        return Err(Error::Precondition(format!("time {t} must be negative")));
    }
    if domain.vertex_count() > EXACT_REVERSAL_LIMIT {
        return Err(Error::TooLarge {
            what: "exact time-reversal enumeration",
            size: domain.vertex_count(),
            limit: EXACT_REVERSAL_LIMIT,
        });
    }
    let g = domain.graph()?;
    let trees = g.enumerate_spanning_trees()?;
    let mesh = domain.mesh();
    let p_cut = 1.0 - (t * crate::dynamics::cut_rate(mesh)).exp();
    // forest edges -> (trace -> count); and forest -> probability
    let mut backward: BTreeMap<Vec<usize>, BTreeMap<Vec<ExactStep>, BigInt>> = BTreeMap::new();
    let mut summaries: BTreeMap<Vec<usize>, BTreeMap<Vec<MergeStep>, BigInt>> = BTreeMap::new();
    let mut forest_weight: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut outcomes = 0usize;
    let mut perms: HashMap<usize, Vec<Vec<usize>>> = HashMap::new();
    for tree in &trees {
        let k = tree.edges.len();
        for mask in 0u32..(1 << k) {
            let cut: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| tree.edges[i]).collect();
            let kept: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 0).map(|i| tree.edges[i]).collect();
            let forest = SpanningForest::new(domain, kept.clone())?;
            *forest_weight.entry(kept.clone()).or_default() +=
                p_cut.powi(cut.len() as i32) * (1.0 - p_cut).powi((k - cut.len()) as i32) / trees.len() as f64;
            let members = forest.members();
            let orders = perms.entry(cut.len()).or_insert_with(|| permutations(cut.len()));
            for order in orders.iter() {
                let seq: Vec<usize> = order.iter().map(|&i| cut[i]).collect();
                let trace = exact_trace(
                    &members,
                    forest.labels(),
                    seq.iter().map(|&e| {
                        let [a, b] = domain.edges()[e];
                        (a, b)
                    }),
                );
                *backward.entry(kept.clone()).or_default().entry(trace).or_default() += 1;
                let summary = merge_trace_backward(domain, &forest, mesh, &seq)?;
                *summaries.entry(kept.clone()).or_default().entry(summary).or_default() += 1;
                outcomes += 1;
            }
        }
    }
    let mut ok = true;
    let mut max_tv = BigRational::zero();
    let mut joint_tv = 0.0;
    for (kept, counts) in backward {
        let forest = SpanningForest::new(domain, kept.clone())?;
        let forward = forward_exact_law(domain, &forest, mesh, weighted)?;
        let back = normalize(counts);
        let d = tv(&back, &forward);
        if !d.is_zero() {
            ok = false;
        }
        joint_tv += forest_weight[&kept] * d.to_f64().unwrap_or(f64::NAN);
        if d > max_tv {
            max_tv = d;
        }
    }
    let mut summary_law: BTreeMap<Vec<MergeStep>, f64> = BTreeMap::new();
    let forests = summaries.len();
    for (kept, counts) in summaries {
        let w = forest_weight[&kept];
        for (s, p) in normalize(counts) {
            *summary_law.entry(s).or_default() += w * p.to_f64().unwrap_or(f64::NAN);
        }
    }
    Ok(ExactReversal {
        ok,
        max_tv: max_tv.to_string(),
        tv: joint_tv,
        forests,
        outcomes,
        summary_law: summary_law.into_iter().collect(),
    })
}

/// Law of the merge trace when gluing the structure graph of `forest` along
/// a spanning tree drawn with probability proportional to the product of
/// multiplicities, opened in uniform order.
fn forward_exact_law(
    domain: &LatticeDomain,
    forest: &SpanningForest,
    mesh: f64,
    weighted: bool,
) -> Result<Law<Vec<ExactStep>>> {
    let s = extract_structure_graph(domain, forest, mesh);
    let members = forest.members();
    let site_members: Vec<Vec<usize>> = s.sites.iter().map(|x| members[x.label].clone()).collect();
    let site_labels: Vec<usize> = (0..s.site_count()).collect();
    let mut weights: BTreeMap<Vec<ExactStep>, BigInt> = BTreeMap::new();
    if s.site_count() == 1 {
        weights.insert(Vec::new(), BigInt::one());
        return Ok(normalize(weights));
    }
    let wg = s.to_weighted_graph()?;
    let k = s.site_count() - 1;
    let orders = permutations(k);
    // every tree weight is divided by the same k!, so integer weights suffice
    debug_assert_eq!(factorial(k), BigInt::from(orders.len()));
    for tree in wg.enumerate_spanning_trees()? {
        let edges: Vec<usize> = tree.edges.iter().map(|&i| wg.edges()[i].label).collect();
        let weight: BigInt = edges
            .iter()
            .map(|&e| BigInt::from(if weighted { s.edges[e].multiplicity } else { 1 }))
            .product();
        for order in &orders {
            let trace = exact_trace(
                &site_members,
                &site_labels,
                order.iter().map(|&i| (s.edges[edges[i]].a, s.edges[edges[i]].b)),
            );
            *weights.entry(trace).or_default() += &weight;
        }
    }
    Ok(normalize(weights))
}

/// Result of [`time_reversal_tv_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalReport {
    /// Empirical total variation between forward and backward merge traces,
    /// or the exact value when no samples were requested.
    pub tv: f64,
    /// `None` when the domain is beyond the enumeration guard.
    pub exact_ok: Option<bool>,
    pub exact: Option<ExactReversal>,
    pub samples: usize,
    pub seed: u64,
    /// Expected empirical distance between two samples of the exact trace law.
    pub noise_floor: Option<f64>,
    pub categories: usize,
}

/// Empirical total variation between the merge traces of backward cutting
/// from time 0 to `t` and forward gluing from an independent forest at `t`.
pub fn sampled_time_reversal(domain: &LatticeDomain, t: f64, reps: Replicates) -> Result<(f64, usize)> {
    reps.check()?;
    if !(t < 0.0) {
        return Err(Error::Precondition(format!("time {t} must be negative")));
    }
    let mesh = domain.mesh();
    let backward = replicate_map(reps.seed, reps.samples, reps.workers, |_, rng| -> Result<Vec<MergeStep>> {
        let tree = boundary_ust(domain, rng)?;
        let sched = sample_cut_schedule(&tree, mesh, rng)?;
        let forest = forest_at(domain, &sched, t)?;
        let mut events = sched.cut_events(t);
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let order: Vec<usize> = events.into_iter().map(|(_, e)| e).collect();
        merge_trace_backward(domain, &forest, mesh, &order)
    })?;
    let fwd_reps = reps.derived(1);
    let forward = replicate_map(fwd_reps.seed, reps.samples, reps.workers, |_, rng| -> Result<Vec<MergeStep>> {
        let tree = boundary_ust(domain, rng)?;
        let sched = sample_cut_schedule(&tree, mesh, rng)?;
        let forest = forest_at(domain, &sched, t)?;
        let s = extract_structure_graph(domain, &forest, mesh);
        merge_trace_forward(&glue_uniform(&s, t, rng)?)
    })?;
    let mut counts: BTreeMap<Vec<MergeStep>, (u64, u64)> = BTreeMap::new();
    for b in backward {
        counts.entry(b?).or_default().0 += 1;
    }
    for f in forward {
        counts.entry(f?).or_default().1 += 1;
    }
    let n = reps.samples as f64;
    let d = counts
        .values()
        .map(|&(a, b)| (a as f64 - b as f64).abs())
        .sum::<f64>()
        / (2.0 * n);
    Ok((d, counts.len()))
}

/// Exact branch when the domain is within [`EXACT_REVERSAL_LIMIT`], sampled
/// branch when `reps.samples > 0`.
pub fn time_reversal_tv_test(domain: &LatticeDomain, t: f64, reps: Replicates) -> Result<ReversalReport> {
    let exact = if domain.vertex_count() <= EXACT_REVERSAL_LIMIT {
        Some(exact_time_reversal(domain, t)?)
    } else if reps.samples == 0 {
        return Err(Error::TooLarge {
            what: "exact time-reversal enumeration",
            size: domain.vertex_count(),
            limit: EXACT_REVERSAL_LIMIT,
        });
    } else {
        None
    };
    let (tv, categories) = if reps.samples > 0 {
        sampled_time_reversal(domain, t, reps)?
    } else {
        let e = exact.as_ref().expect("exact branch ran");
        (e.tv, e.summary_law.len())
    };
    let noise_floor = (reps.samples > 0).then_some(()).and(exact.as_ref()).map(|e| {
        let n = reps.samples as f64;
        e.summary_law
            .iter()
            .map(|(_, p)| (p * (1.0 - p) / (std::f64::consts::PI * n)).sqrt())
            .sum()
    });
    Ok(ReversalReport {
        tv,
        exact_ok: exact.as_ref().map(|e| e.ok),
        exact,
        samples: reps.samples,
        seed: reps.seed,
        noise_floor,
        categories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_rect_domain, BoundaryCondition::Free};

    #[test]
    fn single_edge_domain() {
        let d = build_rect_domain(2, 1, 1.0, Free).unwrap();
        let r = time_reversal_tv_test(&d, -1.0, Replicates::new(0, 0)).unwrap();
        assert_eq!(r.exact_ok, Some(true));
        assert_eq!(r.tv, 0.0);
        let e = r.exact.unwrap();
        assert_eq!((e.forests, e.outcomes), (2, 2));
        assert_eq!(e.max_tv, "0");
    }

    #[test]
    fn square_domain() {
        let d = build_rect_domain(2, 2, 1.0, Free).unwrap();
        let e = exact_time_reversal(&d, -0.7).unwrap();
        assert!(e.ok);
        assert_eq!(e.tv, 0.0);
        // 4 trees; a tree with c cuts has c! orders: 4 · (1 + 3 + 6 + 6)
        assert_eq!(e.outcomes, 64);
        let total: f64 = e.summary_law.iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_by_three_domain() {
        let d = build_rect_domain(3, 2, 1.0, Free).unwrap();
        let e = exact_time_reversal(&d, -1.0).unwrap();
        assert!(e.ok);
        assert_eq!(e.tv, 0.0);
    }

    #[test]
    fn a_wrong_forward_law_is_detected() {
        // Ignoring multiplicities when choosing the gluing tree must show up.
        let d = build_rect_domain(3, 2, 1.0, Free).unwrap();
        let e = exact_compare(&d, -1.0, false).unwrap();
        assert!(!e.ok);
        assert!(e.tv > 0.0);
    }

    #[test]
    fn guard() {
        let d = build_rect_domain(3, 3, 1.0, Free).unwrap();
        assert!(matches!(exact_time_reversal(&d, -1.0), Err(Error::TooLarge { .. })));
        assert!(time_reversal_tv_test(&d, -1.0, Replicates::new(0, 0)).is_err());
    }

    #[test]
    fn sampled_branch_small() {
        let d = build_rect_domain(3, 2, 1.0, Free).unwrap();
        let r = time_reversal_tv_test(&d, -1.0, Replicates::new(20_000, 3)).unwrap();
        let floor = r.noise_floor.unwrap();
        assert!(r.tv < 3.0 * floor, "tv {} floor {floor}", r.tv);
    }

    #[test]
    fn backward_trace_follows_clusters() {
        let d = build_rect_domain(3, 1, 1.0, Free).unwrap();
        // path 0-1-2 with both edges cut; bring back edge 1 (1-2) then edge 0
        let f = SpanningForest::empty(&d);
        let tr = merge_trace_backward(&d, &f, 1.0, &[1, 0]).unwrap();
        assert_eq!(
            tr,
            vec![
                MergeStep { sizes: (1, 1), multiplicity: 1 },
                MergeStep { sizes: (1, 2), multiplicity: 1 }
            ]
        );
        assert!(merge_trace_backward(&d, &f, 1.0, &[1, 1]).is_err());
    }
}
