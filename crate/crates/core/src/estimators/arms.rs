//! Annulus crossings of a tree: the four-arm event and the count of
//! disconnected crossings.

use serde::{Deserialize, Serialize};

use super::{meta, EstimateReport, Replicates};
use crate::dsu::DisjointSets;
use crate::error::{Error, Result};
use crate::forest::SpanningForest;
use crate::geometry::Point;
use crate::lattice::{build_box_domain, Annulus, BoundaryCondition, Duality, LatticeDomain};
use crate::rng::replicate_map;
use crate::sampling::{boundary_ust, dual_tree};
use crate::stats::fit_line;

/// Components of `forest ∩ annulus` meeting both rings, as union-find roots
/// of a structure whose classes are those components.
fn crossing_roots(domain: &LatticeDomain, forest: &SpanningForest, annulus: &Annulus) -> (DisjointSets, Vec<usize>) {
    let mut dsu = DisjointSets::new(domain.vertex_count());
    for &e in &annulus.edges {
        if forest.contains(e) {
            let [a, b] = domain.edges()[e];
            dsu.union(a, b);
        }
    }
    let mut touches_outer = vec![false; domain.vertex_count()];
    for &v in &annulus.outer_ring {
        let r = dsu.find(v);
        touches_outer[r] = true;
    }
    let mut roots = Vec::new();
    for &v in &annulus.inner_ring {
        let r = dsu.find(v);
        if touches_outer[r] && !roots.contains(&r) {
            roots.push(r);
        }
    }
    (dsu, roots)
}

/// Vertex sets of the crossing components of `forest` in the closed annulus
/// `inner ≤ |v − center| ≤ outer`, each sorted, ordered by smallest vertex.
pub fn crossing_components(
    domain: &LatticeDomain,
    forest: &SpanningForest,
    inner: f64,
    outer: f64,
    center: Point,
) -> Result<Vec<Vec<usize>>> {
    let annulus = domain.annulus_rings_at(center, inner, outer)?;
    let (mut dsu, roots) = crossing_roots(domain, forest, &annulus);
    let mut in_annulus = vec![false; domain.vertex_count()];
    for &e in &annulus.edges {
        for v in domain.edges()[e] {
            in_annulus[v] = true;
        }
    }
    for v in annulus.inner_ring.iter().chain(&annulus.outer_ring) {
        in_annulus[*v] = true;
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); roots.len()];
    for v in 0..domain.vertex_count() {
        if in_annulus[v] {
            if let Some(i) = roots.iter().position(|&r| r == dsu.find(v)) {
                out[i].push(v);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn joined_inside(domain: &LatticeDomain, forest: &SpanningForest, annulus: &Annulus) -> bool {
    let (mut crossing, roots) = crossing_roots(domain, forest, annulus);
    if roots.len() < 2 {
        return false;
    }
    // Sites strictly inside the inner ring's outer edge: the ball B(L) plus
    // the inner ring itself, where crossing components end.
    let reach = annulus.inner + domain.mesh();
    let c = annulus.center;
    let inside: Vec<bool> = domain
        .positions()
        .iter()
        .map(|p| p.is_some_and(|p| (p[0] - c[0]).hypot(p[1] - c[1]) < reach))
        .collect();
    let mut core = DisjointSets::new(domain.vertex_count());
    for &e in forest.edges() {
        let [a, b] = domain.edges()[e];
        if inside[a] && inside[b] {
            core.union(a, b);
        }
    }
    // core class -> first crossing component seen in it
    let mut owner: std::collections::HashMap<usize, usize> = Default::default();
    for &v in &annulus.inner_ring {
        let r = crossing.find(v);
        if !roots.contains(&r) {
            continue;
        }
        let k = core.find(v);
        match owner.get(&k) {
            Some(&other) if other != r => return true,
            Some(_) => {}
            None => {
                owner.insert(k, r);
            }
        }
    }
    false
}

/// Whether two distinct crossing components of `forest` in the annulus are
/// joined by forest edges lying within distance `inner + δ` of the center.
pub fn crossings_joined_inside(
    domain: &LatticeDomain,
    forest: &SpanningForest,
    inner: f64,
    outer: f64,
    center: Point,
) -> Result<bool> {
    let annulus = domain.annulus_rings_at(center, inner, outer)?;
    Ok(joined_inside(domain, forest, &annulus))
}

fn require_tree(f: &SpanningForest, what: &str) -> Result<()> {
    if !f.is_spanning_tree() {
        return Err(Error::NotSpanningTree(format!(
            "{what} has {} components",
            f.component_count()
        )));
    }
    Ok(())
}

/// Four-arm event around `center`: two crossings of the tree joined inside
/// the inner ball, or the same for the dual tree. Both trees must span.
pub fn detect_four_arm(
    domain: &LatticeDomain,
    tree: &SpanningForest,
    duality: &Duality,
    dual: &SpanningForest,
    inner: f64,
    outer: f64,
    center: Point,
) -> Result<bool> {
    require_tree(tree, "tree")?;
    require_tree(dual, "dual tree")?;
    let a = domain.annulus_rings_at(center, inner, outer)?;
    let b = duality.dual.annulus_rings_at(center, inner, outer)?;
    Ok(joined_inside(domain, tree, &a) || joined_inside(&duality.dual, dual, &b))
}

/// Number of crossing components of `forest` in `L ≤ |v − center| ≤ 3L`.
pub fn k_statistic(domain: &LatticeDomain, forest: &SpanningForest, inner: f64, center: Point) -> Result<usize> {
    let annulus = domain.annulus_rings_at(center, inner, 3.0 * inner)?;
    Ok(crossing_roots(domain, forest, &annulus).1.len())
}

/// Frequency of the four-arm event for the wired UST of the box of half-width
/// `half_width ≥ N` (mesh 1), around the origin.
pub fn four_arm_probability(inner: u32, outer: u32, half_width: u32, reps: Replicates) -> Result<EstimateReport> {
    reps.check()?;
    if !(inner >= 1 && inner < outer && outer <= half_width) {
        return Err(Error::Precondition(format!(
            "four-arm estimate needs 1 <= L < N <= half-width, got {inner}, {outer}, {half_width}"
        )));
    }
    let domain = build_box_domain(half_width, 1.0, BoundaryCondition::Wired)?;
    let duality = domain.dual()?;
    let (l, n) = (inner as f64, outer as f64);
    let a = domain.annulus_rings(l, n)?;
    let b = duality.dual.annulus_rings(l, n)?;
    let hits = replicate_map(reps.seed, reps.samples, reps.workers, |_, rng| -> Result<f64> {
        let tree = boundary_ust(&domain, rng)?;
        if joined_inside(&domain, &tree, &a) {
            return Ok(1.0);
        }
        let dual = dual_tree(&tree, &duality)?;
        Ok(joined_inside(&duality.dual, &dual, &b) as u8 as f64)
    })?
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(EstimateReport::from_values(
        &hits,
        reps.seed,
        meta(&[
            ("quantity", "four-arm".into()),
            ("inner", inner.to_string()),
            ("outer", outer.to_string()),
            ("half_width", half_width.to_string()),
        ]),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourArmPoint {
    pub inner: u32,
    pub outer: u32,
    pub probability: EstimateReport,
    /// `P̂ · (N/L)^{3/4}` and its standard error.
    pub normalized: f64,
    pub normalized_stderr: f64,
}

/// Four-arm frequencies at `N = ratio · L` for each ratio, on wired boxes of
/// half-width `N` (the outer ring touches the wired boundary), with the slope of the normalized frequency against
/// `log(N/L)`. Returns the points and `(slope, slope_stderr)`.
pub fn four_arm_sweep(inner: u32, ratios: &[u32], reps: Replicates) -> Result<(Vec<FourArmPoint>, (f64, f64))> {
    let mut points = Vec::with_capacity(ratios.len());
    for &k in ratios {
        let outer = inner * k;
        let p = four_arm_probability(inner, outer, outer, reps.derived(outer as u64))?;
        let scale = (k as f64).powf(0.75);
        points.push(FourArmPoint {
            inner,
            outer,
            normalized: p.estimate * scale,
            normalized_stderr: p.stderr * scale,
            probability: p,
        });
    }
    let x: Vec<f64> = ratios.iter().map(|&k| (k as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.normalized).collect();
    let s: Vec<f64> = points.iter().map(|p| p.normalized_stderr).collect();
    let fit = fit_line(&x, &y, &s)?;
    Ok((points, (fit.slope, fit.slope_stderr)))
}

/// Mean number of crossing components of the wired UST of a box of
/// half-width `half_width` in the annulus `L ≤ |v| ≤ 3L`.
pub fn estimate_k_statistic(inner: u32, half_width: u32, reps: Replicates) -> Result<EstimateReport> {
    reps.check()?;
    if inner < 1 || 3 * inner >= half_width {
        return Err(Error::Geometry(format!(
            "ball of radius {} does not fit strictly inside half-width {half_width}",
            3 * inner
        )));
    }
    let domain = build_box_domain(half_width, 1.0, BoundaryCondition::Wired)?;
    let annulus = domain.annulus_rings(inner as f64, 3.0 * inner as f64)?;
    let values = replicate_map(reps.seed, reps.samples, reps.workers, |_, rng| -> Result<f64> {
        let tree = boundary_ust(&domain, rng)?;
        Ok(crossing_roots(&domain, &tree, &annulus).1.len() as f64)
    })?
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(EstimateReport::from_values(
        &values,
        reps.seed,
        meta(&[
            ("quantity", "k-statistic".into()),
            ("inner", inner.to_string()),
            ("half_width", half_width.to_string()),
        ]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoundaryCondition::*;
    use crate::rng::stream;

    /// Horizontal axis plus vertical teeth from every axis vertex.
    fn comb(d: &LatticeDomain, n: i32) -> SpanningForest {
        let mut edges = Vec::new();
        for (e, &[a, b]) in d.edges().iter().enumerate() {
            let (pa, pb) = (d.lattice_coords(a).unwrap(), d.lattice_coords(b).unwrap());
            let horizontal_axis = pa[1] == 0 && pb[1] == 0;
            let vertical = pa[0] == pb[0];
            if horizontal_axis || vertical {
                edges.push(e);
            }
        }
        let t = SpanningForest::new(d, edges).unwrap();
        assert!(t.is_spanning_tree());
        assert_eq!(t.edge_count(), ((2 * n + 1) * (2 * n + 1) - 1) as usize);
        t
    }

    #[test]
    fn comb_has_four_arms_through_primal_scenario() {
        let d = build_box_domain(6, 1.0, Free).unwrap();
        let t = comb(&d, 6);
        let dual = d.dual().unwrap();
        let dt = dual_tree(&t, &dual).unwrap();
        let c = [0.0, 0.0];
        assert!(crossings_joined_inside(&d, &t, 2.0, 5.0, c).unwrap());
        // dual arms are vertical half-lines cut by the axis, only joined far away
        assert!(!crossings_joined_inside(&dual.dual, &dt, 2.0, 5.0, c).unwrap());
        assert!(detect_four_arm(&d, &t, &dual, &dt, 2.0, 5.0, c).unwrap());
        let back = dual.inverse(&d);
        assert!(detect_four_arm(&dual.dual, &dt, &back, &t, 2.0, 5.0, c).unwrap());
    }

    #[test]
    fn edgeless_input_is_rejected() {
        let d = build_box_domain(6, 1.0, Free).unwrap();
        let dual = d.dual().unwrap();
        let empty = SpanningForest::empty(&d);
        let dual_empty = SpanningForest::empty(&dual.dual);
        assert!(matches!(
            detect_four_arm(&d, &empty, &dual, &dual_empty, 2.0, 5.0, [0.0, 0.0]),
            Err(Error::NotSpanningTree(_))
        ));
        assert!(!crossings_joined_inside(&d, &empty, 2.0, 5.0, [0.0, 0.0]).unwrap());
    }

    #[test]
    fn annulus_must_fit() {
        let d = build_box_domain(6, 1.0, Free).unwrap();
        let t = comb(&d, 6);
        assert!(matches!(
            crossings_joined_inside(&d, &t, 2.0, 7.0, [0.0, 0.0]),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn swapping_primal_and_dual_swaps_scenarios() {
        let d = build_box_domain(7, 1.0, Wired).unwrap();
        let dual = d.dual().unwrap();
        let back = dual.inverse(&d);
        let mut rng = stream(5, 0);
        let mut seen = [0usize; 2];
        for _ in 0..300 {
            let t = boundary_ust(&d, &mut rng).unwrap();
            let dt = dual_tree(&t, &dual).unwrap();
            let c = [0.0, 0.0];
            let p = crossings_joined_inside(&d, &t, 1.0, 5.0, c).unwrap();
            let q = crossings_joined_inside(&dual.dual, &dt, 1.0, 5.0, c).unwrap();
            let fwd = detect_four_arm(&d, &t, &dual, &dt, 1.0, 5.0, c).unwrap();
            let rev = detect_four_arm(&dual.dual, &dt, &back, &t, 1.0, 5.0, c).unwrap();
            assert_eq!(fwd, p || q);
            assert_eq!(fwd, rev);
            seen[fwd as usize] += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
    }

    #[test]
    fn edge_midpoint_center() {
        let d = build_box_domain(8, 1.0, Free).unwrap();
        let t = comb(&d, 8);
        let dual = d.dual().unwrap();
        let dt = dual_tree(&t, &dual).unwrap();
        // midpoint of the axis edge (0,0)-(1,0)
        assert!(detect_four_arm(&d, &t, &dual, &dt, 2.0, 6.0, [0.5, 0.0]).unwrap());
    }

    fn ray_forest(d: &LatticeDomain, both_sides: bool) -> SpanningForest {
        let edges = d
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &[a, b])| {
                let (pa, pb) = (d.lattice_coords(a).unwrap(), d.lattice_coords(b).unwrap());
                pa[1] == 0 && pb[1] == 0 && (both_sides || pa[0].min(pb[0]) >= 0)
            })
            .map(|(e, _)| e)
            .collect();
        SpanningForest::new(d, edges).unwrap()
    }

    #[test]
    fn k_counts_branches() {
        let d = build_box_domain(10, 1.0, Free).unwrap();
        let ray = ray_forest(&d, false);
        assert_eq!(k_statistic(&d, &ray, 3.0, [0.0, 0.0]).unwrap(), 1);
        let line = ray_forest(&d, true);
        assert_eq!(k_statistic(&d, &line, 3.0, [0.0, 0.0]).unwrap(), 2);
        assert_eq!(crossing_components(&d, &line, 3.0, 9.0, [0.0, 0.0]).unwrap().len(), 2);
        let comb = comb(&d, 10);
        // teeth with |x| < 3 split into upper and lower crossings; the axis
        // halves carry the outer teeth
        assert_eq!(k_statistic(&d, &comb, 3.0, [0.0, 0.0]).unwrap(), 2 + 2 * 5);
    }

    #[test]
    fn wired_ust_always_crosses() {
        let r = estimate_k_statistic(3, 12, Replicates::new(200, 3)).unwrap();
        assert!(r.ci95.0 >= 1.0 - 1e-12 || r.estimate >= 1.0);
        let d = build_box_domain(12, 1.0, Wired).unwrap();
        let mut rng = stream(9, 0);
        for _ in 0..100 {
            let t = boundary_ust(&d, &mut rng).unwrap();
            assert!(k_statistic(&d, &t, 3.0, [0.0, 0.0]).unwrap() >= 1);
        }
    }

    #[test]
    fn k_statistic_geometry_guard() {
        assert!(matches!(
            estimate_k_statistic(4, 12, Replicates::new(1, 0)),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn four_arm_is_reproducible() {
        let r = Replicates::new(200, 4);
        let a = four_arm_probability(1, 4, 6, r).unwrap();
        let b = four_arm_probability(1, 4, 6, r.with_workers(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.estimate > 0.0 && a.estimate < 1.0);
    }
}
