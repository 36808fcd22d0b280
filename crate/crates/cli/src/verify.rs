//! Quick exact and invariant checks behind `ustlab verify`.

use std::collections::HashMap;

use serde::Serialize;

use ustlab_core::dynamics::{forest_at, fundamental_cut, interface_cycle, sample_cut_schedule};
use ustlab_core::estimators::{
    conditional_fixtures, conditional_monotonicity_check, deletion_pairs, edge_marginal_monotonicity_check,
    exact_time_reversal,
};
use ustlab_core::graph::fixtures;
use ustlab_core::lattice::{build_box_domain, build_rect_domain};
use ustlab_core::rng::{replicate_map, stream};
use ustlab_core::sampling::{boundary_ust, dual_tree, wilson_ust};
use ustlab_core::stats::chi_square_gof;
use ustlab_core::structure::{extract_structure_graph, glue_resistance_rates, glue_uniform};
use ustlab_core::{BoundaryCondition, Root, SpanningForest};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, r: ustlab_core::Result<(bool, String)>) -> Check {
    let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn wilson_uniform(seed: u64) -> ustlab_core::Result<(bool, String)> {
    let g = fixtures::grid(3, 3);
    let trees = g.enumerate_spanning_trees()?;
    let index: HashMap<Vec<usize>, usize> = trees.iter().enumerate().map(|(i, t)| (t.edges.clone(), i)).collect();
    let samples = replicate_map(seed, 100_000, 1, |_, rng| wilson_ust(&g, &Root::Vertex(0), None, rng))?;
    let mut counts = vec![0u64; trees.len()];
    for s in samples {
        let s = s?;
        let Some(&i) = index.get(&s) else {
            return Ok((false, format!("sampled edge set {s:?} is not a spanning tree")));
        };
        counts[i] += 1;
    }
    let t = chi_square_gof(&counts, &vec![1.0; trees.len()])?;
    Ok((t.p_value > 1e-3, format!("{} trees, chi2 p = {:.3}", trees.len(), t.p_value)))
}

fn tree_counts() -> ustlab_core::Result<(bool, String)> {
    let cases = [
        ("grid3x3", fixtures::grid(3, 3), 192u64),
        ("K4", fixtures::complete(4), 16),
        ("C5", fixtures::cycle(5), 5),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, g, want) in cases {
        let det = g.spanning_tree_count()?.value.round() as u64;
        let listed = g.enumerate_spanning_trees()?.len() as u64;
        ok &= det == want && listed == want;
        parts.push(format!("{name}={det}/{listed}"));
    }
    Ok((ok, parts.join(" ")))
}

// P(e ∈ T) = c(e) R_eff(e), with the left side summed over listed trees
fn kirchhoff() -> ustlab_core::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for g in [fixtures::weighted_triangle(), fixtures::grid(3, 3), fixtures::complete(4)] {
        let trees = g.enumerate_spanning_trees()?;
        let total: f64 = trees.iter().map(|t| t.weight).sum();
        let r = g.edge_resistances()?;
        for (id, e) in g.edges().iter().enumerate() {
            let p: f64 = trees.iter().filter(|t| t.edges.contains(&id)).map(|t| t.weight).sum::<f64>() / total;
            worst = worst.max((p - e.conductance * r[id]).abs());
        }
    }
    Ok((worst < 1e-9, format!("max error {worst:.2e}")))
}

fn reversal() -> ustlab_core::Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (w, h) in [(2, 1), (2, 2), (3, 2)] {
        let d = build_rect_domain(w, h, 1.0, BoundaryCondition::Free)?;
        let r = exact_time_reversal(&d, -0.5)?;
        ok &= r.ok;
        parts.push(format!("{w}x{h}: max tv {}", r.max_tv));
    }
    Ok((ok, parts.join(", ")))
}

fn duality(seed: u64) -> ustlab_core::Result<(bool, String)> {
    let mut checked = 0;
    for (k, bc) in [BoundaryCondition::Free, BoundaryCondition::Wired].into_iter().enumerate() {
        let d = build_box_domain(3, 1.0, bc)?;
        let dual = d.dual()?;
        let mut rng = stream(seed, k as u64);
        for _ in 0..20 {
            let tree = boundary_ust(&d, &mut rng)?;
            let dt = dual_tree(&tree, &dual)?;
            if !dt.is_spanning_tree() {
                return Ok((false, "dual complement is not a spanning tree".into()));
            }
            for &e in tree.edges() {
                let c = interface_cycle(&tree, &dt, &dual, e, 1.0)?;
                let mut from_cycle: Vec<usize> = c.dual_edges.iter().filter_map(|&x| dual.primal_edge(x)).collect();
                from_cycle.sort_unstable();
                if from_cycle != fundamental_cut(&d, &tree, e)? {
                    return Ok((false, format!("interface of edge {e} differs from its fundamental cut")));
                }
                checked += 1;
            }
        }
    }
    Ok((true, format!("{checked} interfaces match fundamental cuts")))
}

fn monotonicity() -> ustlab_core::Result<(bool, String)> {
    let r = edge_marginal_monotonicity_check(deletion_pairs(5))?;
    let (mut comparisons, mut violations) = (0, 0);
    for (g, interest) in conditional_fixtures() {
        let (c, v) = conditional_monotonicity_check(&g, &interest)?;
        comparisons += c;
        violations += v;
    }
    Ok((
        r.ok() && violations == 0,
        format!(
            "{} pairs, {} marginal comparisons, {} violations; {comparisons} conditional comparisons, {violations} violations",
            r.pairs, r.comparisons, r.violation_count
        ),
    ))
}

fn addition_rule(seed: u64) -> ustlab_core::Result<(bool, String)> {
    let d = build_box_domain(4, 1.0, BoundaryCondition::Wired)?;
    let runs = replicate_map(seed, 200, 1, |_, rng| -> ustlab_core::Result<usize> {
        let tree = boundary_ust(&d, rng)?;
        let sched = sample_cut_schedule(&tree, 1.0, rng)?;
        let forest = forest_at(&d, &sched, -1.0)?;
        let s = extract_structure_graph(&d, &forest, 1.0);
        let traj = glue_uniform(&s, -1.0, rng)?;
        traj.replay()?;
        Ok(traj.events.len())
    })?;
    let mut events = 0;
    for r in runs {
        events += r?;
    }
    Ok((true, format!("200 trajectories, {events} merges replayed")))
}

fn resistance_k3(seed: u64) -> ustlab_core::Result<(bool, String)> {
    let g = fixtures::triangle();
    let mut rng = stream(seed, 0);
    let traj = glue_resistance_rates(&g, f64::INFINITY, &mut rng)?;
    let s = extract_structure_graph(&g, &SpanningForest::empty(&g), 1.0);
    let ok = traj.events.len() == 2 && s.site_count() - traj.events.len() == 1;
    Ok((ok, format!("{} events, {} final site(s)", traj.events.len(), s.site_count() - traj.events.len())))
}

fn reproducible(seed: u64) -> ustlab_core::Result<(bool, String)> {
    let d = build_box_domain(5, 1.0, BoundaryCondition::Wired)?;
    let draw = |workers| replicate_map(seed, 64, workers, |_, rng| boundary_ust(&d, rng).map(|t| t.edges().to_vec()));
    let one: Vec<_> = draw(1)?.into_iter().collect::<ustlab_core::Result<_>>()?;
    let four: Vec<_> = draw(4)?.into_iter().collect::<ustlab_core::Result<_>>()?;
    Ok((one == four, "64 trees with 1 and 4 workers".into()))
}

/// Runs every check; none of them panics.
pub fn run_all(seed: u64) -> Vec<Check> {
    vec![
        check("matrix-tree", tree_counts()),
        check("wilson-uniform", wilson_uniform(seed)),
        check("kirchhoff", kirchhoff()),
        check("time-reversal-exact", reversal()),
        check("duality", duality(seed)),
        check("monotonicity", monotonicity()),
        check("addition-rule", addition_rule(seed)),
        check("resistance-k3", resistance_k3(seed)),
        check("worker-independence", reproducible(seed)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_all(11) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
