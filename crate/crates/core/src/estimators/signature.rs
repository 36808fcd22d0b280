//! Scale signatures of structure-graph weights.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::Replicates;
use crate::dynamics::{forest_at, sample_cut_schedule};
use crate::error::{Error, Result};
use crate::lattice::{build_box_domain, BoundaryCondition};
use crate::rng::replicate_map;
use crate::sampling::boundary_ust;
use crate::stats::{ks_statistic, mean_stderr};
use crate::structure::{extract_structure_graph, glue_homogeneous, truncate, StructureGraph};

/// Number of replicate batches used to put an error bar on KS distances.
const KS_BATCHES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureReport {
    pub meshes: Vec<f64>,
    pub t: f64,
    pub epsilon: f64,
    /// Number of pooled edge weights per mesh.
    pub weights_per_mesh: Vec<usize>,
    /// KS distance between the weight samples of consecutive meshes.
    pub ks: Vec<f64>,
    /// Spread of the same distance over replicate batches, scaled to the
    /// full sample (batch standard deviation over √batches).
    pub ks_stderr: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

/// Weights of the edges of the `epsilon`-truncated structure graph of the
/// free UST on the square `[−1, 1]²` at mesh `δ`, cut to time `t`.
fn weights_at(mesh: f64, t: f64, epsilon: f64, reps: Replicates) -> Result<Vec<Vec<f64>>> {
    let half_width = (1.0 / mesh).round();
    if half_width < 1.0 || (half_width * mesh - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("mesh {mesh} must be 1/k")));
    }
    let domain = build_box_domain(half_width as u32, mesh, BoundaryCondition::Free)?;
    replicate_map(reps.seed, reps.samples, reps.workers, |_, rng| -> Result<Vec<f64>> {
        let tree = boundary_ust(&domain, rng)?;
        let sched = sample_cut_schedule(&tree, mesh, rng)?;
        let forest = forest_at(&domain, &sched, t)?;
        let s = extract_structure_graph(&domain, &forest, mesh);
        Ok(truncate(&s, epsilon)?.weights())
    })?
    .into_iter()
    .collect()
}

/// Compares structure-graph weight laws at matched physical scale across
/// meshes.
pub fn weight_scaling_signature(meshes: &[f64], t: f64, epsilon: f64, reps: Replicates) -> Result<SignatureReport> {
    if meshes.len() < 2 {
        return Err(Error::InsufficientInput("need at least two meshes".into()));
    }
    if reps.samples < KS_BATCHES {
        return Err(Error::InsufficientInput(format!("need at least {KS_BATCHES} samples")));
    }
    if !(t < 0.0) {
        return Err(Error::Precondition(format!("time {t} must be negative")));
    }
    let per_mesh: Vec<Vec<Vec<f64>>> = meshes
        .iter()
        .enumerate()
        .map(|(i, &m)| weights_at(m, t, epsilon, reps.derived(i as u64)))
        .collect::<Result<_>>()?;
    let pooled: Vec<Vec<f64>> = per_mesh.iter().map(|r| r.concat()).collect();
    if pooled.iter().any(|p| p.is_empty()) {
        return Err(Error::InsufficientInput("no structure edges survived truncation".into()));
    }
    let mut ks = Vec::new();
    let mut ks_stderr = Vec::new();
    for i in 0..meshes.len() - 1 {
        ks.push(ks_statistic(&pooled[i], &pooled[i + 1])?);
        let chunk = reps.samples / KS_BATCHES;
        let batch: Vec<f64> = (0..KS_BATCHES)
            .filter_map(|b| {
                let a: Vec<f64> = per_mesh[i][b * chunk..(b + 1) * chunk].concat();
                let c: Vec<f64> = per_mesh[i + 1][b * chunk..(b + 1) * chunk].concat();
                ks_statistic(&a, &c).ok()
            })
            .collect();
        let (_, se) = mean_stderr(&batch);
        ks_stderr.push(se);
    }
    Ok(SignatureReport {
        meshes: meshes.to_vec(),
        t,
        epsilon,
        weights_per_mesh: pooled.iter().map(Vec::len).collect(),
        ks,
        ks_stderr,
        samples: reps.samples,
        seed: reps.seed,
    })
}

/// Law of the weighted spanning tree of `s` with edge weights
/// `multiplicity · unit`, as exact fractions keyed by sorted edge sets.
fn tree_law(s: &StructureGraph, unit: &BigRational) -> Result<BTreeMap<Vec<usize>, BigRational>> {
    let g = s.to_weighted_graph()?;
    let mut law = BTreeMap::new();
    let mut total = BigRational::from_integer(BigInt::from(0));
    for t in g.enumerate_spanning_trees()? {
        let mut edges: Vec<usize> = t.edges.iter().map(|&i| g.edges()[i].label).collect();
        edges.sort_unstable();
        let w = edges.iter().fold(BigRational::from_integer(BigInt::from(1)), |acc, &e| {
            acc * BigRational::from_integer(BigInt::from(s.edges[e].multiplicity)) * unit
        });
        total += &w;
        law.insert(edges, w);
    }
    for w in law.values_mut() {
        *w /= &total;
    }
    Ok(law)
}

/// Multiplying every weight by `λ^{5/4}` (the mesh by `λ`) leaves the tree
/// law exactly unchanged, and homogeneous gluing driven by the same random
/// stream produces the same merges at the same clock values.
pub fn rescaled_trajectory_law_matches(s: &StructureGraph, lambda: f64, seed: u64) -> Result<bool> {
    let mut scaled = s.clone();
    scaled.mesh = s.mesh * lambda;
    let exact = |x: f64| BigRational::from_float(x).ok_or_else(|| Error::Precondition("non-finite weight".into()));
    let same_law = tree_law(s, &exact(s.unit_weight())?)? == tree_law(&scaled, &exact(scaled.unit_weight())?)?;
    let a = glue_homogeneous(s, f64::INFINITY, &mut crate::rng::stream(seed, 0))?;
    let b = glue_homogeneous(&scaled, f64::INFINITY, &mut crate::rng::stream(seed, 0))?;
    let same_path = a.events.len() == b.events.len()
        && a.events.iter().zip(&b.events).all(|(x, y)| {
            (x.time, x.edge, x.sites, x.multiplicity, x.lattice_edge) == (y.time, y.edge, y.sites, y.multiplicity, y.lattice_edge)
        });
    Ok(same_law && same_path)
}
