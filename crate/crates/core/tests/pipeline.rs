//! Sample, cut, extract, glue: invariants that hold along the whole chain.

use proptest::prelude::*;

use ustlab_core::dynamics::{forest_at, sample_cut_schedule};
use ustlab_core::lattice::build_box_domain;
use ustlab_core::rng::stream;
use ustlab_core::sampling::boundary_ust;
use ustlab_core::structure::{extract_structure_graph, glue_uniform};
use ustlab_core::BoundaryCondition;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cut_then_glue_is_consistent(seed in any::<u64>(), half_width in 2u32..6, t in -3.0f64..-0.01, wired in any::<bool>()) {
        let bc = if wired { BoundaryCondition::Wired } else { BoundaryCondition::Free };
        let d = build_box_domain(half_width, 1.0, bc).unwrap();
        let mut rng = stream(seed, 0);
        let tree = boundary_ust(&d, &mut rng).unwrap();
        prop_assert!(tree.is_spanning_tree());
        let sched = sample_cut_schedule(&tree, 1.0, &mut rng).unwrap();
        let forest = forest_at(&d, &sched, t).unwrap();

        // the forest is the tree minus the edges cut in (t, 0]
        let cut = sched.cut_events(t);
        prop_assert_eq!(forest.edge_count() + cut.len(), tree.edge_count());
        prop_assert!(forest.edges().iter().all(|&e| tree.contains(e)));
        prop_assert_eq!(forest.component_count(), cut.len() + 1);

        // every host edge between distinct clusters is counted once
        let s = extract_structure_graph(&d, &forest, 1.0);
        let crossing = d
            .edges()
            .iter()
            .filter(|[u, v]| forest.component_of(*u) != forest.component_of(*v))
            .count() as u64;
        prop_assert_eq!(s.total_multiplicity(), crossing);
        prop_assert_eq!(s.site_count(), forest.component_count());
        let sizes: usize = s.sites.iter().map(|x| x.vertex_count).sum();
        prop_assert_eq!(sizes, forest.vertex_count());

        // gluing from t back to 0 reassembles one cluster
        let traj = glue_uniform(&s, t, &mut rng).unwrap();
        let end = traj.replay().unwrap();
        prop_assert_eq!(end.site_count(), 1);
        prop_assert_eq!(traj.events.len(), cut.len());
        prop_assert!(traj.events.windows(2).all(|w| w[0].time <= w[1].time));
        prop_assert!(traj.events.iter().all(|e| e.time > t && e.time < 0.0));
    }
}
