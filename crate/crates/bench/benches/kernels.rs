//! Timings of the inner loops: tree sampling, loop-erased walks, resistance
//! solves and structure extraction.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ustlab_core::dynamics::{forest_at, sample_cut_schedule};
use ustlab_core::estimators::GridWalker;
use ustlab_core::graph::fixtures;
use ustlab_core::lattice::build_box_domain;
use ustlab_core::rng::stream;
use ustlab_core::sampling::boundary_ust;
use ustlab_core::structure::extract_structure_graph;
use ustlab_core::BoundaryCondition;

fn wilson(c: &mut Criterion) {
    let mut g = c.benchmark_group("wilson");
    for half_width in [16, 64] {
        let d = build_box_domain(half_width, 1.0, BoundaryCondition::Wired).unwrap();
        let mut rng = stream(1, 0);
        g.bench_function(format!("wired box {half_width}"), |b| {
            b.iter(|| boundary_ust(black_box(&d), &mut rng).unwrap())
        });
    }
    g.finish();
}

fn lerw(c: &mut Criterion) {
    let mut g = c.benchmark_group("lerw");
    for radius in [64, 256] {
        let mut walker = GridWalker::new(radius);
        let mut rng = stream(2, 0);
        g.bench_function(format!("radius {radius}"), |b| b.iter(|| walker.loop_erased_length(&mut rng)));
    }
    g.finish();
}

fn resistance(c: &mut Criterion) {
    let g = fixtures::grid(12, 12);
    c.bench_function("edge resistances 12x12 grid", |b| {
        b.iter(|| black_box(&g).edge_resistances().unwrap())
    });
}

fn structure(c: &mut Criterion) {
    let d = build_box_domain(32, 1.0 / 32.0, BoundaryCondition::Wired).unwrap();
    let mut rng = stream(3, 0);
    let tree = boundary_ust(&d, &mut rng).unwrap();
    let sched = sample_cut_schedule(&tree, d.mesh(), &mut rng).unwrap();
    let forest = forest_at(&d, &sched, -1.0).unwrap();
    c.bench_function("structure graph, box 32 at t = -1", |b| {
        b.iter(|| extract_structure_graph(black_box(&d), black_box(&forest), d.mesh()))
    });
}

criterion_group!(benches, wilson, lerw, resistance, structure);
criterion_main!(benches);
