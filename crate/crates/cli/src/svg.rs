//! Deterministic SVG drawings of forests, dual trees and structure graphs.
//! Clusters get a hue derived from their smallest vertex, so a cluster
//! keeps its colour across snapshots.

use std::fmt::Write;

use ustlab_core::geometry::Point;
use ustlab_core::lattice::{Duality, LatticeDomain};
use ustlab_core::structure::{collapse, GluingTrajectory, StructureGraph};
use ustlab_core::SpanningForest;

/// Pixels per lattice step.
const STEP_PX: f64 = 14.0;
const MARGIN_PX: f64 = 10.0;

fn hue(key: usize) -> u32 {
    ((key as u64).wrapping_mul(2_654_435_761) % 360) as u32
}

fn colour(key: usize) -> String {
    format!("hsl({},65%,42%)", hue(key))
}

struct Frame {
    min: Point,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = Point>, step: f64) -> Frame {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        if !min[0].is_finite() {
            min = [0.0, 0.0];
            max = [0.0, 0.0];
        }
        let scale = STEP_PX / step;
        Frame {
            min,
            scale,
            width: (max[0] - min[0]) * scale + 2.0 * MARGIN_PX,
            height: (max[1] - min[1]) * scale + 2.0 * MARGIN_PX,
        }
    }

    /// SVG coordinates, y pointing down.
    fn map(&self, p: Point) -> (f64, f64) {
        (
            (p[0] - self.min[0]) * self.scale + MARGIN_PX,
            self.height - ((p[1] - self.min[1]) * self.scale + MARGIN_PX),
        )
    }

    fn open(&self, out: &mut String) {
        let _ = writeln!(
            out,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.2}" height="{:.2}" viewBox="0 0 {:.2} {:.2}">
<rect width="100%" height="100%" fill="white"/>"#,
            self.width, self.height, self.width, self.height
        );
    }
}

fn line(out: &mut String, class: &str, a: (f64, f64), b: (f64, f64), style: &str) {
    let _ = writeln!(
        out,
        r#"<line class="{class}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style}/>"#,
        a.0, a.1, b.0, b.1
    );
}

/// Forest on an embedded domain: a point per vertex, a segment per forest
/// edge in its cluster colour, and highlighted segments for lattice edges
/// separating two clusters of at least two vertices each (the cluster
/// outlines; singletons stay plain points). With `dual`, the dual forest is
/// drawn dashed. Edges touching a non-embedded vertex are skipped.
pub fn render_forest(domain: &LatticeDomain, forest: &SpanningForest, dual: Option<(&Duality, &SpanningForest)>) -> String {
    let frame = Frame::fit(domain.positions().iter().flatten().copied(), domain.mesh());
    let mut out = String::new();
    frame.open(&mut out);
    let comp = |v: usize| forest.component_of(v);
    let key = |v: usize| forest.components()[comp(v)].representative;
    let big = |v: usize| forest.components()[comp(v)].size >= 2;
    out.push_str("<g id=\"boundary\">\n");
    for (e, &[a, b]) in domain.edges().iter().enumerate() {
        if forest.contains(e) || comp(a) == comp(b) || !big(a) || !big(b) {
            continue;
        }
        if let (Some(p), Some(q)) = (domain.position(a), domain.position(b)) {
            line(&mut out, "boundary", frame.map(p), frame.map(q), r##"stroke="#f2b8b5" stroke-width="4""##);
        }
    }
    out.push_str("</g>\n<g id=\"forest\">\n");
    for &e in forest.edges() {
        let [a, b] = domain.edges()[e];
        if let (Some(p), Some(q)) = (domain.position(a), domain.position(b)) {
            let style = format!(r#"stroke="{}" stroke-width="2""#, colour(key(a)));
            line(&mut out, "tree", frame.map(p), frame.map(q), &style);
        }
    }
    out.push_str("</g>\n");
    if let Some((duality, dual_forest)) = dual {
        out.push_str("<g id=\"dual\">\n");
        for &d in dual_forest.edges() {
            let [a, b] = duality.dual.edges()[d];
            if let (Some(p), Some(q)) = (duality.dual.position(a), duality.dual.position(b)) {
                line(
                    &mut out,
                    "dual",
                    frame.map(p),
                    frame.map(q),
                    r##"stroke="#777777" stroke-width="1" stroke-dasharray="3,2""##,
                );
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("<g id=\"vertices\">\n");
    for v in 0..domain.vertex_count() {
        if let Some(p) = domain.position(v) {
            let (x, y) = frame.map(p);
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.8" fill="{}"/>"#, colour(key(v)));
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Site positions: centroid of the cluster hull when embedded, otherwise a
/// point on a circle by site index.
fn site_positions(s: &StructureGraph) -> Vec<Point> {
    let n = s.site_count().max(1) as f64;
    s.sites
        .iter()
        .enumerate()
        .map(|(i, site)| {
            if site.hull.is_empty() {
                let a = std::f64::consts::TAU * i as f64 / n;
                [a.cos(), a.sin()]
            } else {
                let k = site.hull.len() as f64;
                [
                    site.hull.iter().map(|p| p[0]).sum::<f64>() / k,
                    site.hull.iter().map(|p| p[1]).sum::<f64>() / k,
                ]
            }
        })
        .collect()
}

/// Structure graph: one disc per site (area proportional to its vertex
/// count), one segment per edge with width proportional to its weight.
pub fn render_structure(s: &StructureGraph) -> String {
    let pos = site_positions(s);
    let embedded = s.sites.iter().all(|x| !x.hull.is_empty());
    let step = if embedded { s.mesh } else { 0.25 };
    let frame = Frame::fit(pos.iter().copied(), step);
    let mut out = String::new();
    frame.open(&mut out);
    let max_w = s.edges.iter().map(|e| e.multiplicity).max().unwrap_or(1) as f64;
    out.push_str("<g id=\"edges\">\n");
    for e in &s.edges {
        let width = 1.0 + 5.0 * e.multiplicity as f64 / max_w;
        let style = format!(r##"stroke="#555555" stroke-width="{width:.2}" stroke-opacity="0.8""##);
        line(&mut out, "structure-edge", frame.map(pos[e.a]), frame.map(pos[e.b]), &style);
    }
    out.push_str("</g>\n<g id=\"sites\">\n");
    for (i, site) in s.sites.iter().enumerate() {
        let (x, y) = frame.map(pos[i]);
        let r = 2.0 + 1.5 * (site.vertex_count as f64).sqrt();
        let _ = writeln!(
            out,
            r#"<circle class="site" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{}"/>"#,
            colour(site.representative)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// The structure graph after the first `frame` merges of a trajectory.
pub fn render_trajectory_frame(traj: &GluingTrajectory, frame: usize) -> ustlab_core::Result<String> {
    let mut g = traj.initial.clone();
    for ev in traj.events.iter().take(frame) {
        g = collapse(&g, ev.edge)?;
    }
    Ok(render_structure(&g))
}
