//! Subcommand arguments and their runners.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ustlab_core::dynamics::{forest_at, sample_cut_schedule};
use ustlab_core::estimators::{
    escape_scaling, estimate_k_statistic, four_arm_sweep, lerw_length_scaling, EsOptions, Replicates, ScalingFit,
};
use ustlab_core::graph::fixtures;
use ustlab_core::lattice::{BoundaryCondition, DomainSpec, LatticeDomain};
use ustlab_core::rng::{replicate_map, stream};
use ustlab_core::sampling::{boundary_ust, dual_tree, read_forest_batch, write_forest_batch};
use ustlab_core::stats::fit_line;
use ustlab_core::structure::{
    extract_structure_graph, glue_homogeneous, glue_resistance_rates, glue_uniform, truncate, StructureGraph,
};
use ustlab_core::{SpanningForest, WeightedGraph};

use crate::config::Resolved;
use crate::output::{real, summary, write_json, write_text, Table};
use crate::{svg, verify, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Box,
    Disc,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Wired,
    Free,
}

/// Domain flags shared by the lattice subcommands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
pub struct DomainArgs {
    /// Domain shape [default: box]
    #[arg(long, value_enum)]
    pub shape: Option<Shape>,
    /// Box half-width in lattice steps [default: 8]
    #[arg(long)]
    pub half_width: Option<u32>,
    /// Disc radius in physical units [default: 8]
    #[arg(long)]
    pub radius: Option<f64>,
    /// Rectangle width in vertices [default: 3]
    #[arg(long)]
    pub width: Option<u32>,
    /// Rectangle height in vertices [default: 2]
    #[arg(long)]
    pub height: Option<u32>,
    /// Lattice mesh [default: 1]
    #[arg(long)]
    pub mesh: Option<f64>,
    /// Boundary condition [default: wired]
    #[arg(long, value_enum)]
    pub boundary: Option<Boundary>,
}

impl DomainArgs {
    pub fn spec(&self) -> DomainSpec {
        let mesh = self.mesh.unwrap_or(1.0);
        let boundary = match self.boundary.unwrap_or(Boundary::Wired) {
            Boundary::Wired => BoundaryCondition::Wired,
            Boundary::Free => BoundaryCondition::Free,
        };
        match self.shape.unwrap_or(Shape::Box) {
            Shape::Box => DomainSpec::Box {
                half_width: self.half_width.unwrap_or(8),
                mesh,
                boundary,
            },
            Shape::Disc => DomainSpec::Disc {
                radius: self.radius.unwrap_or(8.0),
                mesh,
                boundary,
            },
            Shape::Rect => DomainSpec::Rect {
                width: self.width.unwrap_or(3),
                height: self.height.unwrap_or(2),
                mesh,
                boundary,
            },
        }
    }

    pub fn build(&self) -> Result<LatticeDomain, CliError> {
        Ok(self.spec().build()?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainArgs,
    /// Number of trees [default: 1]
    #[arg(long)]
    pub count: Option<usize>,
    /// Also draw the first tree
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub svg: Option<bool>,
    /// Draw the dual tree dashed
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dual: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
pub struct CutArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainArgs,
    /// Snapshot times, all ≤ 0 [default: -0.5,-1,-2,-4]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub times: Option<Vec<f64>>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub svg: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
pub struct StructureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainArgs,
    /// Cut time [default: -1]
    #[arg(long, allow_hyphen_values = true)]
    pub time: Option<f64>,
    /// Keep clusters of diameter at least this [default: 0]
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub svg: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Uniform,
    Homogeneous,
    Resistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    Triangle,
    WeightedTriangle,
    Cycle4,
    Complete4,
    Grid3,
}

impl Fixture {
    fn graph(self) -> WeightedGraph {
        match self {
            Fixture::Triangle => fixtures::triangle(),
            Fixture::WeightedTriangle => fixtures::weighted_triangle(),
            Fixture::Cycle4 => fixtures::cycle(4),
            Fixture::Complete4 => fixtures::complete(4),
            Fixture::Grid3 => fixtures::grid(3, 3),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
pub struct GlueArgs {
    /// Clock scheme [default: uniform]
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    /// Built-in graph whose vertices are the initial sites [default: triangle]
    #[arg(long, value_enum, conflicts_with = "structure")]
    pub fixture: Option<Fixture>,
    /// Structure graph JSON written by `structure`
    #[arg(long)]
    pub structure: Option<PathBuf>,
    /// Start time of uniform gluing [default: -1]
    #[arg(long, allow_hyphen_values = true)]
    pub time: Option<f64>,
    /// Duration of homogeneous or resistance gluing [default: unbounded]
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub svg: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentKind {
    LerwLength,
    Es,
    FourArm,
    KStat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
pub struct ExponentArgs {
    /// Sweep to run
    #[arg(value_enum)]
    pub kind: Option<ExponentKind>,
    /// Outer radii (lerw-length, es) or inner radii (k-stat)
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<u32>>,
    /// Replicates per size
    #[arg(long)]
    pub samples: Option<usize>,
    /// Inner radius for es [default: 1] and four-arm [default: 2]
    #[arg(long)]
    pub inner: Option<u32>,
    /// Outer/inner radius ratios for four-arm [default: 4,8,16]
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<u32>>,
    /// Walks per loop-erased path in es [default: 1]
    #[arg(long)]
    pub walks_per_path: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
pub struct VerifyArgs {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainArgs,
    /// Forest batch written by `sample-ust` or `cut`
    #[arg(long, conflicts_with = "structure")]
    pub input: Option<PathBuf>,
    /// Which forest of the batch [default: 0]
    #[arg(long)]
    pub index: Option<usize>,
    /// Structure graph JSON to draw instead of a forest
    #[arg(long)]
    pub structure: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dual: Option<bool>,
    /// Output file [default: <out>/render.svg]
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sample uniform spanning trees of a domain
    SampleUst(SampleArgs),
    /// Cut a sampled tree at Poissonian times and record snapshots
    Cut(CutArgs),
    /// Structure graph of a cut tree
    Structure(StructureArgs),
    /// Run a gluing chain on a structure graph
    Glue(GlueArgs),
    /// Exponent sweeps written as CSV
    Exponents(ExponentArgs),
    /// Exact oracle and invariant suite
    Verify(VerifyArgs),
    /// Draw a stored forest or structure graph
    Render(RenderArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SampleUst(_) => "sample-ust",
            Command::Cut(_) => "cut",
            Command::Structure(_) => "structure",
            Command::Glue(_) => "glue",
            Command::Exponents(_) => "exponents",
            Command::Verify(_) => "verify",
            Command::Render(_) => "render",
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Lines for standard output.
    pub report: Vec<String>,
    /// False when an invariant check failed.
    pub passed: bool,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            files: Vec::new(),
            report: Vec::new(),
            passed: true,
        }
    }
}

fn flag(x: Option<bool>) -> bool {
    x.unwrap_or(false)
}

fn forest_json(f: &SpanningForest) -> Value {
    json!({
        "edges": f.edge_count(),
        "components": f.component_count(),
        "largest_component": f.components().iter().map(|c| c.size).max().unwrap_or(0),
    })
}

pub fn sample_ust(a: &SampleArgs, run: &Resolved, out: &mut Outcome) -> Result<(), CliError> {
    let domain = a.domain.build()?;
    let count = a.count.unwrap_or(1);
    if count == 0 {
        return Err(CliError::Config("count must be at least 1".into()));
    }
    let trees = replicate_map(run.seed, count, run.workers, |_, rng| boundary_ust(&domain, rng))?
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let batch = run.out.join("sample-ust.ustf");
    let edges: Vec<Vec<usize>> = trees.iter().map(|t| t.edges().to_vec()).collect();
    let file = std::fs::File::create(&batch).map_err(|e| CliError::Io(format!("{}: {e}", batch.display())))?;
    write_forest_batch(std::io::BufWriter::new(file), &edges).map_err(|e| CliError::Io(e.to_string()))?;
    out.files.push(batch);
    let doc = summary(
        "sample-ust",
        run.seed,
        a,
        json!({
            "domain": a.domain.spec(),
            "vertices": domain.vertex_count(),
            "trees": trees.iter().map(forest_json).collect::<Vec<_>>(),
        }),
    )?;
    let path = run.out.join("sample-ust.json");
    write_json(&path, &doc)?;
    out.files.push(path);
    if flag(a.svg) {
        let path = run.out.join("sample-ust.svg");
        let text = if flag(a.dual) {
            let duality = domain.dual()?;
            let dt = dual_tree(&trees[0], &duality)?;
            svg::render_forest(&domain, &trees[0], Some((&duality, &dt)))
        } else {
            svg::render_forest(&domain, &trees[0], None)
        };
        write_text(&path, &text)?;
        out.files.push(path);
    }
    out.report.push(format!("sampled {count} tree(s) on {} vertices", domain.vertex_count()));
    Ok(())
}

pub fn cut(a: &CutArgs, run: &Resolved, out: &mut Outcome) -> Result<(), CliError> {
    let domain = a.domain.build()?;
    let times = a.times.clone().unwrap_or_else(|| vec![-0.5, -1.0, -2.0, -4.0]);
    if times.is_empty() || times.iter().any(|t| t.is_nan() || *t > 0.0) {
        return Err(CliError::Config("times must be a non-empty list of values ≤ 0".into()));
    }
    let mut rng = stream(run.seed, 0);
    let tree = boundary_ust(&domain, &mut rng)?;
    let sched = sample_cut_schedule(&tree, domain.mesh(), &mut rng)?;
    let mut table = Table::new(&["time", "edges", "components", "largest_component", "largest_diameter"]);
    let mut snapshots = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let f = forest_at(&domain, &sched, t)?;
        let largest = f.components().iter().map(|c| c.size).max().unwrap_or(0);
        let diam = f.components().iter().map(|c| c.diameter).fold(0.0, f64::max);
        table.push(vec![
            real(t),
            f.edge_count().to_string(),
            f.component_count().to_string(),
            largest.to_string(),
            real(diam),
        ]);
        if flag(a.svg) {
            let path = run.out.join(format!("cut-{k}.svg"));
            write_text(&path, &svg::render_forest(&domain, &f, None))?;
            out.files.push(path);
        }
        snapshots.push(f.edges().to_vec());
    }
    let csv = run.out.join("cut.csv");
    table.write(&csv)?;
    out.files.push(csv);
    let batch = run.out.join("cut.ustf");
    let file = std::fs::File::create(&batch).map_err(|e| CliError::Io(format!("{}: {e}", batch.display())))?;
    write_forest_batch(std::io::BufWriter::new(file), &snapshots).map_err(|e| CliError::Io(e.to_string()))?;
    out.files.push(batch);
    let doc = summary(
        "cut",
        run.seed,
        a,
        json!({ "domain": a.domain.spec(), "rate": sched.rate, "tree_edges": tree.edge_count() }),
    )?;
    let path = run.out.join("cut.json");
    write_json(&path, &doc)?;
    out.files.push(path);
    out.report.push(format!("{} snapshot(s) of a {}-edge tree", times.len(), tree.edge_count()));
    Ok(())
}

pub fn structure(a: &StructureArgs, run: &Resolved, out: &mut Outcome) -> Result<(), CliError> {
    let domain = a.domain.build()?;
    let t = a.time.unwrap_or(-1.0);
    let mut rng = stream(run.seed, 0);
    let tree = boundary_ust(&domain, &mut rng)?;
    let sched = sample_cut_schedule(&tree, domain.mesh(), &mut rng)?;
    let forest = forest_at(&domain, &sched, t)?;
    let mut s = extract_structure_graph(&domain, &forest, domain.mesh());
    if let Some(eps) = a.epsilon.filter(|&e| e > 0.0) {
        s = truncate(&s, eps)?;
    }
    let doc = summary(
        "structure",
        run.seed,
        a,
        json!({
            "domain": a.domain.spec(),
            "summary": s.summary(),
            "graph": serde_json::to_value(&s).map_err(|e| CliError::Io(e.to_string()))?,
        }),
    )?;
    let path = run.out.join("structure.json");
    write_json(&path, &doc)?;
    out.files.push(path);
    if flag(a.svg) {
        let path = run.out.join("structure.svg");
        write_text(&path, &svg::render_structure(&s))?;
        out.files.push(path);
    }
    out.report.push(format!("{} sites, {} edges", s.site_count(), s.edge_count()));
    Ok(())
}

fn load_structure(path: &Path) -> Result<StructureGraph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let graph = v.get("graph").cloned().unwrap_or(v);
    serde_json::from_value(graph).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn glue(a: &GlueArgs, run: &Resolved, out: &mut Outcome) -> Result<(), CliError> {
    let s = match &a.structure {
        Some(p) => load_structure(p)?,
        None => {
            let g = a.fixture.unwrap_or(Fixture::Triangle).graph();
            extract_structure_graph(&g, &SpanningForest::empty(&g), 1.0)
        }
    };
    let mut rng = stream(run.seed, 0);
    let scheme = a.scheme.unwrap_or(Scheme::Uniform);
    let duration = a.duration.unwrap_or(f64::INFINITY);
    let (events, final_sites, trajectory) = match scheme {
        Scheme::Uniform => {
            let traj = glue_uniform(&s, a.time.unwrap_or(-1.0), &mut rng)?;
            let end = traj.replay()?;
            if flag(a.svg) {
                let path = run.out.join("glue.svg");
                write_text(&path, &svg::render_structure(&end))?;
                out.files.push(path);
            }
            (traj.events.len(), end.site_count(), serde_json::to_value(&traj))
        }
        Scheme::Homogeneous => {
            let traj = glue_homogeneous(&s, duration, &mut rng)?;
            let end = traj.replay()?;
            if flag(a.svg) {
                let path = run.out.join("glue.svg");
                write_text(&path, &svg::render_structure(&end))?;
                out.files.push(path);
            }
            (traj.events.len(), end.site_count(), serde_json::to_value(&traj))
        }
        Scheme::Resistance => {
            // conductance = multiplicity; the common factor δ^{5/4} only rescales time
            let g = match (&a.structure, a.fixture) {
                (None, Some(f)) => f.graph(),
                (None, None) => Fixture::Triangle.graph(),
                _ => s.to_weighted_graph()?,
            };
            let traj = glue_resistance_rates(&g, duration, &mut rng)?;
            let n = traj.events.len();
            (n, g.vertex_count() - n, serde_json::to_value(&traj))
        }
    };
    let trajectory = trajectory.map_err(|e| CliError::Io(e.to_string()))?;
    let doc = summary(
        "glue",
        run.seed,
        a,
        json!({ "events": events, "final_sites": final_sites, "trajectory": trajectory }),
    )?;
    let path = run.out.join("glue.json");
    write_json(&path, &doc)?;
    out.files.push(path);
    out.report.push(format!("events={events} final_sites={final_sites}"));
    Ok(())
}

fn scaling_table(fit: &ScalingFit, quantity: &str) -> Table {
    let mut t = Table::new(&["quantity", "size", "mean", "stderr", "samples"]);
    for p in &fit.points {
        t.push(vec![
            quantity.into(),
            real(p.size),
            real(p.mean),
            real(p.stderr),
            p.samples.to_string(),
        ]);
    }
    t
}

pub fn exponents(a: &ExponentArgs, run: &Resolved, out: &mut Outcome) -> Result<(), CliError> {
    let kind = a
        .kind
        .ok_or_else(|| CliError::Config("choose a sweep: lerw-length, es, four-arm or k-stat".into()))?;
    let reps = |default: usize| Replicates::new(a.samples.unwrap_or(default), run.seed).with_workers(run.workers);
    let (table, body, line) = match kind {
        ExponentKind::LerwLength => {
            let sizes = a.sizes.clone().unwrap_or_else(|| vec![32, 64, 128, 256]);
            let fit = lerw_length_scaling(&sizes, reps(10_000))?;
            let line = format!("slope={:.4} stderr={:.4}", fit.slope, fit.slope_stderr);
            (scaling_table(&fit, "lerw-length"), json!({ "fit": fit }), line)
        }
        ExponentKind::Es => {
            let sizes = a.sizes.clone().unwrap_or_else(|| vec![32, 64, 128, 256]);
            let opts = EsOptions {
                walks_per_path: a.walks_per_path.unwrap_or(1),
            };
            let fit = escape_scaling(a.inner.unwrap_or(1), &sizes, reps(10_000), opts)?;
            let line = format!("slope={:.4} stderr={:.4}", fit.slope, fit.slope_stderr);
            (scaling_table(&fit, "escape"), json!({ "fit": fit }), line)
        }
        ExponentKind::FourArm => {
            let ratios = a.ratios.clone().unwrap_or_else(|| vec![4, 8, 16]);
            let (points, (slope, se)) = four_arm_sweep(a.inner.unwrap_or(2), &ratios, reps(10_000))?;
            let mut t = Table::new(&[
                "inner",
                "outer",
                "probability",
                "stderr",
                "normalized",
                "normalized_stderr",
                "samples",
            ]);
            for p in &points {
                t.push(vec![
                    p.inner.to_string(),
                    p.outer.to_string(),
                    real(p.probability.estimate),
                    real(p.probability.stderr),
                    real(p.normalized),
                    real(p.normalized_stderr),
                    p.probability.samples.to_string(),
                ]);
            }
            let line = format!("normalized slope={slope:.4} stderr={se:.4}");
            (t, json!({ "points": points, "slope": slope, "slope_stderr": se }), line)
        }
        ExponentKind::KStat => {
            let sizes = a.sizes.clone().unwrap_or_else(|| vec![8, 16, 32, 64]);
            let mut t = Table::new(&["inner", "half_width", "mean", "stderr", "samples"]);
            let mut reports = Vec::new();
            for &l in &sizes {
                let r = estimate_k_statistic(l, 4 * l, reps(500).derived(l as u64))?;
                t.push(vec![
                    l.to_string(),
                    (4 * l).to_string(),
                    real(r.estimate),
                    real(r.stderr),
                    r.samples.to_string(),
                ]);
                reports.push(r);
            }
            let x: Vec<f64> = sizes.iter().map(|&l| (l as f64).ln()).collect();
            let y: Vec<f64> = reports.iter().map(|r| r.estimate).collect();
            let s: Vec<f64> = reports.iter().map(|r| r.stderr).collect();
            let fit = fit_line(&x, &y, &s)?;
            let line = format!("slope={:.4} stderr={:.4}", fit.slope, fit.slope_stderr);
            (
                t,
                json!({ "reports": reports, "slope": fit.slope, "slope_stderr": fit.slope_stderr }),
                line,
            )
        }
    };
    let name = serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let csv = run.out.join(format!("exponents-{name}.csv"));
    table.write(&csv)?;
    out.files.push(csv);
    let path = run.out.join(format!("exponents-{name}.json"));
    write_json(&path, &summary("exponents", run.seed, a, body)?)?;
    out.files.push(path);
    out.report.push(format!("{name}: {line}"));
    Ok(())
}

pub fn verify_suite(a: &VerifyArgs, run: &Resolved, out: &mut Outcome) -> Result<(), CliError> {
    let checks = verify::run_all(run.seed);
    for c in &checks {
        out.report.push(format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    out.passed = checks.iter().all(|c| c.passed);
    let doc = summary("verify", run.seed, a, json!({ "checks": checks, "passed": out.passed }))?;
    let path = run.out.join("verify.json");
    write_json(&path, &doc)?;
    out.files.push(path);
    Ok(())
}

pub fn render(a: &RenderArgs, run: &Resolved, out: &mut Outcome) -> Result<(), CliError> {
    let text = if let Some(p) = &a.structure {
        svg::render_structure(&load_structure(p)?)
    } else {
        let input = a
            .input
            .as_ref()
            .ok_or_else(|| CliError::Config("render needs --input or --structure".into()))?;
        let file = std::fs::File::open(input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
        let batch = read_forest_batch(std::io::BufReader::new(file))
            .map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
        let k = a.index.unwrap_or(0);
        let edges = batch
            .get(k)
            .ok_or_else(|| CliError::Config(format!("batch has {} forest(s), no index {k}", batch.len())))?;
        let domain = a.domain.build()?;
        let forest = SpanningForest::new(&domain, edges.clone())?;
        if flag(a.dual) {
            let duality = domain.dual()?;
            let dt = dual_tree(&forest, &duality)?;
            svg::render_forest(&domain, &forest, Some((&duality, &dt)))
        } else {
            svg::render_forest(&domain, &forest, None)
        }
    };
    let path = a.output.clone().unwrap_or_else(|| run.out.join("render.svg"));
    write_text(&path, &text)?;
    out.files.push(path.clone());
    out.report.push(format!("wrote {}", path.display()));
    Ok(())
}

pub fn dispatch(cmd: &Command, run: &Resolved) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    match cmd {
        Command::SampleUst(a) => sample_ust(a, run, &mut out)?,
        Command::Cut(a) => cut(a, run, &mut out)?,
        Command::Structure(a) => structure(a, run, &mut out)?,
        Command::Glue(a) => glue(a, run, &mut out)?,
        Command::Exponents(a) => exponents(a, run, &mut out)?,
        Command::Verify(a) => verify_suite(a, run, &mut out)?,
        Command::Render(a) => render(a, run, &mut out)?,
    }
    Ok(out)
}
