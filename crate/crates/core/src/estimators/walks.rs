//! Simple random walks and loop erasures on Z² inside a Euclidean ball.
//!
//! These bypass the general graph machinery: the ball is a flat array, visited
//! cells are tracked with generation stamps, and one `u64` feeds 32 steps.

use rand::RngCore;

use super::{meta, EstimateReport, Replicates, ScalePoint, ScalingFit};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, replicate_map_init};

const STEPS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Walker on the cells `|x|, |y| ≤ radius` of Z². A walk started at the
/// origin is stopped at its first vertex of norm `≥ radius`, which always
/// lies in the array.
#[derive(Debug, Clone)]
pub struct GridWalker {
    radius: i32,
    side: usize,
    /// Position in the current loop-erased path, valid when `on_path == gen`.
    slot: Vec<u32>,
    on_path: Vec<u32>,
    /// Cells of the current obstacle, valid when `blocked == gen`.
    blocked: Vec<u32>,
    gen: u32,
    path: Vec<u32>,
}

impl GridWalker {
    pub fn new(radius: u32) -> Self {
        let radius = radius.max(1) as i32;
        let side = 2 * radius as usize + 1;
        GridWalker {
            radius,
            side,
            slot: vec![0; side * side],
            on_path: vec![0; side * side],
            blocked: vec![0; side * side],
            gen: 0,
            path: Vec::new(),
        }
    }

    pub fn radius(&self) -> u32 {
        self.radius as u32
    }

    fn cell(&self, x: i32, y: i32) -> usize {
        (x + self.radius) as usize + (y + self.radius) as usize * self.side
    }

    fn coords(&self, c: u32) -> (i32, i32) {
        let c = c as usize;
        ((c % self.side) as i32 - self.radius, (c / self.side) as i32 - self.radius)
    }

    fn exited(&self, x: i32, y: i32) -> bool {
        let r = self.radius as i64;
        (x as i64).pow(2) + (y as i64).pow(2) >= r * r
    }

    fn next_gen(&mut self) {
        if self.gen == u32::MAX {
            self.on_path.fill(0);
            self.blocked.fill(0);
            self.gen = 0;
        }
        self.gen += 1;
    }

    /// Chronological loop erasure of a walk from the origin to its exit.
    /// Returns the erased path as lattice points, origin first.
    pub fn loop_erased_path<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Vec<(i32, i32)> {
        self.erase_walk(rng);
        self.path.iter().map(|&c| self.coords(c)).collect()
    }

    /// Number of edges of the loop erasure of a walk from the origin to its exit.
    pub fn loop_erased_length<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> usize {
        self.erase_walk(rng);
        self.path.len() - 1
    }

    fn erase_walk<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        self.next_gen();
        let gen = self.gen;
        self.path.clear();
        let (mut x, mut y) = (0i32, 0i32);
        let start = self.cell(0, 0);
        self.path.push(start as u32);
        self.on_path[start] = gen;
        self.slot[start] = 0;
        let mut bits = 0u64;
        let mut left = 0u32;
        loop {
            if left == 0 {
                bits = rng.next_u64();
                left = 32;
            }
            let (dx, dy) = STEPS[(bits & 3) as usize];
            bits >>= 2;
            left -= 1;
            x += dx;
            y += dy;
            let c = self.cell(x, y);
            if self.on_path[c] == gen {
                let keep = self.slot[c] as usize + 1;
                for &gone in &self.path[keep..] {
                    self.on_path[gone as usize] = 0;
                }
                self.path.truncate(keep);
            } else {
                self.on_path[c] = gen;
                self.slot[c] = self.path.len() as u32;
                self.path.push(c as u32);
            }
            if self.exited(x, y) {
                return;
            }
        }
    }

    /// One escape trial: erase a walk `Y` to the exit, keep its part after the
    /// last visit to the closed ball of radius `inner`, then run `trials`
    /// independent walks `X` from the origin to the exit and count those that
    /// never touch it.
    pub fn escape_trial<R: RngCore + ?Sized>(&mut self, inner: u32, trials: usize, rng: &mut R) -> usize {
        self.erase_walk(rng);
        let gen = self.gen;
        let r2 = (inner as i64).pow(2);
        let last_inside = self
            .path
            .iter()
            .rposition(|&c| {
                let (x, y) = self.coords(c);
                (x as i64).pow(2) + (y as i64).pow(2) <= r2
            })
            .unwrap_or(0);
        for &c in &self.path[last_inside..] {
            self.blocked[c as usize] = gen;
        }
        (0..trials).filter(|_| self.avoids_blocked(rng)).count()
    }

    fn avoids_blocked<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> bool {
        let gen = self.gen;
        let (mut x, mut y) = (0i32, 0i32);
        if self.blocked[self.cell(0, 0)] == gen {
            return false;
        }
        let mut bits = 0u64;
        let mut left = 0u32;
        loop {
            if left == 0 {
                bits = rng.next_u64();
                left = 32;
            }
            let (dx, dy) = STEPS[(bits & 3) as usize];
            bits >>= 2;
            left -= 1;
            x += dx;
            y += dy;
            if self.blocked[self.cell(x, y)] == gen {
                return false;
            }
            if self.exited(x, y) {
                return true;
            }
        }
    }
}

/// Loop-erased lengths (edge counts) from the origin to the exit of the ball
/// of radius `radius`, one per replicate.
pub fn lerw_lengths(radius: u32, reps: Replicates) -> Result<Vec<f64>> {
    reps.check()?;
    if radius < 1 {
        return Err(Error::Precondition("radius must be at least 1".into()));
    }
    replicate_map_init(
        reps.seed,
        reps.samples,
        reps.workers,
        || GridWalker::new(radius),
        |w, _, rng| w.loop_erased_length(rng) as f64,
    )
}

fn distinct_sizes(sizes: &[u32]) -> Result<()> {
    let mut s = sizes.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() < 2 {
        return Err(Error::DegenerateFit("need at least two distinct sizes".into()));
    }
    Ok(())
}

/// Fits `log E[length]` against `log N`. Each size runs on its own seed
/// derived from the run seed and `N`.
pub fn lerw_length_scaling(sizes: &[u32], reps: Replicates) -> Result<ScalingFit> {
    distinct_sizes(sizes)?;
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let values = lerw_lengths(n, reps.derived(n as u64))?;
        let r = EstimateReport::from_values(&values, reps.seed, Default::default());
        points.push(ScalePoint {
            size: n as f64,
            mean: r.estimate,
            stderr: r.stderr,
            samples: r.samples,
        });
    }
    ScalingFit::from_points(points, reps.seed)
}

/// Knobs of the escape estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EsOptions {
    /// Independent `X` walks per loop-erased `Y`. Above 1 this reuses each
    /// `Y` (variance reduction); the per-replicate value is then the
    /// fraction of escaping walks.
    pub walks_per_path: usize,
}

impl Default for EsOptions {
    fn default() -> Self {
        EsOptions { walks_per_path: 1 }
    }
}

/// Probability that a walk from the origin reaches distance `outer` without
/// meeting the part of an independent loop-erased walk beyond its last visit
/// to the ball of radius `inner`.
pub fn estimate_es(inner: u32, outer: u32, reps: Replicates, opts: EsOptions) -> Result<EstimateReport> {
    reps.check()?;
    if inner < 1 || 2 * inner > outer {
        return Err(Error::Precondition(format!(
            "escape estimate needs 1 <= L <= N/2, got L={inner}, N={outer}"
        )));
    }
    let k = opts.walks_per_path.max(1);
    let values = replicate_map_init(
        reps.seed,
        reps.samples,
        reps.workers,
        || GridWalker::new(outer),
        |w, _, rng| w.escape_trial(inner, k, rng) as f64 / k as f64,
    )?;
    Ok(EstimateReport::from_values(
        &values,
        reps.seed,
        meta(&[
            ("quantity", "escape".into()),
            ("inner", inner.to_string()),
            ("outer", outer.to_string()),
            ("walks_per_path", k.to_string()),
        ]),
    ))
}

/// Fits `log Es(L, N)` against `log N` at fixed `L`.
pub fn escape_scaling(inner: u32, sizes: &[u32], reps: Replicates, opts: EsOptions) -> Result<ScalingFit> {
    distinct_sizes(sizes)?;
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let r = estimate_es(inner, n, reps.derived(derive_seed(inner as u64, n as u64)), opts)?;
        points.push(ScalePoint {
            size: n as f64,
            mean: r.estimate,
            stderr: r.stderr,
            samples: r.samples,
        });
    }
    ScalingFit::from_points(points, reps.seed)
}
