//! Finite weighted multigraphs: contraction, effective resistance and exact
//! spanning-tree oracles.
//!
//! Parallel edges are kept as distinct edges; every Laplacian-level quantity
//! sums them. Self-loops are rejected on construction and dropped by
//! contraction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dsu::DisjointSets;
use crate::error::{Error, Result};

/// Vertex count up to which effective resistances use exact rationals.
pub const EXACT_RESISTANCE_LIMIT: usize = 12;
/// Vertex count up to which integer-weighted tree sums are computed exactly.
pub const EXACT_COUNT_LIMIT: usize = 16;
/// Vertex count guard for explicit spanning-tree enumeration.
pub const ENUMERATION_LIMIT: usize = 10;
/// Default residual tolerance of the Laplacian solver.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub conductance: f64,
    pub label: usize,
}

impl GraphEdge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A finite multigraph with strictly positive conductances.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<GraphEdge>,
    offsets: Vec<usize>,
    // (neighbor, edge id), grouped by vertex
    adjacency: Vec<(usize, usize)>,
    total: Vec<f64>,
    unit: bool,
}

/// JSON edge-list form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<GraphEdge>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<GraphEdge>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!("edge {i} has an endpoint outside 0..{n}")));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("edge {i} is a self-loop")));
            }
            if !(e.conductance > 0.0 && e.conductance.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} has non-positive conductance {}",
                    e.conductance
                )));
            }
        }
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0, 0); offsets[n]];
        let mut total = vec![0.0; n];
        for (id, e) in edges.iter().enumerate() {
            adjacency[fill[e.u]] = (e.v, id);
            fill[e.u] += 1;
            adjacency[fill[e.v]] = (e.u, id);
            fill[e.v] += 1;
            total[e.u] += e.conductance;
            total[e.v] += e.conductance;
        }
        let unit = edges.iter().all(|e| e.conductance == edges[0].conductance);
        Ok(Self {
            n,
            edges,
            offsets,
            adjacency,
            total,
            unit,
        })
    }

    /// Unit-conductance graph; edge labels are the pair indices.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::from_weighted_pairs(n, &pairs.iter().map(|&(u, v)| (u, v, 1.0)).collect::<Vec<_>>())
    }

    pub fn from_weighted_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(label, &(u, v, conductance))| GraphEdge {
                u,
                v,
                conductance,
                label,
            })
            .collect();
        Self::new(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Result<&GraphEdge> {
        self.edges.get(id).ok_or(Error::EdgeNotFound(id))
    }

    /// `(neighbor, edge id)` pairs incident to `v`, one per incident edge.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn total_conductance(&self, v: usize) -> f64 {
        self.total[v]
    }

    /// True when all conductances are equal, so walks may pick neighbors uniformly.
    pub fn has_uniform_conductance(&self) -> bool {
        self.unit
    }

    /// Sum of conductances over all parallel edges joining `a` and `b`.
    pub fn conductance_between(&self, a: usize, b: usize) -> f64 {
        self.neighbors(a)
            .iter()
            .filter(|&&(w, _)| w == b)
            .map(|&(_, id)| self.edges[id].conductance)
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut d = DisjointSets::new(self.n);
        for e in &self.edges {
            d.union(e.u, e.v);
        }
        d.sets() == 1
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            vertices: self.n,
            edges: self.edges.clone(),
        }
    }

    pub fn from_file(file: GraphFile) -> Result<Self> {
        Self::new(file.vertices, file.edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidGraph(e.to_string()))?;
        Self::from_file(file)
    }

    /// Merges the endpoints of edge `id`.
    pub fn contract_edge(&self, id: usize) -> Result<WeightedGraph> {
        Ok(self.contract_edge_mapped(id)?.0)
    }

    /// Merges the endpoints of edge `id` and returns the old-to-new vertex map.
    ///
    /// Edges parallel to `id` become self-loops and are dropped. Every other
    /// edge survives with its conductance and label, so the total conductance
    /// from the merged vertex to any neighbor is the sum of the two old totals.
    pub fn contract_edge_mapped(&self, id: usize) -> Result<(WeightedGraph, Vec<usize>)> {
        let e = *self.edge(id)?;
        let (keep, gone) = (e.u.min(e.v), e.u.max(e.v));
        let map: Vec<usize> = (0..self.n)
            .map(|x| match x.cmp(&gone) {
                std::cmp::Ordering::Less => x,
                std::cmp::Ordering::Equal => keep,
                std::cmp::Ordering::Greater => x - 1,
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|f| {
                let (a, b) = (map[f.u], map[f.v]);
                (a != b).then_some(GraphEdge {
                    u: a,
                    v: b,
                    conductance: f.conductance,
                    label: f.label,
                })
            })
            .collect();
        Ok((WeightedGraph::new(self.n - 1, edges)?, map))
    }

    /// Removes edge `id`, keeping the vertex set.
    pub fn delete_edge(&self, id: usize) -> Result<WeightedGraph> {
        self.edge(id)?;
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != id)
            .map(|(_, e)| *e)
            .collect();
        WeightedGraph::new(self.n, edges)
    }

    /// Dense Laplacian (parallel edges summed).
    pub fn laplacian(&self) -> Vec<Vec<f64>> {
        let mut l = vec![vec![0.0; self.n]; self.n];
        for e in &self.edges {
            l[e.u][e.u] += e.conductance;
            l[e.v][e.v] += e.conductance;
            l[e.u][e.v] -= e.conductance;
            l[e.v][e.u] -= e.conductance;
        }
        l
    }

    /// Effective resistance between the endpoints of edge `id`, the edge itself
    /// included. Exact rationals up to [`EXACT_RESISTANCE_LIMIT`] vertices,
    /// conjugate gradients with residual `tol` beyond.
    pub fn effective_resistance(&self, id: usize, tol: f64) -> Result<f64> {
        let e = *self.edge(id)?;
        if self.n <= EXACT_RESISTANCE_LIMIT {
            let r = self.effective_resistance_exact(e.u, e.v)?;
            return Ok(r.to_f64().unwrap_or(f64::NAN));
        }
        self.effective_resistance_iterative(e.u, e.v, tol)
    }

    /// Kirchhoff's ratio of Laplacian minors in exact rational arithmetic:
    /// `det L[-u,-v] / det L[-v]`.
    pub fn effective_resistance_exact(&self, u: usize, v: usize) -> Result<BigRational> {
        if u >= self.n {
            return Err(Error::VertexNotFound(u));
        }
        if v >= self.n {
            return Err(Error::VertexNotFound(v));
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if u == v {
            return Ok(BigRational::zero());
        }
        let l = self.rational_laplacian()?;
        let denom = rational_det(minor(&l, &[v]));
        let numer = rational_det(minor(&l, &[u.min(v), u.max(v)]));
        Ok(numer / denom)
    }

    /// Grounds `v` and solves the Laplacian system for a unit current from `u`
    /// with Jacobi-preconditioned conjugate gradients.
    pub fn effective_resistance_iterative(&self, u: usize, v: usize, tol: f64) -> Result<f64> {
        if u >= self.n {
            return Err(Error::VertexNotFound(u));
        }
        if v >= self.n {
            return Err(Error::VertexNotFound(v));
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if u == v {
            return Ok(0.0);
        }
        let n = self.n;
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                if i == v {
                    out[i] = 0.0;
                    continue;
                }
                let mut acc = self.total[i] * x[i];
                for &(j, id) in self.neighbors(i) {
                    if j != v {
                        acc -= self.edges[id].conductance * x[j];
                    }
                }
                out[i] = acc;
            }
        };
        let inv_diag: Vec<f64> = (0..n)
            .map(|i| if i == v { 0.0 } else { 1.0 / self.total[i] })
            .collect();
        let mut x = vec![0.0; n];
        let mut r = vec![0.0; n];
        r[u] = 1.0;
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let cap = 10 * n + 1000;
        let mut residual = 1.0;
        for _ in 0..cap {
            apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            residual = r.iter().map(|a| a * a).sum::<f64>().sqrt();
            if residual <= tol {
                return Ok(x[u]);
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NonConvergence {
            iterations: cap,
            residual,
        })
    }

    /// Effective resistance across every edge, from one dense factorization of
    /// the grounded Laplacian.
    pub fn edge_resistances(&self) -> Result<Vec<f64>> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if self.n <= 1 {
            return Ok(Vec::new());
        }
        let ground = self.n - 1;
        let m = self.n - 1;
        let l = self.laplacian();
        let mut a: Vec<Vec<f64>> = (0..m).map(|i| l[i][..m].to_vec()).collect();
        // Cholesky, in place (lower triangle).
        for j in 0..m {
            let mut d = a[j][j];
            for k in 0..j {
                d -= a[j][k] * a[j][k];
            }
            if d <= 0.0 {
                return Err(Error::Invariant("grounded Laplacian not positive definite".into()));
            }
            let d = d.sqrt();
            a[j][j] = d;
            for i in j + 1..m {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= a[i][k] * a[j][k];
                }
                a[i][j] = s / d;
            }
        }
        // Inverse column by column.
        let mut inv = vec![vec![0.0; m]; m];
        for c in 0..m {
            let mut y = vec![0.0; m];
            for i in 0..m {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for k in 0..i {
                    s -= a[i][k] * y[k];
                }
                y[i] = s / a[i][i];
            }
            for i in (0..m).rev() {
                let mut s = y[i];
                for k in i + 1..m {
                    s -= a[k][i] * inv[k][c];
                }
                inv[i][c] = s / a[i][i];
            }
        }
        let g = |i: usize, j: usize| if i == ground || j == ground { 0.0 } else { inv[i][j] };
        Ok(self
            .edges
            .iter()
            .map(|e| g(e.u, e.u) + g(e.v, e.v) - 2.0 * g(e.u, e.v))
            .collect())
    }

    /// Weighted spanning-tree sum `Σ_T Π_{e∈T} c(e)` by the matrix-tree theorem.
    pub fn spanning_tree_count(&self) -> Result<TreeCount> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if self.n <= 1 {
            return Ok(TreeCount {
                value: 1.0,
                exact: Some(BigInt::one()),
                precision: Precision::Exact,
            });
        }
        let integral = self
            .edges
            .iter()
            .all(|e| e.conductance.fract() == 0.0 && e.conductance < 1e15);
        if integral && self.n <= EXACT_COUNT_LIMIT {
            let m = self.n - 1;
            let mut a = vec![vec![0i128; m]; m];
            for e in &self.edges {
                let c = e.conductance as i128;
                for (x, y) in [(e.u, e.v), (e.v, e.u)] {
                    if x < m {
                        a[x][x] += c;
                        if y < m {
                            a[x][y] -= c;
                        }
                    }
                }
            }
            if let Some(det) = bareiss_i128(a) {
                return Ok(TreeCount {
                    value: det as f64,
                    exact: Some(BigInt::from(det)),
                    precision: Precision::Exact,
                });
            }
            let l = self.laplacian();
            return Ok(TreeCount {
                value: float_det(minor_f64(&l, self.n - 1)),
                exact: None,
                precision: Precision::Overflowed,
            });
        }
        let l = self.laplacian();
        Ok(TreeCount {
            value: float_det(minor_f64(&l, self.n - 1)),
            exact: None,
            precision: Precision::Float,
        })
    }

    /// Every spanning tree with its weight product. Guarded to
    /// [`ENUMERATION_LIMIT`] vertices.
    pub fn enumerate_spanning_trees(&self) -> Result<Vec<WeightedTree>> {
        if self.n > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                what: "spanning-tree enumeration",
                size: self.n,
                limit: ENUMERATION_LIMIT,
            });
        }
        let mut out = Vec::new();
        if self.n == 0 {
            return Ok(out);
        }
        let mut chosen = Vec::with_capacity(self.n);
        let mut excluded = vec![false; self.edges.len()];
        self.enumerate_from(0, DisjointSets::new(self.n), &mut chosen, &mut excluded, &mut out);
        Ok(out)
    }

    fn enumerate_from(
        &self,
        next: usize,
        dsu: DisjointSets,
        chosen: &mut Vec<usize>,
        excluded: &mut Vec<bool>,
        out: &mut Vec<WeightedTree>,
    ) {
        if chosen.len() + 1 == self.n {
            let weight = chosen.iter().map(|&i| self.edges[i].conductance).product();
            out.push(WeightedTree {
                edges: chosen.clone(),
                weight,
            });
            return;
        }
        if next == self.edges.len() {
            return;
        }
        let e = self.edges[next];
        let mut with = dsu.clone();
        if with.union(e.u, e.v) {
            chosen.push(next);
            self.enumerate_from(next + 1, with, chosen, excluded, out);
            chosen.pop();
        }
        excluded[next] = true;
        if self.connected_without_excluded(excluded) {
            self.enumerate_from(next + 1, dsu, chosen, excluded, out);
        }
        excluded[next] = false;
    }

    fn connected_without_excluded(&self, excluded: &[bool]) -> bool {
        let mut d = DisjointSets::new(self.n);
        for (i, e) in self.edges.iter().enumerate() {
            if !excluded[i] {
                d.union(e.u, e.v);
            }
        }
        d.sets() == 1
    }

    /// Probability that edge `id` lies in the weighted UST. Enumerates trees up
    /// to [`ENUMERATION_LIMIT`] vertices, otherwise uses `c(e)·R_eff(e)`.
    pub fn edge_ust_probability(&self, id: usize) -> Result<f64> {
        let e = *self.edge(id)?;
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if self.n <= ENUMERATION_LIMIT {
            let trees = self.enumerate_spanning_trees()?;
            let total: f64 = trees.iter().map(|t| t.weight).sum();
            let with: f64 = trees
                .iter()
                .filter(|t| t.edges.contains(&id))
                .map(|t| t.weight)
                .sum();
            return Ok(with / total);
        }
        Ok(e.conductance * self.effective_resistance(id, DEFAULT_TOLERANCE)?)
    }

    fn rational_laplacian(&self) -> Result<Vec<Vec<BigRational>>> {
        let mut l = vec![vec![BigRational::zero(); self.n]; self.n];
        for e in &self.edges {
            let c = BigRational::from_float(e.conductance)
                .ok_or_else(|| Error::InvalidGraph("non-finite conductance".into()))?;
            l[e.u][e.u] += &c;
            l[e.v][e.v] += &c;
            l[e.u][e.v] -= &c;
            l[e.v][e.u] -= &c;
        }
        Ok(l)
    }
}

/// A spanning tree as edge ids with its conductance product.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    pub edges: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precision {
    /// Exact integer arithmetic.
    Exact,
    /// Integer arithmetic overflowed; `value` is a floating-point determinant.
    Overflowed,
    /// Non-integer weights or too many vertices; floating-point determinant.
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeCount {
    pub value: f64,
    pub exact: Option<BigInt>,
    pub precision: Precision,
}

fn minor<T: Clone>(m: &[Vec<T>], drop: &[usize]) -> Vec<Vec<T>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| !drop.contains(j))
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

fn minor_f64(m: &[Vec<f64>], drop: usize) -> Vec<Vec<f64>> {
    minor(m, &[drop])
}

fn rational_det(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

/// Fraction-free Gaussian elimination; `None` on overflow.
fn bareiss_i128(mut a: Vec<Vec<i128>>) -> Option<i128> {
    let n = a.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let swap = (k + 1..n).find(|&r| a[r][k] != 0)?;
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j]
                    .checked_mul(a[k][k])?
                    .checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = t / prev;
            }
        }
        prev = a[k][k];
    }
    a[n - 1][n - 1].checked_mul(sign)
}

fn float_det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Small named graphs used by tests, benches and the CLI fixtures.
pub mod fixtures {
    use super::WeightedGraph;

    pub fn triangle() -> WeightedGraph {
        WeightedGraph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    /// Triangle with edge `0–1` of conductance 2.
    pub fn weighted_triangle() -> WeightedGraph {
        WeightedGraph::from_weighted_pairs(3, &[(0, 1, 2.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    pub fn cycle(n: usize) -> WeightedGraph {
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        WeightedGraph::from_pairs(n, &pairs).unwrap()
    }

    pub fn path(n: usize) -> WeightedGraph {
        let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        WeightedGraph::from_pairs(n, &pairs).unwrap()
    }

    pub fn complete(n: usize) -> WeightedGraph {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
        WeightedGraph::from_pairs(n, &pairs).unwrap()
    }

    /// `w × h` grid, vertices in row-major order.
    pub fn grid(w: usize, h: usize) -> WeightedGraph {
        let mut pairs = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let v = y * w + x;
                if x + 1 < w {
                    pairs.push((v, v + 1));
                }
                if y + 1 < h {
                    pairs.push((v, v + w));
                }
            }
        }
        WeightedGraph::from_pairs(w * h, &pairs).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn contraction_adds_weights() {
        let k3 = triangle();
        let g = k3.contract_edge(0).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.conductance_between(0, 1), 2.0);

        let p = path(3).contract_edge(0).unwrap();
        assert_eq!(p.vertex_count(), 2);
        assert_eq!(p.edge_count(), 1);
        assert_eq!(p.conductance_between(0, 1), 1.0);

        let c = cycle(4).contract_edge(0).unwrap();
        assert_eq!(c.vertex_count(), 3);
        assert_eq!(c.edge_count(), 3);
        for e in c.edges() {
            assert_eq!(e.conductance, 1.0);
        }
        assert!(matches!(k3.contract_edge(9), Err(Error::EdgeNotFound(9))));
    }

    #[test]
    fn contraction_drops_parallel_copies() {
        let g = WeightedGraph::from_pairs(3, &[(0, 1), (0, 1), (1, 2)]).unwrap();
        let h = g.contract_edge(0).unwrap();
        assert_eq!(h.edge_count(), 1);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(WeightedGraph::from_pairs(2, &[(0, 0)]).is_err());
        assert!(WeightedGraph::from_weighted_pairs(2, &[(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::from_pairs(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn resistances_of_small_graphs() {
        // triangle: edge in 2 of 3 trees; C4: edge in 3 of 4 trees
        for id in 0..3 {
            assert_eq!(triangle().effective_resistance_exact(
                triangle().edges()[id].u, triangle().edges()[id].v).unwrap(), rat(2, 3));
        }
        let c4 = cycle(4);
        assert_eq!(c4.effective_resistance_exact(0, 1).unwrap(), rat(3, 4));
        assert!((c4.effective_resistance(0, 1e-12).unwrap() - 0.75).abs() < 1e-15);
        assert!((c4.effective_resistance_iterative(0, 1, 1e-12).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(path(2).effective_resistance(0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn iterative_solver_on_larger_grid() {
        // 5x5 grid has 25 vertices: above the exact limit, cross-check with Cholesky route
        let g = grid(5, 5);
        let dense = g.edge_resistances().unwrap();
        for id in [0, 7, 20, 39] {
            let it = g.effective_resistance(id, 1e-12).unwrap();
            assert!((it - dense[id]).abs() < 1e-9, "{it} vs {}", dense[id]);
        }
    }

    #[test]
    fn disconnected_graph_errors() {
        let g = WeightedGraph::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.effective_resistance(0, 1e-10), Err(Error::Disconnected));
        assert_eq!(g.spanning_tree_count(), Err(Error::Disconnected));
    }

    #[test]
    fn tree_counts() {
        let c = triangle().spanning_tree_count().unwrap();
        assert_eq!(c.exact, Some(BigInt::from(3)));
        assert_eq!(c.precision, Precision::Exact);
        assert_eq!(weighted_triangle().spanning_tree_count().unwrap().value, 5.0);
        let grid3 = grid(3, 3);
        let count = grid3.spanning_tree_count().unwrap();
        let brute = grid3.enumerate_spanning_trees().unwrap().len();
        assert_eq!(count.exact, Some(BigInt::from(192)));
        assert_eq!(brute, 192);
        // above the exact limit: floating point flagged
        let big = grid(5, 4);
        let fc = big.spanning_tree_count().unwrap();
        assert_eq!(fc.precision, Precision::Float);
    }

    #[test]
    fn overflow_is_flagged() {
        let mut pairs = Vec::new();
        for i in 0..16 {
            for j in i + 1..16 {
                pairs.push((i, j, 1e9));
            }
        }
        let g = WeightedGraph::from_weighted_pairs(16, &pairs).unwrap();
        let c = g.spanning_tree_count().unwrap();
        assert_eq!(c.precision, Precision::Overflowed);
        // Cayley: 16^14 trees of weight 1e9^15
        let expected = 16f64.powi(14) * 1e135;
        assert!((c.value / expected - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enumeration_matches_matrix_tree() {
        assert_eq!(triangle().enumerate_spanning_trees().unwrap().len(), 3);
        assert_eq!(cycle(4).enumerate_spanning_trees().unwrap().len(), 4);
        let g23 = grid(2, 3);
        let trees = g23.enumerate_spanning_trees().unwrap();
        let count = g23.spanning_tree_count().unwrap();
        assert_eq!(count.exact, Some(BigInt::from(trees.len())));
        assert_eq!(trees.len(), 15);
        let w: f64 = weighted_triangle().enumerate_spanning_trees().unwrap().iter().map(|t| t.weight).sum();
        assert_eq!(w, 5.0);
        assert!(matches!(complete(11).enumerate_spanning_trees(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn edge_probabilities() {
        for id in 0..3 {
            assert!((triangle().edge_ust_probability(id).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        }
        for id in 0..4 {
            assert!((cycle(4).edge_ust_probability(id).unwrap() - 0.75).abs() < 1e-15);
        }
        // bridge 2-3 hanging off a triangle
        let g = WeightedGraph::from_pairs(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert_eq!(g.edge_ust_probability(3).unwrap(), 1.0);
    }

    #[test]
    fn json_round_trip() {
        let g = weighted_triangle();
        let back = WeightedGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back.to_file(), g.to_file());
    }

    fn random_connected(seed: u64, n: usize, extra: usize) -> WeightedGraph {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::new();
        for v in 1..n {
            pairs.push((rng.random_range(0..v), v, rng.random_range(1..5) as f64));
        }
        for _ in 0..extra {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                pairs.push((a, b, rng.random_range(1..5) as f64));
            }
        }
        WeightedGraph::from_weighted_pairs(n, &pairs).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kirchhoff_identity(seed in any::<u64>(), n in 2usize..8, extra in 0usize..8) {
            let g = random_connected(seed, n, extra);
            for id in 0..g.edge_count() {
                let p = g.edge_ust_probability(id).unwrap();
                let c = g.edges()[id].conductance;
                let r = g.effective_resistance_iterative(g.edges()[id].u, g.edges()[id].v, 1e-12).unwrap();
                prop_assert!((p - c * r).abs() < 1e-9);
            }
        }

        #[test]
        fn foster_sum(seed in any::<u64>(), n in 2usize..9, extra in 0usize..10) {
            let g = random_connected(seed, n, extra);
            let unit = WeightedGraph::from_pairs(n, &g.edges().iter().map(|e| (e.u, e.v)).collect::<Vec<_>>()).unwrap();
            let total: f64 = (0..unit.edge_count()).map(|id| unit.effective_resistance(id, 1e-12).unwrap()).sum();
            prop_assert!((total - (n as f64 - 1.0)).abs() < 1e-9);
        }

        #[test]
        fn contraction_conserves_cross_conductance(seed in any::<u64>(), n in 3usize..9, extra in 0usize..10) {
            let g = random_connected(seed, n, extra);
            let (h, map) = g.contract_edge_mapped(0).unwrap();
            let merged = map[g.edges()[0].u];
            for x in 0..g.vertex_count() {
                let nx = map[x];
                if nx == merged { continue; }
                let before = g.conductance_between(g.edges()[0].u, x) + g.conductance_between(g.edges()[0].v, x);
                prop_assert_eq!(h.conductance_between(merged, nx), before);
            }
        }

        #[test]
        fn dense_resistances_match_exact(seed in any::<u64>(), n in 2usize..8, extra in 0usize..8) {
            let g = random_connected(seed, n, extra);
            let dense = g.edge_resistances().unwrap();
            for (id, e) in g.edges().iter().enumerate() {
                let exact = g.effective_resistance_exact(e.u, e.v).unwrap().to_f64().unwrap();
                prop_assert!((dense[id] - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rayleigh_monotonicity_small_corpus() {
        // deleting f never lowers P(e), contracting f never raises it
        for seed in 0..40 {
            let g = random_connected(seed, 5, 4);
            for f in 0..g.edge_count() {
                let deleted = g.delete_edge(f).unwrap();
                let (contracted, _) = g.contract_edge_mapped(f).unwrap();
                for e in 0..g.edge_count() {
                    if e == f { continue; }
                    let p = g.edge_ust_probability(e).unwrap();
                    if deleted.is_connected() {
                        let idx = if e > f { e - 1 } else { e };
                        assert!(deleted.edge_ust_probability(idx).unwrap() >= p - 1e-12);
                    }
                    if let Some(idx) = contracted.edges().iter().position(|x| x.label == g.edges()[e].label) {
                        assert!(contracted.edge_ust_probability(idx).unwrap() <= p + 1e-12);
                    }
                }
            }
        }
    }
}
