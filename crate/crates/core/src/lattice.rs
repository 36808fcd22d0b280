//! Discretized planar domains, their duals and annulus geometry.
//!
//! Sites are stored in half-lattice units: primal vertices of `δZ²` sit at even
//! coordinates and faces (dual vertices) at odd ones, so a domain and its dual
//! share one integer coordinate system. Physical positions are
//! `half_coords · δ / 2`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::{GraphEdge, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    Wired,
    Free,
    /// A wired box standing in for the whole plane.
    WholePlaneBox,
}

impl BoundaryCondition {
    pub fn is_wired(self) -> bool {
        !matches!(self, BoundaryCondition::Free)
    }

    pub fn dual(self) -> Self {
        if self.is_wired() {
            BoundaryCondition::Free
        } else {
            BoundaryCondition::Wired
        }
    }
}

/// Reproducible description of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    Box {
        half_width: u32,
        mesh: f64,
        boundary: BoundaryCondition,
    },
    Disc {
        radius: f64,
        mesh: f64,
        boundary: BoundaryCondition,
    },
    /// `width × height` vertices with the lower-left corner at the origin.
    Rect {
        width: u32,
        height: u32,
        mesh: f64,
        boundary: BoundaryCondition,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<LatticeDomain> {
        match *self {
            DomainSpec::Box {
                half_width,
                mesh,
                boundary,
            } => build_box_domain(half_width, mesh, boundary),
            DomainSpec::Disc {
                radius,
                mesh,
                boundary,
            } => build_disc_domain(radius, mesh, boundary),
            DomainSpec::Rect {
                width,
                height,
                mesh,
                boundary,
            } => build_rect_domain(width, height, mesh, boundary),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    /// Half-lattice coordinates.
    Lattice([i32; 2]),
    /// Explicit vertex standing for an identified (wired) outer boundary.
    Super,
}

#[derive(Debug, Clone)]
pub struct LatticeDomain {
    mesh: f64,
    boundary_condition: BoundaryCondition,
    spec: Option<DomainSpec>,
    sites: Vec<Site>,
    positions: Vec<Option<Point>>,
    edges: Vec<[usize; 2]>,
    boundary: Vec<bool>,
    boundary_list: Vec<usize>,
    index: HashMap<[i32; 2], usize>,
    graph: Option<WeightedGraph>,
}

pub fn build_box_domain(half_width: u32, mesh: f64, bc: BoundaryCondition) -> Result<LatticeDomain> {
    check_mesh(mesh)?;
    if half_width == 0 {
        return Err(Error::DomainTooSmall("box half-width must be at least 1".into()));
    }
    let n = half_width as i32;
    let points = (-n..=n).flat_map(|y| (-n..=n).map(move |x| [x, y])).collect();
    LatticeDomain::from_points(
        points,
        mesh,
        bc,
        Some(DomainSpec::Box {
            half_width,
            mesh,
            boundary: bc,
        }),
    )
}

pub fn build_rect_domain(width: u32, height: u32, mesh: f64, bc: BoundaryCondition) -> Result<LatticeDomain> {
    check_mesh(mesh)?;
    if width == 0 || height == 0 || width * height < 2 {
        return Err(Error::DomainTooSmall(format!("{width}x{height} rectangle")));
    }
    let points = (0..height as i32)
        .flat_map(|y| (0..width as i32).map(move |x| [x, y]))
        .collect();
    LatticeDomain::from_points(
        points,
        mesh,
        bc,
        Some(DomainSpec::Rect {
            width,
            height,
            mesh,
            boundary: bc,
        }),
    )
}

/// Connected component of the origin in `{v ∈ δZ² : |v| < R}`.
pub fn build_disc_domain(radius: f64, mesh: f64, bc: BoundaryCondition) -> Result<LatticeDomain> {
    check_mesh(mesh)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(format!("radius {radius} must be positive")));
    }
    let r = radius / mesh;
    let k = r.ceil() as i32 + 1;
    let inside = |x: i32, y: i32| ((x * x + y * y) as f64).sqrt() < r;
    if !inside(0, 0) {
        return Err(Error::RadiusTooSmall(0));
    }
    // flood fill from the origin
    let mut seen = std::collections::HashSet::new();
    let mut stack: Vec<[i32; 2]> = vec![[0, 0]];
    seen.insert([0, 0]);
    while let Some([x, y]) = stack.pop() {
        for [dx, dy] in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            let q = [x + dx, y + dy];
            if q[0].abs() <= k && q[1].abs() <= k && inside(q[0], q[1]) && seen.insert(q) {
                stack.push(q);
            }
        }
    }
    if seen.len() < 2 {
        return Err(Error::RadiusTooSmall(seen.len()));
    }
    LatticeDomain::from_points(
        seen.into_iter().collect(),
        mesh,
        bc,
        Some(DomainSpec::Disc {
            radius,
            mesh,
            boundary: bc,
        }),
    )
}

fn check_mesh(mesh: f64) -> Result<()> {
    if mesh > 0.0 && mesh.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("mesh {mesh} must be positive")))
    }
}

fn raster_key(s: &[i32; 2]) -> (i32, i32) {
    (s[1], s[0])
}


impl LatticeDomain {
    /// Induced subgraph of `Z²` on `points` (lattice units).
    fn from_points(points: Vec<[i32; 2]>, mesh: f64, bc: BoundaryCondition, spec: Option<DomainSpec>) -> Result<Self> {
        let half = points.into_iter().map(|[x, y]| [2 * x, 2 * y]).collect();
        Self::from_half_sites(half, mesh, bc, spec)
    }

    /// Induced lattice subgraph on half-unit sites of one parity class.
    fn from_half_sites(mut half: Vec<[i32; 2]>, mesh: f64, bc: BoundaryCondition, spec: Option<DomainSpec>) -> Result<Self> {
        half.sort_by_key(raster_key);
        half.dedup();
        let index: HashMap<[i32; 2], usize> = half.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut edges = Vec::new();
        for (i, p) in half.iter().enumerate() {
            for step in [[2, 0], [0, 2]] {
                if let Some(&j) = index.get(&[p[0] + step[0], p[1] + step[1]]) {
                    edges.push([i, j]);
                }
            }
        }
        let sites: Vec<Site> = half.iter().map(|&p| Site::Lattice(p)).collect();
        let boundary: Vec<bool> = half
            .iter()
            .map(|&p| !surrounding_faces(p).iter().all(|&f| face_full(&index, f)))
            .collect();
        let domain = Self::assemble(mesh, bc, spec, sites, edges, boundary, index);
        if !domain.is_connected() {
            return Err(Error::Geometry("domain is not connected".into()));
        }
        Ok(domain)
    }

    fn assemble(
        mesh: f64,
        bc: BoundaryCondition,
        spec: Option<DomainSpec>,
        sites: Vec<Site>,
        edges: Vec<[usize; 2]>,
        boundary: Vec<bool>,
        index: HashMap<[i32; 2], usize>,
    ) -> Self {
        let positions = sites
            .iter()
            .map(|s| match s {
                Site::Lattice(p) => Some([p[0] as f64 * mesh / 2.0, p[1] as f64 * mesh / 2.0]),
                Site::Super => None,
            })
            .collect();
        let graph = if edges.iter().all(|e| e[0] != e[1]) {
            let ge = edges
                .iter()
                .enumerate()
                .map(|(label, e)| GraphEdge {
                    u: e[0],
                    v: e[1],
                    conductance: 1.0,
                    label,
                })
                .collect();
            WeightedGraph::new(sites.len(), ge).ok()
        } else {
            None
        };
        let boundary_list = (0..sites.len()).filter(|&v| boundary[v]).collect();
        Self {
            mesh,
            boundary_condition: bc,
            spec,
            sites,
            positions,
            edges,
            boundary,
            boundary_list,
            index,
            graph,
        }
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.boundary_condition
    }

    /// JSON-serializable description; `None` for dual domains.
    pub fn spec(&self) -> Option<&DomainSpec> {
        self.spec.as_ref()
    }

    pub fn vertex_count(&self) -> usize {
        self.sites.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn site(&self, v: usize) -> Site {
        self.sites[v]
    }

    pub fn position(&self, v: usize) -> Option<Point> {
        self.positions[v]
    }

    pub fn positions(&self) -> &[Option<Point>] {
        &self.positions
    }

    /// Integer lattice coordinates of a primal vertex (`None` for faces and the super-vertex).
    pub fn lattice_coords(&self, v: usize) -> Option<[i32; 2]> {
        match self.sites[v] {
            Site::Lattice([x, y]) if x % 2 == 0 && y % 2 == 0 => Some([x / 2, y / 2]),
            _ => None,
        }
    }

    pub fn vertex_at(&self, lattice: [i32; 2]) -> Option<usize> {
        self.index.get(&[2 * lattice[0], 2 * lattice[1]]).copied()
    }

    pub fn site_at_half(&self, half: [i32; 2]) -> Option<usize> {
        self.index.get(&half).copied()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_list
    }

    /// Vertices merged into one by a wired boundary condition.
    pub fn identified_vertices(&self) -> &[usize] {
        if self.boundary_condition.is_wired() {
            &self.boundary_list
        } else {
            &[]
        }
    }

    /// Unit-conductance graph with edge ids equal to domain edge ids.
    pub fn graph(&self) -> Result<&WeightedGraph> {
        self.graph
            .as_ref()
            .ok_or_else(|| Error::InvalidGraph("domain has self-loop edges".into()))
    }

    /// The vertex nearest the origin, first in raster order on ties.
    pub fn central_vertex(&self) -> usize {
        let mut best = (f64::INFINITY, 0);
        for v in 0..self.vertex_count() {
            if let Some(p) = self.positions[v] {
                let d = p[0].hypot(p[1]);
                if d < best.0 {
                    best = (d, v);
                }
            }
        }
        best.1
    }

    /// Euclidean midpoint of an edge, if both ends are embedded.
    pub fn edge_midpoint(&self, e: usize) -> Option<Point> {
        let [a, b] = self.edges[e];
        match (self.positions[a], self.positions[b]) {
            (Some(p), Some(q)) => Some([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]),
            (Some(p), None) | (None, Some(p)) => Some(p),
            _ => None,
        }
    }

    fn is_connected(&self) -> bool {
        let mut d = crate::dsu::DisjointSets::new(self.vertex_count());
        for e in &self.edges {
            d.union(e[0], e[1]);
        }
        d.sets() <= 1
    }

    fn lattice_half_sites(&self) -> Result<Vec<[i32; 2]>> {
        self.sites
            .iter()
            .map(|s| match s {
                Site::Lattice(p) => Ok(*p),
                Site::Super => Err(Error::Duality(
                    "domain with an explicit super-vertex; use Duality::inverse".into(),
                )),
            })
            .collect()
    }

    /// Builds the planar dual with the boundary condition swapped.
    ///
    /// Free domains get the faces plus one explicit super-vertex for the
    /// outside. Wired domains get the faces only, and every edge lying on the
    /// outer boundary curve (a self-loop once the boundary is identified) has
    /// no dual.
    pub fn dual(&self) -> Result<Duality> {
        let half = self.lattice_half_sites()?;
        let mut faces: Vec<[i32; 2]> = Vec::new();
        for &p in &half {
            let f = [p[0] + 1, p[1] + 1];
            if face_full(&self.index, f) {
                faces.push(f);
            }
        }
        faces.sort_by_key(raster_key);
        let mut face_index: HashMap<[i32; 2], usize> = faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let sides = |e: &[usize; 2]| -> [Option<usize>; 2] {
            let (Site::Lattice(a), Site::Lattice(b)) = (self.sites[e[0]], self.sites[e[1]]) else {
                unreachable!("checked above")
            };
            let (lo, hi) = if raster_key(&a) <= raster_key(&b) { (a, b) } else { (b, a) };
            let cands = if lo[1] == hi[1] {
                [[lo[0] + 1, lo[1] + 1], [lo[0] + 1, lo[1] - 1]]
            } else {
                [[lo[0] + 1, lo[1] + 1], [lo[0] - 1, lo[1] + 1]]
            };
            cands.map(|c| face_index.get(&c).copied())
        };
        let mut primal_to_dual = vec![None; self.edge_count()];
        let mut dual_edges = Vec::new();
        let mut dual_to_primal = Vec::new();
        let dual_bc = self.boundary_condition.dual();
        if self.boundary_condition.is_wired() {
            for (id, e) in self.edges.iter().enumerate() {
                if let [Some(f), Some(g)] = sides(e) {
                    primal_to_dual[id] = Some(dual_edges.len());
                    dual_edges.push([f.min(g), f.max(g)]);
                    dual_to_primal.push(Some(id));
                }
            }
            let interior = self.boundary.iter().filter(|&&b| !b).count();
            if interior + faces.len() != dual_edges.len() + 1 {
                return Err(Error::Duality(format!(
                    "wired boundary is not a simple cycle ({interior} interior vertices, {} faces, {} interior edges)",
                    faces.len(),
                    dual_edges.len()
                )));
            }
            let boundary = faces
                .iter()
                .map(|&f| !surrounding_faces(f).iter().all(|&g| face_full(&face_index, g)))
                .collect();
            let sites = faces.iter().map(|&f| Site::Lattice(f)).collect();
            let dual = Self::assemble(self.mesh, dual_bc, None, sites, dual_edges, boundary, face_index);
            if dual.vertex_count() > 0 && !dual.is_connected() {
                return Err(Error::Duality("face graph is disconnected".into()));
            }
            return Ok(Duality {
                dual,
                primal_to_dual,
                dual_to_primal,
            });
        }
        let outer = faces.len();
        for (id, e) in self.edges.iter().enumerate() {
            let [f, g] = sides(e).map(|s| s.unwrap_or(outer));
            primal_to_dual[id] = Some(dual_edges.len());
            dual_edges.push([f.min(g), f.max(g)]);
            dual_to_primal.push(Some(id));
        }
        let mut sites: Vec<Site> = faces.iter().map(|&f| Site::Lattice(f)).collect();
        sites.push(Site::Super);
        let mut boundary = vec![false; faces.len()];
        boundary.push(true);
        face_index.shrink_to_fit();
        let dual = Self::assemble(self.mesh, dual_bc, None, sites, dual_edges, boundary, face_index);
        Ok(Duality {
            dual,
            primal_to_dual,
            dual_to_primal,
        })
    }

    /// Rings and annulus around the origin. See [`LatticeDomain::annulus_rings_at`].
    pub fn annulus_rings(&self, inner: f64, outer: f64) -> Result<Annulus> {
        self.annulus_rings_at([0.0, 0.0], inner, outer)
    }

    /// Inner ring `L ≤ |v−c| < L+δ`, outer ring `N−δ < |v−c| ≤ N`, and the
    /// edges with both endpoints in the closed annulus `L ≤ |v−c| ≤ N`.
    /// Requires every site of this lattice class in the closed ball `B(c, N)`
    /// to belong to the domain.
    pub fn annulus_rings_at(&self, center: Point, inner: f64, outer: f64) -> Result<Annulus> {
        if !(inner > 0.0 && inner < outer) {
            return Err(Error::Precondition(format!(
                "annulus radii must satisfy 0 < L < N, got L={inner}, N={outer}"
            )));
        }
        self.check_ball_inside(center, outer)?;
        let d = self.mesh;
        let mut in_annulus = vec![false; self.vertex_count()];
        let mut inner_ring = Vec::new();
        let mut outer_ring = Vec::new();
        for v in 0..self.vertex_count() {
            let Some(p) = self.positions[v] else { continue };
            let r = (p[0] - center[0]).hypot(p[1] - center[1]);
            if r >= inner && r <= outer {
                in_annulus[v] = true;
            }
            if r >= inner && r < inner + d {
                inner_ring.push(v);
            }
            if r > outer - d && r <= outer && r >= inner {
                outer_ring.push(v);
            }
        }
        if inner_ring.is_empty() || outer_ring.is_empty() {
            return Err(Error::Geometry("empty annulus ring".into()));
        }
        let edges = (0..self.edge_count())
            .filter(|&e| {
                let [a, b] = self.edges[e];
                in_annulus[a] && in_annulus[b]
            })
            .collect();
        Ok(Annulus {
            center,
            inner,
            outer,
            inner_ring,
            outer_ring,
            edges,
        })
    }

    fn check_ball_inside(&self, center: Point, radius: f64) -> Result<()> {
        let Some(parity) = self.sites.iter().find_map(|s| match s {
            Site::Lattice(p) => Some([p[0].rem_euclid(2), p[1].rem_euclid(2)]),
            Site::Super => None,
        }) else {
            return Err(Error::Geometry("domain has no embedded sites".into()));
        };
        let h = self.mesh / 2.0;
        let span = (radius / h).ceil() as i32 + 2;
        let cx = (center[0] / h).round() as i32;
        let cy = (center[1] / h).round() as i32;
        for y in cy - span..=cy + span {
            if y.rem_euclid(2) != parity[1] {
                continue;
            }
            for x in cx - span..=cx + span {
                if x.rem_euclid(2) != parity[0] {
                    continue;
                }
                let r = (x as f64 * h - center[0]).hypot(y as f64 * h - center[1]);
                if r <= radius && !self.index.contains_key(&[x, y]) {
                    return Err(Error::Geometry(format!(
                        "ball of radius {radius} around ({}, {}) leaves the domain",
                        center[0], center[1]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn surrounding_faces(p: [i32; 2]) -> [[i32; 2]; 4] {
    [
        [p[0] + 1, p[1] + 1],
        [p[0] - 1, p[1] + 1],
        [p[0] + 1, p[1] - 1],
        [p[0] - 1, p[1] - 1],
    ]
}

fn face_full(index: &HashMap<[i32; 2], usize>, f: [i32; 2]) -> bool {
    [[-1, -1], [1, -1], [-1, 1], [1, 1]]
        .iter()
        .all(|d| index.contains_key(&[f[0] + d[0], f[1] + d[1]]))
}

/// A planar dual together with the edge bijection.
#[derive(Debug, Clone)]
pub struct Duality {
    pub dual: LatticeDomain,
    primal_to_dual: Vec<Option<usize>>,
    dual_to_primal: Vec<Option<usize>>,
}

impl Duality {
    /// Dual edge of primal edge `e`; `None` for outer-curve edges of a wired domain.
    pub fn dual_edge(&self, e: usize) -> Option<usize> {
        self.primal_to_dual[e]
    }

    /// Primal edge of dual edge `d`; `None` only on the wired side of an inverse.
    pub fn primal_edge(&self, d: usize) -> Option<usize> {
        self.dual_to_primal[d]
    }

    /// Primal edges that have a dual.
    pub fn dualized_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.primal_to_dual.len()).filter(|&e| self.primal_to_dual[e].is_some())
    }

    pub fn primal_edge_count(&self) -> usize {
        self.primal_to_dual.len()
    }

    /// The same bijection read from the dual side, with `primal` as the dual.
    pub fn inverse(&self, primal: &LatticeDomain) -> Duality {
        Duality {
            dual: primal.clone(),
            primal_to_dual: self.dual_to_primal.clone(),
            dual_to_primal: self.primal_to_dual.clone(),
        }
    }
}

/// Annulus geometry around a center point.
#[derive(Debug, Clone)]
pub struct Annulus {
    pub center: Point,
    pub inner: f64,
    pub outer: f64,
    pub inner_ring: Vec<usize>,
    pub outer_ring: Vec<usize>,
    pub edges: Vec<usize>,
}
