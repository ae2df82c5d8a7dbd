//! Triangulated surfaces with boundary.
//!
//! A [`SurfaceMesh`] carries exactly one kind of metric data: either an
//! embedding in ℝⁿ, or flat parameters `(t, θ)` on `[0,T] × S¹` together
//! with a per-vertex conformal factor `λ`, describing the metric
//! `λ²(dt² + dθ²)`. Periodicity in θ is realized by vertex
//! identification, so parameter-space triangles crossing the seam are
//! unwrapped on the fly.

pub(crate) mod build;
pub mod fixtures;
mod io;

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use build::{build_annulus_grid, build_disk_mesh};
pub use io::{load, parse, save, write_to};

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Vertex coordinates in ℝ^dim, stored row-wise.
    Embedding { dim: usize, coords: Vec<f64> },
    /// Flat parameters `(t, θ)` and conformal factor per vertex.
    ParamFlat { params: Vec<[f64; 2]>, factor: Vec<f64> },
}

impl Geometry {
    pub fn vertex_count(&self) -> usize {
        match self {
            Geometry::Embedding { dim, coords } => coords.len() / dim,
            Geometry::ParamFlat { params, .. } => params.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub genus: usize,
    pub boundary_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshMeasures {
    pub area: f64,
    pub boundary_lengths: Vec<f64>,
    pub total_boundary_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    geometry: Geometry,
    triangles: Vec<[usize; 3]>,
    boundary_loops: Vec<Vec<usize>>,
    topology: Topology,
}

/// θ difference wrapped into `(-π, π]`.
fn wrap_angle(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

impl SurfaceMesh {
    /// Validates the combinatorics and extracts boundary loops.
    pub fn new(geometry: Geometry, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = geometry.vertex_count();
        validate_geometry(&geometry)?;
        validate_triangles(n, &triangles)?;
        let loops = extract_boundary_loops(n, &triangles)?;
        let topology = compute_topology(n, &triangles, loops.len())?;
        Ok(Self {
            geometry,
            triangles,
            boundary_loops: loops,
            topology,
        })
    }

    /// Like [`SurfaceMesh::new`], but also checks that `loops` are
    /// exactly the boundary cycles of the triangulation. Loops are kept in
    /// the given order and starting vertex.
    pub fn with_loops(geometry: Geometry, triangles: Vec<[usize; 3]>, loops: Vec<Vec<usize>>) -> Result<Self> {
        let mut mesh = Self::new(geometry, triangles)?;
        let mut expected: Vec<Vec<usize>> = mesh.boundary_loops.iter().map(|l| canonical_cycle(l)).collect();
        let mut given: Vec<Vec<usize>> = loops.iter().map(|l| canonical_cycle(l)).collect();
        expected.sort();
        given.sort();
        if expected != given {
            return Err(Error::InvalidMesh(
                "stored boundary loops do not match the boundary edges of the triangulation".into(),
            ));
        }
        mesh.boundary_loops = loops;
        Ok(mesh)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn vertex_count(&self) -> usize {
        self.geometry.vertex_count()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.topology.genus as i64 - self.topology.boundary_count as i64
    }

    /// Ambient dimension for embedded meshes.
    pub fn ambient_dim(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Embedding { dim, .. } => Some(*dim),
            Geometry::ParamFlat { .. } => None,
        }
    }

    /// Coordinates of vertex `v` for embedded meshes.
    pub fn position(&self, v: usize) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Embedding { dim, coords } => Some(&coords[v * dim..(v + 1) * dim]),
            Geometry::ParamFlat { .. } => None,
        }
    }

    /// Boundary vertices in loop order, each listed once.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.boundary_loops.iter().flatten().copied().collect()
    }

    /// Mask of boundary vertices.
    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertex_count()];
        for &v in self.boundary_loops.iter().flatten() {
            mask[v] = true;
        }
        mask
    }

    /// Squared length of edge `(a, b)` in the mesh's own metric data:
    /// Euclidean for embeddings, flat `(t, θ)` distance for parameter
    /// meshes (the conformal factor is not applied).
    pub fn edge_length_sq(&self, a: usize, b: usize) -> f64 {
        match &self.geometry {
            Geometry::Embedding { dim, coords } => {
                let (pa, pb) = (&coords[a * dim..(a + 1) * dim], &coords[b * dim..(b + 1) * dim]);
                pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum()
            }
            Geometry::ParamFlat { params, .. } => {
                let dt = params[b][0] - params[a][0];
                let dth = wrap_angle(params[b][1] - params[a][1]);
                dt * dt + dth * dth
            }
        }
    }

    /// Squared edge lengths of triangle `f`, entry `i` opposite corner `i`.
    pub fn triangle_edges_sq(&self, f: usize) -> [f64; 3] {
        let [a, b, c] = self.triangles[f];
        [self.edge_length_sq(b, c), self.edge_length_sq(c, a), self.edge_length_sq(a, b)]
    }

    /// Metric length of edge `(a, b)`: Euclidean chord, or flat length
    /// times the endpoint-averaged conformal factor.
    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        let flat = self.edge_length_sq(a, b).sqrt();
        match &self.geometry {
            Geometry::Embedding { .. } => flat,
            Geometry::ParamFlat { factor, .. } => flat * 0.5 * (factor[a] + factor[b]),
        }
    }

    /// Area of triangle `f` in the mesh metric. Parameter meshes use the
    /// conformal factor at the centroid (mean of the corner values).
    pub fn triangle_area(&self, f: usize) -> f64 {
        let flat = area_from_edges_sq(self.triangle_edges_sq(f));
        match &self.geometry {
            Geometry::Embedding { .. } => flat,
            Geometry::ParamFlat { factor, .. } => {
                let [a, b, c] = self.triangles[f];
                let lam = (factor[a] + factor[b] + factor[c]) / 3.0;
                flat * lam * lam
            }
        }
    }

    pub fn measures(&self) -> MeshMeasures {
        let area = (0..self.triangles.len()).map(|f| self.triangle_area(f)).sum();
        let boundary_lengths: Vec<f64> = self
            .boundary_loops
            .iter()
            .map(|l| loop_edges(l).map(|(a, b)| self.edge_length(a, b)).sum())
            .collect();
        let total_boundary_length = boundary_lengths.iter().sum();
        MeshMeasures {
            area,
            boundary_lengths,
            total_boundary_length,
        }
    }

    /// Conformal modulus of a parameter annulus, `max t − min t`.
    pub fn param_modulus(&self) -> Option<f64> {
        match &self.geometry {
            Geometry::ParamFlat { params, .. } => {
                let (lo, hi) = params
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
                Some(hi - lo)
            }
            Geometry::Embedding { .. } => None,
        }
    }

    /// Replaces the metric data, keeping the combinatorics.
    pub fn with_geometry(&self, geometry: Geometry) -> Result<Self> {
        if geometry.vertex_count() != self.vertex_count() {
            return Err(Error::InvalidInput(format!(
                "geometry has {} vertices, mesh has {}",
                geometry.vertex_count(),
                self.vertex_count()
            )));
        }
        validate_geometry(&geometry)?;
        Ok(Self {
            geometry,
            triangles: self.triangles.clone(),
            boundary_loops: self.boundary_loops.clone(),
            topology: self.topology,
        })
    }

    /// Embedded copy with coordinates padded by zeros up to `dim`.
    pub fn lifted(&self, dim: usize) -> Result<Self> {
        match &self.geometry {
            Geometry::Embedding { dim: d, coords } if *d <= dim => {
                let mut out = Vec::with_capacity(self.vertex_count() * dim);
                for p in coords.chunks(*d) {
                    out.extend_from_slice(p);
                    out.extend(std::iter::repeat_n(0.0, dim - d));
                }
                self.with_geometry(Geometry::Embedding { dim, coords: out })
            }
            _ => Err(Error::InvalidInput(format!("cannot lift this mesh into dimension {dim}"))),
        }
    }

    /// Embedded copy with every coordinate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match &self.geometry {
            Geometry::Embedding { dim, coords } => self.with_geometry(Geometry::Embedding {
                dim: *dim,
                coords: coords.iter().map(|x| c * x).collect(),
            }),
            Geometry::ParamFlat { params, factor } => self.with_geometry(Geometry::ParamFlat {
                params: params.clone(),
                factor: factor.iter().map(|x| c * x).collect(),
            }),
        }
    }
}

/// Consecutive vertex pairs of a closed loop.
pub fn loop_edges(l: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..l.len()).map(move |i| (l[i], l[(i + 1) % l.len()]))
}

/// Triangle area from squared edge lengths (Heron in Gram form).
pub fn area_from_edges_sq([a, b, c]: [f64; 3]) -> f64 {
    let s = 2.0 * (a * b + b * c + c * a) - (a * a + b * b + c * c);
    0.25 * s.max(0.0).sqrt()
}

fn canonical_cycle(l: &[usize]) -> Vec<usize> {
    if l.is_empty() {
        return Vec::new();
    }
    let start = (0..l.len()).min_by_key(|&i| l[i]).unwrap();
    l[start..].iter().chain(&l[..start]).copied().collect()
}

fn validate_geometry(g: &Geometry) -> Result<()> {
    match g {
        Geometry::Embedding { dim, coords } => {
            if *dim < 2 {
                return Err(Error::InvalidMesh(format!("ambient dimension must be at least 2, got {dim}")));
            }
            if coords.len() % dim != 0 {
                return Err(Error::InvalidMesh("coordinate count is not a multiple of the dimension".into()));
            }
            if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidMesh(format!("vertex {} has a non-finite coordinate", i / dim)));
            }
        }
        Geometry::ParamFlat { params, factor } => {
            if params.len() != factor.len() {
                return Err(Error::InvalidMesh("parameter and factor counts differ".into()));
            }
            if let Some(i) = params.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
                return Err(Error::InvalidMesh(format!("vertex {i} has a non-finite parameter")));
            }
            if let Some(i) = factor.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
                return Err(Error::InvalidMesh(format!(
                    "conformal factor at vertex {i} is not positive ({})",
                    factor[i]
                )));
            }
        }
    }
    Ok(())
}

fn validate_triangles(n: usize, triangles: &[[usize; 3]]) -> Result<()> {
    if triangles.is_empty() {
        return Err(Error::InvalidMesh("mesh has no triangles".into()));
    }
    let mut used = vec![false; n];
    let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
    for (f, t) in triangles.iter().enumerate() {
        for &v in t {
            if v >= n {
                return Err(Error::InvalidMesh(format!("triangle {f} references vertex {v}, but there are {n}")));
            }
            used[v] = true;
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::InvalidMesh(format!("triangle {f} repeats a vertex")));
        }
        for k in 0..3 {
            let e = (t[k], t[(k + 1) % 3]);
            if let Some(g) = directed.insert(e, f) {
                return Err(Error::InvalidMesh(format!(
                    "edge {}-{} is traversed in the same direction by triangles {g} and {f}: inconsistent orientation or non-manifold edge",
                    e.0, e.1
                )));
            }
        }
    }
    if let Some(v) = used.iter().position(|u| !u) {
        return Err(Error::InvalidMesh(format!("vertex {v} is not used by any triangle")));
    }
    Ok(())
}

/// Boundary edges oriented as in their triangle, chained into cycles.
fn extract_boundary_loops(n: usize, triangles: &[[usize; 3]]) -> Result<Vec<Vec<usize>>> {
    let mut directed = std::collections::HashSet::with_capacity(3 * triangles.len());
    for t in triangles {
        for k in 0..3 {
            directed.insert((t[k], t[(k + 1) % 3]));
        }
    }
    let mut next = vec![usize::MAX; n];
    let mut edges: Vec<(usize, usize)> = directed
        .iter()
        .filter(|&&(a, b)| !directed.contains(&(b, a)))
        .copied()
        .collect();
    edges.sort_unstable();
    for &(a, b) in &edges {
        if next[a] != usize::MAX {
            return Err(Error::InvalidMesh(format!(
                "vertex {a} has two outgoing boundary edges (non-manifold vertex)"
            )));
        }
        next[a] = b;
    }
    let mut visited = vec![false; n];
    let mut loops = Vec::new();
    for &(start, _) in &edges {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        loop {
            if visited[v] {
                if v != start {
                    return Err(Error::InvalidMesh(format!("boundary chain through vertex {v} is not a simple cycle")));
                }
                break;
            }
            visited[v] = true;
            cycle.push(v);
            v = next[v];
            if v == usize::MAX {
                return Err(Error::InvalidMesh("open boundary chain".into()));
            }
        }
        loops.push(cycle);
    }
    Ok(loops)
}

fn compute_topology(n: usize, triangles: &[[usize; 3]], k: usize) -> Result<Topology> {
    let mut undirected = std::collections::HashSet::with_capacity(3 * triangles.len());
    for t in triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            undirected.insert((a.min(b), a.max(b)));
        }
    }
    let chi = n as i64 - undirected.len() as i64 + triangles.len() as i64;
    if k == 0 {
        return Err(Error::InvalidMesh("surface has no boundary".into()));
    }
    let twice_genus = 2 - chi - k as i64;
    if twice_genus < 0 || twice_genus % 2 != 0 {
        return Err(Error::InvalidMesh(format!(
            "Euler characteristic {chi} with {k} boundary loops gives no valid genus (disconnected or non-manifold input)"
        )));
    }
    Ok(Topology {
        genus: (twice_genus / 2) as usize,
        boundary_count: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> SurfaceMesh {
        SurfaceMesh::new(
            Geometry::Embedding {
                dim: 2,
                coords: vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            },
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn square_topology_and_measures() {
        let m = square();
        assert_eq!(m.topology(), Topology { genus: 0, boundary_count: 1 });
        assert_eq!(m.boundary_loops().len(), 1);
        assert_eq!(m.boundary_loops()[0].len(), 4);
        let meas = m.measures();
        assert!((meas.area - 1.0).abs() < 1e-15);
        assert!((meas.total_boundary_length - 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_flipped_triangle() {
        let r = SurfaceMesh::new(
            Geometry::Embedding {
                dim: 2,
                coords: vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            },
            vec![[0, 1, 2], [0, 3, 2]],
        );
        // both triangles contain the directed edge 2->0
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_out_of_range_and_unused() {
        let g = Geometry::Embedding {
            dim: 2,
            coords: vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0],
        };
        assert!(SurfaceMesh::new(g.clone(), vec![[0, 1, 3]]).is_err());
        let g4 = Geometry::Embedding {
            dim: 2,
            coords: vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 5.0, 5.0],
        };
        assert!(SurfaceMesh::new(g4, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn rejects_closed_surface() {
        // tetrahedron boundary
        let g = Geometry::Embedding {
            dim: 3,
            coords: vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        };
        let r = SurfaceMesh::new(g, vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]]);
        assert!(r.is_err());
    }

    #[test]
    fn with_loops_checks_cycles() {
        let m = square();
        let g = m.geometry().clone();
        let ok = SurfaceMesh::with_loops(g.clone(), m.triangles().to_vec(), vec![vec![2, 3, 0, 1]]);
        assert!(ok.is_ok());
        let bad = SurfaceMesh::with_loops(g, m.triangles().to_vec(), vec![vec![0, 3, 2, 1]]);
        assert!(bad.is_err());
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(2.0 * PI - 0.1) + 0.1).abs() < 1e-12);
        assert!((wrap_angle(-2.0 * PI + 0.1) - 0.1).abs() < 1e-12);
        assert_eq!(wrap_angle(PI), PI);
    }
}
