//! Checks that an embedded mesh in the unit ball is a free boundary
//! minimal surface, and the area/length identities such surfaces satisfy.
//!
//! Three residuals are measured, all of which vanish for exact solutions:
//!
//! * conormal deviation `max |ν − x|` over boundary vertices;
//! * harmonic defect: the discrete mean curvature `(K xⁱ)_v / A_v` at
//!   interior vertices, relative to the boundary flux density;
//! * eigenvalue-one residual `‖D xⁱ − M xⁱ‖ / ‖M xⁱ‖` for each
//!   coordinate with a nonconstant boundary trace.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FemOptions, SteklovSolver};
use crate::mesh::{Geometry, SurfaceMesh};
use crate::moebius::{boundary_volume_sup, check_boundary_on_sphere, OptimizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundaryThresholds {
    pub conormal: f64,
    pub harmonic: f64,
    pub eigenvalue_one: f64,
}

impl Default for FreeBoundaryThresholds {
    fn default() -> Self {
        Self::uniform(2e-2)
    }
}

impl FreeBoundaryThresholds {
    pub fn uniform(t: f64) -> Self {
        Self {
            conormal: t,
            harmonic: t,
            eigenvalue_one: t,
        }
    }

    /// Thresholds for a mesh `refinement` times finer than the one the
    /// defaults were calibrated on; all residuals are second order.
    pub fn refined(&self, refinement: f64) -> Self {
        let s = refinement.powi(-2);
        Self {
            conormal: self.conormal * s,
            harmonic: self.harmonic * s,
            eigenvalue_one: self.eigenvalue_one * s,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreeBoundaryReport {
    /// `max |ν − x|`, with `ν` the unit vector in the vertex tangent plane
    /// orthogonal to the boundary direction.
    pub conormal_deviation: f64,
    /// `max |ν − x|`, with `ν` the normalized discrete flux `(K x)_v`.
    pub flux_conormal_deviation: f64,
    pub harmonic_defect: f64,
    pub eigenvalue_one_residual: f64,
    /// Coordinates with nonconstant boundary trace.
    pub active_coordinates: usize,
    pub area: f64,
    pub boundary_length: f64,
    /// Longest edge.
    pub mesh_size: f64,
    pub thresholds: FreeBoundaryThresholds,
    pub pass: bool,
}

impl FreeBoundaryReport {
    /// Whether the residuals meet `t`. The conormal test uses the flux
    /// conormal, which is second order at boundary vertices.
    pub fn passes(&self, t: &FreeBoundaryThresholds) -> bool {
        self.flux_conormal_deviation <= t.conormal
            && self.harmonic_defect <= t.harmonic
            && self.eigenvalue_one_residual <= t.eigenvalue_one
    }
}

fn sub(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

pub fn max_edge_length(mesh: &SurfaceMesh) -> f64 {
    mesh.triangles()
        .iter()
        .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
        .map(|(a, b)| mesh.edge_length(a, b))
        .fold(0.0, f64::max)
}

/// Conormal at each boundary vertex (in `boundary_vertices` order) from
/// the tangent plane and the boundary direction `next − prev`. The
/// tangent plane normal is the area-weighted mean of incident triangle
/// normals, and the sign points away from the incident triangles.
pub fn edge_conormals(mesh: &SurfaceMesh) -> Result<Vec<[f64; 3]>> {
    let coords = match mesh.geometry() {
        Geometry::Embedding { dim: 3, coords } => coords,
        _ => return Err(Error::Precondition("conormals need a mesh embedded in R^3".into())),
    };
    let p = |v: usize| &coords[3 * v..3 * v + 3];
    let n = mesh.vertex_count();
    let mut normal = vec![[0.0; 3]; n];
    let mut centroid_sum = vec![[0.0; 3]; n];
    let mut incident = vec![0usize; n];
    for &[a, b, c] in mesh.triangles() {
        let nf = cross(sub(p(b), p(a)), sub(p(c), p(a)));
        let g = [0, 1, 2].map(|k| (p(a)[k] + p(b)[k] + p(c)[k]) / 3.0);
        for v in [a, b, c] {
            incident[v] += 1;
            for k in 0..3 {
                normal[v][k] += nf[k];
                centroid_sum[v][k] += g[k];
            }
        }
    }
    let mut out = Vec::new();
    for l in mesh.boundary_loops() {
        let m = l.len();
        for i in 0..m {
            let v = l[i];
            let e = sub(p(l[(i + 1) % m]), p(l[(i + m - 1) % m]));
            let mut nu = cross(e, normal[v]);
            normalize(&mut nu);
            let count = incident[v] as f64;
            let mean_centroid = centroid_sum[v].map(|c| c / count);
            let out_dir = sub(p(v), &mean_centroid);
            if dot(&nu, &out_dir) < 0.0 {
                nu.iter_mut().for_each(|x| *x = -*x);
            }
            out.push(nu);
        }
    }
    Ok(out)
}

pub fn check_free_boundary(mesh: &SurfaceMesh, thresholds: &FreeBoundaryThresholds) -> Result<FreeBoundaryReport> {
    let coords = match mesh.geometry() {
        Geometry::Embedding { dim: 3, coords } => coords.clone(),
        _ => return Err(Error::Precondition("free boundary checks need a mesh embedded in R^3".into())),
    };
    check_boundary_on_sphere(mesh)?;
    let solver = SteklovSolver::new(mesh, FemOptions::default())?;
    let k = solver.stiffness().matrix();
    let boundary = solver.boundary().to_vec();
    let mask = mesh.boundary_mask();
    let nv = mesh.vertex_count();

    // K xⁱ for each coordinate
    let kx: Vec<Vec<f64>> = (0..3)
        .map(|i| k.mul_vec(&(0..nv).map(|v| coords[3 * v + i]).collect::<Vec<_>>()))
        .collect();
    let mut dual_area = vec![0.0; nv];
    for (f, &[a, b, c]) in mesh.triangles().iter().enumerate() {
        let ar = mesh.triangle_area(f) / 3.0;
        dual_area[a] += ar;
        dual_area[b] += ar;
        dual_area[c] += ar;
    }
    let mass = solver.boundary_mass();
    let weights: Vec<f64> = (0..boundary.len()).map(|r| mass.row(r).sum()).collect();

    let edge_nu = edge_conormals(mesh)?;
    let mut conormal_deviation: f64 = 0.0;
    let mut flux_conormal_deviation: f64 = 0.0;
    let mut flux_density: f64 = 0.0;
    for (r, &v) in boundary.iter().enumerate() {
        let x = &coords[3 * v..3 * v + 3];
        conormal_deviation = conormal_deviation.max(dot(&sub(&edge_nu[r], x), &sub(&edge_nu[r], x)).sqrt());
        let mut flux = [kx[0][v], kx[1][v], kx[2][v]];
        let mag = normalize(&mut flux);
        flux_density = flux_density.max(mag / weights[r]);
        flux_conormal_deviation = flux_conormal_deviation.max(dot(&sub(&flux, x), &sub(&flux, x)).sqrt());
    }

    let mut curvature: f64 = 0.0;
    for v in (0..nv).filter(|&v| !mask[v]) {
        let h = (0..3).map(|i| kx[i][v] * kx[i][v]).sum::<f64>().sqrt() / dual_area[v];
        curvature = curvature.max(h);
    }
    let harmonic_defect = if flux_density > 0.0 { curvature / flux_density } else { f64::INFINITY };

    let dtn = solver.dtn()?;
    let mut eigenvalue_one_residual: f64 = 0.0;
    let mut active_coordinates = 0;
    for i in 0..3 {
        let trace: Vec<f64> = boundary.iter().map(|&v| coords[3 * v + i]).collect();
        let spread = trace.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
            - trace.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        if spread <= 1e-12 {
            continue;
        }
        active_coordinates += 1;
        let d = dtn.apply(&trace);
        let m = dtn.apply_mass(&trace);
        let diff: f64 = d.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let norm: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
        eigenvalue_one_residual = eigenvalue_one_residual.max(diff / norm);
    }

    let measures = mesh.measures();
    let mut report = FreeBoundaryReport {
        conormal_deviation,
        flux_conormal_deviation,
        harmonic_defect,
        eigenvalue_one_residual,
        active_coordinates,
        area: measures.area,
        boundary_length: measures.total_boundary_length,
        mesh_size: max_edge_length(mesh),
        thresholds: *thresholds,
        pass: false,
    };
    report.pass = report.passes(thresholds);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaLengthRecord {
    pub area: f64,
    pub boundary_length: f64,
    /// `2A − L`, zero for exact solutions.
    pub two_a_minus_l: f64,
    /// `A − π`, nonnegative for exact solutions.
    pub area_minus_pi: f64,
    /// `L²/4π − A`, nonnegative for exact solutions.
    pub isoperimetric_slack: f64,
}

/// Area/length identities of a free boundary surface. Refuses meshes
/// that fail [`check_free_boundary`].
pub fn verify_area_length(mesh: &SurfaceMesh, thresholds: &FreeBoundaryThresholds) -> Result<AreaLengthRecord> {
    let report = check_free_boundary(mesh, thresholds)?;
    if !report.pass {
        return Err(Error::Precondition(format!(
            "mesh is not a free boundary surface at the given thresholds \
             (conormal {:.3e}, harmonic {:.3e}, eigenvalue-one {:.3e})",
            report.flux_conormal_deviation, report.harmonic_defect, report.eigenvalue_one_residual
        )));
    }
    let (a, l) = (report.area, report.boundary_length);
    Ok(AreaLengthRecord {
        area: a,
        boundary_length: l,
        two_a_minus_l: 2.0 * a - l,
        area_minus_pi: a - PI,
        isoperimetric_slack: l * l / (4.0 * PI) - a,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub identity_length: f64,
    pub sup_length: f64,
    /// `(identity − sup) / identity`; never positive, since the search
    /// includes the identity.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub starts: usize,
    pub best_center: Vec<f64>,
}

/// Compares the boundary length with the best found over the Möbius
/// orbit. Refuses meshes that fail [`check_free_boundary`].
pub fn orbit_length_maximality(
    mesh: &SurfaceMesh,
    cfg: &OptimizerConfig,
    thresholds: &FreeBoundaryThresholds,
    tolerance: f64,
) -> Result<OrbitRecord> {
    let report = check_free_boundary(mesh, thresholds)?;
    if !report.pass {
        return Err(Error::Precondition("orbit maximality needs a free boundary surface".into()));
    }
    let est = boundary_volume_sup(mesh, cfg)?;
    let margin = (est.identity_value - est.best_value) / est.identity_value;
    Ok(OrbitRecord {
        identity_length: est.identity_value,
        sup_length: est.best_value,
        margin,
        tolerance,
        pass: margin >= -tolerance,
        starts: est.starts,
        best_center: est.best_center,
    })
}
