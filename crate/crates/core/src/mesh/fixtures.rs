//! Test and campaign geometries with known topology.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::build::{build_disk_mesh, grid_triangles};
use super::{Geometry, SurfaceMesh};
use crate::error::{Error, Result};

/// Number of distinct pair-of-pants fixtures.
pub const PANTS_VARIANTS: usize = 5;

/// Planar rectangle with two rectangular holes (genus 0, three boundary
/// loops). `variant` selects grid size and hole placement.
pub fn pants(variant: usize) -> Result<SurfaceMesh> {
    if variant >= PANTS_VARIANTS {
        return Err(Error::InvalidInput(format!("pants variant must be < {PANTS_VARIANTS}")));
    }
    let v = variant;
    let nx = 20 + 4 * v;
    let ny = 12 + 2 * v;
    let holes = [
        (3, 3, 3 + 3 + v, 3 + 2 + v % 3),
        (nx - 7 - v, ny - 6 - v % 2, nx - 3, ny - 3),
    ];
    let in_hole = |i: usize, j: usize| holes.iter().any(|&(i0, j0, i1, j1)| i >= i0 && i < i1 && j >= j0 && j < j1);
    planar_grid_without(nx, ny, 1.0 / ny as f64, in_hole)
}

fn planar_grid_without<F>(nx: usize, ny: usize, h: f64, skip: F) -> Result<SurfaceMesh>
where
    F: Fn(usize, usize) -> bool,
{
    let idx = |i: usize, j: usize| i * (ny + 1) + j;
    let mut tris = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            if skip(i, j) {
                continue;
            }
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    let mut coords = Vec::new();
    for i in 0..=nx {
        for j in 0..=ny {
            coords.push(i as f64 * h);
            coords.push(j as f64 * h);
        }
    }
    compact(2, coords, tris)
}

/// Drops unreferenced vertices and renumbers.
fn compact(dim: usize, coords: Vec<f64>, tris: Vec<[usize; 3]>) -> Result<SurfaceMesh> {
    let n = coords.len() / dim;
    let mut map = vec![usize::MAX; n];
    let mut out = Vec::new();
    for t in &tris {
        for &v in t {
            if map[v] == usize::MAX {
                map[v] = out.len() / dim;
                out.extend_from_slice(&coords[v * dim..(v + 1) * dim]);
            }
        }
    }
    let tris = tris.iter().map(|t| [map[t[0]], map[t[1]], map[t[2]]]).collect();
    SurfaceMesh::new(Geometry::Embedding { dim, coords: out }, tris)
}

/// Torus of revolution in ℝ³ with one grid cell removed (genus 1, one
/// boundary loop).
pub fn torus_with_hole(n_u: usize, n_v: usize) -> Result<SurfaceMesh> {
    if n_u < 3 || n_v < 3 {
        return Err(Error::InvalidInput("torus grid needs at least 3 x 3 cells".into()));
    }
    let (big, small) = (2.0, 0.8);
    let idx = |i: usize, j: usize| (i % n_u) * n_v + (j % n_v);
    let mut coords = Vec::with_capacity(3 * n_u * n_v);
    for i in 0..n_u {
        let psi = 2.0 * PI * i as f64 / n_u as f64;
        for j in 0..n_v {
            let phi = 2.0 * PI * j as f64 / n_v as f64;
            let r = big + small * phi.cos();
            coords.extend([r * psi.cos(), r * psi.sin(), small * phi.sin()]);
        }
    }
    let mut tris = Vec::new();
    for i in 0..n_u {
        for j in 0..n_v {
            if i == 0 && j == 0 {
                continue;
            }
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    SurfaceMesh::new(Geometry::Embedding { dim: 3, coords }, tris)
}

/// The unit disk in the plane `x₃ = 0` of ℝ³.
pub fn equatorial_disk(n_r: usize, n_theta: usize) -> Result<SurfaceMesh> {
    build_disk_mesh(n_r, n_theta)?.lifted(3)
}

/// Flat disk in the plane `x₃ = height`, scaled so its boundary lies on
/// the unit sphere. It meets the sphere at an angle unless `height = 0`.
pub fn parallel_disk(height: f64, n_r: usize, n_theta: usize) -> Result<SurfaceMesh> {
    if !(height.abs() < 1.0) {
        return Err(Error::InvalidInput(format!("height must lie in (-1, 1), got {height}")));
    }
    let disk = build_disk_mesh(n_r, n_theta)?;
    let rho = (1.0 - height * height).sqrt();
    let coords = match disk.geometry() {
        Geometry::Embedding { coords, .. } => coords
            .chunks(2)
            .flat_map(|p| [rho * p[0], rho * p[1], height])
            .collect(),
        Geometry::ParamFlat { .. } => unreachable!("disk builder is embedded"),
    };
    disk.with_geometry(Geometry::Embedding { dim: 3, coords })
}

/// Random star-shaped annulus in the unit ball of ℝ³ with both boundary
/// circles on the unit sphere. Deterministic in `seed`.
pub fn random_embedded_annulus(seed: u64, n_t: usize, n_theta: usize) -> Result<SurfaceMesh> {
    if n_t < 2 || n_theta < 8 {
        return Err(Error::InvalidInput("annulus needs n_t >= 2 and n_theta >= 8".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = rng.gen_range(0.3..1.1);
    let bottom = rng.gen_range(1.9..2.8);
    let wobble: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.12..0.12)).collect();
    let twist = rng.gen_range(-0.4..0.4);
    let dent = rng.gen_range(0.1..0.5);
    let tilt: [f64; 2] = [rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)];

    let mut coords = Vec::with_capacity(3 * (n_t + 1) * n_theta);
    for i in 0..=n_t {
        let s = i as f64 / n_t as f64;
        for j in 0..n_theta {
            let th = 2.0 * PI * j as f64 / n_theta as f64;
            let polar0 = top + wobble[0] * th.cos() + wobble[1] * (2.0 * th).sin();
            let polar1 = bottom + wobble[2] * th.sin() + wobble[3] * (3.0 * th).cos();
            let polar = (1.0 - s) * polar0 + s * polar1;
            let azimuth = th + twist * s;
            let mut d = [polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()];
            // small rigid tilt keeps the boundary on the sphere
            let (sx, cx) = tilt[0].sin_cos();
            let (sy, cy) = tilt[1].sin_cos();
            d = [d[0], cx * d[1] - sx * d[2], sx * d[1] + cx * d[2]];
            d = [cy * d[0] + sy * d[2], d[1], -sy * d[0] + cy * d[2]];
            let radius = 1.0 - dent * (PI * s).sin();
            coords.extend(d.iter().map(|x| radius * x));
        }
    }
    let tris = grid_triangles(n_t, n_theta, |_, _| false);
    SurfaceMesh::new(Geometry::Embedding { dim: 3, coords }, tris)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pants_topology() {
        for v in 0..PANTS_VARIANTS {
            let m = pants(v).unwrap();
            assert_eq!(m.topology().genus, 0, "variant {v}");
            assert_eq!(m.topology().boundary_count, 3, "variant {v}");
        }
        assert!(pants(PANTS_VARIANTS).is_err());
    }

    #[test]
    fn torus_with_hole_euler_count() {
        let (nu, nv) = (12, 6);
        let m = torus_with_hole(nu, nv).unwrap();
        // V = 72, E = 3·72 − 1, F = 2·72 − 2
        let (v, e, f) = (nu * nv, 3 * nu * nv - 1, 2 * nu * nv - 2);
        assert_eq!(v as i64 - e as i64 + f as i64, -1);
        assert_eq!(m.vertex_count(), v);
        assert_eq!(m.triangles().len(), f);
        assert_eq!(m.euler_characteristic(), -1);
        assert_eq!(m.topology().genus, 1);
        assert_eq!(m.topology().boundary_count, 1);
    }

    #[test]
    fn random_annulus_boundary_on_sphere() {
        let m = random_embedded_annulus(11, 6, 24).unwrap();
        assert_eq!(m.topology().boundary_count, 2);
        for v in m.boundary_vertices() {
            let r: f64 = m.position(v).unwrap().iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
        assert_eq!(m, random_embedded_annulus(11, 6, 24).unwrap());
        assert_ne!(m, random_embedded_annulus(12, 6, 24).unwrap());
    }

    #[test]
    fn parallel_disk_boundary_on_sphere() {
        let m = parallel_disk(0.4, 4, 8).unwrap();
        for v in m.boundary_vertices() {
            let r: f64 = m.position(v).unwrap().iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-14);
        }
    }
}
