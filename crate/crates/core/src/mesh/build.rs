use std::f64::consts::PI;

use super::{Geometry, SurfaceMesh};
use crate::error::{Error, Result};

/// Structured grid on `[0,T] × S¹` with `n_t` cells in `t` and `n_theta`
/// cells in θ. Vertex `(i, j)` has index `i·n_theta + j`. The conformal
/// factor is sampled at the vertices.
pub fn build_annulus_grid<F>(modulus: f64, n_t: usize, n_theta: usize, factor: F) -> Result<SurfaceMesh>
where
    F: Fn(f64, f64) -> f64,
{
    if !(modulus > 0.0 && modulus.is_finite()) {
        return Err(Error::InvalidInput(format!("modulus must be positive, got {modulus}")));
    }
    if n_t < 2 || n_theta < 8 {
        return Err(Error::InvalidInput(format!(
            "annulus grid needs n_t >= 2 and n_theta >= 8, got {n_t} x {n_theta}"
        )));
    }
    let mut params = Vec::with_capacity((n_t + 1) * n_theta);
    let mut lam = Vec::with_capacity((n_t + 1) * n_theta);
    for i in 0..=n_t {
        let t = modulus * i as f64 / n_t as f64;
        for j in 0..n_theta {
            let theta = 2.0 * PI * j as f64 / n_theta as f64;
            let l = factor(t, theta);
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "conformal factor must be positive, got {l} at (t, θ) = ({t}, {theta})"
                )));
            }
            params.push([t, theta]);
            lam.push(l);
        }
    }
    let triangles = grid_triangles(n_t, n_theta, |_, _| false);
    SurfaceMesh::new(Geometry::ParamFlat { params, factor: lam }, triangles)
}

/// Triangles of a periodic-in-j grid. Each quad is split along the
/// `(i,j)–(i+1,j+1)` diagonal unless `flip(i, j)` asks for the other one.
pub(crate) fn grid_triangles<F>(n_t: usize, n_theta: usize, flip: F) -> Vec<[usize; 3]>
where
    F: Fn(usize, usize) -> bool,
{
    let idx = |i: usize, j: usize| i * n_theta + (j % n_theta);
    let mut tris = Vec::with_capacity(2 * n_t * n_theta);
    for i in 0..n_t {
        for j in 0..n_theta {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if flip(i, j) {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            } else {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
        }
    }
    tris
}

/// Planar unit disk: a center vertex and `n_r` rings, ring `i` holding
/// `n_theta·i` equally spaced vertices at radius `i/n_r`. The mesh has
/// `n_theta`-fold rotational symmetry.
pub fn build_disk_mesh(n_r: usize, n_theta: usize) -> Result<SurfaceMesh> {
    if n_r < 2 || n_theta < 8 {
        return Err(Error::InvalidInput(format!(
            "disk mesh needs n_r >= 2 and n_theta >= 8, got {n_r} x {n_theta}"
        )));
    }
    let mut coords = vec![0.0, 0.0];
    let mut ring_start = vec![0usize];
    for i in 1..=n_r {
        ring_start.push(coords.len() / 2);
        let r = i as f64 / n_r as f64;
        let count = n_theta * i;
        for k in 0..count {
            let phi = 2.0 * PI * k as f64 / count as f64;
            let (s, c) = phi.sin_cos();
            // exact unit circle on the outer ring
            let (x, y) = if i == n_r { (c, s) } else { (r * c, r * s) };
            coords.push(x);
            coords.push(y);
        }
    }
    let mut tris = Vec::new();
    for k in 0..n_theta {
        tris.push([0, 1 + k, 1 + (k + 1) % n_theta]);
    }
    for i in 2..=n_r {
        let (inner, m) = (ring_start[i - 1], n_theta * (i - 1));
        let (outer, n) = (ring_start[i], n_theta * i);
        let (mut a, mut b) = (0usize, 0usize);
        while a < m || b < n {
            // advance whichever ring has the smaller next angle; ties go outward
            let take_outer = a == m || (b < n && (b + 1) * m <= (a + 1) * n);
            if take_outer {
                tris.push([inner + a % m, outer + b, outer + (b + 1) % n]);
                b += 1;
            } else {
                tris.push([inner + a, outer + b % n, inner + (a + 1) % m]);
                a += 1;
            }
        }
    }
    SurfaceMesh::new(Geometry::Embedding { dim: 2, coords }, tris)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_cylinder_measures() {
        let m = build_annulus_grid(1.0, 4, 16, |_, _| 1.0).unwrap();
        let meas = m.measures();
        assert!((meas.area - 2.0 * PI).abs() < 1e-12);
        assert_eq!(meas.boundary_lengths.len(), 2);
        for l in &meas.boundary_lengths {
            assert!((l - 2.0 * PI).abs() < 1e-12);
        }
        assert_eq!(m.topology().genus, 0);
        assert_eq!(m.topology().boundary_count, 2);
        assert_eq!(m.param_modulus(), Some(1.0));
    }

    #[test]
    fn linear_factor_reproduces_boundary_data() {
        let (f0, ft, t) = (0.7, 2.2, 1.5);
        let m = build_annulus_grid(t, 6, 24, |s, _| (1.0 - s / t) * f0 + s / t * ft).unwrap();
        let l = m.measures().boundary_lengths;
        let mut l = l.clone();
        l.sort_by(f64::total_cmp);
        assert!((l[0] - 2.0 * PI * f0).abs() < 1e-12);
        assert!((l[1] - 2.0 * PI * ft).abs() < 1e-12);
    }

    #[test]
    fn cosh_factor_boundary_lengths() {
        let t = 2.0;
        let m = build_annulus_grid(t, 10, 32, |s, _| (s - t / 2.0).cosh()).unwrap();
        for l in m.measures().boundary_lengths {
            assert!((l - 2.0 * PI * 1f64.cosh()).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(build_annulus_grid(1.0, 1, 16, |_, _| 1.0).is_err());
        assert!(build_annulus_grid(1.0, 4, 6, |_, _| 1.0).is_err());
        assert!(build_annulus_grid(1.0, 4, 16, |t, _| t - 0.5).is_err());
        assert!(build_disk_mesh(1, 8).is_err());
    }

    #[test]
    fn disk_converges() {
        let mut prev_err = f64::INFINITY;
        for n_r in [4, 8, 16] {
            let m = build_disk_mesh(n_r, 8).unwrap();
            assert_eq!(m.topology().genus, 0);
            assert_eq!(m.topology().boundary_count, 1);
            let meas = m.measures();
            let err = (meas.area - PI).abs() + (meas.total_boundary_length - 2.0 * PI).abs();
            assert!(err < prev_err);
            prev_err = err;
            assert_eq!(m.vertex_count(), 1 + 8 * n_r * (n_r + 1) / 2);
        }
        assert!(prev_err < 1e-2);
    }
}
