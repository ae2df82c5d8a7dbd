//! The catenoid family of rotationally symmetric extremal annuli.
//!
//! For an offset `a`, the graph `r = cosh(z − a)` over `z ∈ [−t₁, t₂]`
//! meets the spheres through its boundary circles orthogonally exactly
//! when
//!
//! ```text
//! t₁ = coth(t₁ + a),    t₂ = coth(t₂ − a).
//! ```
//!
//! The member at `a` has boundary length ratio `α = t₁/t₂`, critical
//! modulus `T(α) = t₁ + t₂` and maximal `σ₁L = 2π(t₁⁻¹ + t₂⁻¹)` among
//! rotationally symmetric metrics with that ratio. The symmetric member
//! `a = 0` is the critical catenoid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::annulus::{coth, FlatAnnulus};
use crate::error::{Error, Result};
use crate::mesh::{build::grid_triangles, Geometry, SurfaceMesh};
use crate::roots::{bisect_newton, RootOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatenoidFamilyMember {
    pub a: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub modulus: f64,
    #[serde(rename = "sigma1L_max")]
    pub sigma1_length_max: f64,
    /// Distance from the origin to the boundary circle at `z = −t₁`.
    #[serde(rename = "R1")]
    pub r1: f64,
    /// Distance from the origin to the boundary circle at `z = t₂`.
    #[serde(rename = "R2")]
    pub r2: f64,
}

impl CatenoidFamilyMember {
    /// Flat annulus with the same spectrum as this member after each end
    /// is scaled into its own unit sphere: boundary factors `1/t₁`,
    /// `1/t₂` on `[0, t₁ + t₂] × S¹`.
    pub fn flat_annulus(&self) -> FlatAnnulus {
        FlatAnnulus::new(1.0 / self.t1, 1.0 / self.t2, self.modulus).expect("t1, t2 > 1")
    }

    /// Largest residual of the two defining equations.
    pub fn residual(&self) -> f64 {
        let r1 = (self.t1 - coth(self.t1 + self.a)).abs();
        let r2 = (self.t2 - coth(self.t2 - self.a)).abs();
        r1.max(r2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalCatenoid {
    /// Root of `t = coth t`.
    pub t1: f64,
    /// `T(1) = 2t₁`.
    #[serde(rename = "T1")]
    pub modulus: f64,
    /// `(σ₁L)* = 4π/t₁`.
    #[serde(rename = "sigma1L_star")]
    pub sigma1_length_star: f64,
    /// `1/R` with `R = √(t₁² + cosh²t₁)`; scales the catenoid into the
    /// unit ball.
    pub scale: f64,
}

/// Positive root of `t = coth(t + s)`.
///
/// Solved in `u = t − 1 ≥ 0` as `u = 2/(e^{2(1+u+s)} − 1)` so that the
/// root stays resolvable when it is within rounding of 1 (large `s`).
/// The slope `1 + csch²(t+s)` grows without bound as `t + s → 0`, so the
/// bracket is bisected down to adjacent floats rather than to a width
/// derived from `tol`.
fn coth_fixed_point(s: f64) -> Result<f64> {
    let h = |u: f64| {
        let x = 1.0 + u + s;
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        u - 2.0 / (2.0 * x).exp_m1()
    };
    let dh = |u: f64| {
        let x = 1.0 + u + s;
        let c = coth(x);
        1.0 + (c * c - 1.0)
    };
    let lo = (-(1.0 + s)).max(0.0);
    let hi = lo + 1e3;
    let u = bisect_newton("catenoid family root", h, dh, lo, hi, RootOptions::new(f64::MIN_POSITIVE))?;
    let t = 1.0 + u;
    if !(t + s > 0.0) {
        return Err(Error::OutOfDomain {
            what: "catenoid family root",
            at: t,
        });
    }
    Ok(t)
}

/// Member at offset `a`. Both roots are resolved to adjacent floats, so
/// the residuals meet `tol` unless `tol` is below the rounding floor of
/// `coth` near the root; [`CatenoidFamilyMember::residual`] reports the
/// attained value.
pub fn solve_family(a: f64, tol: f64) -> Result<CatenoidFamilyMember> {
    if !a.is_finite() {
        return Err(Error::InvalidInput(format!("offset must be finite, got {a}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let t1 = coth_fixed_point(a)?;
    let t2 = coth_fixed_point(-a)?;
    Ok(CatenoidFamilyMember {
        a,
        t1,
        t2,
        alpha: t1 / t2,
        modulus: t1 + t2,
        sigma1_length_max: 2.0 * PI * (1.0 / t1 + 1.0 / t2),
        r1: t1.hypot((t1 + a).cosh()),
        r2: t2.hypot((t2 - a).cosh()),
    })
}

pub fn critical_catenoid(tol: f64) -> Result<CriticalCatenoid> {
    let t1 = solve_family(0.0, tol)?.t1;
    Ok(CriticalCatenoid {
        t1,
        modulus: 2.0 * t1,
        sigma1_length_star: 4.0 * PI / t1,
        scale: 1.0 / t1.hypot(t1.cosh()),
    })
}

/// `f(a) = t₁⁻¹ + t₂⁻¹`, so that `σ₁L_max = 2π f(a)`.
pub fn inverse_sum(a: f64, tol: f64) -> Result<f64> {
    let m = solve_family(a, tol)?;
    Ok(1.0 / m.t1 + 1.0 / m.t2)
}

/// Closed-form `f′(a) = Q(t₁⁻²) − Q(t₂⁻²)` with `Q(x) = x(1 − x)`.
pub fn inverse_sum_derivative(a: f64, tol: f64) -> Result<f64> {
    let m = solve_family(a, tol)?;
    let q = |x: f64| x * (1.0 - x);
    Ok(q(m.t1.powi(-2)) - q(m.t2.powi(-2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyMaximum {
    pub a: f64,
    pub value: f64,
}

/// Maximizes `2π f(a)` over `[−half_width, half_width]`: a grid scan of
/// `samples` points, then a root of the closed-form derivative in the
/// cells around the best sample.
pub fn max_sigma1_length_over_a(half_width: f64, samples: usize, tol: f64) -> Result<FamilyMaximum> {
    if !(half_width > 0.0) || samples < 3 {
        return Err(Error::InvalidInput(format!(
            "need half_width > 0 and at least 3 samples, got {half_width} and {samples}"
        )));
    }
    let step = 2.0 * half_width / (samples - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..samples {
        let v = inverse_sum(-half_width + step * i as f64, tol)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let center = -half_width + step * best.0 as f64;
    let lo = (center - step).max(-half_width);
    let hi = (center + step).min(half_width);
    let df = |a: f64| inverse_sum_derivative(a, tol).unwrap_or(f64::NAN);
    let a = if df(lo) > 0.0 && df(hi) < 0.0 {
        let d2 = |a: f64| (df(a + 1e-6) - df(a - 1e-6)) / 2e-6;
        bisect_newton("family maximum", df, d2, lo, hi, RootOptions::new(tol.max(1e-15)))?
    } else {
        center
    };
    Ok(FamilyMaximum {
        a,
        value: 2.0 * PI * inverse_sum(a, tol)?,
    })
}

/// The member with boundary length ratio `alpha`. `α(a)` decreases
/// from `∞` to `0`, with `α(0) = 1`.
pub fn member_for_alpha(alpha: f64, tol: f64) -> Result<CatenoidFamilyMember> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha must be positive and finite, got {alpha}")));
    }
    let target = alpha.ln();
    let g = |a: f64| solve_family(a, tol).map(|m| m.alpha.ln() - target).unwrap_or(f64::NAN);
    let dg = |a: f64| {
        solve_family(a, tol)
            .map(|m| {
                let d1 = -(1.0 - m.t1.powi(-2));
                let d2 = 1.0 - m.t2.powi(-2);
                d1 / m.t1 - d2 / m.t2
            })
            .unwrap_or(f64::NAN)
    };
    let mut w = 1.0;
    while g(-w) < 0.0 || g(w) > 0.0 {
        w *= 2.0;
        if w > 512.0 {
            return Err(Error::OutOfDomain {
                what: "catenoid offset for alpha",
                at: alpha,
            });
        }
    }
    let a = bisect_newton("catenoid offset for alpha", g, dg, -w, w, RootOptions::new(tol))?;
    solve_family(a, tol)
}

#[derive(Debug, Clone)]
pub struct CatenoidMesh {
    pub mesh: SurfaceMesh,
    pub member: CatenoidFamilyMember,
    /// Only the symmetric member, scaled into the unit ball, is a free
    /// boundary surface. For `a ≠ 0` the two ends lie on spheres of
    /// different radii.
    pub free_boundary: bool,
}

fn check_resolution(n_t: usize, n_theta: usize) -> Result<()> {
    if n_t < 2 || n_theta < 8 {
        return Err(Error::InvalidInput(format!(
            "catenoid mesh needs n_t >= 2 and n_theta >= 8, got {n_t} x {n_theta}"
        )));
    }
    Ok(())
}

/// Embedded catenoid `(cosh(z−a)cosθ, cosh(z−a)sinθ, z)`, `z ∈ [−t₁, t₂]`,
/// with `n_t` cells along `z` and `n_theta` around. The `a = 0` member is
/// scaled by `1/R` so both boundary circles lie on the unit sphere.
/// Quads are split along their shorter diagonal; ties (every quad, by
/// rotational symmetry) go to the `(+z, +θ)` diagonal.
pub fn catenoid_mesh(a: f64, n_t: usize, n_theta: usize) -> Result<CatenoidMesh> {
    check_resolution(n_t, n_theta)?;
    let member = solve_family(a, 1e-15)?;
    let free_boundary = a == 0.0;
    let scale = if free_boundary { 1.0 / member.r1 } else { 1.0 };
    let z_of = |i: usize| {
        if i == n_t {
            member.t2
        } else {
            -member.t1 + member.modulus * i as f64 / n_t as f64
        }
    };
    let mut coords = Vec::with_capacity(3 * (n_t + 1) * n_theta);
    for i in 0..=n_t {
        let z = z_of(i);
        let r = (z - a).cosh();
        for j in 0..n_theta {
            let (s, c) = (2.0 * PI * j as f64 / n_theta as f64).sin_cos();
            coords.extend_from_slice(&[scale * r * c, scale * r * s, scale * z]);
        }
    }
    let dist_sq = |p: usize, q: usize| -> f64 { (0..3).map(|k| (coords[3 * p + k] - coords[3 * q + k]).powi(2)).sum() };
    let idx = |i: usize, j: usize| i * n_theta + (j % n_theta);
    let triangles = grid_triangles(n_t, n_theta, |i, j| {
        let main = dist_sq(idx(i, j), idx(i + 1, j + 1));
        let other = dist_sq(idx(i + 1, j), idx(i, j + 1));
        other < main * (1.0 - 1e-12)
    });
    let mesh = SurfaceMesh::new(Geometry::Embedding { dim: 3, coords }, triangles)?;
    Ok(CatenoidMesh {
        mesh,
        member,
        free_boundary,
    })
}

/// The catenoid at offset `a` in conformal coordinates: `[0, t₁+t₂] × S¹`
/// with factor `cosh(t − t₁ − a)`, scaled like [`catenoid_mesh`].
pub fn catenoid_param_mesh(a: f64, n_t: usize, n_theta: usize) -> Result<SurfaceMesh> {
    check_resolution(n_t, n_theta)?;
    let member = solve_family(a, 1e-15)?;
    let scale = if a == 0.0 { 1.0 / member.r1 } else { 1.0 };
    crate::mesh::build_annulus_grid(member.modulus, n_t, n_theta, |t, _| {
        scale * (t - member.t1 - a).cosh()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::{critical_modulus, sigma1_length};
    use proptest::prelude::*;

    /// Plain bisection on `t − coth t` over `[1.1, 1.3]`.
    fn t_star_oracle() -> f64 {
        let (mut lo, mut hi) = (1.1f64, 1.3f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - 1.0 / mid.tanh() < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn symmetric_member_is_t_star() {
        let m = solve_family(0.0, 1e-14).unwrap();
        assert_eq!(m.t1, m.t2);
        assert_eq!(m.alpha, 1.0);
        assert!((m.t1 - t_star_oracle()).abs() < 1e-13);
        assert!((m.t1 - 1.19968).abs() < 1e-5);
        assert!((m.modulus - 2.0 * m.t1).abs() < 1e-15);
    }

    #[test]
    fn positive_offset_orders_roots() {
        let t0 = solve_family(0.0, 1e-14).unwrap().t1;
        let mut last_alpha = 1.0;
        for k in 1..=40 {
            let m = solve_family(0.125 * k as f64, 1e-14).unwrap();
            assert!(m.t1 < t0 && t0 < m.t2);
            assert!(m.alpha < last_alpha);
            last_alpha = m.alpha;
        }
    }

    #[test]
    fn alpha_range_covers_two_decades() {
        assert!(solve_family(-5.0, 1e-14).unwrap().alpha > 2.0);
        assert!(solve_family(5.0, 1e-14).unwrap().alpha < 0.5);
        let lo = solve_family(50.0, 1e-14).unwrap().alpha;
        let hi = solve_family(-50.0, 1e-14).unwrap().alpha;
        assert!(lo < 0.02 && hi > 50.0);
    }

    #[test]
    fn reflection_swaps_roots() {
        for a in [0.3, 1.7, 4.2] {
            let p = solve_family(a, 1e-14).unwrap();
            let q = solve_family(-a, 1e-14).unwrap();
            assert_eq!(p.t1, q.t2);
            assert_eq!(p.t2, q.t1);
            assert_eq!(p.r1, q.r2);
        }
    }

    #[test]
    fn critical_constants() {
        let c = critical_catenoid(1e-14).unwrap();
        assert!((c.t1 * c.t1.tanh() - 1.0).abs() < 1e-14);
        assert!((c.sigma1_length_star - 10.4748).abs() < 1e-4);
        assert!((c.modulus - 2.39936).abs() < 1e-5);
        assert!((c.sigma1_length_star - 8.0 * PI / c.modulus).abs() < 1e-14);
        let t_alpha = critical_modulus(1.0, 1e-13).unwrap();
        assert!((c.modulus - t_alpha).abs() < 1e-12);
    }

    #[test]
    fn modulus_matches_ratio_root() {
        for k in 0..20 {
            let alpha = 10f64.powf(-1.5 + 3.0 * k as f64 / 19.0);
            let m = member_for_alpha(alpha, 1e-14).unwrap();
            assert!((m.alpha - alpha).abs() < 1e-10 * alpha);
            let t = critical_modulus(alpha, 1e-13).unwrap();
            assert!((m.modulus - t).abs() < 1e-8, "alpha {alpha}: {} vs {t}", m.modulus);
            let closed = sigma1_length(&m.flat_annulus());
            assert!((closed - m.sigma1_length_max).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for a in [-3.0, -0.7, 0.0, 0.4, 2.5] {
            let h = 1e-5;
            let fd = (inverse_sum(a + h, 1e-15).unwrap() - inverse_sum(a - h, 1e-15).unwrap()) / (2.0 * h);
            let exact = inverse_sum_derivative(a, 1e-15).unwrap();
            assert!((fd - exact).abs() < 1e-6, "a={a}: {fd} vs {exact}");
            let f = inverse_sum(a, 1e-15).unwrap();
            assert!((f - inverse_sum(-a, 1e-15).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn maximum_sits_at_zero() {
        let m = max_sigma1_length_over_a(5.0, 401, 1e-14).unwrap();
        assert!(m.a.abs() < 1e-6);
        let star = critical_catenoid(1e-14).unwrap().sigma1_length_star;
        assert!((m.value - star).abs() < 1e-10);
        // an even grid misses a = 0 and still lands on it
        let m = max_sigma1_length_over_a(5.0, 400, 1e-14).unwrap();
        assert!(m.a.abs() < 1e-6);
    }

    #[test]
    fn end_identities() {
        for a in [-2.0, 0.0, 0.9] {
            let m = solve_family(a, 1e-15).unwrap();
            assert!(((m.t1 + a).cosh() / m.r1 - 1.0 / m.t1).abs() < 1e-12);
            assert!(((m.t2 - a).cosh() / m.r2 - 1.0 / m.t2).abs() < 1e-12);
        }
    }

    #[test]
    fn critical_mesh_boundary_on_sphere() {
        let c = catenoid_mesh(0.0, 10, 32).unwrap();
        assert!(c.free_boundary);
        let mesh = &c.mesh;
        let t = mesh.topology();
        assert_eq!((t.genus, t.boundary_count), (0, 2));
        for &v in &mesh.boundary_vertices() {
            let p = mesh.position(v).unwrap();
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
        assert!(!catenoid_mesh(0.5, 10, 32).unwrap().free_boundary);
        assert!(catenoid_mesh(0.0, 1, 32).is_err());
    }

    #[test]
    fn critical_mesh_area_identity_converges() {
        let star = critical_catenoid(1e-14).unwrap().sigma1_length_star;
        let mut last = f64::INFINITY;
        for n in [8usize, 16, 32] {
            let m = catenoid_mesh(0.0, n, 4 * n).unwrap().mesh.measures();
            let gap = (2.0 * m.area - m.total_boundary_length).abs();
            assert!(gap < last);
            last = gap;
            // chord length converges to 4π/t₁ from below
            assert!(m.total_boundary_length < star);
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn param_mesh_boundary_factors() {
        let m = catenoid_param_mesh(0.0, 8, 16).unwrap();
        let t = critical_catenoid(1e-14).unwrap().t1;
        let lens = m.measures().boundary_lengths;
        for l in lens {
            assert!((l - 2.0 * PI / t).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn residuals_below_tolerance(a in -10.0f64..10.0) {
            let m = solve_family(a, 1e-12).unwrap();
            prop_assert!(m.residual() <= 1e-12);
            prop_assert!(m.t1 > 1.0 && m.t2 > 1.0);
        }
    }
}
