use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::report::{BoundReport, BoundTag};
use crate::annulus::{self, classify_modulus, Criticality, FlatAnnulus};
use crate::catenoid::critical_catenoid;
use crate::error::{Error, Result};
use crate::fem::{project_mean, quadratic, FemOptions, SteklovSolver};
use crate::free_boundary::{check_free_boundary, orbit_length_maximality, FreeBoundaryThresholds};
use crate::mesh::{Geometry, SurfaceMesh};
use crate::moebius::{balance, push_mesh, relative_volume_sup, boundary_volume_sup, OptimizerConfig};

/// Balancing accuracy used before exercising the test-function chain,
/// relative to boundary length.
pub const CHAIN_BALANCE_TOL: f64 = 1e-10;

/// `t₁`, the positive root of `t = coth t`.
pub fn critical_t1() -> f64 {
    critical_catenoid(1e-15).expect("the critical root exists").t1
}

/// `(σ₁L)* = 4π/t₁`.
pub fn critical_sigma1_length() -> f64 {
    4.0 * PI / critical_t1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FemSigmaLength {
    pub sigma1: f64,
    pub boundary_length: f64,
    pub sigma1_length: f64,
}

pub fn fem_sigma1_length(mesh: &SurfaceMesh) -> Result<FemSigmaLength> {
    let spec = SteklovSolver::new(mesh, FemOptions::default())?.spectrum(2)?;
    let sigma1 = spec.sigma1();
    let boundary_length = mesh.measures().total_boundary_length;
    Ok(FemSigmaLength {
        sigma1,
        boundary_length,
        sigma1_length: sigma1 * boundary_length,
    })
}

fn resolution(mesh: &SurfaceMesh) -> serde_json::Value {
    serde_json::json!({
        "vertices": mesh.vertex_count(),
        "triangles": mesh.triangles().len(),
        "boundary_vertices": mesh.boundary_vertices().len(),
    })
}

/// `σ₁L ≤ 2(γ + k)π`, and for genus zero with several boundary
/// components also the strict `σ₁L < 2kπ`. `rel_tol` is relative to the
/// right-hand side.
pub fn verify_topological_bound(id: &str, mesh: &SurfaceMesh, rel_tol: f64) -> Result<Vec<BoundReport>> {
    let topo = mesh.topology();
    let s = fem_sigma1_length(mesh)?;
    let (g, k) = (topo.genus as f64, topo.boundary_count as f64);
    let rhs = 2.0 * (g + k) * PI;
    let decorate = |r: BoundReport| {
        r.with("genus", topo.genus)
            .with("boundary_components", topo.boundary_count)
            .with("sigma1", s.sigma1)
            .with("boundary_length", s.boundary_length)
            .with("resolution", resolution(mesh))
    };
    let mut out = vec![decorate(BoundReport::new(
        id,
        BoundTag::TopologicalBound,
        s.sigma1_length,
        rhs,
        rel_tol * rhs,
    ))];
    if topo.genus == 0 && topo.boundary_count >= 2 {
        out.push(decorate(BoundReport::strict(
            id,
            BoundTag::GenusZeroStrict,
            s.sigma1_length,
            2.0 * k * PI,
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SupercriticalOutcome {
    /// The metric is subcritical; nothing is asserted.
    NotApplicable { alpha: f64, modulus: f64, threshold: f64 },
    Checked(BoundReport),
}

impl SupercriticalOutcome {
    pub fn report(&self) -> Option<&BoundReport> {
        match self {
            SupercriticalOutcome::Checked(r) => Some(r),
            SupercriticalOutcome::NotApplicable { .. } => None,
        }
    }
}

/// `σ₁L ≤ 4π/t₁` for a supercritical parameter annulus. The modulus is
/// the parameter height and `α` the ratio of the two boundary lengths.
pub fn verify_supercritical(id: &str, mesh: &SurfaceMesh, rel_tol: f64) -> Result<SupercriticalOutcome> {
    let modulus = match (mesh.geometry(), mesh.param_modulus()) {
        (Geometry::ParamFlat { .. }, Some(t)) => t,
        _ => {
            return Err(Error::Precondition(
                "the conformal modulus is known only for parameter annuli".into(),
            ))
        }
    };
    let topo = mesh.topology();
    if topo.genus != 0 || topo.boundary_count != 2 {
        return Err(Error::Precondition("mesh is not an annulus".into()));
    }
    let lengths = mesh.measures().boundary_lengths;
    let alpha = lengths[0] / lengths[1];
    let class = classify_modulus(alpha, modulus);
    if !class.is_supercritical() {
        return Ok(SupercriticalOutcome::NotApplicable {
            alpha,
            modulus,
            threshold: class.threshold,
        });
    }
    let s = fem_sigma1_length(mesh)?;
    let rhs = critical_sigma1_length();
    Ok(SupercriticalOutcome::Checked(
        BoundReport::new(id, BoundTag::Supercritical, s.sigma1_length, rhs, rel_tol * rhs)
            .with("alpha", alpha)
            .with("modulus", modulus)
            .with("threshold", class.threshold)
            .with("critical", class.tag == Criticality::Critical)
            .with("sigma1", s.sigma1)
            .with("boundary_length", s.boundary_length)
            .with("zero_band_bound", zero_band_bound(alpha, modulus))
            .with("resolution", resolution(mesh)),
    ))
}

/// `2πT⁻¹(√α + 1/√α)²`, the value of `λ₀⁽²⁾·L` for the flat annulus with
/// boundary lengths in ratio `α` and modulus `T`.
pub fn zero_band_bound(alpha: f64, modulus: f64) -> f64 {
    let r = alpha.sqrt() + 1.0 / alpha.sqrt();
    2.0 * PI * r * r / modulus
}

/// Closed-form version of [`verify_supercritical`] for a rotationally
/// symmetric flat annulus.
pub fn verify_supercritical_closed_form(id: &str, m: &FlatAnnulus, tol: f64) -> SupercriticalOutcome {
    let class = annulus::classify(m);
    if !class.is_supercritical() {
        return SupercriticalOutcome::NotApplicable {
            alpha: m.alpha(),
            modulus: m.modulus(),
            threshold: class.threshold,
        };
    }
    let rhs = critical_sigma1_length();
    SupercriticalOutcome::Checked(
        BoundReport::new(id, BoundTag::Supercritical, annulus::sigma1_length(m), rhs, tol)
            .with("f0", m.f0())
            .with("fT", m.f_t())
            .with("modulus", m.modulus())
            .with("threshold", class.threshold)
            .with("critical", class.tag == Criticality::Critical)
            .with("zero_band_bound", zero_band_bound(m.alpha(), m.modulus()))
            .with("closed_form", true),
    )
}

/// The test-function chain for an embedded surface with boundary on the
/// sphere, evaluated after balancing:
///
/// `σ₁·Σ φⁱᵀMφⁱ ≤ Σ φⁱᵀDφⁱ ≤ Σ ∫|∇φⁱ|² ≈ 2·Area(f(Σ))`.
///
/// The first two steps are exact properties of the discrete operators;
/// the last is equality for a conformal map and holds up to the
/// discretization error for a Möbius image of a triangulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofChain {
    pub sigma1: f64,
    pub boundary_length: f64,
    pub balance_center: Vec<f64>,
    pub balance_residual: f64,
    /// `Σ φⁱᵀMφⁱ` after removing boundary means.
    pub boundary_norm: f64,
    /// `Σ φⁱᵀDφⁱ`, the energy of the harmonic extensions.
    pub harmonic_energy: f64,
    /// `Σ φⁱᵀKφⁱ`, the energy of the piecewise linear image coordinates.
    pub map_energy: f64,
    /// Area of the balanced image.
    pub image_area: f64,
}

impl ProofChain {
    pub fn rayleigh_step(&self) -> (f64, f64) {
        (self.sigma1 * self.boundary_norm, self.harmonic_energy)
    }

    pub fn extension_step(&self) -> (f64, f64) {
        (self.harmonic_energy, self.map_energy)
    }

    /// `(σ₁L, 2·Area(f(Σ)))`.
    pub fn endpoints(&self) -> (f64, f64) {
        (self.sigma1 * self.boundary_length, 2.0 * self.image_area)
    }
}

pub fn proof_chain(mesh: &SurfaceMesh) -> Result<ProofChain> {
    let bal = balance(mesh, CHAIN_BALANCE_TOL)?;
    let image = push_mesh(&bal.map(), mesh)?;
    let Geometry::Embedding { dim, coords } = image.geometry() else {
        return Err(Error::Precondition("proof chain needs an embedded mesh".into()));
    };
    let solver = SteklovSolver::new(mesh, FemOptions::default())?;
    let dtn = solver.dtn()?;
    let sigma1 = dtn.spectrum(2, &FemOptions::default())?.sigma1();
    let mass = &dtn.mass;
    let (mut boundary_norm, mut harmonic_energy, mut map_energy) = (0.0, 0.0, 0.0);
    for i in 0..*dim {
        let full: Vec<f64> = coords.iter().skip(i).step_by(*dim).copied().collect();
        let on_boundary: Vec<f64> = dtn.boundary.iter().map(|&v| full[v]).collect();
        let centered = project_mean(mass, &on_boundary);
        boundary_norm += quadratic(mass, &centered);
        harmonic_energy += quadratic(&dtn.dtn, &centered);
        map_energy += solver.stiffness().energy(&full);
    }
    Ok(ProofChain {
        sigma1,
        boundary_length: mesh.measures().total_boundary_length,
        balance_center: bal.center,
        balance_residual: bal.residual,
        boundary_norm,
        harmonic_energy,
        map_energy,
        image_area: image.measures().area,
    })
}

/// Reports for `σ₁L ≤ 2·V_rc`: the two exact steps of the chain at
/// `chain_tol` (relative), the end-to-end comparison with the balanced
/// image area at `fem_tol` (relative), and the comparison with the
/// optimizer's lower estimate of the relative conformal volume.
pub fn verify_conformal_volume_bound(
    id: &str,
    mesh: &SurfaceMesh,
    cfg: &OptimizerConfig,
    fem_tol: f64,
    chain_tol: f64,
) -> Result<Vec<BoundReport>> {
    let chain = proof_chain(mesh)?;
    let vrc = relative_volume_sup(mesh, cfg)?;
    let tag = BoundTag::ConformalVolume;
    let (l1, r1) = chain.rayleigh_step();
    let (l2, r2) = chain.extension_step();
    let (l3, r3) = chain.endpoints();
    let best = vrc.best_value.max(chain.image_area);
    let meta = |r: BoundReport| {
        r.with("sigma1", chain.sigma1)
            .with("boundary_length", chain.boundary_length)
            .with("balance_residual", chain.balance_residual)
            .with("resolution", resolution(mesh))
    };
    Ok(vec![
        meta(BoundReport::new(format!("{id}/rayleigh"), tag, l1, r1, chain_tol * r1.abs())),
        meta(BoundReport::new(format!("{id}/extension"), tag, l2, r2, chain_tol * r2.abs()))
            .with("map_energy_over_two_area", r2 / (2.0 * chain.image_area)),
        meta(BoundReport::new(format!("{id}/chain"), tag, l3, r3, fem_tol * r3))
            .with("harmonic_energy", chain.harmonic_energy)
            .with("map_energy", chain.map_energy)
            .with("balance_center", chain.balance_center.clone()),
        meta(BoundReport::new(format!("{id}/vrc"), tag, l3, 2.0 * best, fem_tol * 2.0 * best))
            .with("vrc_estimate", vrc.best_value)
            .with("vrc_center", vrc.best_center.clone())
            .with("optimizer_starts", vrc.starts),
    ])
}

/// Lower bounds `V_bc ≥ 2π` and `V_rc ≥ π` for a surface in the ball
/// with boundary on the sphere. The optimizer value bounds the orbit
/// supremum from below, so a pass is conclusive.
pub fn verify_volume_lower_bounds(
    id: &str,
    mesh: &SurfaceMesh,
    cfg: &OptimizerConfig,
    rel_tol: f64,
) -> Result<Vec<BoundReport>> {
    let bc = boundary_volume_sup(mesh, cfg)?;
    let rc = relative_volume_sup(mesh, cfg)?;
    Ok(vec![
        BoundReport::new(id, BoundTag::BoundaryVolumeLower, 2.0 * PI, bc.best_value, rel_tol * 2.0 * PI)
            .with("identity_value", bc.identity_value)
            .with("best_center", bc.best_center)
            .with("optimizer_starts", bc.starts)
            .with("resolution", resolution(mesh)),
        BoundReport::new(id, BoundTag::RelativeVolumeLower, PI, rc.best_value, rel_tol * PI)
            .with("identity_value", rc.identity_value)
            .with("best_center", rc.best_center)
            .with("optimizer_starts", rc.starts)
            .with("resolution", resolution(mesh)),
    ])
}

/// Reports for a free boundary surface: orbit maximality of the
/// boundary length, `2A = L`, `A ≥ π` and `A ≤ L²/4π`. Each comparison
/// uses `rel_tol` relative to its natural scale. Fails with a
/// precondition error when the mesh is not a discrete free boundary
/// surface at `thresholds`.
pub fn verify_free_boundary_identities(
    id: &str,
    mesh: &SurfaceMesh,
    cfg: &OptimizerConfig,
    thresholds: &FreeBoundaryThresholds,
    rel_tol: f64,
) -> Result<Vec<BoundReport>> {
    let fb = check_free_boundary(mesh, thresholds)?;
    if !fb.pass {
        return Err(Error::Precondition(format!(
            "{id} is not a free boundary surface at the given thresholds"
        )));
    }
    let orbit = orbit_length_maximality(mesh, cfg, thresholds, rel_tol)?;
    let (a, l) = (fb.area, fb.boundary_length);
    let meta = |r: BoundReport| {
        r.with("area", a)
            .with("boundary_length", l)
            .with("flux_conormal_deviation", fb.flux_conormal_deviation)
            .with("harmonic_defect", fb.harmonic_defect)
            .with("eigenvalue_one_residual", fb.eigenvalue_one_residual)
            .with("mesh_size", fb.mesh_size)
            .with("resolution", resolution(mesh))
    };
    Ok(vec![
        meta(BoundReport::new(
            id,
            BoundTag::OrbitMaximality,
            orbit.sup_length,
            orbit.identity_length,
            rel_tol * orbit.identity_length,
        ))
        .with("best_center", orbit.best_center)
        .with("optimizer_starts", orbit.starts),
        meta(BoundReport::new(format!("{id}/2A=L"), BoundTag::AreaLength, (2.0 * a - l).abs(), 0.0, rel_tol * l)),
        meta(BoundReport::new(format!("{id}/A>=pi"), BoundTag::AreaLength, PI, a, rel_tol * PI)),
        meta(BoundReport::new(id, BoundTag::Isoperimetric, a, l * l / (4.0 * PI), rel_tol * a)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catenoid::catenoid_mesh;
    use crate::mesh::build_disk_mesh;
    use crate::mesh::fixtures::{equatorial_disk, pants, random_embedded_annulus};

    #[test]
    fn disk_topological_bound_is_nearly_sharp() {
        let disk = build_disk_mesh(12, 8).unwrap();
        let r = verify_topological_bound("disk", &disk, 2e-2).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].tag, BoundTag::TopologicalBound);
        assert!((r[0].lhs - 2.0 * PI).abs() < 2e-2 * 2.0 * PI);
        assert!(r[0].pass);
    }

    #[test]
    fn pants_get_strict_report() {
        let r = verify_topological_bound("pants", &pants(0).unwrap(), 2e-2).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].tag, BoundTag::GenusZeroStrict);
        assert!(r[1].strict && r[1].pass && r[1].rhs == 6.0 * PI);
    }

    #[test]
    fn flat_supercritical_closed_form_margin() {
        let m = FlatAnnulus::new(1.0, 1.0, 3.0).unwrap();
        let r = verify_supercritical_closed_form("flat", &m, 1e-9);
        let r = r.report().unwrap();
        let t1 = critical_t1();
        assert!((r.margin - (4.0 * PI / t1 - 8.0 * PI / 3.0)).abs() < 1e-9);
        assert!(r.pass && r.margin > 0.0);
    }

    #[test]
    fn critical_flat_annulus_attains_the_bound() {
        let t1 = critical_t1();
        let m = FlatAnnulus::new(1.0, 1.0, 2.0 * t1).unwrap();
        let r = verify_supercritical_closed_form("critical", &m, 1e-9);
        assert!(r.report().unwrap().margin.abs() <= 1e-6);
    }

    #[test]
    fn subcritical_is_not_applicable() {
        let m = FlatAnnulus::new(1.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            verify_supercritical_closed_form("thin", &m, 1e-9),
            SupercriticalOutcome::NotApplicable { .. }
        ));
        let mesh = crate::bounds::flat_annulus_mesh(&m, 16).unwrap();
        assert!(verify_supercritical("thin", &mesh, 2e-2).unwrap().report().is_none());
    }

    #[test]
    fn supercritical_needs_parameter_mesh() {
        let disk = equatorial_disk(4, 8).unwrap();
        assert!(matches!(verify_supercritical("d", &disk, 2e-2), Err(Error::Precondition(_))));
    }

    #[test]
    fn disk_chain_is_an_equality_chain() {
        let disk = equatorial_disk(10, 8).unwrap();
        let c = proof_chain(&disk).unwrap();
        let (l1, r1) = c.rayleigh_step();
        let (l2, r2) = c.extension_step();
        assert!(l1 <= r1 * (1.0 + 1e-10));
        assert!(l2 <= r2 * (1.0 + 1e-10));
        // identity map: piecewise linear energy is exactly twice the area
        assert!((c.map_energy - 2.0 * c.image_area).abs() < 1e-10);
        let (a, b) = c.endpoints();
        assert!((a - b).abs() < 2e-2 * b);
    }

    #[test]
    fn embedded_annulus_chain_has_positive_margin() {
        let m = random_embedded_annulus(4, 6, 24).unwrap();
        let cfg = OptimizerConfig {
            starts: 4,
            max_iterations: 10,
            tolerance: 1e-3,
            ..OptimizerConfig::default()
        };
        let r = verify_conformal_volume_bound("emb", &m, &cfg, 2e-2, 1e-9).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|x| x.pass), "{r:#?}");
        assert!(r[2].margin > 0.0);
    }

    #[test]
    fn catenoid_identities() {
        let cat = catenoid_mesh(0.0, 12, 48).unwrap();
        let cfg = OptimizerConfig {
            starts: 8,
            max_iterations: 20,
            tolerance: 1e-4,
            ..OptimizerConfig::default()
        };
        let r = verify_free_boundary_identities("cat", &cat.mesh, &cfg, &FreeBoundaryThresholds::default(), 2e-2)
            .unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|x| x.pass), "{r:#?}");
        let lb = verify_volume_lower_bounds("cat", &cat.mesh, &cfg, 1e-9).unwrap();
        assert!(lb.iter().all(|x| x.pass), "{lb:#?}");
    }

    #[test]
    fn non_free_boundary_is_refused() {
        let m = random_embedded_annulus(1, 4, 16).unwrap();
        let r = verify_free_boundary_identities(
            "x",
            &m,
            &OptimizerConfig::default(),
            &FreeBoundaryThresholds::default(),
            2e-2,
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
