//! Conformal automorphisms of the unit ball `Bⁿ`, balancing of boundary
//! data, and capped estimates of boundary and relative conformal volume.
//!
//! Every automorphism is written `x ↦ R μ_a(x)` with `|a| < 1`, `R`
//! orthogonal, and
//!
//! ```text
//! μ_a(x) = ((1 − |a|²)(x − a) − |x − a|² a) / (1 − 2⟨x, a⟩ + |x|²|a|²).
//! ```
//!
//! `μ_a` sends `a` to the origin and fixes `±a/|a|`; as `|a| → 1` the
//! image of any set off `a` concentrates at `−a/|a|`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{area_from_edges_sq, loop_edges, Geometry, SurfaceMesh};

/// Slack allowed when checking that a point lies in the closed ball.
pub const BALL_SLACK: f64 = 1e-12;
/// Slack allowed when checking that boundary vertices lie on the sphere.
pub const SPHERE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusMap {
    center: Vec<f64>,
    rotation: DMatrix<f64>,
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

impl MoebiusMap {
    pub fn new(center: Vec<f64>, rotation: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("ball dimension must be at least 2, got {n}")));
        }
        if rotation.nrows() != n || rotation.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "rotation is {}x{}, center has dimension {n}",
                rotation.nrows(),
                rotation.ncols()
            )));
        }
        if !(norm_sq(&center) < 1.0) {
            return Err(Error::InvalidInput(format!(
                "center must lie in the open unit ball, |a| = {}",
                norm_sq(&center).sqrt()
            )));
        }
        let defect = (rotation.transpose() * &rotation - DMatrix::identity(n, n)).abs().max();
        if defect > 1e-12 {
            return Err(Error::InvalidInput(format!("rotation is not orthogonal (defect {defect:e})")));
        }
        Ok(Self { center, rotation })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            center: vec![0.0; dim],
            rotation: DMatrix::identity(dim, dim),
        }
    }

    /// `μ_a` with no rotation.
    pub fn from_center(center: Vec<f64>) -> Result<Self> {
        let n = center.len();
        Self::new(center, DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    /// Applies the map to a point of the closed ball.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has dimension {}, map has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let r = norm_sq(x).sqrt();
        if r > 1.0 + BALL_SLACK {
            return Err(Error::OutOfDomain {
                what: "Möbius map argument radius",
                at: r,
            });
        }
        Ok(self.apply_unchecked(x))
    }

    /// [`apply`](Self::apply) without the domain check.
    pub fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let a = &self.center;
        let a2 = norm_sq(a);
        let x2 = norm_sq(x);
        let dot: f64 = x.iter().zip(a).map(|(p, q)| p * q).sum();
        let diff2: f64 = x.iter().zip(a).map(|(p, q)| (p - q) * (p - q)).sum();
        let denom = 1.0 - 2.0 * dot + x2 * a2;
        let y: Vec<f64> = x
            .iter()
            .zip(a)
            .map(|(p, q)| ((1.0 - a2) * (p - q) - diff2 * q) / denom)
            .collect();
        (&self.rotation * DVector::from_vec(y)).iter().copied().collect()
    }

    /// `(R μ_a)⁻¹ = Rᵀ μ_{−Ra}`.
    pub fn inverse(&self) -> Self {
        let ra = &self.rotation * DVector::from_column_slice(&self.center);
        Self {
            center: ra.iter().map(|v| -v).collect(),
            rotation: self.rotation.transpose(),
        }
    }
}

fn embedding(mesh: &SurfaceMesh) -> Result<(usize, &[f64])> {
    match mesh.geometry() {
        Geometry::Embedding { dim, coords } => Ok((*dim, coords)),
        Geometry::ParamFlat { .. } => Err(Error::Precondition("mesh must be embedded in a ball".into())),
    }
}

/// Checks that every vertex lies in the closed unit ball.
pub fn check_in_ball(mesh: &SurfaceMesh) -> Result<()> {
    let (dim, coords) = embedding(mesh)?;
    for (v, p) in coords.chunks(dim).enumerate() {
        let radius = norm_sq(p).sqrt();
        if radius > 1.0 + BALL_SLACK {
            return Err(Error::OutsideBall { vertex: v, radius });
        }
    }
    Ok(())
}

/// Checks that every boundary vertex lies on the unit sphere.
pub fn check_boundary_on_sphere(mesh: &SurfaceMesh) -> Result<()> {
    let (dim, coords) = embedding(mesh)?;
    for v in mesh.boundary_vertices() {
        let radius = norm_sq(&coords[v * dim..(v + 1) * dim]).sqrt();
        if (radius - 1.0).abs() > SPHERE_SLACK {
            return Err(Error::OffSphere { vertex: v, radius });
        }
    }
    Ok(())
}

/// Image of the mesh under `map`, vertex by vertex.
pub fn push_mesh(map: &MoebiusMap, mesh: &SurfaceMesh) -> Result<SurfaceMesh> {
    let (dim, coords) = embedding(mesh)?;
    if dim != map.dim() {
        return Err(Error::InvalidInput(format!("mesh lives in R^{dim}, map acts on R^{}", map.dim())));
    }
    check_in_ball(mesh)?;
    let pushed = coords.chunks(dim).flat_map(|p| map.apply_unchecked(p)).collect();
    mesh.with_geometry(Geometry::Embedding { dim, coords: pushed })
}

/// Arclength weights of the boundary vertices (row sums of the
/// consistent boundary mass), in [`SurfaceMesh::boundary_vertices`]
/// order.
pub fn boundary_weights(mesh: &SurfaceMesh) -> Vec<f64> {
    let boundary = mesh.boundary_vertices();
    let mut local = vec![usize::MAX; mesh.vertex_count()];
    for (k, &v) in boundary.iter().enumerate() {
        local[v] = k;
    }
    let mut w = vec![0.0; boundary.len()];
    for l in mesh.boundary_loops() {
        for (a, b) in loop_edges(l) {
            let len = mesh.edge_length(a, b);
            w[local[a]] += 0.5 * len;
            w[local[b]] += 0.5 * len;
        }
    }
    w
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Balance {
    pub center: Vec<f64>,
    /// `max_i |∫(f∘φ)ⁱ ds| / L` at the returned center.
    pub residual: f64,
    pub iterations: usize,
}

impl Balance {
    pub fn map(&self) -> MoebiusMap {
        MoebiusMap::from_center(self.center.clone()).expect("balance keeps the center inside the ball")
    }
}

/// Finds `f = μ_a` with `|∫_{∂Σ}(f∘φ)ⁱ ds| ≤ tol·L` for every coordinate,
/// integrating against the arclength of the original boundary. Newton's
/// method on `a`, with a finite-difference Jacobian and step halving.
pub fn balance(mesh: &SurfaceMesh, tol: f64) -> Result<Balance> {
    const MAX_ITERATIONS: usize = 200;
    let (dim, coords) = embedding(mesh)?;
    check_boundary_on_sphere(mesh)?;
    let boundary = mesh.boundary_vertices();
    let weights = boundary_weights(mesh);
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Precondition("boundary has zero length".into()));
    }
    let points: Vec<&[f64]> = boundary.iter().map(|&v| &coords[v * dim..(v + 1) * dim]).collect();
    let mean = |a: &[f64]| -> DVector<f64> {
        let map = MoebiusMap {
            center: a.to_vec(),
            rotation: DMatrix::identity(dim, dim),
        };
        let mut m = DVector::zeros(dim);
        for (p, w) in points.iter().zip(&weights) {
            let y = map.apply_unchecked(p);
            for i in 0..dim {
                m[i] += w * y[i];
            }
        }
        m / total
    };

    let mut a = vec![0.0; dim];
    let mut f = mean(&a);
    let mut iterations = 0;
    while f.amax() > tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                what: "boundary balancing",
                iterations,
                residual: f.amax(),
            });
        }
        iterations += 1;
        let h = 1e-7;
        let mut jac = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[j] += h;
            am[j] -= h;
            let col = (mean(&ap) - mean(&am)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let step = jac.clone().lu().solve(&(-&f)).unwrap_or_else(|| f.clone());
        let mut scale = 1.0;
        loop {
            let trial: Vec<f64> = a.iter().zip(step.iter()).map(|(x, d)| x + scale * d).collect();
            if norm_sq(&trial) < 1.0 {
                let ft = mean(&trial);
                if ft.norm() < f.norm() {
                    a = trial;
                    f = ft;
                    break;
                }
            }
            scale *= 0.5;
            if scale < 1e-12 {
                return Err(Error::NoConvergence {
                    what: "boundary balancing line search",
                    iterations,
                    residual: f.amax(),
                });
            }
        }
    }
    Ok(Balance {
        center: a,
        residual: f.amax(),
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeObjective {
    /// Total boundary length of the image.
    Boundary,
    /// Area of the image.
    Area,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Deterministic starting centers, including the origin.
    pub starts: usize,
    /// Centers are confined to `|a| ≤ 1 − cap_eps`.
    pub cap_eps: f64,
    /// Coordinate sweeps per start.
    pub max_iterations: usize,
    /// Final search window in hyperbolic coordinates.
    pub tolerance: f64,
    pub seed: u64,
    /// Extra starts drawn uniformly from the capped ball with `seed`.
    pub random_restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            cap_eps: 1e-3,
            max_iterations: 60,
            tolerance: 1e-6,
            seed: 0,
            random_restarts: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConformalVolumeEstimate {
    pub objective: VolumeObjective,
    /// Largest value found; a lower bound for the supremum over the group.
    pub best_value: f64,
    pub best_center: Vec<f64>,
    pub identity_value: f64,
    /// Objective evaluations over all starts.
    pub samples: usize,
    /// Whether the winning start shrank its window below `tolerance`.
    pub converged: bool,
    pub starts: usize,
}

impl ConformalVolumeEstimate {
    pub fn best_map(&self) -> MoebiusMap {
        MoebiusMap::from_center(self.best_center.clone()).expect("optimizer stays inside the cap")
    }
}

/// Measure of the image of the mesh under `μ_a`.
pub fn pushed_measure(mesh: &SurfaceMesh, center: &[f64], objective: VolumeObjective) -> Result<f64> {
    let (dim, coords) = embedding(mesh)?;
    let map = MoebiusMap::from_center(center.to_vec())?;
    Ok(measure_with(&map, mesh, dim, coords, objective))
}

fn measure_with(map: &MoebiusMap, mesh: &SurfaceMesh, dim: usize, coords: &[f64], objective: VolumeObjective) -> f64 {
    let img = |v: usize| map.apply_unchecked(&coords[v * dim..(v + 1) * dim]);
    let dist2 = |p: &[f64], q: &[f64]| -> f64 { p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum() };
    match objective {
        VolumeObjective::Boundary => mesh
            .boundary_loops()
            .iter()
            .map(|l| {
                let pts: Vec<Vec<f64>> = l.iter().map(|&v| img(v)).collect();
                (0..pts.len()).map(|i| dist2(&pts[i], &pts[(i + 1) % pts.len()]).sqrt()).sum::<f64>()
            })
            .sum(),
        VolumeObjective::Area => {
            let pts: Vec<Vec<f64>> = (0..mesh.vertex_count()).map(img).collect();
            mesh.triangles()
                .iter()
                .map(|&[a, b, c]| {
                    area_from_edges_sq([dist2(&pts[b], &pts[c]), dist2(&pts[c], &pts[a]), dist2(&pts[a], &pts[b])])
                })
                .sum()
        }
    }
}

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: usize, b: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Origin followed by Halton points of `[−1, 1]ⁿ` that fall in the open
/// ball, scaled into the cap.
pub fn start_centers(dim: usize, count: usize, cap: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim]];
    let mut i = 1;
    while out.len() < count {
        let p: Vec<f64> = (0..dim).map(|k| 2.0 * radical_inverse(i, PRIMES[k % PRIMES.len()]) - 1.0).collect();
        i += 1;
        if norm_sq(&p) < 1.0 {
            out.push(p.iter().map(|x| x * cap).collect());
        }
    }
    out.truncate(count.max(1));
    out
}

/// Hyperbolic coordinates `b` with `a = tanh|b| · b/|b|`.
fn to_ball(b: &[f64]) -> Vec<f64> {
    let r = norm_sq(b).sqrt();
    if r == 0.0 {
        return b.to_vec();
    }
    let s = r.tanh() / r;
    b.iter().map(|x| x * s).collect()
}

fn from_ball(a: &[f64]) -> Vec<f64> {
    let r = norm_sq(a).sqrt();
    if r == 0.0 {
        return a.to_vec();
    }
    let s = r.atanh() / r;
    a.iter().map(|x| x * s).collect()
}

struct LocalResult {
    value: f64,
    center: Vec<f64>,
    evaluations: usize,
    converged: bool,
}

fn local_search<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64], b_max: f64, cfg: &OptimizerConfig) -> LocalResult {
    let clamp = |b: &mut Vec<f64>| {
        let r = norm_sq(b).sqrt();
        if r > b_max {
            b.iter_mut().for_each(|x| *x *= b_max / r);
        }
    };
    let mut b = from_ball(start);
    clamp(&mut b);
    let mut value = f(&to_ball(&b));
    let mut evaluations = 1;
    let mut window = 1.0;
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        if window < cfg.tolerance {
            converged = true;
            break;
        }
        let mut improved = false;
        for k in 0..b.len() {
            let eval = |x: f64| {
                let mut trial = b.clone();
                trial[k] = x;
                clamp(&mut trial);
                f(&to_ball(&trial))
            };
            let mut count = 0usize;
            let (x, fx) = crate::roots::golden_max(
                |x| {
                    count += 1;
                    eval(x)
                },
                b[k] - window,
                b[k] + window,
                0.05 * window,
            );
            evaluations += count;
            if fx > value {
                b[k] = x;
                clamp(&mut b);
                value = fx;
                improved = true;
            }
        }
        if !improved {
            window *= 0.5;
        }
    }
    if window < cfg.tolerance {
        converged = true;
    }
    LocalResult {
        value,
        center: to_ball(&b),
        evaluations,
        converged,
    }
}

/// Capped supremum of the chosen measure over the orbit of the mesh.
/// Rotations do not change either measure, so only centers are searched.
pub fn conformal_volume_sup(
    mesh: &SurfaceMesh,
    objective: VolumeObjective,
    cfg: &OptimizerConfig,
) -> Result<ConformalVolumeEstimate> {
    let (dim, coords) = embedding(mesh)?;
    check_boundary_on_sphere(mesh)?;
    if objective == VolumeObjective::Area {
        check_in_ball(mesh)?;
    }
    if !(cfg.cap_eps > 0.0 && cfg.cap_eps < 1.0) || cfg.starts == 0 || !(cfg.tolerance > 0.0) {
        return Err(Error::InvalidInput(
            "optimizer needs starts >= 1, 0 < cap_eps < 1 and tolerance > 0".into(),
        ));
    }
    let cap = 1.0 - cfg.cap_eps;
    let b_max = cap.atanh();
    let f = |a: &[f64]| {
        let map = MoebiusMap {
            center: a.to_vec(),
            rotation: DMatrix::identity(dim, dim),
        };
        measure_with(&map, mesh, dim, coords, objective)
    };
    let identity_value = f(&vec![0.0; dim]);

    let mut starts = start_centers(dim, cfg.starts, cap);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < cfg.starts + cfg.random_restarts {
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if norm_sq(&p) < 1.0 {
            starts.push(p.iter().map(|x| x * cap).collect());
        }
    }
    let results: Vec<LocalResult> = starts.par_iter().map(|s| local_search(&f, s, b_max, cfg)).collect();
    let samples = results.iter().map(|r| r.evaluations).sum();
    let best = results
        .into_iter()
        .reduce(|x, y| {
            let take_y = y.value > x.value
                || (y.value == x.value && y.center.partial_cmp(&x.center) == Some(std::cmp::Ordering::Less));
            if take_y {
                y
            } else {
                x
            }
        })
        .expect("at least one start");
    Ok(ConformalVolumeEstimate {
        objective,
        best_value: best.value,
        best_center: best.center,
        identity_value,
        samples,
        converged: best.converged,
        starts: starts.len(),
    })
}

/// Capped estimate of the boundary conformal volume of the embedding.
pub fn boundary_volume_sup(mesh: &SurfaceMesh, cfg: &OptimizerConfig) -> Result<ConformalVolumeEstimate> {
    conformal_volume_sup(mesh, VolumeObjective::Boundary, cfg)
}

/// Capped estimate of the relative conformal volume of the embedding.
pub fn relative_volume_sup(mesh: &SurfaceMesh, cfg: &OptimizerConfig) -> Result<ConformalVolumeEstimate> {
    conformal_volume_sup(mesh, VolumeObjective::Area, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSample {
    pub t: f64,
    pub boundary_length: f64,
    pub area: f64,
}

/// Measures of the images under `μ_a` with `a = tanh(t)·(−p)`, `p` the
/// position of boundary vertex `vertex`.
pub fn limit_concentration(mesh: &SurfaceMesh, vertex: usize, ts: &[f64]) -> Result<Vec<ConcentrationSample>> {
    let (dim, coords) = embedding(mesh)?;
    check_boundary_on_sphere(mesh)?;
    check_in_ball(mesh)?;
    if !mesh.boundary_mask().get(vertex).copied().unwrap_or(false) {
        return Err(Error::InvalidInput(format!("vertex {vertex} is not a boundary vertex")));
    }
    let p = &coords[vertex * dim..(vertex + 1) * dim];
    ts.iter()
        .map(|&t| {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidInput(format!("concentration parameter must be >= 0, got {t}")));
            }
            let s = t.tanh();
            if s >= 1.0 {
                return Err(Error::OutOfDomain {
                    what: "concentration parameter (tanh rounds to 1)",
                    at: t,
                });
            }
            let map = MoebiusMap {
                center: p.iter().map(|x| -s * x).collect(),
                rotation: DMatrix::identity(dim, dim),
            };
            Ok(ConcentrationSample {
                t,
                boundary_length: measure_with(&map, mesh, dim, coords, VolumeObjective::Boundary),
                area: measure_with(&map, mesh, dim, coords, VolumeObjective::Area),
            })
        })
        .collect()
}
