//! Closed-form Steklov spectrum of rotationally symmetric annuli.
//!
//! A rotationally symmetric metric on the annulus is conformal to
//! `f(t)^2 (dt^2 + dθ^2)` on `[0,T] × S¹`. Only the boundary values
//! `f(0)` and `f(T)` affect the Dirichlet-to-Neumann spectrum, so a
//! [`FlatAnnulus`] stores just those two factors and the modulus.
//!
//! Separating variables gives one band per angular frequency `n`:
//! for `n = 0` the eigenvalues `0` and `(f0+fT)/(f0·fT·T)`, and for
//! `n ≥ 1` the two roots of
//!
//! ```text
//! λ² − n (1/f0 + 1/fT) coth(nT) λ + n² / (f0·fT) = 0
//! ```
//!
//! each with multiplicity two.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{bisect_newton, RootOptions};

/// Relative tolerance used when merging eigenvalues into clusters.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Relative tolerance on `T` for tagging a metric as critical.
pub const CLASSIFICATION_TOL: f64 = 1e-9;

const COTH_SATURATION: f64 = 350.0;

/// `coth(x)` evaluated as `1 + 2/(e^{2x} − 1)`, saturating to exactly 1.
pub fn coth(x: f64) -> f64 {
    if x < 0.0 {
        return -coth(-x);
    }
    if x > COTH_SATURATION {
        return 1.0;
    }
    1.0 + 2.0 / (2.0 * x).exp_m1()
}

/// Flat conformal metric on `[0,T] × S¹` described by its boundary
/// factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatAnnulus {
    f0: f64,
    #[serde(rename = "fT")]
    f_t: f64,
    #[serde(rename = "T")]
    modulus: f64,
}

impl FlatAnnulus {
    pub fn new(f0: f64, f_t: f64, modulus: f64) -> Result<Self> {
        for (name, v) in [("f0", f0), ("fT", f_t), ("T", modulus)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { f0, f_t, modulus })
    }

    /// Flat annulus with boundary length ratio `alpha = f0/fT`, `fT = 1`.
    pub fn with_ratio(alpha: f64, modulus: f64) -> Result<Self> {
        Self::new(alpha, 1.0, modulus)
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn f_t(&self) -> f64 {
        self.f_t
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// Boundary length ratio `α = f0/fT`.
    pub fn alpha(&self) -> f64 {
        self.f0 / self.f_t
    }

    pub fn boundary_lengths(&self) -> (f64, f64) {
        (2.0 * PI * self.f0, 2.0 * PI * self.f_t)
    }

    pub fn total_boundary_length(&self) -> f64 {
        2.0 * PI * (self.f0 + self.f_t)
    }

    /// Same metric with both boundary factors multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(c * self.f0, c * self.f_t, self.modulus)
    }
}

/// The eigenvalue pair contributed by angular frequency `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBand {
    pub n: u32,
    pub lam1: f64,
    pub lam2: f64,
    /// Multiplicity of each of `lam1`, `lam2` (1 for `n = 0`, else 2).
    pub multiplicity: u32,
}

/// Band `n = 0`: eigenvalue 0 (constants) and `(f0+fT)/(f0·fT·T)`.
pub fn zero_band(m: &FlatAnnulus) -> SpectrumBand {
    SpectrumBand {
        n: 0,
        lam1: 0.0,
        lam2: (m.f0 + m.f_t) / (m.f0 * m.f_t * m.modulus),
        multiplicity: 1,
    }
}

/// Band `n ≥ 1`. The smaller root uses the reciprocal form, which avoids
/// cancellation when `coth(nT)` is large.
pub fn band_eigenvalues(m: &FlatAnnulus, n: u32) -> Result<SpectrumBand> {
    if n == 0 {
        return Err(Error::InvalidInput("band_eigenvalues needs n >= 1; use zero_band".into()));
    }
    let nf = f64::from(n);
    let inv_sum = 1.0 / m.f0 + 1.0 / m.f_t;
    let inv_prod = 1.0 / (m.f0 * m.f_t);
    let b = inv_sum * coth(nf * m.modulus);
    let mut disc = b * b - 4.0 * inv_prod;
    if disc < 0.0 {
        // mathematically D ≥ (1/f0 − 1/fT)² ≥ 0
        if disc < -1e-12 * b * b {
            return Err(Error::NegativeDiscriminant { n, value: disc });
        }
        disc = 0.0;
    }
    let s = disc.sqrt();
    let lam2 = 0.5 * nf * (b + s);
    let lam1 = 2.0 * nf * inv_prod / (b + s);
    Ok(SpectrumBand {
        n,
        lam1,
        lam2,
        multiplicity: 2,
    })
}

/// First nonzero Steklov eigenvalue, `min(λ₀⁽²⁾, λ₁⁽¹⁾)`.
pub fn sigma1(m: &FlatAnnulus) -> f64 {
    let b1 = band_eigenvalues(m, 1).expect("band 1 of a validated annulus");
    zero_band(m).lam2.min(b1.lam1)
}

/// The scale-invariant product `σ₁ · L(∂Σ)`.
pub fn sigma1_length(m: &FlatAnnulus) -> f64 {
    sigma1(m) * m.total_boundary_length()
}

/// `λ₁⁽¹⁾ / λ₀⁽²⁾` as a function of `α` and `T` alone.
pub fn ratio_first_bands(m: &FlatAnnulus) -> f64 {
    ratio_for(m.alpha(), m.modulus)
}

/// The ratio formula expressed through `q = α/(α+1)² = 1/(α + 2 + 1/α)`,
/// which is symmetric under `α ↔ 1/α`.
pub fn ratio_for(alpha: f64, modulus: f64) -> f64 {
    let q = 1.0 / (alpha + 1.0 / alpha + 2.0);
    let c = coth(modulus);
    let root = (c * c - 4.0 * q).max(0.0).sqrt();
    2.0 * modulus * q / (c + root)
}

/// Bracket, expansion cap, and tolerance for [`critical_modulus_with`].
#[derive(Debug, Clone, Copy)]
pub struct ModulusSearch {
    pub lo: f64,
    pub hi: f64,
    /// Number of tenfold bracket expansions allowed on either side.
    pub max_expansions: u32,
}

impl Default for ModulusSearch {
    fn default() -> Self {
        Self {
            lo: 1e-6,
            hi: 1e6,
            max_expansions: 8,
        }
    }
}

/// The critical modulus `T(α)`: the unique `T` with `λ₁⁽¹⁾ = λ₀⁽²⁾`.
pub fn critical_modulus(alpha: f64, tol: f64) -> Result<f64> {
    critical_modulus_with(alpha, tol, ModulusSearch::default())
}

pub fn critical_modulus_with(alpha: f64, tol: f64, search: ModulusSearch) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha must be positive and finite, got {alpha}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let g = |t: f64| ratio_for(alpha, t) - 1.0;
    let (mut lo, mut hi) = (search.lo, search.hi);
    let mut expansions = 0;
    while g(lo) >= 0.0 {
        if expansions == search.max_expansions {
            return Err(Error::NoConvergence {
                what: "critical modulus bracket",
                iterations: expansions as usize,
                residual: g(lo),
            });
        }
        lo /= 10.0;
        expansions += 1;
    }
    expansions = 0;
    while !(g(hi) > 0.0) {
        if expansions == search.max_expansions {
            return Err(Error::NoConvergence {
                what: "critical modulus bracket",
                iterations: expansions as usize,
                residual: g(hi),
            });
        }
        hi *= 10.0;
        expansions += 1;
    }
    let dg = |t: f64| {
        let h = 1e-7 * t.max(1e-3);
        (g(t + h) - g(t - h)) / (2.0 * h)
    };
    bisect_newton("critical modulus", g, dg, lo, hi, RootOptions::new(tol))
}

/// `T(1)` computed once to tight tolerance.
pub fn critical_modulus_one() -> f64 {
    static T1: OnceLock<f64> = OnceLock::new();
    *T1.get_or_init(|| critical_modulus(1.0, 1e-14).expect("T(1) exists"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criticality {
    Subcritical,
    Supercritical,
    /// Within tolerance of the threshold; counts as both.
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalityClass {
    pub tag: Criticality,
    /// `¼(√α + 1/√α)² · T(1)`.
    pub threshold: f64,
}

impl CriticalityClass {
    /// True for supercritical and critical metrics.
    pub fn is_supercritical(&self) -> bool {
        matches!(self.tag, Criticality::Supercritical | Criticality::Critical)
    }
}

/// Supercritical threshold for boundary length ratio `alpha`.
pub fn supercritical_threshold(alpha: f64) -> f64 {
    0.25 * (alpha + 2.0 + 1.0 / alpha) * critical_modulus_one()
}

pub fn classify(m: &FlatAnnulus) -> CriticalityClass {
    classify_modulus(m.alpha(), m.modulus)
}

/// Classification from a boundary length ratio and conformal modulus,
/// for metrics that are not rotationally symmetric.
pub fn classify_modulus(alpha: f64, modulus: f64) -> CriticalityClass {
    let threshold = supercritical_threshold(alpha);
    let tag = if (modulus - threshold).abs() <= CLASSIFICATION_TOL * threshold {
        Criticality::Critical
    } else if modulus >= threshold {
        Criticality::Supercritical
    } else {
        Criticality::Subcritical
    };
    CriticalityClass { tag, threshold }
}

/// A cluster of numerically equal eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Groups an ascending list of eigenvalues. Values whose relative
/// distance to the first member of the current cluster is at most
/// `rel_tol` are merged; values below `zero_tol` in magnitude form the
/// zero cluster.
pub fn cluster_sorted(values: &[f64], rel_tol: f64, zero_tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0usize;
    while start < values.len() {
        let first = values[start];
        let mut end = start + 1;
        while end < values.len() {
            let v = values[end];
            let same = if first.abs() <= zero_tol {
                v.abs() <= zero_tol
            } else {
                (v - first).abs() <= rel_tol * first.abs().max(v.abs())
            };
            if !same {
                break;
            }
            end += 1;
        }
        let members = &values[start..end];
        out.push(Cluster {
            value: members.iter().sum::<f64>() / members.len() as f64,
            multiplicity: members.len(),
        });
        start = end;
    }
    out
}

/// Bands `0..=n_max` merged into a sorted list of clusters. Eigenvalues
/// from bands above `n_max` are not included, so only entries below
/// `λ_{n_max+1}⁽¹⁾` are guaranteed complete.
pub fn spectrum(m: &FlatAnnulus, n_max: u32, cluster_tol: f64) -> Result<Vec<Cluster>> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let zb = zero_band(m);
    let mut values = vec![0.0, zb.lam2];
    for n in 1..=n_max {
        let b = band_eigenvalues(m, n)?;
        values.extend([b.lam1, b.lam1, b.lam2, b.lam2]);
    }
    values.sort_by(f64::total_cmp);
    Ok(cluster_sorted(&values, cluster_tol, 0.0))
}
