use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::annulus::FlatAnnulus;
use crate::error::Result;
use crate::mesh::{build_annulus_grid, SurfaceMesh};

/// Range of the log-uniform modulus draw.
pub const RANDOM_MODULUS_RANGE: (f64, f64) = (0.05, 10.0);

/// Largest magnitude of a coefficient in the random log-factor.
const COEFFICIENT_BOUND: f64 = 0.3;

/// Cells along `t` for a grid of modulus `modulus` with `n_theta` cells
/// around, chosen so that cells are close to square.
pub fn cells_along(modulus: f64, n_theta: usize) -> usize {
    let n = (modulus * n_theta as f64 / (2.0 * PI)).ceil() as usize;
    n.clamp(4, 4 * n_theta)
}

/// Random conformal annulus `[0,T] × S¹` with metric `λ²(dt² + dθ²)`.
///
/// `T` is log-uniform on [`RANDOM_MODULUS_RANGE`] and
/// `log λ = c₀ + Σ aₚq cos(pπt/T + qθ) + bₚq sin(pπt/T + qθ)` over
/// `p, q ∈ {0, 1, 2}`, so both boundary circles carry non-constant
/// factors. The mesh is a pure function of `seed` and `n_theta`.
pub fn gen_random_annulus(seed: u64, n_theta: usize) -> Result<SurfaceMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = RANDOM_MODULUS_RANGE;
    let modulus = (rng.gen_range(lo.ln()..hi.ln())).exp();
    let c0 = rng.gen_range(-1.0..1.0);
    let mut terms = Vec::new();
    for p in 0..3 {
        for q in 0..3 {
            if p == 0 && q == 0 {
                continue;
            }
            let a: f64 = rng.gen_range(-COEFFICIENT_BOUND..COEFFICIENT_BOUND);
            let b: f64 = rng.gen_range(-COEFFICIENT_BOUND..COEFFICIENT_BOUND);
            terms.push((p as f64, q as f64, a, b));
        }
    }
    let n_t = cells_along(modulus, n_theta);
    build_annulus_grid(modulus, n_t, n_theta, |t, th| {
        let s = PI * t / modulus;
        let log = terms
            .iter()
            .fold(c0, |acc, &(p, q, a, b)| acc + a * (p * s + q * th).cos() + b * (p * s + q * th).sin());
        log.exp()
    })
}

/// Grid mesh of a rotationally symmetric flat annulus. The factor
/// interpolates linearly between the boundary values; only the boundary
/// values affect the Steklov spectrum.
pub fn flat_annulus_mesh(m: &FlatAnnulus, n_theta: usize) -> Result<SurfaceMesh> {
    let t_max = m.modulus();
    let n_t = cells_along(t_max, n_theta);
    let (f0, f_t) = (m.f0(), m.f_t());
    build_annulus_grid(t_max, n_t, n_theta, |t, _| f0 + (f_t - f0) * t / t_max)
}

/// Random flat annulus with boundary factors in `[0.2, 5]` (log-uniform)
/// and modulus log-uniform on [`RANDOM_MODULUS_RANGE`].
pub fn random_flat_annulus(seed: u64) -> Result<FlatAnnulus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log_uniform = |lo: f64, hi: f64| rng.gen_range(lo.ln()..hi.ln()).exp();
    let f0 = log_uniform(0.2, 5.0);
    let f_t = log_uniform(0.2, 5.0);
    let (lo, hi) = RANDOM_MODULUS_RANGE;
    FlatAnnulus::new(f0, f_t, log_uniform(lo, hi))
}

/// Seed for instance `index` of a family, decorrelated from the
/// campaign seed.
pub fn instance_seed(campaign_seed: u64, family: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(campaign_seed);
    rng.set_stream(family);
    rng.set_word_pos(2 * index as u128);
    rng.gen()
}
