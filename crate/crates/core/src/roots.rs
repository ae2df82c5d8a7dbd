//! Bracketed scalar root finding: bisection to a tolerance followed by
//! a fixed number of safeguarded Newton steps.

use crate::error::{Error, Result};

/// Settings for [`bisect_newton`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute width at which bisection stops.
    pub tol: f64,
    /// Newton steps applied after bisection. A step is rejected if it
    /// leaves the final bracket or does not reduce the residual.
    pub polish_steps: usize,
    pub max_bisections: usize,
}

impl RootOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            polish_steps: 5,
            max_bisections: 400,
        }
    }
}

/// Finds a root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite signs. `df` is the derivative used for polishing.
pub fn bisect_newton<F, D>(
    what: &'static str,
    f: F,
    df: D,
    mut lo: f64,
    mut hi: f64,
    opts: RootOptions,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::InvalidInput(format!(
            "{what}: interval [{lo}, {hi}] does not bracket a root"
        )));
    }

    let mut iterations = 0;
    while hi - lo > opts.tol {
        if iterations == opts.max_bisections {
            return Err(Error::NoConvergence {
                what,
                iterations,
                residual: hi - lo,
            });
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    for _ in 0..opts.polish_steps {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let candidate = x - fx / d;
        if !(candidate >= lo && candidate <= hi) {
            break;
        }
        let fc = f(candidate);
        if fc.abs() > fx.abs() {
            break;
        }
        x = candidate;
        fx = fc;
        if fx == 0.0 {
            break;
        }
    }
    Ok(x)
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect_newton("x^2-2", |x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0, RootOptions::new(1e-10))
            .unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_bracket() {
        let r = bisect_newton("x^2+1", |x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0, RootOptions::new(1e-10));
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
