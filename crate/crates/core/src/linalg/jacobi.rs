//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct JacobiOptions {
    /// Stop when the off-diagonal Frobenius norm falls below
    /// `rel_tol · ‖A‖_F`.
    pub rel_tol: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_sweeps: 100,
        }
    }
}

/// Eigenvalues in ascending order; column `k` of `vectors` belongs to
/// `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

/// Diagonalizes a symmetric matrix by plane rotations, visiting pairs
/// `(p, q)`, `p < q`, in row order each sweep. Only the upper triangle is
/// read.
pub fn symmetric_eigen(a: &DMatrix<f64>, opts: JacobiOptions) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    // row-major working copy, symmetrized from the upper triangle
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            m[i * n + j] = a[(i, j)];
            m[j * n + i] = a[(i, j)];
        }
    }
    // v is stored transposed: row k holds eigenvector k
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * m[i * n + j] * m[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut residual = off(&m);
    while residual >= opts.rel_tol * norm && norm > 0.0 {
        if sweeps == opts.max_sweeps {
            return Err(Error::NoConvergence {
                what: "Jacobi eigensolver",
                iterations: sweeps,
                residual: residual / norm,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rotate rows p, q then columns p, q
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vpk = v[p * n + k];
                    let vqk = v[q * n + k];
                    v[p * n + k] = c * vpk - s * vqk;
                    v[q * n + k] = s * vpk + c * vqk;
                }
            }
        }
        residual = off(&m);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[order[c] * n + r]);
    Ok(SymmetricEigen { values, vectors, sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = symmetric_eigen(&a, JacobiOptions::default()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let n = 25;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.gen_range(-1.0..1.0);
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        let e = symmetric_eigen(&a, JacobiOptions::default()).unwrap();
        let v = &e.vectors;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone()));
        let recon = v * d * v.transpose();
        assert!((recon - &a).abs().max() < 1e-12);
        assert!((v.transpose() * v - DMatrix::identity(n, n)).abs().max() < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        // agrees with an independent solver
        let mut reference: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for (x, y) in e.values.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_matrix_is_already_diagonal() {
        let e = symmetric_eigen(&DMatrix::zeros(3, 3), JacobiOptions::default()).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values, vec![0.0; 3]);
    }
}
