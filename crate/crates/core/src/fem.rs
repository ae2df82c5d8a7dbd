//! Piecewise-linear Steklov problem on a [`SurfaceMesh`].
//!
//! The Dirichlet energy `∫|∇u|² da` is assembled with cotangent weights
//! from the intrinsic triangle shapes (flat `(t,θ)` shapes for parameter
//! meshes, where the energy is conformally invariant). Eliminating the
//! interior unknowns gives the discrete Dirichlet-to-Neumann matrix
//!
//! ```text
//! D = K_bb − K_bi K_ii⁻¹ K_ib
//! ```
//!
//! and the Steklov eigenvalues are the generalized eigenvalues of
//! `(D, M)` with `M` the boundary mass matrix. The generalized problem is
//! reduced to standard form by the Cholesky factor of `M` and solved with
//! the cyclic Jacobi method.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus::{cluster_sorted, Cluster};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, CsrMatrix, JacobiOptions, SparseCholesky};
use crate::mesh::{area_from_edges_sq, loop_edges, SurfaceMesh};

/// Default relative tolerance for grouping discrete eigenvalues.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassKind {
    /// Tridiagonal (per loop) P1 mass along the boundary.
    #[default]
    Consistent,
    /// Row-summed diagonal mass.
    Lumped,
}

#[derive(Debug, Clone, Copy)]
pub struct FemOptions {
    pub mass: MassKind,
    pub cluster_tol: f64,
    pub jacobi: JacobiOptions,
}

impl Default for FemOptions {
    fn default() -> Self {
        Self {
            mass: MassKind::Consistent,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            jacobi: JacobiOptions::default(),
        }
    }
}

/// Stiffness (Dirichlet energy) matrix over all vertices.
#[derive(Debug, Clone)]
pub struct StiffnessMatrix(pub CsrMatrix);

impl StiffnessMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.0
    }

    /// `uᵀ K u`, the Dirichlet energy of the P1 interpolant of `u`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.0.quadratic_form(u)
    }
}

pub fn assemble_stiffness(mesh: &SurfaceMesh) -> Result<StiffnessMatrix> {
    let n = mesh.vertex_count();
    let mut triplets = Vec::with_capacity(9 * mesh.triangles().len());
    for (f, tri) in mesh.triangles().iter().enumerate() {
        let l = mesh.triangle_edges_sq(f);
        let area = area_from_edges_sq(l);
        if !(area > 1e-14 * (l[0] + l[1] + l[2])) {
            return Err(Error::DegenerateTriangle { index: f, area });
        }
        for k in 0..3 {
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            // cot of the corner opposite edge (i, j), halved
            let w = (l[(k + 1) % 3] + l[(k + 2) % 3] - l[k]) / (8.0 * area);
            triplets.push((i, j, -w));
            triplets.push((j, i, -w));
            triplets.push((i, i, w));
            triplets.push((j, j, w));
        }
    }
    Ok(StiffnessMatrix(CsrMatrix::from_triplets(n, n, &triplets)?))
}

/// Boundary mass matrix indexed like [`SurfaceMesh::boundary_vertices`].
pub fn assemble_boundary_mass(mesh: &SurfaceMesh, kind: MassKind) -> DMatrix<f64> {
    let boundary = mesh.boundary_vertices();
    let mut local = vec![usize::MAX; mesh.vertex_count()];
    for (k, &v) in boundary.iter().enumerate() {
        local[v] = k;
    }
    let nb = boundary.len();
    let mut m = DMatrix::zeros(nb, nb);
    for l in mesh.boundary_loops() {
        for (a, b) in loop_edges(l) {
            let len = mesh.edge_length(a, b);
            let (i, j) = (local[a], local[b]);
            match kind {
                MassKind::Consistent => {
                    m[(i, i)] += len / 3.0;
                    m[(j, j)] += len / 3.0;
                    m[(i, j)] += len / 6.0;
                    m[(j, i)] += len / 6.0;
                }
                MassKind::Lumped => {
                    m[(i, i)] += len / 2.0;
                    m[(j, j)] += len / 2.0;
                }
            }
        }
    }
    m
}

/// Discrete Dirichlet-to-Neumann operator with its boundary mass.
#[derive(Debug, Clone)]
pub struct DtnMatrix {
    /// Mesh vertex of each row/column.
    pub boundary: Vec<usize>,
    pub dtn: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteklovSpectrum {
    /// Ascending; `eigenvalues[0] ≈ 0`.
    pub eigenvalues: Vec<f64>,
    /// Boundary functions, one per column, orthonormal in the mass inner
    /// product. Rows follow [`DtnMatrix::boundary`].
    #[serde(skip)]
    pub eigenvectors: DMatrix<f64>,
    pub clusters: Vec<Cluster>,
}

impl SteklovSpectrum {
    /// First nonzero eigenvalue (index 1).
    pub fn sigma1(&self) -> f64 {
        self.eigenvalues[1]
    }

    /// Eigenvector `k` as a plain vector.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }
}

/// Stiffness matrix, index sets, and interior factorization of one mesh.
#[derive(Debug)]
pub struct SteklovSolver<'m> {
    mesh: &'m SurfaceMesh,
    opts: FemOptions,
    stiffness: StiffnessMatrix,
    boundary: Vec<usize>,
    interior: Vec<usize>,
    interior_factor: Option<SparseCholesky>,
}

impl<'m> SteklovSolver<'m> {
    pub fn new(mesh: &'m SurfaceMesh, opts: FemOptions) -> Result<Self> {
        let stiffness = assemble_stiffness(mesh)?;
        let boundary = mesh.boundary_vertices();
        let mask = mesh.boundary_mask();
        let interior: Vec<usize> = (0..mesh.vertex_count()).filter(|&v| !mask[v]).collect();
        let interior_factor = if interior.is_empty() {
            None
        } else {
            let kii = stiffness.0.submatrix(&interior, &interior);
            Some(SparseCholesky::factor(&kii).map_err(|e| match e {
                Error::NotPositiveDefinite { .. } => Error::Precondition(
                    "interior stiffness block is singular (a component without boundary?)".into(),
                ),
                other => other,
            })?)
        };
        Ok(Self {
            mesh,
            opts,
            stiffness,
            boundary,
            interior,
            interior_factor,
        })
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        self.mesh
    }

    pub fn stiffness(&self) -> &StiffnessMatrix {
        &self.stiffness
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn boundary_mass(&self) -> DMatrix<f64> {
        assemble_boundary_mass(self.mesh, self.opts.mass)
    }

    pub fn dtn(&self) -> Result<DtnMatrix> {
        let nb = self.boundary.len();
        let k = &self.stiffness.0;
        let kbb = k.submatrix(&self.boundary, &self.boundary);
        let mut dtn = DMatrix::zeros(nb, nb);
        for i in 0..nb {
            let (cs, vs) = kbb.row(i);
            for (&c, &v) in cs.iter().zip(vs) {
                dtn[(i, c)] = v;
            }
        }
        if let Some(chol) = &self.interior_factor {
            let kbi = k.submatrix(&self.boundary, &self.interior);
            let ni = self.interior.len();
            // column j of K_ii⁻¹ K_ib, then K_bi times it
            let columns: Vec<Vec<f64>> = (0..nb)
                .into_par_iter()
                .map(|j| {
                    let mut rhs = vec![0.0; ni];
                    let (cs, vs) = kbi.row(j);
                    for (&c, &v) in cs.iter().zip(vs) {
                        rhs[c] = v;
                    }
                    chol.solve_in_place(&mut rhs);
                    kbi.mul_vec(&rhs)
                })
                .collect();
            for (j, col) in columns.iter().enumerate() {
                for i in 0..nb {
                    dtn[(i, j)] -= col[i];
                }
            }
        }
        Ok(DtnMatrix {
            boundary: self.boundary.clone(),
            dtn,
            mass: self.boundary_mass(),
        })
    }

    /// Harmonic extension of boundary data given in boundary-vertex order.
    pub fn harmonic_extension(&self, boundary_values: &[f64]) -> Result<Vec<f64>> {
        if boundary_values.len() != self.boundary.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} boundary values, got {}",
                self.boundary.len(),
                boundary_values.len()
            )));
        }
        let mut u = vec![0.0; self.mesh.vertex_count()];
        for (&v, &x) in self.boundary.iter().zip(boundary_values) {
            u[v] = x;
        }
        if let Some(chol) = &self.interior_factor {
            let k = &self.stiffness.0;
            let mut rhs: Vec<f64> = self
                .interior
                .iter()
                .map(|&i| {
                    let (cs, vs) = k.row(i);
                    -cs.iter().zip(vs).map(|(&c, v)| v * u[c]).sum::<f64>()
                })
                .collect();
            chol.solve_in_place(&mut rhs);
            for (&i, x) in self.interior.iter().zip(rhs) {
                u[i] = x;
            }
        }
        Ok(u)
    }

    /// Energy of the harmonic extension over the boundary norm, after
    /// removing the boundary mean.
    pub fn rayleigh_quotient(&self, boundary_values: &[f64]) -> Result<f64> {
        let mass = self.boundary_mass();
        let u = project_mean(&mass, boundary_values);
        let denom = quadratic(&mass, &u);
        let scale = quadratic(&mass, boundary_values).max(f64::MIN_POSITIVE);
        if !(denom > 1e-24 * scale) || denom == 0.0 {
            return Err(Error::InvalidInput("boundary data has zero norm after removing its mean".into()));
        }
        let ext = self.harmonic_extension(&u)?;
        Ok(self.stiffness.energy(&ext) / denom)
    }

    pub fn spectrum(&self, count: usize) -> Result<SteklovSpectrum> {
        self.dtn()?.spectrum(count, &self.opts)
    }
}

impl DtnMatrix {
    /// Lowest `count` generalized eigenpairs of `(D, M)`.
    pub fn spectrum(&self, count: usize, opts: &FemOptions) -> Result<SteklovSpectrum> {
        let nb = self.boundary.len();
        if count == 0 || count > nb {
            return Err(Error::InvalidInput(format!("count must be in 1..={nb}, got {count}")));
        }
        let chol = self.mass.clone().cholesky().ok_or(Error::NotPositiveDefinite {
            pivot: 0,
            value: f64::NAN,
        })?;
        let l = chol.l();
        let y = l
            .solve_lower_triangular(&self.dtn)
            .ok_or_else(|| Error::Precondition("boundary mass factor is singular".into()))?;
        let c = l
            .solve_lower_triangular(&y.transpose())
            .ok_or_else(|| Error::Precondition("boundary mass factor is singular".into()))?;
        let c = (&c + c.transpose()) * 0.5;
        let eig = symmetric_eigen(&c, opts.jacobi)?;
        let q = eig.vectors.columns(0, count).into_owned();
        let vectors = l
            .transpose()
            .solve_upper_triangular(&q)
            .ok_or_else(|| Error::Precondition("boundary mass factor is singular".into()))?;
        let values: Vec<f64> = eig.values[..count].to_vec();
        let zero_tol = 1e-9 * eig.values.last().map_or(1.0, |v| v.abs().max(1.0));
        let clusters = cluster_sorted(&values, opts.cluster_tol, zero_tol);
        Ok(SteklovSpectrum {
            eigenvalues: values,
            eigenvectors: vectors,
            clusters,
        })
    }

    /// `uᵀ D u / uᵀ M u`.
    pub fn quotient(&self, u: &[f64]) -> f64 {
        quadratic(&self.dtn, u) / quadratic(&self.mass, u)
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (&self.dtn * DVector::from_column_slice(u)).iter().copied().collect()
    }

    pub fn apply_mass(&self, u: &[f64]) -> Vec<f64> {
        (&self.mass * DVector::from_column_slice(u)).iter().copied().collect()
    }
}

/// `uᵀ A u` for a dense matrix.
pub fn quadratic(a: &DMatrix<f64>, u: &[f64]) -> f64 {
    let v = DVector::from_column_slice(u);
    v.dot(&(a * &v))
}

/// Removes the mass-weighted mean: `u − (1ᵀMu / 1ᵀM1)·1`.
pub fn project_mean(mass: &DMatrix<f64>, u: &[f64]) -> Vec<f64> {
    let ones = DVector::from_element(u.len(), 1.0);
    let w = mass * &ones;
    let total = w.sum();
    let mean = w.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / total;
    u.iter().map(|x| x - mean).collect()
}

pub fn dtn_matrix(mesh: &SurfaceMesh) -> Result<DtnMatrix> {
    SteklovSolver::new(mesh, FemOptions::default())?.dtn()
}

pub fn steklov_spectrum(mesh: &SurfaceMesh, count: usize) -> Result<SteklovSpectrum> {
    SteklovSolver::new(mesh, FemOptions::default())?.spectrum(count)
}

pub fn harmonic_extension(mesh: &SurfaceMesh, boundary_values: &[f64]) -> Result<Vec<f64>> {
    SteklovSolver::new(mesh, FemOptions::default())?.harmonic_extension(boundary_values)
}

pub fn rayleigh_quotient(mesh: &SurfaceMesh, boundary_values: &[f64]) -> Result<f64> {
    SteklovSolver::new(mesh, FemOptions::default())?.rayleigh_quotient(boundary_values)
}
