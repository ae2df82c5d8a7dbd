//! Linear algebra used by the finite element solver.

mod cholesky;
mod jacobi;
mod sparse;

pub use cholesky::{reverse_cuthill_mckee, SparseCholesky};
pub use jacobi::{symmetric_eigen, JacobiOptions, SymmetricEigen};
pub use sparse::CsrMatrix;
