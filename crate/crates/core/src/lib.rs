//! Steklov (Dirichlet-to-Neumann) spectra of surfaces with boundary.
//!
//! * [`annulus`]: exact spectrum of rotationally symmetric annuli, the
//!   critical modulus `T(α)` and the sub/supercritical classification.
//! * [`catenoid`]: the catenoid family solving `t = coth(t ± a)`, the
//!   critical catenoid constants, and embedded catenoid meshes.
//! * [`mesh`]: triangulated surfaces, topology, measures, file I/O.
//! * [`fem`]: piecewise-linear Dirichlet-to-Neumann matrices and Steklov
//!   spectra of arbitrary meshes.
//! * [`moebius`]: conformal automorphisms of the unit ball, balancing,
//!   and conformal volume estimates.
//! * [`free_boundary`]: checks for free boundary minimal surfaces.
//! * [`bounds`]: verification campaigns for the eigenvalue inequalities.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod annulus;
pub mod bounds;
pub mod catenoid;
pub mod linalg;
pub mod error;
pub mod fem;
pub mod free_boundary;
pub mod mesh;
pub mod moebius;
pub mod roots;

pub use error::{Error, Result};
