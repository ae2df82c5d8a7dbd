//! Mesh sizes shared by the benchmarks.

use steklov_core::mesh::{build_disk_mesh, fixtures, SurfaceMesh};

/// Unit disk with about `8·n_r²/2` vertices.
pub fn disk(n_r: usize) -> SurfaceMesh {
    build_disk_mesh(n_r, 8).expect("valid disk resolution")
}

/// Random embedded annulus used by the Möbius benchmarks.
pub fn embedded_annulus(seed: u64) -> SurfaceMesh {
    fixtures::random_embedded_annulus(seed, 8, 32).expect("valid annulus resolution")
}
