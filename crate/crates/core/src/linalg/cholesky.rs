//! Sparse LDLᵀ factorization of symmetric positive definite matrices.
//!
//! Rows are reordered with reverse Cuthill–McKee to bound fill, then the
//! factor is computed row by row ("up-looking") from the elimination
//! tree. Every step is deterministic.

use std::collections::VecDeque;

use super::CsrMatrix;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Reverse Cuthill–McKee ordering of the graph of a symmetric matrix.
/// Returns `perm` with `perm[new] = old`. Each connected component is
/// started from a pseudo-peripheral vertex; ties break by index.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let neighbors = |v: usize| a.row(v).0.iter().copied().filter(move |&u| u != v);
    let degree: Vec<usize> = (0..n).map(|v| neighbors(v).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    // BFS levels from `root` restricted to unvisited vertices
    let levels = |root: usize, visited: &[bool]| -> (Vec<usize>, usize) {
        let mut dist = vec![NONE; n];
        let mut queue = VecDeque::from([root]);
        dist[root] = 0;
        let mut last_level = Vec::new();
        let mut depth = 0;
        while let Some(v) = queue.pop_front() {
            if dist[v] > depth {
                depth = dist[v];
                last_level.clear();
            }
            last_level.push(v);
            for u in neighbors(v) {
                if !visited[u] && dist[u] == NONE {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        (last_level, depth)
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let mut root = seed;
        let (mut frontier, mut depth) = levels(root, &visited);
        loop {
            let candidate = *frontier.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
            let (next_frontier, next_depth) = levels(candidate, &visited);
            if next_depth <= depth {
                break;
            }
            root = candidate;
            frontier = next_frontier;
            depth = next_depth;
        }
        let start = order.len();
        order.push(root);
        visited[root] = true;
        let mut head = start;
        let mut buf = Vec::new();
        while head < order.len() {
            let v = order[head];
            head += 1;
            buf.clear();
            buf.extend(neighbors(v).filter(|&u| !visited[u]));
            buf.sort_by_key(|&u| (degree[u], u));
            for &u in &buf {
                visited[u] = true;
                order.push(u);
            }
        }
    }
    order.reverse();
    order
}

/// `P A Pᵀ = L D Lᵀ` with unit lower triangular `L` stored by columns.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    l_vals: Vec<f64>,
    d: Vec<f64>,
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        // upper triangle of the permuted matrix, by columns
        let mut up_ptr = vec![0usize; n + 1];
        let mut up_idx = Vec::with_capacity(a.nnz() / 2 + n);
        let mut up_val = Vec::with_capacity(a.nnz() / 2 + n);
        let mut col: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            col.clear();
            let (cs, vs) = a.row(perm[j]);
            for (&c, &v) in cs.iter().zip(vs) {
                let i = inv[c];
                if i <= j {
                    col.push((i, v));
                }
            }
            col.sort_by_key(|e| e.0);
            for &(i, v) in &col {
                up_idx.push(i);
                up_val.push(v);
            }
            up_ptr[j + 1] = up_idx.len();
        }

        // elimination tree and column counts
        let mut etree = vec![NONE; n];
        let mut counts = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &i0 in &up_idx[up_ptr[j]..up_ptr[j + 1]] {
                let mut i = i0;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    counts[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for i in 0..n {
            col_ptr[i + 1] = col_ptr[i] + counts[i];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut l_vals = vec![0.0; nnz];
        let mut d = vec![0.0; n];
        let mut d_inv = vec![0.0; n];
        let mut next_slot = col_ptr[..n].to_vec();
        let mut y = vec![0.0; n];
        let mut marked = vec![false; n];
        let mut pattern = Vec::with_capacity(n);
        let mut stack = Vec::with_capacity(n);

        for k in 0..n {
            pattern.clear();
            let mut diag = 0.0;
            for p in up_ptr[k]..up_ptr[k + 1] {
                let b = up_idx[p];
                if b == k {
                    diag = up_val[p];
                    continue;
                }
                y[b] = up_val[p];
                if marked[b] {
                    continue;
                }
                // walk up the tree until a marked node; push in topological order
                stack.clear();
                let mut i = b;
                while i != NONE && i < k && !marked[i] {
                    marked[i] = true;
                    stack.push(i);
                    i = etree[i];
                }
                while let Some(v) = stack.pop() {
                    pattern.push(v);
                }
            }
            d[k] = diag;
            for &c in pattern.iter().rev() {
                let yc = y[c];
                let end = next_slot[c];
                for p in col_ptr[c]..end {
                    y[row_idx[p]] -= l_vals[p] * yc;
                }
                let lkc = yc * d_inv[c];
                row_idx[end] = k;
                l_vals[end] = lkc;
                d[k] -= yc * lkc;
                next_slot[c] += 1;
                y[c] = 0.0;
                marked[c] = false;
            }
            // relative pivot floor also rejects numerically singular input
            if !(d[k] > 1e-13 * diag.abs()) {
                return Err(Error::NotPositiveDefinite {
                    pivot: perm[k],
                    value: d[k],
                });
            }
            d_inv[k] = 1.0 / d[k];
        }
        Ok(Self {
            n,
            perm,
            col_ptr,
            row_idx,
            l_vals,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros of `L` below the diagonal.
    pub fn factor_nnz(&self) -> usize {
        self.l_vals.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                    x[self.row_idx[p]] -= self.l_vals[p] * xj;
                }
            }
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                s -= self.l_vals[p] * x[self.row_idx[p]];
            }
            x[j] = s;
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = x[new];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 2D five-point Laplacian plus a diagonal shift.
    fn grid_laplacian(nx: usize, ny: usize, shift: f64) -> CsrMatrix {
        let id = |i: usize, j: usize| i * ny + j;
        let mut t = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                t.push((id(i, j), id(i, j), 4.0 + shift));
                if i + 1 < nx {
                    t.push((id(i, j), id(i + 1, j), -1.0));
                    t.push((id(i + 1, j), id(i, j), -1.0));
                }
                if j + 1 < ny {
                    t.push((id(i, j), id(i, j + 1), -1.0));
                    t.push((id(i, j + 1), id(i, j), -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(nx * ny, nx * ny, &t).unwrap()
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = grid_laplacian(7, 5, 0.0);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..35).collect::<Vec<_>>());
    }

    #[test]
    fn solves_grid_system() {
        let a = grid_laplacian(20, 13, 0.01);
        let chol = SparseCholesky::factor(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x_true: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.mul_vec(&x_true);
        let x = chol.solve(&b);
        let err = x.iter().zip(&x_true).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "max error {err}");
        // banded ordering keeps the factor far from dense
        assert!(chol.factor_nnz() < a.nrows() * 40);
    }

    #[test]
    fn matches_dense_on_random_spd() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut dense = vec![0.0; n * n];
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..i {
                if rng.gen_bool(0.15) {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    dense[i * n + j] = v;
                    dense[j * n + i] = v;
                }
            }
        }
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| dense[i * n + j].abs()).sum();
            dense[i * n + i] = row_sum + 0.5;
        }
        for i in 0..n {
            for j in 0..n {
                if dense[i * n + j] != 0.0 {
                    t.push((i, j, dense[i * n + j]));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let chol = SparseCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = chol.solve(&b);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = grid_laplacian(4, 4, 0.0);
        // pure Neumann-like: make rows sum to zero
        let n = a.nrows();
        let mut t = Vec::new();
        for r in 0..n {
            let (cs, vs) = a.row(r);
            let mut off = 0.0;
            for (&c, &v) in cs.iter().zip(vs) {
                if c != r {
                    t.push((r, c, v));
                    off += v;
                }
            }
            t.push((r, r, -off));
        }
        let s = CsrMatrix::from_triplets(n, n, &t).unwrap();
        assert!(matches!(SparseCholesky::factor(&s), Err(Error::NotPositiveDefinite { .. })));
    }
}
