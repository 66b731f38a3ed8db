//! Truncated singular value decomposition.
//!
//! Small problems (shorter side at most `exact_threshold`) are decomposed
//! exactly: a Gram–Schmidt QR reduces the tall side, then one-sided Jacobi
//! rotations diagonalise the square factor. Larger problems use seeded
//! randomized subspace iteration and finish with the exact routine on the
//! projected matrix.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::{dot, norm, Matrix};
use super::rng::seeded_rng;
use crate::error::{Error, Result};

/// Top-k factors of a matrix `A ≈ U diag(s) Vᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    /// Columns of V, each of length `cols`.
    pub right_vectors: Vec<Vec<f64>>,
    /// Columns of U, each of length `rows`.
    pub left_vectors: Vec<Vec<f64>>,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Rebuilds `U diag(s) Vᵀ` as a dense matrix.
    pub fn reconstruct(&self) -> Matrix {
        let rows = self.left_vectors.first().map_or(0, Vec::len);
        let cols = self.right_vectors.first().map_or(0, Vec::len);
        let mut out = Matrix::zeros(rows, cols);
        for ((s, u), v) in self
            .singular_values
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
        {
            for i in 0..rows {
                let su = s * u[i];
                if su == 0.0 {
                    continue;
                }
                for j in 0..cols {
                    out[(i, j)] += su * v[j];
                }
            }
        }
        out
    }

    fn truncate(mut self, k: usize) -> Self {
        self.singular_values.truncate(k);
        self.right_vectors.truncate(k);
        self.left_vectors.truncate(k);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvdOptions {
    pub oversampling: usize,
    pub power_iterations: usize,
    /// Shorter sides up to this size are decomposed exactly.
    pub exact_threshold: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            oversampling: 8,
            power_iterations: 2,
            exact_threshold: 64,
        }
    }
}

/// Top-`k` SVD with `iters` power iterations on the randomized path.
pub fn truncated_svd(m: &Matrix, k: usize, seed: u64, iters: usize) -> Result<SvdResult> {
    let options = SvdOptions {
        power_iterations: iters,
        ..SvdOptions::default()
    };
    truncated_svd_with(m, k, seed, &options)
}

pub fn truncated_svd_with(
    m: &Matrix,
    k: usize,
    seed: u64,
    options: &SvdOptions,
) -> Result<SvdResult> {
    let min_dim = m.rows().min(m.cols());
    if k == 0 || k > min_dim {
        return Err(Error::invalid(format!(
            "svd rank {k} out of range 1..={min_dim}"
        )));
    }
    if min_dim <= options.exact_threshold {
        return Ok(exact_svd(m).truncate(k));
    }
    Ok(randomized_svd(m, k, seed, options).truncate(k))
}

fn randomized_svd(a: &Matrix, k: usize, seed: u64, options: &SvdOptions) -> SvdResult {
    let min_dim = a.rows().min(a.cols());
    let sketch = (k + options.oversampling).min(min_dim);
    let mut rng = seeded_rng(seed, "svd/test-matrix");
    let omega_values: Vec<f64> = (0..a.cols() * sketch)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let omega = Matrix::from_row_major(a.cols(), sketch, omega_values)
        .expect("gaussian draws are finite");

    let mut q = orthonormal_basis(&a.matmul(&omega));
    for _ in 0..options.power_iterations {
        let z = orthonormal_basis(&a.t_matmul(&q));
        q = orthonormal_basis(&a.matmul(&z));
    }
    // B = Qᵀ A is sketch × cols; decompose it exactly and lift U back.
    let b = q.t_matmul(a);
    let small = exact_svd(&b);
    let left_vectors = small
        .left_vectors
        .iter()
        .map(|ub| {
            (0..a.rows())
                .map(|i| dot(q.row(i), ub))
                .collect::<Vec<f64>>()
        })
        .collect();
    SvdResult {
        singular_values: small.singular_values,
        right_vectors: small.right_vectors,
        left_vectors,
    }
}

/// Full thin SVD with `min(rows, cols)` components.
pub fn exact_svd(a: &Matrix) -> SvdResult {
    if a.rows() < a.cols() {
        let t = exact_svd_tall(&a.transpose());
        return SvdResult {
            singular_values: t.singular_values,
            right_vectors: t.left_vectors,
            left_vectors: t.right_vectors,
        };
    }
    exact_svd_tall(a)
}

fn exact_svd_tall(a: &Matrix) -> SvdResult {
    let (m, n) = (a.rows(), a.cols());
    let columns: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let (q, r) = gram_schmidt_qr(&columns);

    // One-sided Jacobi on R (n × n), stored by columns.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| r[i][j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    jacobi_orthogonalize(&mut w, &mut v);

    let mut order: Vec<(f64, usize)> = w.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let sigma_max = order.first().map_or(0.0, |o| o.0);
    let tol = sigma_max * 1e-13 * (m.max(n) as f64);

    let mut singular_values = Vec::with_capacity(n);
    let mut right_vectors = Vec::with_capacity(n);
    let mut left_vectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);
    for &(s, j) in &order {
        singular_values.push(s);
        right_vectors.push(v[j].clone());
        if s > tol && s > 0.0 {
            let ur: Vec<f64> = w[j].iter().map(|x| x / s).collect();
            let u: Vec<f64> = (0..m)
                .map(|i| (0..n).map(|l| q[l][i] * ur[l]).sum())
                .collect();
            left_vectors.push(Some(u));
        } else {
            left_vectors.push(None);
        }
    }
    let mut left_vectors = complete_orthonormal(left_vectors, m);

    for (u, v) in left_vectors.iter_mut().zip(right_vectors.iter_mut()) {
        canonical_sign(v, u);
    }
    SvdResult {
        singular_values,
        right_vectors,
        left_vectors,
    }
}

/// Rotates column pairs of `w` until they are mutually orthogonal,
/// applying the same rotations to `v`.
fn jacobi_orthogonalize(w: &mut [Vec<f64>], v: &mut [Vec<f64>]) {
    const MAX_SWEEPS: usize = 80;
    const EPS: f64 = 1e-15;
    let n = w.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = dot(&w[i], &w[i]);
                let beta = dot(&w[j], &w[j]);
                let gamma = dot(&w[i], &w[j]);
                if gamma == 0.0 || gamma.abs() <= EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(w, i, j, c, s);
                rotate(v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Modified Gram–Schmidt with one reorthogonalisation pass. Dependent
/// columns yield a zero basis vector and a zero diagonal in R.
fn gram_schmidt_qr(columns: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = columns.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut r = vec![vec![0.0; n]; n];
    for (j, col) in columns.iter().enumerate() {
        let mut v = col.clone();
        let original = norm(col);
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let proj = dot(qi, &v);
                if proj == 0.0 {
                    continue;
                }
                r[i][j] += proj;
                for (x, y) in v.iter_mut().zip(qi) {
                    *x -= proj * y;
                }
            }
        }
        let residual = norm(&v);
        if residual > 0.0 && residual > 1e-13 * original {
            r[j][j] = residual;
            v.iter_mut().for_each(|x| *x /= residual);
            q.push(v);
        } else {
            q.push(vec![0.0; v.len()]);
        }
    }
    (q, r)
}

/// Orthonormal basis for the column space of `y` (same shape as `y`;
/// dependent directions become zero columns).
fn orthonormal_basis(y: &Matrix) -> Matrix {
    let columns: Vec<Vec<f64>> = (0..y.cols()).map(|j| y.column(j)).collect();
    let (q, _) = gram_schmidt_qr(&columns);
    let mut out = Matrix::zeros(y.rows(), y.cols());
    for (j, col) in q.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            out[(i, j)] = *x;
        }
    }
    out
}

/// Fills the `None` slots with unit vectors orthogonal to every other slot.
fn complete_orthonormal(vectors: Vec<Option<Vec<f64>>>, dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = vectors.iter().flatten().cloned().collect();
    let mut candidate = 0usize;
    vectors
        .into_iter()
        .map(|slot| match slot {
            Some(v) => v,
            None => loop {
                assert!(candidate < dim, "cannot complete orthonormal basis");
                let mut e = vec![0.0; dim];
                e[candidate] = 1.0;
                candidate += 1;
                for _ in 0..2 {
                    for b in &basis {
                        let p = dot(b, &e);
                        for (x, y) in e.iter_mut().zip(b) {
                            *x -= p * y;
                        }
                    }
                }
                let len = norm(&e);
                if len > 0.5 {
                    e.iter_mut().for_each(|x| *x /= len);
                    basis.push(e.clone());
                    break e;
                }
            },
        })
        .collect()
}

/// Flips a singular pair so the largest-magnitude entry of `v` is positive.
fn canonical_sign(v: &mut [f64], u: &mut [f64]) {
    let pivot = v
        .iter()
        .enumerate()
        .fold((0usize, 0.0f64), |best, (i, x)| {
            if x.abs() > best.1.abs() + 1e-12 {
                (i, *x)
            } else {
                best
            }
        })
        .1;
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
        u.iter_mut().for_each(|x| *x = -*x);
    }
}
