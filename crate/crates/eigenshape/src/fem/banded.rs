//! Banded Cholesky factorization for the interior stiffness matrix.
//!
//! The polar mesh numbers nodes ring by ring, so the stiffness matrix has
//! half bandwidth about `n_theta + 1`; a dense-band LLᵀ factorization is then
//! cheaper and far simpler than general sparse elimination at the mesh sizes
//! used here.

use super::sparse::SparseSymMatrix;
use crate::{Error, Result};

/// Lower-triangular band factor L with A = L Lᵀ.
///
/// Storage is LAPACK-style: `band[d * n + j] = L[j + d][j]` for diagonals
/// `d = 0..=bandwidth`.
pub struct BandedCholesky {
    n: usize,
    bandwidth: usize,
    band: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &SparseSymMatrix) -> Result<Self> {
        let n = a.dim;
        let bw = a.bandwidth();
        let mut band = vec![0.0f64; (bw + 1) * n];
        // Scatter the lower triangle into band storage.
        for r in 0..n {
            for idx in a.row_offsets[r]..a.row_offsets[r + 1] {
                let c = a.col_indices[idx];
                if c <= r {
                    band[(r - c) * n + c] = a.values[idx];
                }
            }
        }
        // In-place left-looking factorization.
        for j in 0..n {
            let start = j.saturating_sub(bw);
            let mut diag = band[j];
            for k in start..j {
                let ljk = band[(j - k) * n + k];
                diag -= ljk * ljk;
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(Error::FactorizationFailure { pivot_index: j, pivot: diag });
            }
            let ljj = diag.sqrt();
            band[j] = ljj;
            let imax = (j + bw).min(n - 1);
            for i in j + 1..=imax {
                let mut v = band[(i - j) * n + j];
                let kstart = i.saturating_sub(bw).max(start);
                for k in kstart..j {
                    v -= band[(i - k) * n + k] * band[(j - k) * n + k];
                }
                band[(i - j) * n + j] = v / ljj;
            }
        }
        Ok(BandedCholesky { n, bandwidth: bw, band })
    }

    /// Solves A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bandwidth);
        let mut x = b.to_vec();
        // Forward: L y = b.
        for j in 0..n {
            let xj = x[j] / self.band[j];
            x[j] = xj;
            let imax = (j + bw).min(n - 1);
            for i in j + 1..=imax {
                x[i] -= self.band[(i - j) * n + j] * xj;
            }
        }
        // Backward: Lᵀ x = y.
        for j in (0..n).rev() {
            let imax = (j + bw).min(n - 1);
            let mut v = x[j];
            for i in j + 1..=imax {
                v -= self.band[(i - j) * n + j] * x[i];
            }
            x[j] = v / self.band[j];
        }
        x
    }
}

/// Symmetric positive-definite cyclic tridiagonal solve via the
/// Sherman–Morrison splitting; used for the boundary mass system.
///
/// `diag` and `off` describe `B[j][j] = diag[j]`, `B[j][j+1] = off[j]`
/// (cyclically, so `off[n-1]` couples node n−1 with node 0).
pub fn solve_cyclic_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n >= 3);
    assert_eq!(off.len(), n);
    assert_eq!(rhs.len(), n);

    let corner = off[n - 1];
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= corner * corner / gamma;

    let thomas = |d: &[f64], rhs: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        c[0] = off[0] / d[0];
        x[0] = rhs[0] / d[0];
        for i in 1..n - 1 {
            let m = d[i] - off[i - 1] * c[i - 1];
            c[i] = off[i] / m;
            x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / m;
        }
        let m = d[n - 1] - off[n - 2] * c[n - 2];
        x[n - 1] = (rhs[n - 1] - off[n - 2] * x[n - 2]) / m;
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    };

    let y = thomas(&d, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner;
    let z = thomas(&d, &u);
    let vy = y[0] + corner / gamma * y[n - 1];
    let vz = z[0] + corner / gamma * z[n - 1];
    let factor = vy / (1.0 + vz);
    (0..n).map(|i| y[i] - factor * z[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_from(a: &SparseSymMatrix) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(a.dim, a.dim);
        for r in 0..a.dim {
            for idx in a.row_offsets[r]..a.row_offsets[r + 1] {
                m[(r, a.col_indices[idx])] = a.values[idx];
            }
        }
        m
    }

    #[test]
    fn banded_solve_matches_dense() {
        // SPD band matrix: diagonally dominant with bandwidth 3.
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 10.0 + (i as f64 * 0.37).sin()));
            for d in 1..=3usize {
                if i + d < n {
                    let v = 0.9 * ((i * d) as f64 * 0.11).cos();
                    t.push((i, i + d, v));
                    t.push((i + d, i, v));
                }
            }
        }
        let a = SparseSymMatrix::from_triplets(n, &mut t);
        let chol = BandedCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.71).sin()).collect();
        let x = chol.solve(&b);

        let dense = dense_from(&a);
        let xd = dense.lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-10, "x[{i}] = {} vs {}", x[i], xd[i]);
        }
    }

    #[test]
    fn factorization_failure_on_indefinite() {
        let mut t = vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)];
        let a = SparseSymMatrix::from_triplets(2, &mut t);
        assert!(matches!(
            BandedCholesky::factor(&a),
            Err(Error::FactorizationFailure { .. })
        ));
    }

    #[test]
    fn cyclic_tridiagonal_solve() {
        let n = 12;
        let diag: Vec<f64> = (0..n).map(|i| 4.0 + 0.1 * (i as f64).sin()).collect();
        let off: Vec<f64> = (0..n).map(|i| 1.0 + 0.05 * (i as f64).cos()).collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.9).sin()).collect();
        // rhs = B x.
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = diag[i] * x_true[i]
                + off[i] * x_true[(i + 1) % n]
                + off[(i + n - 1) % n] * x_true[(i + n - 1) % n];
        }
        let x = solve_cyclic_tridiagonal(&diag, &off, &rhs);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-12, "x[{i}]");
        }
    }
}
