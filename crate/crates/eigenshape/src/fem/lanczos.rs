//! Shift-invert Lanczos for the generalized problem K u = λ M u.
//!
//! Eigenpairs are computed one at a time, smallest λ first. Each run applies
//! Lanczos to the operator `v ↦ K⁻¹ M v` (self-adjoint in the M inner
//! product, largest eigenvalue ↔ smallest λ) while deflating all previously
//! converged eigenvectors M-orthogonally. Sequential deflation handles
//! multiple eigenvalues cleanly: a single Krylov space cannot split a double
//! eigenvalue, but the deflated complement hands over the second copy.
//!
//! K is factored once with the banded Cholesky. Starting vectors are fixed
//! deterministic patterns, so repeated runs are bit-identical.

use nalgebra::{DMatrix, SymmetricEigen};

use super::banded::BandedCholesky;
use super::sparse::SparseSymMatrix;
use super::SpectralResult;
use crate::{Error, Result};

const MAX_STEPS_PER_PAIR: usize = 220;
const CHECK_INTERVAL: usize = 4;

pub fn solve_lowest(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    m_eigs: usize,
    tol: f64,
) -> Result<SpectralResult> {
    assert!((1..=8).contains(&m_eigs), "m_eigs must be in 1..=8, got {m_eigs}");
    let n = k.dim;
    assert_eq!(m.dim, n);
    assert!(n > 4 * m_eigs, "system too small for {m_eigs} eigenpairs");

    let chol = BandedCholesky::factor(k)?;

    let mut eigenvalues: Vec<f64> = Vec::with_capacity(m_eigs);
    let mut eigenvectors: Vec<Vec<f64>> = Vec::with_capacity(m_eigs);
    let mut residuals = Vec::with_capacity(m_eigs);
    let mut rel_residuals = Vec::with_capacity(m_eigs);

    for pair in 0..m_eigs {
        let (lambda, u, res, rel) =
            smallest_deflated(&chol, k, m, &eigenvectors, pair, tol)?;
        eigenvalues.push(lambda);
        eigenvectors.push(u);
        residuals.push(res);
        rel_residuals.push(rel);
    }

    // Deflated runs return ascending eigenvalues up to rounding noise at
    // multiplicities; enforce the ordering.
    let mut order: Vec<usize> = (0..m_eigs).collect();
    order.sort_by(|&i, &j| eigenvalues[i].partial_cmp(&eigenvalues[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order.iter().map(|&i| eigenvectors[i].clone()).collect();
    let residuals: Vec<f64> = order.iter().map(|&i| residuals[i]).collect();
    let rel_residuals: Vec<f64> = order.iter().map(|&i| rel_residuals[i]).collect();

    let mut defect = 0.0f64;
    for i in 0..m_eigs {
        let mui = m.matvec_alloc(&eigenvectors[i]);
        for (j, ev) in eigenvectors.iter().enumerate() {
            let d: f64 = mui.iter().zip(ev.iter()).map(|(x, y)| x * y).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((d - target).abs());
        }
    }

    Ok(SpectralResult { eigenvalues, eigenvectors, residuals, rel_residuals, ortho_defect: defect })
}

/// One Lanczos run for the smallest eigenvalue in the M-orthogonal
/// complement of `deflate`. Returns (λ, u, ‖Ku−λMu‖/‖u‖, scale-free residual).
fn smallest_deflated(
    chol: &BandedCholesky,
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    deflate: &[Vec<f64>],
    pair_index: usize,
    tol: f64,
) -> Result<(f64, Vec<f64>, f64, f64)> {
    let n = k.dim;
    let max_steps = MAX_STEPS_PER_PAIR.min(n - deflate.len());

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_steps);
    let mut beta: Vec<f64> = Vec::with_capacity(max_steps);

    // Different deterministic phase per pair so the start overlaps the
    // deflated complement.
    let phase = 0.5 + 1.3 * pair_index as f64;
    let mut v: Vec<f64> =
        (0..n).map(|i| (phase + 0.618_033_988_749_894_9 * i as f64).sin()).collect();
    project_out(m, deflate, &mut v);
    let nv = m_norm(m, &v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut best: Option<(f64, Vec<f64>, f64, f64)> = None;
    let mut best_rel = f64::INFINITY;

    for step in 0..max_steps {
        let mv = m.matvec_alloc(&v);
        let mut w = chol.solve(&mv);
        if step > 0 {
            let b = beta[step - 1];
            let prev = &basis[step - 1];
            w.iter_mut().zip(prev.iter()).for_each(|(wi, pi)| *wi -= b * pi);
        }
        let a = m_dot(m, &w, &v);
        w.iter_mut().zip(v.iter()).for_each(|(wi, vi)| *wi -= a * vi);
        alpha.push(a);
        basis.push(std::mem::take(&mut v));

        // Full reorthogonalization against the basis and the deflation set.
        for _ in 0..2 {
            let mw = m.matvec_alloc(&w);
            for q in basis.iter().chain(deflate.iter()) {
                let c: f64 = mw.iter().zip(q.iter()).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(q.iter()).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = m_norm(m, &w);

        let exhausted = b < 1e-14 || step + 1 == max_steps;
        if (step + 1) % CHECK_INTERVAL == 0 || exhausted {
            let cand = top_ritz_pair(k, m, &basis, &alpha, &beta);
            if cand.3 < best_rel {
                best_rel = cand.3;
                best = Some(cand);
            }
            if best_rel < tol {
                return Ok(best.unwrap());
            }
        }
        if exhausted {
            break;
        }
        beta.push(b);
        v = w;
        v.iter_mut().for_each(|x| *x /= b);
    }

    Err(Error::NoConvergence { residual: best_rel, steps: basis.len() })
}

/// Rayleigh–Ritz pair for the largest eigenvalue of the tridiagonal matrix,
/// mapped back to the smallest λ with true residuals.
fn top_ritz_pair(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
) -> (f64, Vec<f64>, f64, f64) {
    let j = basis.len();
    let mut t = DMatrix::<f64>::zeros(j, j);
    for i in 0..j {
        t[(i, i)] = alpha[i];
        if i + 1 < j {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut top = 0;
    for i in 1..j {
        if eig.eigenvalues[i] > eig.eigenvalues[top] {
            top = i;
        }
    }
    let lambda = 1.0 / eig.eigenvalues[top];

    let n = basis[0].len();
    let mut u = vec![0.0; n];
    for (i, q) in basis.iter().enumerate() {
        let s = eig.eigenvectors[(i, top)];
        u.iter_mut().zip(q.iter()).for_each(|(ui, qi)| *ui += s * qi);
    }
    let nm = m_norm(m, &u);
    u.iter_mut().for_each(|x| *x /= nm);
    // Canonical sign: the largest-magnitude component is positive. Makes the
    // ground state the positive eigenfunction and pins every sign
    // deterministically.
    let mut peak = 0;
    for (i, x) in u.iter().enumerate() {
        if x.abs() > u[peak].abs() {
            peak = i;
        }
    }
    if u[peak] < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }

    let ku = k.matvec_alloc(&u);
    let mu_vec = m.matvec_alloc(&u);
    let res2: f64 = ku
        .iter()
        .zip(mu_vec.iter())
        .map(|(kv, mv)| {
            let r = kv - lambda * mv;
            r * r
        })
        .sum();
    let res = res2.sqrt();
    let u_norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mu_norm = mu_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
    (lambda, u, res / u_norm, res / (lambda.abs() * mu_norm))
}

fn project_out(m: &SparseSymMatrix, deflate: &[Vec<f64>], v: &mut [f64]) {
    for _ in 0..2 {
        let mv = m.matvec_alloc(v);
        for q in deflate {
            let c: f64 = mv.iter().zip(q.iter()).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(q.iter()).for_each(|(vi, qi)| *vi -= c * qi);
        }
        if deflate.is_empty() {
            break;
        }
    }
}

fn m_dot(m: &SparseSymMatrix, x: &[f64], y: &[f64]) -> f64 {
    let my = m.matvec_alloc(y);
    x.iter().zip(my.iter()).map(|(a, b)| a * b).sum()
}

fn m_norm(m: &SparseSymMatrix, x: &[f64]) -> f64 {
    m_dot(m, x, x).sqrt()
}
