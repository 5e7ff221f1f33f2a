//! P1 finite elements on the polar mesh: assembly of stiffness and mass
//! matrices, the lowest Dirichlet eigenpairs, and boundary traces of ∂u/∂n.
//!
//! The Dirichlet condition is imposed by eliminating boundary rows and
//! columns; interior nodes are the contiguous prefix of the mesh numbering,
//! so elimination is a block restriction. The normal-derivative trace comes
//! from consistent flux recovery: the residual functional of the converged
//! eigenpair, evaluated with boundary rows restored, equals `∮ (∂u/∂n) φₚ dσ`
//! and is inverted against the boundary mass matrix. Raw element gradients on
//! boundary triangles converge too slowly for the stationarity checks; flux
//! recovery is the standard cure.

mod banded;
mod lanczos;
mod sparse;

pub use sparse::SparseSymMatrix;

use serde::Serialize;

use crate::mesh::TriangleMesh;
use crate::{Error, Result};

/// Default relative residual tolerance for the eigensolver.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;

/// Lowest Dirichlet eigenpairs on a mesh.
///
/// Eigenvectors hold interior nodal values only (boundary values are zero by
/// the Dirichlet condition) and are M-orthonormal.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    /// Eigenvalues sorted ascending, all positive.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// ‖Ku − λMu‖₂ / ‖u‖₂ per pair.
    pub residuals: Vec<f64>,
    /// Scale-invariant residual ‖Ku − λMu‖₂ / (λ‖Mu‖₂) per pair; this is the
    /// quantity the convergence test bounds.
    pub rel_residuals: Vec<f64>,
    /// max |uᵢᵀ M uⱼ − δᵢⱼ| over returned pairs.
    pub ortho_defect: f64,
}

impl SpectralResult {
    pub fn lambda(&self, index: usize) -> f64 {
        self.eigenvalues[index]
    }

    /// Relative gap (λ_{i+1} − λᵢ) / λᵢ between consecutive eigenvalues.
    pub fn relative_gap(&self, index: usize) -> f64 {
        (self.eigenvalues[index + 1] - self.eigenvalues[index]) / self.eigenvalues[index]
    }
}

/// Element stiffness and mass for the triangle with vertices `p`.
///
/// Stiffness: `(bᵢbⱼ + cᵢcⱼ) / (4A)` with the usual P1 gradient coefficients;
/// mass: `A/12 · [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn element_matrices(p: [[f64; 2]; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3], f64) {
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    let double_area = b[0] * c[1] - b[1] * c[0];
    let area = 0.5 * double_area;
    let mut ke = [[0.0; 3]; 3];
    let mut me = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            me[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    (ke, me, area)
}

/// Assembles the interior (Dirichlet-eliminated) stiffness and mass matrices.
pub fn assemble(mesh: &TriangleMesh) -> Result<(SparseSymMatrix, SparseSymMatrix)> {
    let n_int = mesh.interior_node_count;
    let total_area = mesh.total_area();
    let threshold = 1e-14 * total_area;

    let mut kt: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    let mut mt: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let (ke, me, area) = element_matrices(p);
        if area < threshold {
            return Err(Error::DegenerateTriangle { index: t, area, threshold });
        }
        for i in 0..3 {
            if tri[i] >= n_int {
                continue;
            }
            for j in 0..3 {
                if tri[j] >= n_int {
                    continue;
                }
                kt.push((tri[i], tri[j], ke[i][j]));
                mt.push((tri[i], tri[j], me[i][j]));
            }
        }
    }
    Ok((
        SparseSymMatrix::from_triplets(n_int, &mut kt),
        SparseSymMatrix::from_triplets(n_int, &mut mt),
    ))
}

/// Full assembly without boundary elimination; rows and columns cover every
/// mesh node. Used by the flux recovery and by kernel tests.
pub fn assemble_full(mesh: &TriangleMesh) -> Result<(SparseSymMatrix, SparseSymMatrix)> {
    let n = mesh.node_count();
    let total_area = mesh.total_area();
    let threshold = 1e-14 * total_area;
    let mut kt: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    let mut mt: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let (ke, me, area) = element_matrices(p);
        if area < threshold {
            return Err(Error::DegenerateTriangle { index: t, area, threshold });
        }
        for i in 0..3 {
            for j in 0..3 {
                kt.push((tri[i], tri[j], ke[i][j]));
                mt.push((tri[i], tri[j], me[i][j]));
            }
        }
    }
    Ok((
        SparseSymMatrix::from_triplets(n, &mut kt),
        SparseSymMatrix::from_triplets(n, &mut mt),
    ))
}

/// Computes the `m_eigs` lowest eigenpairs of `K u = λ M u`.
pub fn solve_lowest(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    m_eigs: usize,
    tol: f64,
) -> Result<SpectralResult> {
    lanczos::solve_lowest(k, m, m_eigs, tol)
}

/// Convenience: assemble and solve in one call.
pub fn solve_mesh(mesh: &TriangleMesh, m_eigs: usize, tol: f64) -> Result<SpectralResult> {
    let (k, m) = assemble(mesh)?;
    solve_lowest(&k, &m, m_eigs, tol)
}

/// Outward normal derivative of eigenfunction `which` at the boundary nodes,
/// ordered like `mesh.boundary_nodes`, by consistent flux recovery.
///
/// The discrete residual `ℓ(φₚ) = a(u, φₚ) − λ m(u, φₚ)` at boundary nodes p
/// is a consistent approximation of `∮ (∂u/∂n) φₚ dσ`; solving the boundary
/// mass system `B g = ℓ` yields nodal values of ∂u/∂n.
pub fn normal_derivative_trace(
    mesh: &TriangleMesh,
    sr: &SpectralResult,
    which: usize,
) -> Vec<f64> {
    let lambda = sr.eigenvalues[which];
    let u = &sr.eigenvectors[which];
    let n_int = mesh.interior_node_count;
    let n_bnd = mesh.boundary_count();

    // Map node id -> boundary slot.
    let first_boundary = n_int;
    let slot = |id: usize| id - first_boundary;

    // Residual functional at boundary nodes; only interior columns carry u.
    let mut rhs = vec![0.0; n_bnd];
    for tri in &mesh.triangles {
        if tri.iter().all(|&id| id < n_int) {
            continue;
        }
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let (ke, me, _) = element_matrices(p);
        for i in 0..3 {
            if tri[i] < n_int {
                continue;
            }
            let s = slot(tri[i]);
            for j in 0..3 {
                if tri[j] < n_int {
                    rhs[s] += (ke[i][j] - lambda * me[i][j]) * u[tri[j]];
                }
            }
        }
    }

    // Boundary mass matrix of the polygonal boundary: P1 on the cycle.
    let mut diag = vec![0.0; n_bnd];
    let mut off = vec![0.0; n_bnd];
    for (e, &(from, to)) in mesh.boundary_edges.iter().enumerate() {
        let pf = mesh.nodes[from];
        let pt = mesh.nodes[to];
        let h = (pt[0] - pf[0]).hypot(pt[1] - pf[1]);
        diag[slot(from)] += h / 3.0;
        diag[slot(to)] += h / 3.0;
        off[e] += h / 6.0;
    }
    banded::solve_cyclic_tridiagonal(&diag, &off, &rhs)
}
