//! Boundary-integral shape derivatives in the Fourier coefficient basis.
//!
//! For a radial perturbation `r → r + εφ` the normal velocity is
//! `V·n = φ·r/√(r²+r′²)` and the arc element is `dσ = √(r²+r′²) dθ`, so every
//! boundary integral collapses to `∫ (·) φ r dθ` with the Jacobians cancelled
//! analytically. Perturbation directions are the Fourier basis functions
//! `1, cos kθ, sin kθ`, giving one gradient entry per coefficient.
//!
//! The eigenvalue derivative uses `|∇u|² = (∂u/∂n)²` on the boundary (the
//! tangential derivative of a Dirichlet eigenfunction vanishes), with the
//! normal derivative taken from the consistent flux recovery in [`crate::fem`].

use serde::Serialize;
use std::f64::consts::TAU;

use crate::curve::{self, FourierBoundary, DEFAULT_QUADRATURE_POINTS};
use crate::fem::{normal_derivative_trace, SpectralResult};
use crate::mesh::TriangleMesh;
use crate::{Error, Result};

/// Relative eigenvalue gap below which an eigenvalue is treated as double.
pub const DEFAULT_GAP_TOL: f64 = 1e-4;

/// Derivative of a shape functional with respect to each Fourier coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct ShapeGradient {
    pub d_a0: f64,
    pub d_a: Vec<f64>,
    pub d_b: Vec<f64>,
}

impl ShapeGradient {
    pub fn zeros(modes: usize) -> Self {
        ShapeGradient { d_a0: 0.0, d_a: vec![0.0; modes], d_b: vec![0.0; modes] }
    }

    pub fn modes(&self) -> usize {
        self.d_a.len()
    }

    /// Flat component view: a0, a1..aK, b1..bK.
    pub fn components(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 2 * self.d_a.len());
        v.push(self.d_a0);
        v.extend_from_slice(&self.d_a);
        v.extend_from_slice(&self.d_b);
        v
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &ShapeGradient) -> f64 {
        let mut s = self.d_a0 * other.d_a0;
        for (x, y) in self.d_a.iter().zip(other.d_a.iter()) {
            s += x * y;
        }
        for (x, y) in self.d_b.iter().zip(other.d_b.iter()) {
            s += x * y;
        }
        s
    }

    pub fn axpy(&mut self, c: f64, other: &ShapeGradient) {
        self.d_a0 += c * other.d_a0;
        for (x, y) in self.d_a.iter_mut().zip(other.d_a.iter()) {
            *x += c * y;
        }
        for (x, y) in self.d_b.iter_mut().zip(other.d_b.iter()) {
            *x += c * y;
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.d_a0 *= c;
        self.d_a.iter_mut().for_each(|x| *x *= c);
        self.d_b.iter_mut().for_each(|x| *x *= c);
    }

    /// Coefficient vector of a boundary as a gradient-space direction.
    pub fn from_coefficients(fb: &FourierBoundary) -> Self {
        ShapeGradient { d_a0: fb.a0, d_a: fb.a.clone(), d_b: fb.b.clone() }
    }

    /// Removes the component along `dir` (projection onto its orthogonal
    /// complement).
    pub fn project_out(&mut self, dir: &ShapeGradient) {
        let denom = dir.dot(dir);
        if denom > 0.0 {
            let c = self.dot(dir) / denom;
            self.axpy(-c, dir);
        }
    }

    /// The perturbation function φ_d(θ) = Σ dₑ φₑ(θ) this gradient direction
    /// describes.
    pub fn as_boundary_function(&self, theta: f64) -> f64 {
        let mut v = self.d_a0;
        for (idx, (&da, &db)) in self.d_a.iter().zip(self.d_b.iter()).enumerate() {
            let k = (idx + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            v += da * c + db * s;
        }
        v
    }
}

/// Symmetric 2×2 matrix whose eigenvalues are the one-sided derivatives of a
/// double eigenvalue pair along a boundary perturbation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DegenerateDerivativeMatrix {
    pub m: [[f64; 2]; 2],
}

impl DegenerateDerivativeMatrix {
    /// Eigenvalues sorted ascending; closed form for the symmetric 2×2 case.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_trace = 0.5 * (self.m[0][0] + self.m[1][1]);
        let det = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
        let disc = (half_trace * half_trace - det).max(0.0).sqrt();
        (half_trace - disc, half_trace + disc)
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn is_symmetric(&self) -> bool {
        self.m[0][1] == self.m[1][0]
    }
}

/// Gradient of the perimeter: `dP/dcₖ = ∫ C φₖ r dθ`.
pub fn d_perimeter(fb: &FourierBoundary) -> Result<ShapeGradient> {
    fb.validate()?;
    let n_q = DEFAULT_QUADRATURE_POINTS;
    let dt = TAU / n_q as f64;
    let weights: Vec<f64> = (0..n_q)
        .map(|j| {
            let theta = dt * j as f64;
            fb.curvature(theta) * fb.radius(theta) * dt
        })
        .collect();
    Ok(gradient_from_weights(fb.modes(), &weights, n_q))
}

/// Gradient of eigenvalue `which` (simple case):
/// `dλ/dcₖ = −∫ (∂u/∂n)² φₖ r dθ`.
pub fn d_lambda_simple(
    fb: &FourierBoundary,
    mesh: &TriangleMesh,
    sr: &SpectralResult,
    which: usize,
    gap_tol: f64,
) -> Result<ShapeGradient> {
    check_simple(sr, which, gap_tol)?;
    let trace = normal_derivative_trace(mesh, sr, which);
    Ok(d_lambda_from_trace(fb, mesh, &trace))
}

fn d_lambda_from_trace(fb: &FourierBoundary, mesh: &TriangleMesh, trace: &[f64]) -> ShapeGradient {
    let n = mesh.boundary_count();
    let dt = TAU / n as f64;
    let weights: Vec<f64> = mesh
        .boundary_nodes
        .iter()
        .zip(trace.iter())
        .map(|(&(_, theta), &g)| -g * g * fb.radius(theta) * dt)
        .collect();
    gradient_from_weights(fb.modes(), &weights, n)
}

/// Assembles gradient entries `Σⱼ wⱼ φₖ(θⱼ)` from per-sample weights on the
/// uniform θ grid.
fn gradient_from_weights(modes: usize, weights: &[f64], n: usize) -> ShapeGradient {
    let dt = TAU / n as f64;
    let mut g = ShapeGradient::zeros(modes);
    g.d_a0 = weights.iter().sum();
    for k in 1..=modes {
        let (mut ca, mut cb) = (0.0, 0.0);
        for (j, &w) in weights.iter().enumerate() {
            let (s, c) = (k as f64 * dt * j as f64).sin_cos();
            ca += w * c;
            cb += w * s;
        }
        g.d_a[k - 1] = ca;
        g.d_b[k - 1] = cb;
    }
    g
}

/// Derivative matrix of the near-double pair (λ₂, λ₃) along perturbation φ:
/// entries `−∫ gᵢ gⱼ φ r dθ` with the recovered traces g₂, g₃. Its sorted
/// eigenvalues are the one-sided derivatives of the two branches.
pub fn d_lambda_double_matrix(
    fb: &FourierBoundary,
    mesh: &TriangleMesh,
    sr: &SpectralResult,
    phi: &dyn Fn(f64) -> f64,
) -> DegenerateDerivativeMatrix {
    let g2 = normal_derivative_trace(mesh, sr, 1);
    let g3 = normal_derivative_trace(mesh, sr, 2);
    double_matrix_from_traces(fb, mesh, &g2, &g3, phi)
}

pub(crate) fn double_matrix_from_traces(
    fb: &FourierBoundary,
    mesh: &TriangleMesh,
    g2: &[f64],
    g3: &[f64],
    phi: &dyn Fn(f64) -> f64,
) -> DegenerateDerivativeMatrix {
    let n = mesh.boundary_count();
    let dt = TAU / n as f64;
    let (mut m22, mut m23, mut m33) = (0.0, 0.0, 0.0);
    for (j, &(_, theta)) in mesh.boundary_nodes.iter().enumerate() {
        let w = phi(theta) * fb.radius(theta) * dt;
        m22 -= g2[j] * g2[j] * w;
        m23 -= g2[j] * g3[j] * w;
        m33 -= g3[j] * g3[j] * w;
    }
    DegenerateDerivativeMatrix { m: [[m22, m23], [m23, m33]] }
}

/// Rellich identity `∫ |∇u|² X·n dσ = 2λ` for a mass-normalized Dirichlet
/// eigenfunction; in polar form the left side is `∫ g² r² dθ`.
/// Returns (lhs, rhs, relative error).
pub fn rellich_check(
    fb: &FourierBoundary,
    mesh: &TriangleMesh,
    sr: &SpectralResult,
    which: usize,
) -> (f64, f64, f64) {
    let trace = normal_derivative_trace(mesh, sr, which);
    let n = mesh.boundary_count();
    let dt = TAU / n as f64;
    let lhs: f64 = mesh
        .boundary_nodes
        .iter()
        .zip(trace.iter())
        .map(|(&(_, theta), &g)| {
            let r = fb.radius(theta);
            g * g * r * r * dt
        })
        .sum();
    let rhs = 2.0 * sr.eigenvalues[which];
    (lhs, rhs, (lhs - rhs).abs() / rhs)
}

/// Gauss (planar Minkowski) identity `∫ C X·n dσ = P`.
/// Returns (lhs, rhs, relative error).
pub fn gauss_check(fb: &FourierBoundary) -> Result<(f64, f64, f64)> {
    curve::gauss_identity(fb, DEFAULT_QUADRATURE_POINTS)
}

/// Lagrange multiplier of the stationarity condition: μ = 2λ₂/P.
pub fn lagrange_multiplier(lambda2: f64, perimeter: f64) -> f64 {
    assert!(lambda2 > 0.0 && perimeter > 0.0);
    2.0 * lambda2 / perimeter
}

/// Gradient of the scale-invariant objective `J = P²λ`:
/// `dJ = 2Pλ·dP + P²·dλ`, with the dilation component removed.
///
/// J is exactly dilation-invariant at the discrete level (the mesh scales
/// linearly with the coefficients and the 2D stiffness matrix is
/// scale-free), so the true gradient is orthogonal to the coefficient
/// vector; projecting out that direction only removes discretization noise.
pub fn d_objective(
    fb: &FourierBoundary,
    mesh: &TriangleMesh,
    sr: &SpectralResult,
    which: usize,
    gap_tol: f64,
) -> Result<ShapeGradient> {
    let p = fb.perimeter()?;
    let lambda = sr.eigenvalues[which];
    let dp = d_perimeter(fb)?;
    let dl = d_lambda_simple(fb, mesh, sr, which, gap_tol)?;
    let mut g = ShapeGradient::zeros(fb.modes());
    g.axpy(2.0 * p * lambda, &dp);
    g.axpy(p * p, &dl);
    g.project_out(&ShapeGradient::from_coefficients(fb));
    Ok(g)
}

fn check_simple(sr: &SpectralResult, which: usize, gap_tol: f64) -> Result<()> {
    let lambda = sr.eigenvalues[which];
    let mut gap = f64::INFINITY;
    if which + 1 < sr.eigenvalues.len() {
        gap = gap.min((sr.eigenvalues[which + 1] - lambda) / lambda);
    }
    if which > 0 {
        gap = gap.min((lambda - sr.eigenvalues[which - 1]) / lambda);
    }
    if gap < gap_tol {
        return Err(Error::DegenerateEigenvalue { gap, gap_tol });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{solve_mesh, DEFAULT_SOLVER_TOL};
    use crate::mesh::build_polar_mesh;
    use std::f64::consts::PI;

    const J0_1: f64 = 2.404825557695773;
    const J1_1: f64 = 3.831705970207512;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn perimeter_gradient_of_circle() {
        let g = d_perimeter(&FourierBoundary::circle(1.0)).unwrap();
        assert!(rel(g.d_a0, TAU) < 1e-12, "dP/da0 = {}", g.d_a0);
        let g = d_perimeter(&FourierBoundary::new(1.0, vec![0.0; 4], vec![0.0; 4])).unwrap();
        for k in 0..4 {
            assert!(g.d_a[k].abs() < 1e-12);
            assert!(g.d_b[k].abs() < 1e-12);
        }
    }

    #[test]
    fn perimeter_gradient_matches_finite_differences() {
        let fb = FourierBoundary::with_cos_mode(1.0, 2, 0.2);
        let g = d_perimeter(&fb).unwrap();
        let step = 1e-6;
        let fd = |mut plus: FourierBoundary, mut minus: FourierBoundary, set: &dyn Fn(&mut FourierBoundary, f64)| {
            set(&mut plus, step);
            set(&mut minus, -step);
            (plus.perimeter().unwrap() - minus.perimeter().unwrap()) / (2.0 * step)
        };
        let fd_a0 = fd(fb.clone(), fb.clone(), &|f, h| f.a0 += h);
        assert!(rel(g.d_a0, fd_a0) < 1e-8, "a0: {} vs {}", g.d_a0, fd_a0);
        for k in 0..fb.modes() {
            let fd_a = fd(fb.clone(), fb.clone(), &|f, h| f.a[k] += h);
            let fd_b = fd(fb.clone(), fb.clone(), &|f, h| f.b[k] += h);
            assert!(
                (g.d_a[k] - fd_a).abs() / fd_a.abs().max(1.0) < 1e-8,
                "a{}: {} vs {}",
                k + 1,
                g.d_a[k],
                fd_a
            );
            assert!(
                (g.d_b[k] - fd_b).abs() / fd_b.abs().max(1.0) < 1e-8,
                "b{}: {} vs {}",
                k + 1,
                g.d_b[k],
                fd_b
            );
        }
    }

    #[test]
    fn lambda1_dilation_derivative_on_disk() {
        let fb = FourierBoundary::circle(1.0);
        let mesh = build_polar_mesh(&fb, 48, 192).unwrap();
        let sr = solve_mesh(&mesh, 2, DEFAULT_SOLVER_TOL).unwrap();
        let g = d_lambda_simple(&fb, &mesh, &sr, 0, DEFAULT_GAP_TOL).unwrap();
        let expect = -2.0 * J0_1 * J0_1;
        assert!(rel(g.d_a0, expect) < 1e-2, "dλ1/da0 = {} vs {}", g.d_a0, expect);
    }

    #[test]
    fn lambda2_on_disk_is_degenerate() {
        let fb = FourierBoundary::circle(1.0);
        let mesh = build_polar_mesh(&fb, 16, 64).unwrap();
        let sr = solve_mesh(&mesh, 3, DEFAULT_SOLVER_TOL).unwrap();
        let err = d_lambda_simple(&fb, &mesh, &sr, 1, DEFAULT_GAP_TOL).unwrap_err();
        assert!(matches!(err, Error::DegenerateEigenvalue { .. }));
    }

    /// Central finite difference of an eigenvalue along one coefficient,
    /// with the mesh rebuilt at the same topology.
    fn fd_lambda(
        fb: &FourierBoundary,
        nr: usize,
        nt: usize,
        which: usize,
        set: &dyn Fn(&mut FourierBoundary, f64),
        step: f64,
    ) -> f64 {
        let eval = |h: f64| {
            let mut shape = fb.clone();
            set(&mut shape, h);
            let mesh = build_polar_mesh(&shape, nr, nt).unwrap();
            solve_mesh(&mesh, which + 2, DEFAULT_SOLVER_TOL).unwrap().eigenvalues[which]
        };
        (eval(step) - eval(-step)) / (2.0 * step)
    }

    #[test]
    fn lambda2_gradient_matches_finite_differences() {
        // Simple λ2: an elongated shape splits the disk's double pair.
        let fb = FourierBoundary::with_cos_mode(1.0, 2, 0.2);
        let (nr, nt) = (32, 128);
        let mesh = build_polar_mesh(&fb, nr, nt).unwrap();
        let sr = solve_mesh(&mesh, 3, DEFAULT_SOLVER_TOL).unwrap();
        assert!(sr.relative_gap(1) > DEFAULT_GAP_TOL);
        let g = d_lambda_simple(&fb, &mesh, &sr, 1, DEFAULT_GAP_TOL).unwrap();

        let fd_a2 = fd_lambda(&fb, nr, nt, 1, &|f, h| f.a[1] += h, 1e-5);
        assert!(
            rel(g.d_a[1], fd_a2) < 1e-3,
            "dλ2/da2 analytic {} vs FD {}",
            g.d_a[1],
            fd_a2
        );
        let fd_b3 = fd_lambda(&fb, nr, nt, 1, &|f, h| f.b[2] += h, 1e-5);
        assert!(
            (g.d_b[2] - fd_b3).abs() / fd_b3.abs().max(g.norm()) < 1e-3,
            "dλ2/db3 analytic {} vs FD {}",
            g.d_b[2],
            fd_b3
        );
    }

    #[test]
    fn double_matrix_on_disk_quadrupole() {
        let fb = FourierBoundary::circle(1.0);
        let mesh = build_polar_mesh(&fb, 32, 128).unwrap();
        let sr = solve_mesh(&mesh, 3, DEFAULT_SOLVER_TOL).unwrap();
        let m = d_lambda_double_matrix(&fb, &mesh, &sr, &|t| (2.0 * t).cos());
        assert!(m.is_symmetric());
        let (lo, hi) = m.eigenvalues();
        // Equal-and-opposite splitting for a quadrupole at first order.
        assert!(lo < 0.0 && hi > 0.0, "eigenvalues {lo}, {hi}");
        assert!((lo + hi).abs() < 0.02 * hi.abs(), "not opposite: {lo}, {hi}");
    }

    #[test]
    fn double_matrix_on_disk_dilation() {
        let fb = FourierBoundary::circle(1.0);
        let mesh = build_polar_mesh(&fb, 48, 192).unwrap();
        let sr = solve_mesh(&mesh, 3, DEFAULT_SOLVER_TOL).unwrap();
        let m = d_lambda_double_matrix(&fb, &mesh, &sr, &|_| 1.0);
        let expect = -2.0 * J1_1 * J1_1;
        let (lo, hi) = m.eigenvalues();
        assert!(rel(lo, expect) < 1e-2, "lo {lo} vs {expect}");
        assert!(rel(hi, expect) < 1e-2, "hi {hi} vs {expect}");
        // Off-diagonal small relative to the diagonal.
        assert!(m.m[0][1].abs() < 0.02 * m.m[0][0].abs());
    }

    #[test]
    fn rellich_on_disk_and_dilated() {
        let fb = FourierBoundary::circle(1.0);
        let mesh = build_polar_mesh(&fb, 48, 192).unwrap();
        let sr = solve_mesh(&mesh, 2, DEFAULT_SOLVER_TOL).unwrap();
        let (_, _, e1) = rellich_check(&fb, &mesh, &sr, 0);
        assert!(e1 < 0.01, "Rellich u1 error {e1:.4}");

        // Exact scale equivariance: both sides scale as t⁻².
        let fb2 = fb.scaled(2.0);
        let mesh2 = build_polar_mesh(&fb2, 48, 192).unwrap();
        let sr2 = solve_mesh(&mesh2, 2, DEFAULT_SOLVER_TOL).unwrap();
        let (_, _, e2) = rellich_check(&fb2, &mesh2, &sr2, 0);
        assert!((e1 - e2).abs() < 1e-10, "scale changed Rellich error: {e1} vs {e2}");
    }

    #[test]
    fn rellich_on_perturbed_shape() {
        let fb = FourierBoundary::with_cos_mode(1.0, 3, 0.15);
        let mesh = build_polar_mesh(&fb, 48, 192).unwrap();
        let sr = solve_mesh(&mesh, 3, DEFAULT_SOLVER_TOL).unwrap();
        let (_, _, err) = rellich_check(&fb, &mesh, &sr, 1);
        assert!(err < 0.02, "Rellich u2 error {err:.4}");
    }

    #[test]
    fn gauss_check_small_error() {
        let fb = FourierBoundary::new(1.0, vec![0.0, 0.3], vec![0.0, 0.0, 0.0, 0.0, 0.1]);
        let (_, _, err) = gauss_check(&fb).unwrap();
        assert!(err < 1e-8, "Gauss error {err:.3e}");
    }

    #[test]
    fn multiplier_values() {
        let mu = lagrange_multiplier(J1_1 * J1_1, TAU);
        assert!((mu - 4.6734).abs() < 1e-3, "μ = {mu}");
        assert_eq!(lagrange_multiplier(1.0, 2.0), 1.0);
        // Dilation: μ scales as t⁻³.
        let t: f64 = 2.0;
        let mu_scaled = lagrange_multiplier(J1_1 * J1_1 / (t * t), TAU * t);
        assert!(rel(mu_scaled, mu / t.powi(3)) < 1e-12);
    }

    #[test]
    fn objective_gradient_orthogonal_to_dilation() {
        let fb = FourierBoundary::with_cos_mode(1.0, 2, 0.2);
        let mesh = build_polar_mesh(&fb, 24, 96).unwrap();
        let sr = solve_mesh(&mesh, 3, DEFAULT_SOLVER_TOL).unwrap();
        let g = d_objective(&fb, &mesh, &sr, 1, DEFAULT_GAP_TOL).unwrap();
        let dilation = ShapeGradient::from_coefficients(&fb);
        let along = g.dot(&dilation) / (dilation.norm() * g.norm().max(1e-300));
        assert!(along.abs() < 1e-6, "dilation component {along:.3e}");
    }

    #[test]
    fn objective_gradient_zero_at_disk_along_a0() {
        let fb = FourierBoundary::circle(1.0);
        let mesh = build_polar_mesh(&fb, 24, 96).unwrap();
        let sr = solve_mesh(&mesh, 2, DEFAULT_SOLVER_TOL).unwrap();
        // λ1 objective on the disk: use index 0, always simple.
        let g = d_objective(&fb, &mesh, &sr, 0, DEFAULT_GAP_TOL).unwrap();
        let scale = 2.0 * PI * PI * sr.eigenvalues[0];
        assert!(g.d_a0.abs() < 1e-6 * scale, "d(a0) = {}", g.d_a0);
    }
}
