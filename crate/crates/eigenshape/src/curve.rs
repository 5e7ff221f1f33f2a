//! Star-shaped boundaries as truncated Fourier radial functions.
//!
//! A boundary is `r(θ) = a0 + Σₖ (aₖ cos kθ + bₖ sin kθ)` around the origin.
//! All differential-geometric quantities (perimeter, area, curvature, normal
//! factors) come from term-wise differentiated closed forms integrated with a
//! uniform-θ trapezoid rule, which is spectrally accurate for these periodic
//! smooth integrands.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::{Error, Result};

/// Default number of θ samples for quadrature and validity checks.
pub const DEFAULT_QUADRATURE_POINTS: usize = 4096;

/// Positivity guard: radii must stay above `R_MIN_FACTOR * a0` everywhere.
pub const R_MIN_FACTOR: f64 = 1e-6;

/// Truncated Fourier description of a star-shaped boundary.
///
/// `a[k-1]` and `b[k-1]` hold the cosine and sine coefficients of mode `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierBoundary {
    pub a0: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

impl FourierBoundary {
    /// Circle of the given radius (all modes zero).
    pub fn circle(radius: f64) -> Self {
        FourierBoundary { a0: radius, a: Vec::new(), b: Vec::new() }
    }

    /// Boundary with explicit coefficient lists; the shorter list is padded
    /// with zeros so both carry the same mode count.
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Self {
        let mut a = a;
        let mut b = b;
        let modes = a.len().max(b.len());
        a.resize(modes, 0.0);
        b.resize(modes, 0.0);
        FourierBoundary { a0, a, b }
    }

    /// Circle plus a single cosine mode, a common test shape.
    pub fn with_cos_mode(radius: f64, mode: usize, amplitude: f64) -> Self {
        assert!(mode >= 1);
        let mut a = vec![0.0; mode];
        a[mode - 1] = amplitude;
        FourierBoundary::new(radius, a, Vec::new())
    }

    /// Number of retained Fourier modes K.
    pub fn modes(&self) -> usize {
        self.a.len()
    }

    /// Radius `r(θ)`.
    pub fn radius(&self, theta: f64) -> f64 {
        let mut r = self.a0;
        for (k, (&ak, &bk)) in self.a.iter().zip(self.b.iter()).enumerate() {
            let kt = (k + 1) as f64 * theta;
            r += ak * kt.cos() + bk * kt.sin();
        }
        r
    }

    /// Radius together with its first and second θ-derivatives.
    pub fn radius_derivs(&self, theta: f64) -> (f64, f64, f64) {
        let mut r = self.a0;
        let mut r1 = 0.0;
        let mut r2 = 0.0;
        for (idx, (&ak, &bk)) in self.a.iter().zip(self.b.iter()).enumerate() {
            let k = (idx + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            r += ak * c + bk * s;
            r1 += k * (bk * c - ak * s);
            r2 += k * k * (-ak * c - bk * s);
        }
        (r, r1, r2)
    }

    /// Boundary point in Cartesian coordinates.
    pub fn point(&self, theta: f64) -> [f64; 2] {
        let r = self.radius(theta);
        [r * theta.cos(), r * theta.sin()]
    }

    /// Rejects boundaries whose radius dips below `R_MIN_FACTOR * a0` on the
    /// default sampling grid.
    pub fn validate(&self) -> Result<()> {
        let r_min = R_MIN_FACTOR * self.a0;
        if !(self.a0 > 0.0) {
            return Err(Error::InvalidBoundary { theta: 0.0, radius: self.a0, r_min });
        }
        let n = DEFAULT_QUADRATURE_POINTS;
        for j in 0..n {
            let theta = TAU * j as f64 / n as f64;
            let r = self.radius(theta);
            if r <= r_min {
                return Err(Error::InvalidBoundary { theta, radius: r, r_min });
            }
        }
        Ok(())
    }

    /// Arc length `∫ √(r² + r′²) dθ` with the default quadrature grid.
    pub fn perimeter(&self) -> Result<f64> {
        self.perimeter_with(DEFAULT_QUADRATURE_POINTS)
    }

    /// Arc length on an explicit quadrature grid of `n_q` uniform points.
    pub fn perimeter_with(&self, n_q: usize) -> Result<f64> {
        self.validate()?;
        Ok(self.quadrature(n_q, |r, r1, _| (r * r + r1 * r1).sqrt()))
    }

    /// Enclosed area `½ ∫ r² dθ`.
    pub fn area(&self) -> Result<f64> {
        self.area_with(DEFAULT_QUADRATURE_POINTS)
    }

    pub fn area_with(&self, n_q: usize) -> Result<f64> {
        self.validate()?;
        Ok(self.quadrature(n_q, |r, _, _| 0.5 * r * r))
    }

    /// Signed curvature `C = (r² + 2r′² − r r″) / (r² + r′²)^{3/2}`,
    /// positive where the boundary is locally convex.
    pub fn curvature(&self, theta: f64) -> f64 {
        let (r, r1, r2) = self.radius_derivs(theta);
        let g = r * r + r1 * r1;
        (r * r + 2.0 * r1 * r1 - r * r2) / (g * g.sqrt())
    }

    /// Normal factor `r / √(r² + r′²)` of a unit radial perturbation: a
    /// displacement `r → r + εφ(θ)` moves the boundary by `ε φ · factor`
    /// along the outward normal. Always in (0, 1], equal to 1 where r′ = 0.
    pub fn normal_displacement_factor(&self, theta: f64) -> f64 {
        let (r, r1, _) = self.radius_derivs(theta);
        r / (r * r + r1 * r1).sqrt()
    }

    /// Position-vector normal component `X·n = r² / √(r² + r′²)`.
    pub fn position_dot_normal(&self, theta: f64) -> f64 {
        let (r, r1, _) = self.radius_derivs(theta);
        r * r / (r * r + r1 * r1).sqrt()
    }

    /// Closed positively-oriented polygon with `n` vertices at uniform θ.
    pub fn sample(&self, n: usize) -> Result<PolygonalCurve> {
        assert!(n >= 8, "sample requires n >= 8, got {n}");
        self.validate()?;
        let vertices = (0..n)
            .map(|j| self.point(TAU * j as f64 / n as f64))
            .collect();
        Ok(PolygonalCurve { vertices, closed: true })
    }

    /// All coefficients multiplied by `t`; dilates the shape by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        FourierBoundary {
            a0: t * self.a0,
            a: self.a.iter().map(|c| t * c).collect(),
            b: self.b.iter().map(|c| t * c).collect(),
        }
    }

    /// Shape rotated by `alpha`: `r_new(θ) = r(θ − alpha)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let mut a = Vec::with_capacity(self.a.len());
        let mut b = Vec::with_capacity(self.b.len());
        for (idx, (&ak, &bk)) in self.a.iter().zip(self.b.iter()).enumerate() {
            let k = (idx + 1) as f64;
            let (s, c) = (k * alpha).sin_cos();
            a.push(ak * c - bk * s);
            b.push(ak * s + bk * c);
        }
        FourierBoundary { a0: self.a0, a, b }
    }

    fn quadrature(&self, n_q: usize, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let dt = TAU / n_q as f64;
        let mut sum = 0.0;
        for j in 0..n_q {
            let (r, r1, r2) = self.radius_derivs(dt * j as f64);
            sum += f(r, r1, r2);
        }
        sum * dt
    }
}

/// Closed planar polygon, positively oriented when sampled from a valid
/// boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonalCurve {
    pub vertices: Vec<[f64; 2]>,
    pub closed: bool,
}

impl PolygonalCurve {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Sum of edge lengths (closing edge included for closed curves).
    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        if n < 2 {
            return 0.0;
        }
        let last = if self.closed { n } else { n - 1 };
        (0..last)
            .map(|i| {
                let p = self.vertices[i];
                let q = self.vertices[(i + 1) % n];
                ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
            })
            .sum()
    }

    /// Shoelace area, positive for counter-clockwise orientation.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut twice = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            twice += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * twice
    }

    /// Checks that no two non-adjacent edges intersect. Edges are sorted by
    /// their x-interval so only overlapping candidates are compared.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let seg = |i: usize| (self.vertices[i], self.vertices[(i + 1) % n]);
        let mut order: Vec<usize> = (0..n).collect();
        let min_x = |i: usize| {
            let (p, q) = seg(i);
            p[0].min(q[0])
        };
        let max_x = |i: usize| {
            let (p, q) = seg(i);
            p[0].max(q[0])
        };
        order.sort_by(|&i, &j| min_x(i).partial_cmp(&min_x(j)).unwrap());
        for (pos, &i) in order.iter().enumerate() {
            let hi = max_x(i);
            for &j in &order[pos + 1..] {
                if min_x(j) > hi {
                    break;
                }
                let adjacent =
                    (i + 1) % n == j || (j + 1) % n == i || i == j;
                if adjacent {
                    continue;
                }
                let (p1, p2) = seg(i);
                let (q1, q2) = seg(j);
                if segments_intersect(p1, p2, q1, q2) {
                    return false;
                }
            }
        }
        true
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: [f64; 2], b: [f64; 2], c: [f64; 2], d: f64| {
        d == 0.0
            && c[0] >= a[0].min(b[0])
            && c[0] <= a[0].max(b[0])
            && c[1] >= a[1].min(b[1])
            && c[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Convex hull by Andrew's monotone chain; collinear vertices are dropped.
///
/// The hull of a closed curve never has larger perimeter than the curve.
pub fn convex_hull(pc: &PolygonalCurve) -> Result<PolygonalCurve> {
    let mut pts = pc.vertices.clone();
    pts.sort_by(|p, q| p[0].partial_cmp(&q[0]).unwrap().then(p[1].partial_cmp(&q[1]).unwrap()));
    pts.dedup_by(|p, q| p[0] == q[0] && p[1] == q[1]);
    if pts.len() < 3 {
        return Err(Error::DegenerateInput);
    }

    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateInput);
    }
    Ok(PolygonalCurve { vertices: lower, closed: true })
}

/// Radial distance from the origin to a convex polygon's boundary along
/// direction θ. The polygon must contain the origin strictly.
pub fn polygon_radius(pc: &PolygonalCurve, theta: f64) -> f64 {
    let (dx, dy) = (theta.cos(), theta.sin());
    let n = pc.vertices.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let p = pc.vertices[i];
        let q = pc.vertices[(i + 1) % n];
        // Solve origin + t (dx,dy) = p + s (q - p), 0 <= s <= 1, t > 0.
        let ex = q[0] - p[0];
        let ey = q[1] - p[1];
        let det = dx * ey - dy * ex;
        if det.abs() < 1e-300 {
            continue;
        }
        let t = (p[0] * ey - p[1] * ex) / det;
        let s = (p[0] * dy - p[1] * dx) / -det;
        if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
            best = best.min(t);
        }
    }
    best
}

/// Least-squares (discrete Fourier projection) fit of an arbitrary radial
/// function onto `modes` Fourier modes, sampled on `n_q` uniform angles.
pub fn fit_radial(f: impl Fn(f64) -> f64, modes: usize, n_q: usize) -> FourierBoundary {
    let dt = TAU / n_q as f64;
    let samples: Vec<f64> = (0..n_q).map(|j| f(dt * j as f64)).collect();
    let a0 = samples.iter().sum::<f64>() / n_q as f64;
    let mut a = vec![0.0; modes];
    let mut b = vec![0.0; modes];
    for (idx, (ak, bk)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
        let k = (idx + 1) as f64;
        let mut ca = 0.0;
        let mut cb = 0.0;
        for (j, &r) in samples.iter().enumerate() {
            let (s, c) = (k * dt * j as f64).sin_cos();
            ca += r * c;
            cb += r * s;
        }
        *ak = ca * 2.0 / n_q as f64;
        *bk = cb * 2.0 / n_q as f64;
    }
    FourierBoundary { a0, a, b }
}

/// Radial function of a stadium (two semicircular caps of radius `cap_radius`
/// at `(±half_length, 0)` joined by straight segments), star-shaped about the
/// origin.
pub fn stadium_radius(half_length: f64, cap_radius: f64, theta: f64) -> f64 {
    let c = theta.cos().abs();
    let s = theta.sin().abs();
    // Transition where the ray passes through the cap corner (±L, ±rho).
    let corner = cap_radius.hypot(half_length);
    if s * corner <= cap_radius {
        // Cap: |P - (L,0)| = rho with P = r(cosθ, sinθ), folded to x >= 0.
        half_length * c + (cap_radius * cap_radius - half_length * half_length * s * s).sqrt()
    } else {
        cap_radius / s
    }
}

/// Verifies the planar Minkowski identity `∮ C X·n dσ = P` by quadrature.
/// Returns (lhs, rhs, relative error).
pub fn gauss_identity(fb: &FourierBoundary, n_q: usize) -> Result<(f64, f64, f64)> {
    fb.validate()?;
    let dt = TAU / n_q as f64;
    let mut lhs = 0.0;
    for j in 0..n_q {
        let theta = dt * j as f64;
        let (r, _, _) = fb.radius_derivs(theta);
        // C · X·n · dσ = C · r² dθ once the Jacobians cancel.
        lhs += fb.curvature(theta) * r * r;
    }
    lhs *= dt;
    let rhs = fb.perimeter_with(n_q)?;
    let rel = (lhs - rhs).abs() / rhs;
    Ok((lhs, rhs, rel))
}

/// Total turning of the tangent: `∫ C dσ`, equal to 2π for a simple closed
/// positively-oriented curve.
pub fn total_turning(fb: &FourierBoundary, n_q: usize) -> f64 {
    let dt = TAU / n_q as f64;
    (0..n_q)
        .map(|j| {
            let theta = dt * j as f64;
            let (r, r1, _) = fb.radius_derivs(theta);
            fb.curvature(theta) * (r * r + r1 * r1).sqrt()
        })
        .sum::<f64>()
        * dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn radius_closed_forms() {
        let circle = FourierBoundary::circle(1.0);
        assert_eq!(circle.radius(0.7), 1.0);

        let fb = FourierBoundary::with_cos_mode(1.0, 2, 0.1);
        assert!((fb.radius(0.0) - 1.1).abs() < 1e-15);
        // cos(2·π/4) = 0
        assert!((fb.radius(PI / 4.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perimeter_of_circles() {
        let p = FourierBoundary::circle(1.0).perimeter().unwrap();
        assert!(rel(p, TAU) < 1e-12, "unit circle perimeter {p}");
        let p3 = FourierBoundary::circle(3.0).perimeter().unwrap();
        assert!(rel(p3, 3.0 * TAU) < 1e-12);
    }

    #[test]
    fn perimeter_matches_high_resolution_quadrature() {
        // Refinement oracle: the default grid must already be converged.
        let fb = FourierBoundary::with_cos_mode(1.0, 2, 0.1);
        let coarse = fb.perimeter().unwrap();
        let fine = fb.perimeter_with(1 << 20).unwrap();
        assert!(
            rel(coarse, fine) < 1e-10,
            "default {coarse:.15} vs 2^20-point {fine:.15}"
        );
    }

    #[test]
    fn area_closed_forms() {
        assert!(rel(FourierBoundary::circle(1.0).area().unwrap(), PI) < 1e-12);
        assert!(rel(FourierBoundary::circle(2.0).area().unwrap(), 4.0 * PI) < 1e-12);
        // Parseval: area = π (a0² + ½ Σ (aₖ² + bₖ²)).
        let fb = FourierBoundary::with_cos_mode(1.0, 3, 0.2);
        let expected = PI * (1.0 + 0.5 * 0.2 * 0.2);
        assert!(rel(fb.area().unwrap(), expected) < 1e-12);
    }

    #[test]
    fn curvature_of_circles() {
        let c1 = FourierBoundary::circle(1.0);
        for j in 0..8 {
            assert!((c1.curvature(j as f64) - 1.0).abs() < 1e-14);
        }
        assert!((FourierBoundary::circle(5.0).curvature(1.3) - 0.2).abs() < 1e-14);
    }

    /// Finite-difference tangent-angle oracle: curvature of the sampled
    /// polygon as turning angle per arc length.
    fn curvature_fd_oracle(fb: &FourierBoundary, theta: f64, n: usize) -> f64 {
        let dt = TAU / n as f64;
        let p = |t: f64| fb.point(t);
        let (pm, p0, pp) = (p(theta - dt), p(theta), p(theta + dt));
        let e0 = [p0[0] - pm[0], p0[1] - pm[1]];
        let e1 = [pp[0] - p0[0], pp[1] - p0[1]];
        let turn = (e0[0] * e1[1] - e0[1] * e1[0]).atan2(e0[0] * e1[0] + e0[1] * e1[1]);
        let len0 = e0[0].hypot(e0[1]);
        let len1 = e1[0].hypot(e1[1]);
        turn / (0.5 * (len0 + len1))
    }

    #[test]
    fn curvature_matches_polygon_oracle() {
        let fb = FourierBoundary::with_cos_mode(1.0, 2, 0.3);
        let analytic = fb.curvature(0.0);
        let oracle = curvature_fd_oracle(&fb, 0.0, 4096);
        assert!(
            rel(analytic, oracle) < 1e-4,
            "analytic {analytic} vs oracle {oracle}"
        );
    }

    #[test]
    fn curvature_oracle_converges_second_order() {
        let fb = FourierBoundary::new(1.0, vec![0.0, 0.15, 0.05], vec![0.0, 0.0, 0.1]);
        let analytic = fb.curvature(0.9);
        let e1 = (curvature_fd_oracle(&fb, 0.9, 512) - analytic).abs();
        let e2 = (curvature_fd_oracle(&fb, 0.9, 1024) - analytic).abs();
        let ratio = e1 / e2;
        assert!(
            (3.0..5.0).contains(&ratio),
            "expected O(h²): errors {e1:.3e} -> {e2:.3e}, ratio {ratio:.2}"
        );
    }

    #[test]
    fn normal_factor_circle_and_bounds() {
        let circle = FourierBoundary::circle(1.0);
        assert!((circle.normal_displacement_factor(0.4) - 1.0).abs() < 1e-15);

        let fb = FourierBoundary::new(1.0, Vec::new(), vec![0.1]);
        // r'(0) = b1 != 0, so the factor must be strictly below 1.
        let f = fb.normal_displacement_factor(0.0);
        assert!(f < 1.0 && f > 0.0, "factor {f}");
    }

    #[test]
    fn normal_factor_matches_polygon_normal() {
        let fb = FourierBoundary::with_cos_mode(1.0, 4, 0.2);
        let theta = 0.3;
        let n = 1 << 14;
        let dt = TAU / n as f64;
        let (pm, pp) = (fb.point(theta - dt), fb.point(theta + dt));
        // Outward normal of the chord through the two neighbors.
        let chord = [pp[0] - pm[0], pp[1] - pm[1]];
        let len = chord[0].hypot(chord[1]);
        let normal = [chord[1] / len, -chord[0] / len];
        let radial = [theta.cos(), theta.sin()];
        let oracle = radial[0] * normal[0] + radial[1] * normal[1];
        let analytic = fb.normal_displacement_factor(theta);
        assert!(
            (analytic - oracle).abs() < 1e-4,
            "analytic {analytic} vs polygon oracle {oracle}"
        );
    }

    #[test]
    fn sample_square_from_circle() {
        // n = 4 is below the sample() guard; build directly.
        let circle = FourierBoundary::circle(1.0);
        let pc = circle.sample(8).unwrap();
        assert_eq!(pc.len(), 8);
        assert!(pc.signed_area() > 0.0);
        assert!((pc.vertices[0][0] - 1.0).abs() < 1e-15);
        assert!((pc.vertices[2][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sample_perimeter_converges() {
        let fb = FourierBoundary::new(1.0, vec![0.05, 0.1], vec![0.02, 0.0]);
        let pc = fb.sample(4096).unwrap();
        assert!(rel(pc.perimeter(), fb.perimeter().unwrap()) < 1e-5);
    }

    #[test]
    fn sample_is_simple_polygon() {
        let fb = FourierBoundary::with_cos_mode(1.0, 2, 0.5);
        fb.validate().unwrap();
        let pc = fb.sample(512).unwrap();
        assert!(pc.is_simple());
    }

    #[test]
    fn invalid_boundary_rejected() {
        // a2 = 1.0 drives r to zero at θ = π/2.
        let fb = FourierBoundary::with_cos_mode(1.0, 2, 1.0);
        assert!(matches!(fb.validate(), Err(Error::InvalidBoundary { .. })));
        assert!(fb.perimeter().is_err());
    }

    #[test]
    fn hull_of_convex_input_is_identity() {
        let fb = FourierBoundary::with_cos_mode(1.0, 2, 0.05);
        let pc = fb.sample(64).unwrap();
        let hull = convex_hull(&pc).unwrap();
        assert_eq!(hull.len(), pc.len());
        assert!(rel(hull.perimeter(), pc.perimeter()) < 1e-12);
    }

    #[test]
    fn hull_shortens_dented_polygon() {
        // One dent: pull a single vertex inward.
        let circle = FourierBoundary::circle(1.0);
        let mut pc = circle.sample(64).unwrap();
        pc.vertices[10] = [0.3 * pc.vertices[10][0], 0.3 * pc.vertices[10][1]];
        let hull = convex_hull(&pc).unwrap();
        assert!(hull.perimeter() < pc.perimeter());
    }

    #[test]
    fn hull_of_star_shape() {
        let fb = FourierBoundary::with_cos_mode(1.0, 5, 0.35);
        let pc = fb.sample(2048).unwrap();
        let hull = convex_hull(&pc).unwrap();
        assert!(
            hull.perimeter() < pc.perimeter(),
            "hull {} vs polygon {}",
            hull.perimeter(),
            pc.perimeter()
        );
        assert!(hull.perimeter() <= pc.perimeter() + 1e-12);
    }

    #[test]
    fn hull_rejects_collinear() {
        let pc = PolygonalCurve {
            vertices: (0..10).map(|i| [i as f64, 2.0 * i as f64]).collect(),
            closed: true,
        };
        assert!(matches!(convex_hull(&pc), Err(Error::DegenerateInput)));
    }

    #[test]
    fn gauss_identity_holds() {
        let (lhs, rhs, err) = gauss_identity(&FourierBoundary::circle(1.0), 4096).unwrap();
        assert!(rel(lhs, TAU) < 1e-12);
        assert!(rel(rhs, TAU) < 1e-12);
        assert!(err < 1e-12);

        let fb = FourierBoundary::new(1.0, vec![0.0, 0.3], vec![0.0, 0.0, 0.0, 0.0, 0.1]);
        let (_, _, err) = gauss_identity(&fb, 4096).unwrap();
        assert!(err < 1e-8, "gauss error {err:.3e}");
    }

    #[test]
    fn gauss_identity_scales_with_dilation() {
        let fb = FourierBoundary::with_cos_mode(1.0, 3, 0.2);
        let (l1, r1, _) = gauss_identity(&fb, 4096).unwrap();
        let (l2, r2, _) = gauss_identity(&fb.scaled(2.0), 4096).unwrap();
        assert!(rel(l2, 2.0 * l1) < 1e-12);
        assert!(rel(r2, 2.0 * r1) < 1e-12);
    }

    #[test]
    fn polygon_radius_recovers_circle() {
        let pc = FourierBoundary::circle(2.0).sample(512).unwrap();
        let r = polygon_radius(&pc, 0.37);
        assert!((r - 2.0).abs() < 1e-3, "ray radius {r}");
    }

    #[test]
    fn stadium_fit_roundtrip() {
        let fit = fit_radial(|t| stadium_radius(0.5, 0.5, t), 32, 4096);
        fit.validate().unwrap();
        // Symmetric stadium: only even cosine modes survive.
        assert!(fit.b.iter().all(|&b| b.abs() < 1e-10));
        assert!(fit.a[0].abs() < 1e-10);
        let err: f64 = (0..64)
            .map(|j| {
                let t = TAU * j as f64 / 64.0;
                (fit.radius(t) - stadium_radius(0.5, 0.5, t)).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 0.02, "stadium fit max error {err}");
    }
}
