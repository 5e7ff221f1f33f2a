//! Compares the boundary-integral shape gradients against central finite
//! differences of the discrete pipeline, component by component.
//!
//! Usage: gradient_check [n_r] [n_theta]

use eigenshape::curve::FourierBoundary;
use eigenshape::fem::{solve_mesh, DEFAULT_SOLVER_TOL};
use eigenshape::mesh::build_polar_mesh;
use eigenshape::shapegrad::{d_lambda_simple, d_objective, d_perimeter, DEFAULT_GAP_TOL};

fn fd<F: Fn(&FourierBoundary) -> f64>(
    fb: &FourierBoundary,
    set: &dyn Fn(&mut FourierBoundary, f64),
    step: f64,
    f: F,
) -> f64 {
    let mut plus = fb.clone();
    set(&mut plus, step);
    let mut minus = fb.clone();
    set(&mut minus, -step);
    (f(&plus) - f(&minus)) / (2.0 * step)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n_r: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(48);
    let n_theta: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(192);

    // A generic 8-mode shape with a comfortably simple λ2.
    let fb = FourierBoundary::new(
        1.0,
        vec![0.0, 0.12, -0.02, 0.015, 0.008, -0.004, 0.002, 0.001],
        vec![0.0, 0.04, 0.03, -0.01, 0.006, 0.003, -0.0015, 0.0008],
    );
    fb.validate().expect("valid shape");

    let mesh = build_polar_mesh(&fb, n_r, n_theta).unwrap();
    let sr = solve_mesh(&mesh, 3, DEFAULT_SOLVER_TOL).unwrap();
    println!(
        "mesh {}x{}  lambda2 = {:.8}  gap = {:.4}",
        n_r,
        n_theta,
        sr.eigenvalues[1],
        sr.relative_gap(1)
    );

    let dp = d_perimeter(&fb).unwrap();
    let dl = d_lambda_simple(&fb, &mesh, &sr, 1, DEFAULT_GAP_TOL).unwrap();
    let dj = d_objective(&fb, &mesh, &sr, 1, DEFAULT_GAP_TOL).unwrap();

    let eval_lambda = |shape: &FourierBoundary| {
        let mesh = build_polar_mesh(shape, n_r, n_theta).unwrap();
        solve_mesh(&mesh, 3, DEFAULT_SOLVER_TOL).unwrap().eigenvalues[1]
    };
    let eval_j = |shape: &FourierBoundary| {
        let p = shape.perimeter().unwrap();
        p * p * eval_lambda(shape)
    };

    // Same order as ShapeGradient::components(): a0, a1..aK, b1..bK.
    let mut setters: Vec<(String, Box<dyn Fn(&mut FourierBoundary, f64)>)> =
        vec![("a0".to_string(), Box::new(|f: &mut FourierBoundary, h: f64| f.a0 += h))];
    for k in 0..fb.modes() {
        setters.push((format!("a{}", k + 1), Box::new(move |f, h| f.a[k] += h)));
    }
    for k in 0..fb.modes() {
        setters.push((format!("b{}", k + 1), Box::new(move |f, h| f.b[k] += h)));
    }

    println!("\n{:>4} {:>14} {:>14} {:>10}   (perimeter, FD step 1e-6, tol 1e-8)", "comp", "analytic", "fd", "rel err");
    let dp_c = dp.components();
    let mut worst_p = 0.0f64;
    for (i, (name, set)) in setters.iter().enumerate() {
        let fd_v = fd(&fb, set.as_ref(), 1e-6, |s| s.perimeter().unwrap());
        let denom = fd_v.abs().max(dp.norm());
        let rel = (dp_c[i] - fd_v).abs() / denom;
        worst_p = worst_p.max(rel);
        println!("{name:>4} {:>14.8} {:>14.8} {rel:>10.2e}", dp_c[i], fd_v);
    }

    println!("\n{:>4} {:>14} {:>14} {:>10}   (lambda2, FD step 1e-5, tol 1e-3)", "comp", "analytic", "fd", "rel err");
    let dl_c = dl.components();
    let mut worst_l = 0.0f64;
    for (i, (name, set)) in setters.iter().enumerate() {
        let fd_v = fd(&fb, set.as_ref(), 1e-5, &eval_lambda);
        let denom = fd_v.abs().max(dl.norm());
        let rel = (dl_c[i] - fd_v).abs() / denom;
        worst_l = worst_l.max(rel);
        println!("{name:>4} {:>14.8} {:>14.8} {rel:>10.2e}", dl_c[i], fd_v);
    }

    println!("\n{:>4} {:>14} {:>14} {:>10}   (objective J, FD step 1e-5, tol 1e-3)", "comp", "analytic", "fd", "rel err");
    let dj_c = dj.components();
    let mut worst_j = 0.0f64;
    for (i, (name, set)) in setters.iter().enumerate() {
        let fd_v = fd(&fb, set.as_ref(), 1e-5, &eval_j);
        let denom = fd_v.abs().max(dj.norm());
        let rel = (dj_c[i] - fd_v).abs() / denom;
        worst_j = worst_j.max(rel);
        println!("{name:>4} {:>14.8} {:>14.8} {rel:>10.2e}", dj_c[i], fd_v);
    }

    println!("\nworst relative errors: dP {worst_p:.2e}, dlambda2 {worst_l:.2e}, dJ {worst_j:.2e}");
}
