//! Command-line front end: optimize, evaluate, verify, reference, plot.
//!
//! Every command writes a run manifest listing its outputs. The pipeline is
//! deterministic, so reruns with the same inputs produce byte-identical
//! shape, trace, and SVG files; `--reproducible` records that contract in
//! the manifest. Exit codes: 0 success, 1 input/config error, 2 convergence
//! warning, 3 verification failure.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::{self, ReferenceKind};
use crate::curve::FourierBoundary;
use crate::mesh::build_polar_mesh;
use crate::optim::{self, OptimConfig, TerminationReason};
use crate::{fem, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CONVERGENCE_WARNING: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "eigenshape", version, about = "Spectral shape optimization of planar domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize P²λ₂ (or P²λ₁ in validation mode) over Fourier boundaries.
    Optimize(OptimizeArgs),
    /// Print the spectrum and geometry of a shape file as JSON.
    Evaluate(EvaluateArgs),
    /// Run the qualitative optimality checks on a shape file.
    Verify(VerifyArgs),
    /// Print reference values for comparison shapes.
    Reference(ReferenceArgs),
    /// Render a shape (optionally with a boundary field) to SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Optimizer config JSON (or a previous run manifest); defaults apply
    /// field-wise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for shape.json, trace.csv, manifest.json.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Number of multistart runs.
    #[arg(long, default_value_t = 1)]
    pub starts: usize,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Record the determinism contract in the manifest; execution is serial
    /// either way.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Shape JSON file {"a0": ..., "a": [...], "b": [...]}.
    pub shape: PathBuf,
    #[arg(long, default_value_t = 48)]
    pub nr: usize,
    #[arg(long, default_value_t = 192)]
    pub ntheta: usize,
    /// Directory for the run manifest.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub shape: PathBuf,
    /// Mesh resolution; defaults to polish resolution.
    #[arg(long, default_value_t = 64)]
    pub nr: usize,
    #[arg(long, default_value_t = 256)]
    pub ntheta: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    /// disk | two-disks | stadium-fit
    pub kind: String,
    #[arg(long, default_value_t = TAU)]
    pub perimeter: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub shape: PathBuf,
    /// Output SVG path.
    #[arg(long, default_value = "shape.svg")]
    pub svg: PathBuf,
    /// Optional boundary field: curvature | trace2 | residual.
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long, default_value_t = 48)]
    pub nr: usize,
    #[arg(long, default_value_t = 192)]
    pub ntheta: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Manifest written by every command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub version: String,
    pub wall_time_s: f64,
    pub seed: Option<u64>,
    pub reproducible: bool,
}

/// Entry point used by the binary and the integration tests.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful exits; everything
            // else is an input error.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Reference(a) => cmd_reference(&a),
        Command::Plot(a) => cmd_plot(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn load_config(path: Option<&Path>, seed_override: Option<u64>) -> Result<OptimConfig> {
    let mut cfg: OptimConfig = match path {
        None => OptimConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Error::json(p, e))?;
            // A manifest from a previous run carries the config under
            // "config"; accept either layout.
            let cfg_value = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(cfg_value).map_err(|e| Error::json(p, e))?
        }
    };
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_shape(path: &Path) -> Result<FourierBoundary> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fb: FourierBoundary = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    let fb = FourierBoundary::new(fb.a0, fb.a, fb.b);
    fb.validate()?;
    Ok(fb)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let path = dir.join("manifest.json");
    write_file(&path, &serde_json::to_string_pretty(manifest).expect("manifest serializes"))
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<i32> {
    let started = Instant::now();
    let cfg = load_config(args.config.as_deref(), args.seed)?;
    if args.starts == 0 {
        return Err(Error::config("starts", "must be >= 1"));
    }

    let result = optim::multistart(&cfg, args.starts)?;
    let (shape, trace) = &result.runs[result.best];

    let shape_path = args.out.join("shape.json");
    let trace_path = args.out.join("trace.csv");
    write_file(&shape_path, &serde_json::to_string_pretty(shape).expect("shape serializes"))?;
    write_file(&trace_path, &trace.to_csv())?;

    let manifest = RunManifest {
        command: "optimize".to_string(),
        config: serde_json::to_value(&cfg).expect("config serializes"),
        inputs: args.config.iter().map(|p| p.display().to_string()).collect(),
        outputs: vec![shape_path.display().to_string(), trace_path.display().to_string()],
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        seed: Some(cfg.seed),
        reproducible: args.reproducible,
    };
    write_manifest(&args.out, &manifest)?;

    println!(
        "best of {} start(s): J = {:.6} (P = {:.6}, lambda = {:.6}, gap = {:.4}), {:?} after {} iters",
        args.starts,
        trace.polished.j,
        trace.polished.p,
        trace.polished.lambda,
        trace.polished.gap,
        trace.termination,
        trace.records.len(),
    );

    Ok(match trace.termination {
        TerminationReason::Converged => EXIT_OK,
        TerminationReason::MaxIters | TerminationReason::LineSearchStalled => {
            EXIT_CONVERGENCE_WARNING
        }
    })
}

#[derive(Debug, Serialize)]
struct EvaluateOutput {
    lambda: Vec<f64>,
    perimeter: f64,
    area: f64,
    j: f64,
    gap: f64,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<i32> {
    let started = Instant::now();
    let fb = load_shape(&args.shape)?;
    let mesh = build_polar_mesh(&fb, args.nr, args.ntheta)?;
    let sr = fem::solve_mesh(&mesh, 4, fem::DEFAULT_SOLVER_TOL)?;
    let p = fb.perimeter()?;
    let out = EvaluateOutput {
        lambda: sr.eigenvalues.clone(),
        perimeter: p,
        area: fb.area()?,
        j: p * p * sr.eigenvalues[1],
        gap: sr.relative_gap(1),
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("output serializes"));

    let manifest = RunManifest {
        command: "evaluate".to_string(),
        config: serde_json::json!({"nr": args.nr, "ntheta": args.ntheta}),
        inputs: vec![args.shape.display().to_string()],
        outputs: vec![],
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        seed: None,
        reproducible: true,
    };
    write_manifest(&args.out, &manifest)?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let started = Instant::now();
    let fb = load_shape(&args.shape)?;
    let report = analysis::build_report(&fb, args.nr, args.ntheta)?;
    let outcome = analysis::verify_report(&report);

    let report_path = args.out.join("report.json");
    let full = serde_json::json!({ "report": report, "outcome": outcome });
    write_file(&report_path, &serde_json::to_string_pretty(&full).expect("report serializes"))?;

    println!("perimeter            {:.6}", report.perimeter);
    println!("lambda2              {:.6}", report.lambda[1]);
    println!("J = P^2 lambda2      {:.6}", report.j);
    println!("optimality residual  {:.4}", report.optimality_residual);
    println!("curvature zeros      {}", report.curvature_zero_count);
    println!("nodal boundary hits  {}", report.nodal_boundary_touch_count);
    println!("spectral gap         {:.4}", report.spectral_gap);
    println!("segment/arc flags    {}/{}", report.segment_arc.segment_flag, report.segment_arc.arc_flag);
    println!("hull defect          {:.3e}", report.hull_perimeter_defect);
    println!(
        "symmetry axes        {:?} (diagnostic only)",
        report.symmetry.axes.iter().map(|&(a, _)| (a * 1e4).round() / 1e4).collect::<Vec<_>>()
    );
    if outcome.passed {
        println!("verification PASSED");
    } else {
        println!("verification FAILED:");
        for f in &outcome.failures {
            println!("  - {f}");
        }
    }

    let manifest = RunManifest {
        command: "verify".to_string(),
        config: serde_json::json!({"nr": args.nr, "ntheta": args.ntheta}),
        inputs: vec![args.shape.display().to_string()],
        outputs: vec![report_path.display().to_string()],
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        seed: None,
        reproducible: true,
    };
    write_manifest(&args.out, &manifest)?;

    Ok(if outcome.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

pub fn cmd_reference(args: &ReferenceArgs) -> Result<i32> {
    let started = Instant::now();
    let kind: ReferenceKind = args
        .kind
        .parse()
        .map_err(|m: String| Error::config("kind", m))?;
    if !(args.perimeter > 0.0) {
        return Err(Error::config("perimeter", "must be positive"));
    }
    let values = analysis::reference_values(kind, args.perimeter)?;
    let mut out = serde_json::json!({
        "kind": args.kind,
        "lambda2": values.lambda2,
        "perimeter": values.perimeter,
        "j": values.j,
    });
    if values.numerical_baseline {
        out["tag"] = serde_json::json!("numerical baseline");
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("output serializes"));

    let manifest = RunManifest {
        command: "reference".to_string(),
        config: serde_json::json!({"kind": args.kind, "perimeter": args.perimeter}),
        inputs: vec![],
        outputs: vec![],
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        seed: None,
        reproducible: true,
    };
    write_manifest(&args.out, &manifest)?;
    Ok(EXIT_OK)
}

pub fn cmd_plot(args: &PlotArgs) -> Result<i32> {
    let started = Instant::now();
    let fb = load_shape(&args.shape)?;
    let field = match args.field.as_deref() {
        None => None,
        Some("curvature") => Some(PlotField::Curvature),
        Some("trace2") => Some(PlotField::TraceSquared),
        Some("residual") => Some(PlotField::Residual),
        Some(other) => {
            return Err(Error::config(
                "field",
                format!("unknown field `{other}` (curvature | trace2 | residual)"),
            ))
        }
    };
    let svg = render_svg(&fb, field, args.nr, args.ntheta)?;
    write_file(&args.svg, &svg)?;

    let manifest = RunManifest {
        command: "plot".to_string(),
        config: serde_json::json!({
            "field": args.field,
            "nr": args.nr,
            "ntheta": args.ntheta,
        }),
        inputs: vec![args.shape.display().to_string()],
        outputs: vec![args.svg.display().to_string()],
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        seed: None,
        reproducible: true,
    };
    write_manifest(&args.out, &manifest)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotField {
    Curvature,
    TraceSquared,
    Residual,
}

/// Deterministic SVG: closed boundary path, optionally colored by a boundary
/// field. Near-zero curvature samples are drawn in a distinct highlight
/// color so curvature zeros stand out.
pub fn render_svg(
    fb: &FourierBoundary,
    field: Option<PlotField>,
    nr: usize,
    ntheta: usize,
) -> Result<String> {
    fb.validate()?;
    let n = 720usize;
    let pts: Vec<[f64; 2]> = (0..n).map(|j| fb.point(TAU * j as f64 / n as f64)).collect();
    let rmax = pts.iter().map(|p| p[0].hypot(p[1])).fold(0.0f64, f64::max);
    let size = 640.0;
    let scale = 0.45 * size / rmax;
    let map = |p: [f64; 2]| -> (f64, f64) { (size / 2.0 + scale * p[0], size / 2.0 - scale * p[1]) };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    ));
    svg.push_str(&format!("<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>\n"));

    match field {
        None => {
            let mut d = String::new();
            for (j, &p) in pts.iter().enumerate() {
                let (x, y) = map(p);
                d.push_str(&format!("{}{x:.6},{y:.6} ", if j == 0 { "M" } else { "L" }));
            }
            d.push('Z');
            svg.push_str(&format!(
                "<path d=\"{d}\" fill=\"none\" stroke=\"#1f3b73\" stroke-width=\"2\"/>\n"
            ));
        }
        Some(kind) => {
            let values = field_values(fb, kind, nr, ntheta, n)?;
            let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            // Highlight samples where the curvature nearly vanishes.
            let zero_band: Vec<bool> = match kind {
                PlotField::Curvature => values.iter().map(|v| v.abs() < 0.05 * vmax).collect(),
                _ => vec![false; n],
            };
            let band_count = contiguous_band_count(&zero_band);
            svg.push_str(&format!("<!-- zero-curvature bands: {band_count} -->\n"));
            for j in 0..n {
                let p0 = map(pts[j]);
                let p1 = map(pts[(j + 1) % n]);
                let color = if zero_band[j] {
                    "#00bb55".to_string()
                } else {
                    ramp_color(values[j] / vmax)
                };
                let class = if zero_band[j] { " class=\"zero-band\"" } else { "" };
                svg.push_str(&format!(
                    "<line x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\" stroke=\"{color}\" stroke-width=\"4\"{class}/>\n",
                    p0.0, p0.1, p1.0, p1.1
                ));
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn field_values(
    fb: &FourierBoundary,
    kind: PlotField,
    nr: usize,
    ntheta: usize,
    n: usize,
) -> Result<Vec<f64>> {
    let thetas: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    match kind {
        PlotField::Curvature => Ok(thetas.iter().map(|&t| fb.curvature(t)).collect()),
        PlotField::TraceSquared | PlotField::Residual => {
            let mesh = build_polar_mesh(fb, nr, ntheta)?;
            let sr = fem::solve_mesh(&mesh, 3, fem::DEFAULT_SOLVER_TOL)?;
            let trace = fem::normal_derivative_trace(&mesh, &sr, 1);
            let p = fb.perimeter()?;
            let mu = 2.0 * sr.eigenvalues[1] / p;
            // Nearest boundary node lookup on the uniform grid.
            let nb = mesh.boundary_count();
            Ok(thetas
                .iter()
                .map(|&t| {
                    let j = ((t / TAU * nb as f64).round() as usize) % nb;
                    let g2 = trace[j] * trace[j];
                    match kind {
                        PlotField::TraceSquared => g2,
                        _ => g2 - mu * fb.curvature(t),
                    }
                })
                .collect())
        }
    }
}

fn contiguous_band_count(band: &[bool]) -> usize {
    let n = band.len();
    if band.iter().all(|&b| b) {
        return 1;
    }
    let mut count = 0;
    for j in 0..n {
        if band[j] && !band[(j + n - 1) % n] {
            count += 1;
        }
    }
    count
}

/// Blue-to-red diverging color ramp for v in [-1, 1].
fn ramp_color(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (
            (90.0 + 165.0 * v) as u8,
            (110.0 - 60.0 * v) as u8,
            (200.0 - 170.0 * v) as u8,
        )
    } else {
        (
            (90.0 + 20.0 * v) as u8,
            (110.0 + 80.0 * v) as u8,
            (200.0 + 40.0 * v) as u8,
        )
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_deterministic_and_closed() {
        let fb = FourierBoundary::circle(1.0);
        let s1 = render_svg(&fb, None, 16, 64).unwrap();
        let s2 = render_svg(&fb, None, 16, 64).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.matches("<path").count(), 1);
        assert!(s1.contains('Z'));
    }

    #[test]
    fn ramp_is_valid_hex() {
        for v in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            let c = ramp_color(v);
            assert_eq!(c.len(), 7);
            assert!(c.starts_with('#'));
        }
    }

    #[test]
    fn band_counting() {
        assert_eq!(contiguous_band_count(&[false, true, true, false, true, false]), 2);
        assert_eq!(contiguous_band_count(&[true, false, false, true]), 1);
        assert_eq!(contiguous_band_count(&[false, false]), 0);
        assert_eq!(contiguous_band_count(&[true, true]), 1);
    }
}
