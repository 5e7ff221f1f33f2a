//! Spectral shape optimization of planar star-shaped domains.
//!
//! The crate minimizes the scale-invariant objective `J = P² λ₂` — perimeter
//! squared times the second Dirichlet eigenvalue of the Laplacian — over
//! boundaries described by truncated Fourier radial functions, and verifies
//! the stationarity condition `|∇u₂|² = (2λ₂/P)·C` together with qualitative
//! properties of the minimizer (curvature zeros, nodal-line boundary contact,
//! eigenvalue simplicity, absence of segments and circular arcs).
//!
//! Pipeline: [`curve`] describes the boundary and its differential geometry,
//! [`mesh`] builds a deterministic polar triangulation, [`fem`] assembles P1
//! matrices and solves the generalized eigenvalue problem, [`shapegrad`]
//! evaluates boundary-integral shape derivatives, [`optim`] runs the descent
//! loop, and [`analysis`] produces the qualitative report. [`cli`] wires the
//! pieces into the `eigenshape` binary; each capability also has a runnable
//! example under `examples/`.

pub mod analysis;
pub mod cli;
pub mod curve;
pub mod fem;
pub mod mesh;
pub mod optim;
pub mod shapegrad;

mod error;

pub use error::Error;

pub use analysis::QualitativeReport;
pub use curve::{FourierBoundary, PolygonalCurve};
pub use fem::{SparseSymMatrix, SpectralResult};
pub use mesh::TriangleMesh;
pub use optim::{OptimConfig, OptimTrace};
pub use shapegrad::{DegenerateDerivativeMatrix, ShapeGradient};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
