//! Exact midsurface geometry: NURBS patches, Coons construction, built-in
//! benchmark surfaces and spectral node placement.

pub mod builtin;
pub mod coons;
pub mod mesh;
pub mod nurbs;

pub use coons::{coons_patch, CoonsWeights};
pub use mesh::{place_nodes, Edge, MeshLayout, Scenario, ShellMesh, ShellNode, SpectralElement};
pub use nurbs::{bspline_basis, BasisEval, KnotVector, NurbsCurve, SurfacePatch, SurfacePoint};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("knot vector invalid: {0}")]
    InvalidKnots(String),
    #[error("parameter {value} outside knot range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("expected {expected} control points, got {got}")]
    ControlCount { expected: usize, got: usize },
    #[error("weights must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("rational denominator vanished at ({0}, {1})")]
    ZeroDenominator(f64, f64),
    #[error("degenerate tangent plane at ({0}, {1})")]
    DegenerateTangents(f64, f64),
    #[error("boundary curves meet with a gap of {gap:e} at corner {corner}")]
    CornerMismatch { corner: &'static str, gap: f64 },
    #[error("boundary curves have incompatible degrees {0} and {1}")]
    DegreeMismatch(usize, usize),
    #[error("mesh layout invalid: {0}")]
    InvalidLayout(String),
    #[error("unknown edge id `{0}` (expected u0, u1, v0 or v1)")]
    UnknownEdge(String),
}
