//! Benchmark cases, refinement studies, plot data and cross-pattern timing.

pub mod case;
pub mod study;
pub mod timing;

use thiserror::Error;

pub use case::{
    BenchmarkCase, CaseId, CaseLoads, CaseSolution, Discretization, EdgeLoad, EdgeSupport, GeometrySpec,
    Monitor, PointForce, PointSupport,
};
pub use study::{emit_plot_data, run_case, write_table, ResultRow, StudyMode, StudySpec};
pub use timing::{predicted_ratio, timing_study, write_timing, TimingRow};

use crate::element::ElementError;
use crate::geometry::GeometryError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid study: {0}")]
    InvalidSpec(String),
    #[error("no rows to export")]
    EmptyTable,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
