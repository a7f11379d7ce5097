//! DOF management, boundary conditions, global assembly and Newton-Raphson.

pub mod assembly;
pub mod dof;
pub mod linear;
pub mod newton;
pub mod output;

use thiserror::Error;

pub use assembly::{assemble, external_loads, Assembled, LoadSet, ShellModel};
pub use dof::{apply_symmetry_and_diaphragm, build_dof_map, Constraint, DofKind, DofMap, EdgeCondition, RotationAxis};
pub use linear::{LinearSolver, SingularPivot, SkylineFactor, SkylineMatrix, DENSE_LIMIT};
pub use output::{write_convergence, write_element_diagnostics, write_solution};
pub use newton::{newton_solve, ConvergenceReport, IterationRecord, SolutionState, SolverConfig};

use crate::element::ElementError;
use crate::geometry::GeometryError;
use crate::spectral_basis::BasisError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("constraint on node {node} out of range: {reason}")]
    BadConstraint { node: usize, reason: String },
    #[error("conflicting prescriptions on DOF {dof} of node {node}: {a} vs {b}")]
    ConflictingConstraint { node: usize, dof: usize, a: f64, b: f64 },
    #[error("singular system at equation {equation} (pivot {pivot:e}) in load step {load_step}, iteration {iteration}")]
    Singular {
        equation: usize,
        pivot: f64,
        load_step: usize,
        iteration: usize,
    },
    #[error("no convergence in load step {load_step} after {iterations} iterations (last residual {residual:e})")]
    NotConverged {
        load_step: usize,
        iterations: usize,
        residual: f64,
        history: Vec<IterationRecord>,
    },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
