//! Element-level shell mechanics.

pub mod frame;
pub mod kinematics;
pub mod material;
pub mod matrices;
pub mod strain;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use frame::{nodal_frame, nodal_frame_with_fallback};
pub use kinematics::NodalKinematics;
pub use material::ShellMaterial;
pub use matrices::{
    element_loads, element_matrices, expected_counts, local_offsets, quadrature_records,
    strain_variation, ElementContext,
    ElementLoads, ElementMatrices, LocalEdge, MultCounter, QuadratureRecord,
};
pub use strain::{jacobian_semi, jacobian_semn, shell_strains, Jacobian, StrainVector, StressResultants};

#[derive(Debug, Error, PartialEq)]
pub enum ElementError {
    #[error("degenerate Jacobian (det {det:e}) at point {q} of element {element}")]
    DegenerateJacobian { element: usize, q: usize, det: f64 },
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
}

/// Isoparametric (`Semi`) or NURBS-geometry (`Semn`) spectral element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    #[default]
    Semi,
    Semn,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Semi => "semi",
            Formulation::Semn => "semn",
        })
    }
}

impl FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "semi" => Ok(Formulation::Semi),
            "semn" => Ok(Formulation::Semn),
            other => Err(format!("unknown formulation `{other}` (expected semi or semn)")),
        }
    }
}

/// Node loop used inside each integration point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopMode {
    /// Only the nodes of the cross pattern of the point.
    #[default]
    Cross,
    /// All nodes of the element.
    Full,
}
