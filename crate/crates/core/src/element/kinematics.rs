//! Per-node quantities evaluated once per assembly pass.

use nalgebra::{Matrix3, Vector3};

use crate::geometry::ShellNode;
use crate::rotation::{skew, t3_matrix, MCoefficients, NodalFrame, RotationBasis, RotationState};

/// Current configuration of one node with the rotation operators the element
/// loops need: `T = W^T H T3` (variation of the director) and `H T3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalKinematics {
    pub u: Vector3<f64>,
    pub x: Vector3<f64>,
    pub d: Vector3<f64>,
    /// `d - D`.
    pub delta_d: Vector3<f64>,
    pub rotation: RotationState,
    pub m_coefficients: MCoefficients,
    pub ht3: RotationBasis,
    pub t: RotationBasis,
}

impl NodalKinematics {
    /// `t3_frame` supplies the axes of the rotational DOFs, normally the
    /// current rotated frame of the node.
    pub fn new(
        node: &ShellNode,
        u: Vector3<f64>,
        rotation: RotationState,
        t3_frame: &NodalFrame,
    ) -> Self {
        let r = rotation.rotation_matrix();
        let d = r * node.director;
        let h: Matrix3<f64> = rotation.h_matrix();
        let ht3 = t3_matrix(t3_frame).premul(&h);
        let t = ht3.premul(&skew(&d).transpose());
        Self {
            u,
            x: node.position + u,
            d,
            delta_d: rotation.rotation_increment(&node.director),
            rotation,
            m_coefficients: rotation.m_coefficients(),
            ht3,
            t,
        }
    }

    pub fn reference(node: &ShellNode) -> Self {
        Self::new(node, Vector3::zeros(), RotationState::zero(), &node.frame)
    }

    pub fn width(&self) -> usize {
        self.t.width
    }
}
