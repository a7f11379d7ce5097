//! Global DOF numbering and constraints.

use std::collections::HashMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::geometry::{Edge, ShellMesh, ShellNode};

/// A nodal degree of freedom: a global translation axis or a rotational DOF
/// `beta_k` about the nodal axis `a_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DofKind {
    Translation(usize),
    Rotation(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub node: usize,
    pub dof: DofKind,
    #[serde(default)]
    pub value: f64,
}

impl Constraint {
    pub fn fixed(node: usize, dof: DofKind) -> Self {
        Self { node, dof, value: 0.0 }
    }
}

/// Per-node DOF offsets and the equation numbers of free DOFs.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    offsets: Vec<usize>,
    /// Equation number of every DOF, `None` when prescribed.
    equations: Vec<Option<usize>>,
    prescribed: Vec<(usize, f64)>,
    n_free: usize,
}

impl DofMap {
    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total_dofs(&self) -> usize {
        self.offsets[self.offsets.len() - 1]
    }

    pub fn num_free(&self) -> usize {
        self.n_free
    }

    pub fn offset(&self, node: usize) -> usize {
        self.offsets[node]
    }

    pub fn width(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    /// Equation number of DOF `local` of `node`.
    pub fn equation(&self, node: usize, local: usize) -> Option<usize> {
        self.equations[self.offsets[node] + local]
    }

    pub fn equation_of(&self, dof: usize) -> Option<usize> {
        self.equations[dof]
    }

    /// Prescribed DOFs (global DOF index, value).
    pub fn prescribed(&self) -> &[(usize, f64)] {
        &self.prescribed
    }
}

/// Numbers the DOFs of `nodes` (5 per node, 6 at intersections) in node order
/// and removes the constrained ones.
pub fn build_dof_map(nodes: &[ShellNode], constraints: &[Constraint]) -> Result<DofMap, SolverError> {
    let mut offsets = Vec::with_capacity(nodes.len() + 1);
    offsets.push(0);
    for n in nodes {
        offsets.push(offsets[offsets.len() - 1] + 3 + n.frame.rotation_dofs());
    }
    let total = offsets[nodes.len()];
    let mut fixed: HashMap<usize, f64> = HashMap::new();
    for c in constraints {
        if c.node >= nodes.len() {
            return Err(SolverError::BadConstraint {
                node: c.node,
                reason: format!("mesh has {} nodes", nodes.len()),
            });
        }
        let width = offsets[c.node + 1] - offsets[c.node];
        let local = match c.dof {
            DofKind::Translation(a) if a < 3 => a,
            DofKind::Rotation(k) if 3 + k < width => 3 + k,
            other => {
                return Err(SolverError::BadConstraint {
                    node: c.node,
                    reason: format!("{other:?} does not exist"),
                })
            }
        };
        let dof = offsets[c.node] + local;
        if let Some(&prev) = fixed.get(&dof) {
            if prev != c.value {
                return Err(SolverError::ConflictingConstraint {
                    node: c.node,
                    dof: local,
                    a: prev,
                    b: c.value,
                });
            }
        }
        fixed.insert(dof, c.value);
    }
    let mut equations = vec![None; total];
    let mut n_free = 0;
    for (dof, eq) in equations.iter_mut().enumerate() {
        if !fixed.contains_key(&dof) {
            *eq = Some(n_free);
            n_free += 1;
        }
    }
    let mut prescribed: Vec<(usize, f64)> = fixed.into_iter().collect();
    prescribed.sort_by_key(|p| p.0);
    Ok(DofMap {
        offsets,
        equations,
        prescribed,
        n_free,
    })
}

/// Physical axis of a rotational constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationAxis {
    /// A fixed global direction.
    Global([f64; 3]),
    /// The tangent of the edge at each node.
    EdgeTangent,
    /// Every rotational DOF of the node.
    All,
}

/// Displacement and rotation restraints along a patch edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCondition {
    /// Global translation axes held at zero.
    #[serde(default)]
    pub translations: Vec<usize>,
    /// Rotations held at zero.
    #[serde(default)]
    pub rotations: Vec<RotationAxis>,
}

impl EdgeCondition {
    /// Mirror plane with global normal `axis`: normal displacement and the
    /// rotation about the edge tangent are fixed.
    pub fn symmetry(axis: usize) -> Self {
        Self {
            translations: vec![axis],
            rotations: vec![RotationAxis::EdgeTangent],
        }
    }

    /// Rigid diaphragm in the plane with global normal `normal`: in-plane
    /// translations and the in-plane rotation (about `normal`) are fixed.
    pub fn diaphragm(normal: usize) -> Self {
        let mut axis = [0.0; 3];
        axis[normal] = 1.0;
        Self {
            translations: (0..3).filter(|&a| a != normal).collect(),
            rotations: vec![RotationAxis::Global(axis)],
        }
    }

    pub fn clamped() -> Self {
        Self {
            translations: vec![0, 1, 2],
            rotations: vec![RotationAxis::All],
        }
    }

    pub fn pinned() -> Self {
        Self {
            translations: vec![0, 1, 2],
            rotations: vec![],
        }
    }
}

/// Rotational DOF whose reference axis is most parallel to `axis`.
fn best_rotation(node: &ShellNode, axis: &Vector3<f64>) -> usize {
    let n = node.frame.rotation_dofs();
    (0..n)
        .max_by(|&a, &b| {
            let ca = node.frame.reference[a].dot(axis).abs();
            let cb = node.frame.reference[b].dot(axis).abs();
            ca.total_cmp(&cb).then(b.cmp(&a))
        })
        .unwrap_or(0)
}

/// Constraints realizing `condition` on every node of `edge`.
pub fn apply_symmetry_and_diaphragm(
    mesh: &ShellMesh,
    edge: Edge,
    condition: &EdgeCondition,
) -> Vec<Constraint> {
    let mut out = Vec::new();
    for id in mesh.edge_nodes(edge) {
        let node = &mesh.nodes[id];
        for &a in &condition.translations {
            out.push(Constraint::fixed(id, DofKind::Translation(a)));
        }
        for axis in &condition.rotations {
            match axis {
                RotationAxis::All => {
                    for k in 0..node.frame.rotation_dofs() {
                        out.push(Constraint::fixed(id, DofKind::Rotation(k)));
                    }
                }
                RotationAxis::EdgeTangent => {
                    let t = node.tangents[edge.tangent_direction()].normalize();
                    out.push(Constraint::fixed(id, DofKind::Rotation(best_rotation(node, &t))));
                }
                RotationAxis::Global(v) => {
                    let v = Vector3::from(*v).normalize();
                    out.push(Constraint::fixed(id, DofKind::Rotation(best_rotation(node, &v))));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin::scordelis_lo;
    use crate::geometry::{place_nodes, KnotVector, MeshLayout, SurfacePatch};

    fn plate_mesh(p: usize) -> ShellMesh {
        let k = KnotVector::uniform_open(1, 1).unwrap();
        let s = SurfacePatch::new(
            k.clone(),
            k,
            vec![
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
                Vector3::new(1.0, 1.0, 0.0),
            ],
            None,
        )
        .unwrap();
        place_nodes(&s, &MeshLayout::evenly(&s, 1, 1).unwrap(), p).unwrap()
    }

    #[test]
    fn counts() {
        let m = plate_mesh(1);
        let d = build_dof_map(&m.nodes, &[]).unwrap();
        assert_eq!(d.num_free(), 20);
        let clamp: Vec<Constraint> = (0..3)
            .map(|a| Constraint::fixed(0, DofKind::Translation(a)))
            .chain((0..2).map(|k| Constraint::fixed(0, DofKind::Rotation(k))))
            .collect();
        let d = build_dof_map(&m.nodes, &clamp).unwrap();
        assert_eq!(d.num_free(), 15);
        assert_eq!(d.equation(1, 0), Some(0));
    }

    #[test]
    fn intersection_node_has_six_dofs() {
        let mut m = plate_mesh(1);
        m.mark_intersection(&[2]);
        let d = build_dof_map(&m.nodes, &[]).unwrap();
        assert_eq!(d.total_dofs(), 21);
        assert_eq!(d.width(2), 6);
        assert!(build_dof_map(&m.nodes, &[Constraint::fixed(2, DofKind::Rotation(2))]).is_ok());
        assert!(build_dof_map(&m.nodes, &[Constraint::fixed(1, DofKind::Rotation(2))]).is_err());
    }

    #[test]
    fn conflicting_values_are_rejected() {
        let m = plate_mesh(1);
        let c = [
            Constraint::fixed(0, DofKind::Translation(1)),
            Constraint { node: 0, dof: DofKind::Translation(1), value: 0.5 },
        ];
        assert!(matches!(
            build_dof_map(&m.nodes, &c),
            Err(SolverError::ConflictingConstraint { .. })
        ));
    }

    #[test]
    fn roof_edge_conditions() {
        let s = scordelis_lo();
        let m = place_nodes(&s, &MeshLayout::evenly(&s, 1, 1).unwrap(), 4).unwrap();
        // diaphragm at y = 25: u_x, u_z and the rotation about y
        let c = apply_symmetry_and_diaphragm(&m, Edge::V1, &EdgeCondition::diaphragm(1));
        let node = m.edge_nodes(Edge::V1)[2];
        let mine: Vec<_> = c.iter().filter(|c| c.node == node).map(|c| c.dof).collect();
        assert_eq!(
            mine,
            vec![DofKind::Translation(0), DofKind::Translation(2), DofKind::Rotation(1)]
        );
        // crown symmetry x = 0: u_x and the rotation about the axis direction y
        let c = apply_symmetry_and_diaphragm(&m, Edge::U0, &EdgeCondition::symmetry(0));
        assert!(c.iter().all(|c| c.dof == DofKind::Translation(0) || c.dof == DofKind::Rotation(1)));
        let c = apply_symmetry_and_diaphragm(&m, Edge::U1, &EdgeCondition::clamped());
        assert_eq!(c.len(), 5 * 5);
    }
}
