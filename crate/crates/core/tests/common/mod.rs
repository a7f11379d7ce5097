#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DVector, SMatrix, Vector3};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use spectral_shell::element::{
    local_offsets, ElementContext, Formulation, LoopMode, NodalKinematics, ShellMaterial,
};
use spectral_shell::geometry::{place_nodes, MeshLayout, ShellMesh, SurfacePatch};
use spectral_shell::rotation::{t3_matrix, NodalFrame, RotationState};
use spectral_shell::spectral_basis::{cross_pattern, shape_table_2d, CrossPattern, ShapeTable};

pub struct Model {
    pub mesh: ShellMesh,
    pub table: Arc<ShapeTable>,
    pub cross: CrossPattern,
    pub c: SMatrix<f64, 8, 8>,
    pub formulation: Formulation,
}

impl Model {
    pub fn new(patch: &SurfacePatch, n: [usize; 2], p: usize, formulation: Formulation) -> Self {
        let layout = MeshLayout::evenly(patch, n[0], n[1]).unwrap();
        Self {
            mesh: place_nodes(patch, &layout, p).unwrap(),
            table: shape_table_2d(p).unwrap(),
            cross: cross_pattern(p).unwrap(),
            c: ShellMaterial::new(1.0e4, 0.3, 0.1).unwrap().constitutive(),
            formulation,
        }
    }

    pub fn ctx(&self, e: usize, mode: LoopMode) -> ElementContext<'_> {
        ElementContext {
            element: &self.mesh.elements[e],
            nodes: &self.mesh.nodes,
            table: &self.table,
            cross: &self.cross,
            constitutive: &self.c,
            formulation: self.formulation,
            mode,
        }
    }
}

/// Nodal displacements, rotations and the frames spanning the rotational DOFs.
#[derive(Clone)]
pub struct State {
    pub u: Vec<Vector3<f64>>,
    pub rot: Vec<RotationState>,
    pub frames: Vec<NodalFrame>,
}

impl State {
    pub fn reference(model: &Model) -> Self {
        let n = model.mesh.nodes.len();
        Self {
            u: vec![Vector3::zeros(); n],
            rot: vec![RotationState::zero(); n],
            frames: model.mesh.nodes.iter().map(|n| n.frame).collect(),
        }
    }

    pub fn random(model: &Model, rng: &mut StdRng, u_scale: f64, w_max: f64) -> Self {
        let mut s = Self::reference(model);
        for (i, node) in model.mesh.nodes.iter().enumerate() {
            s.u[i] = Vector3::from_fn(|_, _| rng.random_range(-u_scale..u_scale));
            let axis = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize();
            let w = rng.random_range(0.0..w_max);
            s.rot[i] = RotationState::new(axis * w);
            s.frames[i] = node.frame.rotated(&s.rot[i].rotation_matrix());
        }
        s
    }

    pub fn kinematics(&self, model: &Model) -> Vec<NodalKinematics> {
        model
            .mesh
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| NodalKinematics::new(n, self.u[i], self.rot[i], &self.frames[i]))
            .collect()
    }

    /// State moved by `t * dv` (element-local DOF order) with the DOF axes
    /// kept at their current orientation.
    pub fn perturbed(&self, model: &Model, e: usize, dv: &DVector<f64>, t: f64) -> Self {
        let kin = self.kinematics(model);
        let el = &model.mesh.elements[e];
        let off = local_offsets(el, &kin);
        let mut s = self.clone();
        for (k, &g) in el.nodes.iter().enumerate() {
            let o = off[k];
            s.u[g] += Vector3::new(dv[o], dv[o + 1], dv[o + 2]) * t;
            let t3 = t3_matrix(&self.frames[g]);
            let beta: Vec<f64> = (0..t3.width).map(|c| dv[o + 3 + c] * t).collect();
            s.rot[g] = RotationState::new(self.rot[g].omega() + t3.apply(&beta));
        }
        s
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut StdRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}
