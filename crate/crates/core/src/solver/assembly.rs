//! Global model, external loads and parallel element assembly.

use std::sync::Arc;

use nalgebra::{DVector, SMatrix, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dof::{build_dof_map, Constraint, DofMap};
use super::linear::SkylineMatrix;
use super::newton::SolutionState;
use super::SolverError;
use crate::element::{
    element_loads, element_matrices, ElementContext, ElementLoads, Formulation, LocalEdge, LoopMode,
    MultCounter, ShellMaterial,
};
use crate::geometry::{Edge, ShellMesh};
use crate::spectral_basis::{cross_pattern, shape_table_2d, CrossPattern, ShapeTable};

/// Dead loads on the whole patch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadSet {
    /// Force per unit reference area.
    #[serde(default)]
    pub surface: Option<[f64; 3]>,
    /// Force per unit reference length along patch edges.
    #[serde(default)]
    pub edges: Vec<(Edge, [f64; 3])>,
    /// Nodal point forces.
    #[serde(default)]
    pub points: Vec<(usize, [f64; 3])>,
}

/// Discretized shell with material, DOF numbering and the skyline profile.
#[derive(Debug, Clone)]
pub struct ShellModel {
    pub mesh: ShellMesh,
    pub material: ShellMaterial,
    pub constitutive: SMatrix<f64, 8, 8>,
    pub table: Arc<ShapeTable>,
    pub cross: CrossPattern,
    pub formulation: Formulation,
    pub mode: LoopMode,
    pub dofs: DofMap,
    pub constraints: Vec<Constraint>,
    profile: Vec<usize>,
}

impl ShellModel {
    pub fn new(
        mesh: ShellMesh,
        material: ShellMaterial,
        formulation: Formulation,
        constraints: Vec<Constraint>,
    ) -> Result<Self, SolverError> {
        material.validate()?;
        let table = shape_table_2d(mesh.order)?;
        let cross = cross_pattern(mesh.order)?;
        let dofs = build_dof_map(&mesh.nodes, &constraints)?;
        let profile = skyline_profile(&mesh, &dofs);
        Ok(Self {
            constitutive: material.constitutive(),
            mesh,
            material,
            table,
            cross,
            formulation,
            mode: LoopMode::Cross,
            dofs,
            constraints,
            profile,
        })
    }

    pub fn with_mode(mut self, mode: LoopMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn context(&self, element: usize) -> ElementContext<'_> {
        ElementContext {
            element: &self.mesh.elements[element],
            nodes: &self.mesh.nodes,
            table: &self.table,
            cross: &self.cross,
            constitutive: &self.constitutive,
            formulation: self.formulation,
            mode: self.mode,
        }
    }

    pub fn num_free(&self) -> usize {
        self.dofs.num_free()
    }

    /// Empty tangent matrix with the profile of the model.
    pub fn empty_stiffness(&self) -> SkylineMatrix {
        SkylineMatrix::new(self.profile.clone())
    }

    /// Global DOF indices of an element in local order.
    fn element_dofs(&self, element: usize) -> Vec<usize> {
        self.mesh.elements[element]
            .nodes
            .iter()
            .flat_map(|&g| {
                let o = self.dofs.offset(g);
                o..o + self.dofs.width(g)
            })
            .collect()
    }

    /// Restricts a vector over all DOFs to the free equations.
    pub fn reduce(&self, full: &DVector<f64>) -> DVector<f64> {
        let mut r = DVector::zeros(self.num_free());
        for (dof, &v) in full.iter().enumerate() {
            if let Some(eq) = self.dofs.equation_of(dof) {
                r[eq] = v;
            }
        }
        r
    }
}

fn skyline_profile(mesh: &ShellMesh, dofs: &DofMap) -> Vec<usize> {
    let mut first: Vec<usize> = (0..dofs.num_free()).collect();
    for el in &mesh.elements {
        let eqs: Vec<usize> = el
            .nodes
            .iter()
            .flat_map(|&g| (0..dofs.width(g)).filter_map(move |c| dofs.equation(g, c)))
            .collect();
        if let Some(&lo) = eqs.iter().min() {
            for &e in &eqs {
                first[e] = first[e].min(lo);
            }
        }
    }
    first
}

fn local_edges(mesh: &ShellMesh, edge: Edge) -> Vec<(usize, LocalEdge)> {
    let neu = mesh.layout.elements_u();
    let nev = mesh.layout.elements_v();
    match edge {
        Edge::U0 => (0..nev).map(|ev| (ev * neu, LocalEdge::I0)).collect(),
        Edge::U1 => (0..nev).map(|ev| (neu - 1 + ev * neu, LocalEdge::I1)).collect(),
        Edge::V0 => (0..neu).map(|eu| (eu, LocalEdge::J0)).collect(),
        Edge::V1 => (0..neu).map(|eu| (eu + (nev - 1) * neu, LocalEdge::J1)).collect(),
    }
}

/// Consistent nodal forces of `loads` over all DOFs.
pub fn external_loads(model: &ShellModel, loads: &LoadSet) -> Result<DVector<f64>, SolverError> {
    let mesh = &model.mesh;
    let mut per_element: Vec<ElementLoads> = vec![
        ElementLoads {
            surface: loads.surface.map(Vector3::from),
            edges: vec![],
        };
        mesh.elements.len()
    ];
    for &(edge, value) in &loads.edges {
        for (e, local) in local_edges(mesh, edge) {
            per_element[e].edges.push((local, Vector3::from(value)));
        }
    }
    let mut f = DVector::zeros(model.dofs.total_dofs());
    for (e, l) in per_element.iter().enumerate() {
        if l.surface.is_none() && l.edges.is_empty() {
            continue;
        }
        let nodal = element_loads(&model.context(e), l)?;
        for (k, &g) in mesh.elements[e].nodes.iter().enumerate() {
            let o = model.dofs.offset(g);
            for c in 0..3 {
                f[o + c] += nodal[k][c];
            }
        }
    }
    for &(node, value) in &loads.points {
        if node >= mesh.nodes.len() {
            return Err(SolverError::BadConstraint {
                node,
                reason: "point load on a missing node".into(),
            });
        }
        let o = model.dofs.offset(node);
        for c in 0..3 {
            f[o + c] += value[c];
        }
    }
    Ok(f)
}

/// Reduced tangent, internal forces over all DOFs and the summed counters.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub stiffness: SkylineMatrix,
    pub internal: DVector<f64>,
    pub counter: MultCounter,
}

/// Element matrices are computed in parallel and scattered serially in
/// element order, so the result does not depend on thread scheduling.
pub fn assemble(model: &ShellModel, state: &SolutionState) -> Result<Assembled, SolverError> {
    let kin = state.kinematics(model);
    let locals = (0..model.mesh.elements.len())
        .into_par_iter()
        .map(|e| element_matrices(&model.context(e), &kin))
        .collect::<Result<Vec<_>, _>>()?;
    let mut k = model.empty_stiffness();
    let mut f = DVector::zeros(model.dofs.total_dofs());
    let mut counter = MultCounter::default();
    for (e, em) in locals.iter().enumerate() {
        let dofs = model.element_dofs(e);
        debug_assert_eq!(dofs.len(), em.internal.len());
        let eqs: Vec<Option<usize>> = dofs.iter().map(|&d| model.dofs.equation_of(d)).collect();
        for (a, &ga) in dofs.iter().enumerate() {
            f[ga] += em.internal[a];
            let Some(ea) = eqs[a] else { continue };
            for (b, eb) in eqs.iter().enumerate() {
                match eb {
                    Some(eb) if *eb <= ea => k.add(ea, *eb, em.stiffness[(a, b)]),
                    _ => {}
                }
            }
        }
        counter += em.counter;
    }
    Ok(Assembled {
        stiffness: k,
        internal: f,
        counter,
    })
}
