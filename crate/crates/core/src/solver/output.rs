//! CSV exports of convergence logs, nodal solutions and element diagnostics.

use std::io::Write;

use serde::Serialize;

use super::assembly::ShellModel;
use super::newton::{IterationRecord, SolutionState};
use super::SolverError;
use crate::element::quadrature_records;

pub fn write_convergence<W: Write>(history: &[IterationRecord], out: W) -> Result<(), SolverError> {
    let mut w = csv::Writer::from_writer(out);
    for r in history {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct NodeRow {
    node: usize,
    x: f64,
    y: f64,
    z: f64,
    u_x: f64,
    u_y: f64,
    u_z: f64,
    omega_x: f64,
    omega_y: f64,
    omega_z: f64,
    d_x: f64,
    d_y: f64,
    d_z: f64,
}

pub fn write_solution<W: Write>(model: &ShellModel, state: &SolutionState, out: W) -> Result<(), SolverError> {
    let mut w = csv::Writer::from_writer(out);
    for (i, node) in model.mesh.nodes.iter().enumerate() {
        let (x, u, om, d) = (node.position, state.u[i], state.rotation[i].omega(), state.director(model, i));
        w.serialize(NodeRow {
            node: i,
            x: x.x,
            y: x.y,
            z: x.z,
            u_x: u.x,
            u_y: u.y,
            u_z: u.z,
            omega_x: om.x,
            omega_y: om.y,
            omega_z: om.z,
            d_x: d.x,
            d_y: d.y,
            d_z: d.z,
        })?;
    }
    w.flush()?;
    Ok(())
}

const STRAINS: [&str; 8] = ["e11", "e22", "e12", "k11", "k22", "k12", "g1", "g2"];
const STRESSES: [&str; 8] = ["n11", "n22", "n12", "m11", "m22", "m12", "q1", "q2"];

/// Strains and stress resultants at every integration point.
pub fn write_element_diagnostics<W: Write>(
    model: &ShellModel,
    state: &SolutionState,
    out: W,
) -> Result<(), SolverError> {
    let kin = state.kinematics(model);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["element", "q", "xi1", "xi2"];
    header.extend(STRAINS);
    header.extend(STRESSES);
    w.write_record(&header)?;
    for e in 0..model.mesh.elements.len() {
        for rec in quadrature_records(&model.context(e), &kin)? {
            let mut row = vec![rec.element.to_string(), rec.q.to_string(), rec.xi1.to_string(), rec.xi2.to_string()];
            row.extend(rec.strain.iter().chain(&rec.stress).map(|v| v.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}
