//! Load stepping with full Newton-Raphson iterations.

use std::time::Instant;

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::assembly::{assemble, external_loads, LoadSet, ShellModel};
use super::linear::LinearSolver;
use super::SolverError;
use crate::element::{MultCounter, NodalKinematics};
use crate::rotation::{update_rotation, NodalFrame, RotationState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub load_steps: usize,
    pub max_iterations: usize,
    /// Relative residual tolerance against the first residual of each step.
    pub tolerance: f64,
    pub absolute_floor: f64,
    /// A step also converges once `|dv . R|` falls below this fraction of
    /// its first-iteration value, which catches residuals stuck at the
    /// round-off level of stiff problems.
    pub energy_tolerance: f64,
    pub linear: LinearSolver,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            load_steps: 5,
            max_iterations: 30,
            tolerance: 1e-9,
            absolute_floor: 1e-12,
            energy_tolerance: 1e-20,
            linear: LinearSolver::Auto,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.load_steps == 0 {
            return Err(SolverError::Config("at least one load step is required".into()));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::Config("max_iterations must be positive".into()));
        }
        if !(self.tolerance > 0.0) || !(self.absolute_floor > 0.0) || !(self.energy_tolerance > 0.0) {
            return Err(SolverError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// One Newton iteration. `energy_norm` is `|dv . R|` of the correction
/// computed in this iteration, zero when the iteration only confirmed
/// convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub load_step: usize,
    pub iteration: usize,
    pub residual_norm: f64,
    pub energy_norm: f64,
}

/// Nodal unknowns; directors are always recomputed from the rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub u: Vec<Vector3<f64>>,
    pub rotation: Vec<RotationState>,
    /// Current nodal frames spanning the rotational DOFs.
    pub frames: Vec<NodalFrame>,
    pub load_factor: f64,
    pub load_step: usize,
    pub iteration: usize,
    pub history: Vec<IterationRecord>,
}

impl SolutionState {
    pub fn reference(model: &ShellModel) -> Self {
        let n = model.mesh.nodes.len();
        Self {
            u: vec![Vector3::zeros(); n],
            rotation: vec![RotationState::zero(); n],
            frames: model.mesh.nodes.iter().map(|n| n.frame).collect(),
            load_factor: 0.0,
            load_step: 0,
            iteration: 0,
            history: vec![],
        }
    }

    pub fn kinematics(&self, model: &ShellModel) -> Vec<NodalKinematics> {
        model
            .mesh
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| NodalKinematics::new(n, self.u[i], self.rotation[i], &self.frames[i]))
            .collect()
    }

    pub fn director(&self, model: &ShellModel, node: usize) -> Vector3<f64> {
        self.rotation[node].rotation_matrix() * model.mesh.nodes[node].director
    }

    /// Adds `dv` (over all DOFs) to the translations and rotations.
    fn apply_increment(&mut self, model: &ShellModel, dv: &DVector<f64>) {
        for i in 0..self.u.len() {
            let o = model.dofs.offset(i);
            let w = model.dofs.width(i) - 3;
            self.u[i] += Vector3::new(dv[o], dv[o + 1], dv[o + 2]);
            let beta = &dv.as_slice()[o + 3..o + 3 + w];
            if beta.iter().any(|&b| b != 0.0) {
                let (rot, frame) = update_rotation(&self.rotation[i], beta, &self.frames[i]);
                self.rotation[i] = rot;
                self.frames[i] = frame;
            }
        }
    }
}

/// Iteration history with the work spent.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub history: Vec<IterationRecord>,
    pub iterations_per_step: Vec<usize>,
    /// Counters of one assembly pass.
    pub counter: MultCounter,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub equations: usize,
}

impl ConvergenceReport {
    pub fn total_iterations(&self) -> usize {
        self.iterations_per_step.iter().sum()
    }
}

/// Solves `f_int(v) = lambda f_ext` for `lambda = 1/n, 2/n, ..., 1`.
pub fn newton_solve(
    config: &SolverConfig,
    model: &ShellModel,
    loads: &LoadSet,
) -> Result<(SolutionState, ConvergenceReport), SolverError> {
    config.validate()?;
    let f_ext = external_loads(model, loads)?;
    let mut state = SolutionState::reference(model);
    let mut report = ConvergenceReport {
        equations: model.num_free(),
        ..Default::default()
    };
    let n_dofs = model.dofs.total_dofs();
    for step in 1..=config.load_steps {
        let lambda = step as f64 / config.load_steps as f64;
        // prescribed values grow with the load factor
        let mut prescribed = DVector::zeros(n_dofs);
        for &(dof, value) in model.dofs.prescribed() {
            prescribed[dof] = (lambda - state.load_factor) * value;
        }
        if prescribed.iter().any(|&v| v != 0.0) {
            state.apply_increment(model, &prescribed);
        }
        state.load_factor = lambda;
        state.load_step = step;
        let mut r_ref = 0.0;
        let mut e_ref = 0.0;
        let mut converged = false;
        for it in 1..=config.max_iterations {
            state.iteration = it;
            let t0 = Instant::now();
            let asm = assemble(model, &state)?;
            report.assembly_seconds += t0.elapsed().as_secs_f64();
            report.counter = asm.counter;
            let residual = model.reduce(&(&f_ext * lambda - &asm.internal));
            let norm = residual.norm();
            if it == 1 {
                r_ref = norm;
            }
            let mut record = IterationRecord {
                load_step: step,
                iteration: it,
                residual_norm: norm,
                energy_norm: 0.0,
            };
            if norm <= config.tolerance * r_ref || norm <= config.absolute_floor {
                state.history.push(record);
                report.iterations_per_step.push(it);
                converged = true;
                break;
            }
            if it == config.max_iterations {
                state.history.push(record);
                return Err(SolverError::NotConverged {
                    load_step: step,
                    iterations: it,
                    residual: norm,
                    history: state.history.clone(),
                });
            }
            let t1 = Instant::now();
            let dv = config
                .linear
                .solve(asm.stiffness, &residual)
                .map_err(|p| SolverError::Singular {
                    equation: p.equation,
                    pivot: p.pivot,
                    load_step: step,
                    iteration: it,
                })?;
            report.solve_seconds += t1.elapsed().as_secs_f64();
            record.energy_norm = dv.dot(&residual).abs();
            if it == 1 {
                e_ref = record.energy_norm;
            }
            state.history.push(record);
            log::debug!("step {step} iteration {it}: residual {norm:.3e}, energy {:.3e}", record.energy_norm);
            let mut full = DVector::zeros(n_dofs);
            for (dof, v) in full.iter_mut().enumerate() {
                if let Some(eq) = model.dofs.equation_of(dof) {
                    *v = dv[eq];
                }
            }
            state.apply_increment(model, &full);
            if it > 1 && record.energy_norm <= config.energy_tolerance * e_ref {
                report.iterations_per_step.push(it);
                converged = true;
                break;
            }
        }
        debug_assert!(converged);
    }
    report.history = state.history.clone();
    Ok((state, report))
}
