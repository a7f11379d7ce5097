//! Cost of the cross-pattern node loop against the full loop on one element.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DVector, Vector3};
use serde::Serialize;

use super::case::{BenchmarkCase, Discretization};
use super::BenchError;
use crate::element::{element_matrices, expected_counts, ElementMatrices, LoopMode, NodalKinematics};
use crate::solver::{assemble, ShellModel, SolutionState, SolverError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub p: usize,
    pub equations: usize,
    /// Seconds per element tangent with the cross loop.
    pub t_cross: f64,
    pub t_full: f64,
    pub full_over_cross: f64,
    /// Seconds to factorize and solve the single-element system.
    pub t_solve: f64,
    pub solve_over_cross: f64,
    pub counter_cross: u64,
    pub counter_full: u64,
    pub counter_ratio: f64,
    pub predicted_ratio: f64,
    /// Cross and full tangents agree bit for bit.
    pub identical: bool,
}

/// Full-to-cross ratio of stiffness multiplications from the closed form.
pub fn predicted_ratio(p: usize) -> f64 {
    expected_counts(p, LoopMode::Full).stiffness() as f64 / expected_counts(p, LoopMode::Cross).stiffness() as f64
}

/// A smooth, non-trivial displacement field so that stresses and the
/// geometric stiffness are active.
fn deformed_state(model: &ShellModel) -> SolutionState {
    let mut state = SolutionState::reference(model);
    for (i, node) in model.mesh.nodes.iter().enumerate() {
        let x = node.position;
        let s = 1e-3 * (1.0 + i as f64 % 7.0);
        state.u[i] = Vector3::new(s * x.y.sin(), s * x.z.cos(), s * x.x.sin());
    }
    state
}

fn time_element(model: &ShellModel, kin: &[NodalKinematics], repeats: usize) -> Result<(f64, ElementMatrices), BenchError> {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        let em = element_matrices(&model.context(0), kin)?;
        best = best.min(t.elapsed().as_secs_f64());
        last = Some(em);
    }
    Ok((best, last.expect("at least one repeat")))
}

/// Times the single-element tangent of `case` in both loop modes for every
/// order; each time is the minimum over `repeats` runs.
pub fn timing_study(case: &BenchmarkCase, orders: &[usize], repeats: usize) -> Result<Vec<TimingRow>, BenchError> {
    if orders.is_empty() {
        return Err(BenchError::InvalidSpec("order list must be non-empty".into()));
    }
    let mut rows = Vec::with_capacity(orders.len());
    for &p in orders {
        let (cross_model, _, _) = case.model(&Discretization::new(p, [1, 1]))?;
        let full_model = cross_model.clone().with_mode(LoopMode::Full);
        let state = deformed_state(&cross_model);
        let kin = state.kinematics(&cross_model);

        let (t_cross, a) = time_element(&cross_model, &kin, repeats)?;
        let (t_full, b) = time_element(&full_model, &kin, repeats)?;
        let identical = a.stiffness.iter().zip(b.stiffness.iter()).all(|(x, y)| x.to_bits() == y.to_bits())
            && a.internal.iter().zip(b.internal.iter()).all(|(x, y)| x.to_bits() == y.to_bits());

        let asm = assemble(&cross_model, &state)?;
        let n = asm.stiffness.dim();
        let rhs = DVector::from_element(n, 1.0);
        let mut t_solve = f64::INFINITY;
        for _ in 0..repeats.max(1) {
            let k = asm.stiffness.clone();
            let t = Instant::now();
            let f = k.factorize().map_err(|s| SolverError::Singular {
                equation: s.equation,
                pivot: s.pivot,
                load_step: 0,
                iteration: 0,
            })?;
            std::hint::black_box(f.solve(&rhs));
            t_solve = t_solve.min(t.elapsed().as_secs_f64());
        }

        let counter_cross = a.counter.stiffness();
        let counter_full = b.counter.stiffness();
        log::info!("p={p}: cross {t_cross:.3e} s, full {t_full:.3e} s, solve {t_solve:.3e} s");
        rows.push(TimingRow {
            p,
            equations: n,
            t_cross,
            t_full,
            full_over_cross: t_full / t_cross,
            t_solve,
            solve_over_cross: t_solve / t_cross,
            counter_cross,
            counter_full,
            counter_ratio: counter_full as f64 / counter_cross as f64,
            predicted_ratio: predicted_ratio(p),
            identical,
        });
    }
    Ok(rows)
}

pub fn write_timing<W: Write>(rows: &[TimingRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::CaseId;

    #[test]
    fn ratio_grows_with_order() {
        assert!(predicted_ratio(2) > 1.0);
        assert!(predicted_ratio(12) > predicted_ratio(6));
    }

    #[test]
    fn small_study_is_consistent() {
        let rows = timing_study(&BenchmarkCase::builtin(CaseId::Scordelis), &[2, 3], 1).unwrap();
        for r in &rows {
            assert!(r.identical);
            assert_eq!(r.counter_ratio, r.predicted_ratio);
        }
        let mut buf = Vec::new();
        write_timing(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
