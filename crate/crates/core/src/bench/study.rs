//! Refinement sweeps and their tabular output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::case::{BenchmarkCase, Discretization};
use super::BenchError;
use crate::element::Formulation;
use crate::geometry::Scenario;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyMode {
    /// Orders swept on each mesh.
    PRefine,
    /// Meshes swept for each order.
    HRefine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub mode: StudyMode,
    pub orders: Vec<usize>,
    pub meshes: Vec<[usize; 2]>,
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    #[serde(default)]
    pub formulation: Formulation,
}

fn default_scenario() -> Scenario {
    Scenario::Esk
}

impl StudySpec {
    pub fn p_refine(orders: Vec<usize>, mesh: [usize; 2]) -> Self {
        Self {
            mode: StudyMode::PRefine,
            orders,
            meshes: vec![mesh],
            scenario: Scenario::Esk,
            formulation: Formulation::Semi,
        }
    }

    pub fn h_refine(order: usize, meshes: Vec<[usize; 2]>) -> Self {
        Self {
            mode: StudyMode::HRefine,
            orders: vec![order],
            meshes,
            scenario: Scenario::Esk,
            formulation: Formulation::Semi,
        }
    }

    pub fn validate(&self, case: &BenchmarkCase) -> Result<(), BenchError> {
        if self.orders.is_empty() || self.meshes.is_empty() {
            return Err(BenchError::InvalidSpec("order and mesh lists must be non-empty".into()));
        }
        if self.meshes.iter().any(|m| m[0] == 0 || m[1] == 0) {
            return Err(BenchError::InvalidSpec("meshes need at least one element per direction".into()));
        }
        if self.scenario == Scenario::Custom {
            return Err(BenchError::InvalidSpec("studies use the esk or cad scenario".into()));
        }
        if self.scenario == Scenario::Cad && !case.uses_scenario() {
            return Err(BenchError::InvalidSpec(format!(
                "the cad scenario applies only to free-form cases, not `{}`",
                case.name
            )));
        }
        Ok(())
    }

    /// Discretizations in sweep order.
    pub fn discretizations(&self) -> Vec<Discretization> {
        let make = |p, m| {
            Discretization::new(p, m)
                .with_scenario(self.scenario)
                .with_formulation(self.formulation)
        };
        match self.mode {
            StudyMode::PRefine => self
                .meshes
                .iter()
                .flat_map(|&m| self.orders.iter().map(move |&p| make(p, m)))
                .collect(),
            StudyMode::HRefine => self
                .orders
                .iter()
                .flat_map(|&p| self.meshes.iter().map(move |&m| make(p, m)))
                .collect(),
        }
    }
}

/// One solve of a study. Failed solves keep `converged = false` and the
/// error text; their displacement columns are `NaN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub case: String,
    pub formulation: Formulation,
    pub scenario: Scenario,
    pub p: usize,
    pub mesh_u: usize,
    pub mesh_v: usize,
    pub elements: usize,
    pub dofs: usize,
    pub displacement: f64,
    pub normalized: f64,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub k_e: u64,
    pub k_g: u64,
    pub converged: bool,
    pub error: String,
}

/// Runs every discretization of `study`; a failing solve is recorded and the
/// sweep continues.
pub fn run_case(
    case: &BenchmarkCase,
    study: &StudySpec,
    config: &SolverConfig,
) -> Result<Vec<ResultRow>, BenchError> {
    study.validate(case)?;
    let mut rows = Vec::new();
    for disc in study.discretizations() {
        let mut row = ResultRow {
            case: case.name.clone(),
            formulation: disc.formulation,
            scenario: if case.uses_scenario() { disc.scenario } else { Scenario::Esk },
            p: disc.order,
            mesh_u: disc.mesh[0],
            mesh_v: disc.mesh[1],
            elements: disc.mesh[0] * disc.mesh[1],
            dofs: 0,
            displacement: f64::NAN,
            normalized: f64::NAN,
            iterations: 0,
            wall_seconds: 0.0,
            k_e: 0,
            k_g: 0,
            converged: false,
            error: String::new(),
        };
        match case.solve(&disc, config) {
            Ok(sol) => {
                row.dofs = sol.report.equations;
                row.displacement = sol.displacement;
                row.normalized = sol.normalized;
                row.iterations = sol.report.total_iterations();
                row.wall_seconds = sol.seconds;
                row.k_e = sol.report.counter.k_e;
                row.k_g = sol.report.counter.k_g;
                row.converged = true;
                log::info!(
                    "{} p={} mesh={}x{}: u={:.8} normalized={:.6}",
                    case.name,
                    disc.order,
                    disc.mesh[0],
                    disc.mesh[1],
                    sol.displacement,
                    sol.normalized
                );
            }
            Err(e) => {
                log::warn!("{} p={} mesh={}x{} failed: {e}", case.name, disc.order, disc.mesh[0], disc.mesh[1]);
                row.error = e.to_string();
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_table<W: Write>(rows: &[ResultRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PRow<'a> {
    case: &'a str,
    formulation: Formulation,
    scenario: Scenario,
    mesh: String,
    p: usize,
    normalized_u: f64,
}

#[derive(Serialize)]
struct DofRow<'a> {
    case: &'a str,
    formulation: Formulation,
    scenario: Scenario,
    p: usize,
    n_elements: usize,
    dofs: usize,
    normalized_u: f64,
}

#[derive(Serialize)]
struct ElementRow<'a> {
    case: &'a str,
    formulation: Formulation,
    scenario: Scenario,
    p: usize,
    n_elements: usize,
    normalized_u: f64,
}

/// Writes `p_refinement.csv`, `h_refinement_dofs.csv` and
/// `h_refinement_elements.csv` from the converged rows. Nothing is written
/// when no row converged.
pub fn emit_plot_data(rows: &[ResultRow], dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.converged).collect();
    if ok.is_empty() {
        return Err(BenchError::EmptyTable);
    }
    fs::create_dir_all(dir)?;
    let paths = [
        dir.join("p_refinement.csv"),
        dir.join("h_refinement_dofs.csv"),
        dir.join("h_refinement_elements.csv"),
    ];
    let mut w = csv::Writer::from_path(&paths[0])?;
    for r in &ok {
        w.serialize(PRow {
            case: &r.case,
            formulation: r.formulation,
            scenario: r.scenario,
            mesh: format!("{}x{}", r.mesh_u, r.mesh_v),
            p: r.p,
            normalized_u: r.normalized,
        })?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(&paths[1])?;
    for r in &ok {
        w.serialize(DofRow {
            case: &r.case,
            formulation: r.formulation,
            scenario: r.scenario,
            p: r.p,
            n_elements: r.elements,
            dofs: r.dofs,
            normalized_u: r.normalized,
        })?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(&paths[2])?;
    for r in &ok {
        w.serialize(ElementRow {
            case: &r.case,
            formulation: r.formulation,
            scenario: r.scenario,
            p: r.p,
            n_elements: r.elements,
            normalized_u: r.normalized,
        })?;
    }
    w.flush()?;
    Ok(paths.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::CaseId;

    #[test]
    fn sweep_orders() {
        let mut s = StudySpec::p_refine(vec![2, 3], [1, 1]);
        s.meshes.push([2, 2]);
        let d: Vec<_> = s.discretizations().iter().map(|d| (d.order, d.mesh[0])).collect();
        assert_eq!(d, vec![(2, 1), (3, 1), (2, 2), (3, 2)]);
        s.mode = StudyMode::HRefine;
        let d: Vec<_> = s.discretizations().iter().map(|d| (d.order, d.mesh[0])).collect();
        assert_eq!(d, vec![(2, 1), (2, 2), (3, 1), (3, 2)]);
    }

    #[test]
    fn invalid_studies() {
        let roof = BenchmarkCase::builtin(CaseId::Scordelis);
        assert!(StudySpec::p_refine(vec![], [1, 1]).validate(&roof).is_err());
        let mut cad = StudySpec::p_refine(vec![4], [1, 1]);
        cad.scenario = Scenario::Cad;
        assert!(cad.validate(&roof).is_err());
        assert!(cad.validate(&BenchmarkCase::builtin(CaseId::Freeform)).is_ok());
    }

    #[test]
    fn empty_table_writes_nothing() {
        let dir = std::env::temp_dir().join(format!("spectral-shell-empty-{}", std::process::id()));
        assert!(matches!(emit_plot_data(&[], &dir), Err(BenchError::EmptyTable)));
        assert!(!dir.exists());
    }
}
