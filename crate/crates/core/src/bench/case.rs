//! Benchmark definitions and their discretization.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::element::{Formulation, LoopMode, ShellMaterial};
use crate::geometry::builtin::{freeform, freeform_nurbs, hemisphere, scordelis_lo};
use crate::geometry::coons::CoonsFile;
use crate::geometry::nurbs::PatchFile;
use crate::geometry::{place_nodes, CoonsWeights, Edge, GeometryError, MeshLayout, Scenario, ShellMesh, SurfacePatch};
use crate::solver::{
    apply_symmetry_and_diaphragm, newton_solve, Constraint, ConvergenceReport, DofKind, EdgeCondition,
    LoadSet, ShellModel, SolutionState, SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseId {
    Scordelis,
    Hemisphere,
    Freeform,
    FreeformNurbs,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::Scordelis, CaseId::Hemisphere, CaseId::Freeform, CaseId::FreeformNurbs];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Scordelis => "scordelis",
            CaseId::Hemisphere => "hemisphere",
            CaseId::Freeform => "freeform",
            CaseId::FreeformNurbs => "freeform-nurbs",
        }
    }

    pub fn patch(self) -> SurfacePatch {
        match self {
            CaseId::Scordelis => scordelis_lo(),
            CaseId::Hemisphere => hemisphere(),
            CaseId::Freeform => freeform(),
            CaseId::FreeformNurbs => freeform_nurbs(CoonsWeights::BoundaryOnly),
        }
    }

    /// Whether the meshing scenario (esk or cad) is meaningful.
    pub fn is_freeform(self) -> bool {
        matches!(self, CaseId::Freeform | CaseId::FreeformNurbs)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown case `{s}` (expected scordelis, hemisphere, freeform or freeform-nurbs)"))
    }
}

/// Where the reference surface comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GeometrySpec {
    Builtin { name: CaseId },
    Patch { patch: PatchFile },
    Coons { coons: CoonsFile },
}

impl GeometrySpec {
    pub fn build(&self) -> Result<SurfacePatch, GeometryError> {
        match self {
            GeometrySpec::Builtin { name } => Ok(name.patch()),
            GeometrySpec::Patch { patch } => SurfacePatch::from_file(patch),
            GeometrySpec::Coons { coons } => coons.build(),
        }
    }
}

/// Restraints along one patch edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSupport {
    pub edge: Edge,
    #[serde(flatten)]
    pub condition: EdgeCondition,
}

/// Restraints at the node nearest to the parameter point `at`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSupport {
    pub at: [f64; 2],
    pub dofs: Vec<DofKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeLoad {
    pub edge: Edge,
    /// Force per unit reference length.
    pub force: [f64; 3],
}

/// Nodal force at the node nearest to the parameter point `at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointForce {
    pub at: [f64; 2],
    pub force: [f64; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseLoads {
    /// Force per unit reference area.
    #[serde(default)]
    pub surface: Option<[f64; 3]>,
    #[serde(default)]
    pub edges: Vec<EdgeLoad>,
    #[serde(default)]
    pub points: Vec<PointForce>,
}

/// Displacement component `u . direction` at the node nearest to `at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub at: [f64; 2],
    pub direction: [f64; 3],
}

/// A complete shell problem with its reference result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCase {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<CaseId>,
    pub geometry: GeometrySpec,
    pub material: ShellMaterial,
    #[serde(default)]
    pub loads: CaseLoads,
    #[serde(default)]
    pub supports: Vec<EdgeSupport>,
    #[serde(default)]
    pub point_supports: Vec<PointSupport>,
    pub monitor: Monitor,
    pub reference: f64,
    #[serde(default = "default_steps")]
    pub load_steps: usize,
}

fn default_steps() -> usize {
    5
}

/// Mesh and element choices for one solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discretization {
    pub order: usize,
    pub mesh: [usize; 2],
    pub scenario: Scenario,
    pub formulation: Formulation,
    #[serde(default)]
    pub mode: LoopMode,
}

impl Discretization {
    pub fn new(order: usize, mesh: [usize; 2]) -> Self {
        Self {
            order,
            mesh,
            scenario: Scenario::Esk,
            formulation: Formulation::Semi,
            mode: LoopMode::Cross,
        }
    }

    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = scenario;
        self
    }

    pub fn with_formulation(mut self, formulation: Formulation) -> Self {
        self.formulation = formulation;
        self
    }

    pub fn with_mode(mut self, mode: LoopMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Converged solve of a case.
#[derive(Debug, Clone)]
pub struct CaseSolution {
    pub model: ShellModel,
    pub state: SolutionState,
    pub report: ConvergenceReport,
    pub monitor_node: usize,
    pub displacement: f64,
    pub normalized: f64,
    pub seconds: f64,
}

impl BenchmarkCase {
    pub fn builtin(id: CaseId) -> Self {
        let geometry = GeometrySpec::Builtin { name: id };
        let edge = |edge, condition| EdgeSupport { edge, condition };
        match id {
            CaseId::Scordelis => Self {
                name: id.name().into(),
                id: Some(id),
                geometry,
                material: ShellMaterial::new(4.32e8, 0.0, 0.25).expect("valid material"),
                loads: CaseLoads {
                    surface: Some([0.0, 0.0, -90.0]),
                    ..Default::default()
                },
                supports: vec![
                    edge(Edge::U0, EdgeCondition::symmetry(0)),
                    edge(Edge::V0, EdgeCondition::symmetry(1)),
                    edge(Edge::V1, EdgeCondition::diaphragm(1)),
                ],
                point_supports: vec![],
                monitor: Monitor {
                    at: [1.0, 0.0],
                    direction: [0.0, 0.0, 1.0],
                },
                reference: -0.25356483,
                load_steps: 1,
            },
            CaseId::Hemisphere => Self {
                name: id.name().into(),
                id: Some(id),
                geometry,
                material: ShellMaterial::new(6.825e7, 0.3, 0.04).expect("valid material"),
                loads: CaseLoads {
                    points: vec![
                        PointForce {
                            at: [0.0, 0.0],
                            force: [100.0, 0.0, 0.0],
                        },
                        PointForce {
                            at: [1.0, 0.0],
                            force: [0.0, -100.0, 0.0],
                        },
                    ],
                    ..Default::default()
                },
                supports: vec![
                    edge(Edge::U0, EdgeCondition::symmetry(1)),
                    edge(Edge::U1, EdgeCondition::symmetry(0)),
                ],
                point_supports: vec![PointSupport {
                    at: [0.0, 0.0],
                    dofs: vec![DofKind::Translation(2)],
                }],
                monitor: Monitor {
                    at: [1.0, 0.0],
                    direction: [0.0, -1.0, 0.0],
                },
                reference: 5.86799,
                load_steps: 5,
            },
            CaseId::Freeform | CaseId::FreeformNurbs => Self {
                name: id.name().into(),
                id: Some(id),
                geometry,
                material: ShellMaterial::new(1.2e6, 0.3, 0.1).expect("valid material"),
                loads: CaseLoads {
                    edges: vec![EdgeLoad {
                        edge: Edge::V1,
                        force: [0.0, 10.0, 0.0],
                    }],
                    ..Default::default()
                },
                supports: vec![edge(Edge::V0, EdgeCondition::clamped())],
                point_supports: vec![],
                monitor: Monitor {
                    at: if id == CaseId::Freeform { [1.0, 1.0] } else { [0.0, 1.0] },
                    direction: [0.0, 1.0, 0.0],
                },
                reference: if id == CaseId::Freeform { 0.734541 } else { 0.3326847 },
                load_steps: 5,
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String, BenchError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Whether esk and cad layouts differ for this case.
    pub fn uses_scenario(&self) -> bool {
        self.id.is_none_or(CaseId::is_freeform)
    }

    pub fn mesh(&self, disc: &Discretization) -> Result<ShellMesh, BenchError> {
        let patch = self.geometry.build()?;
        let scenario = if self.uses_scenario() { disc.scenario } else { Scenario::Esk };
        let layout = MeshLayout::build(&patch, scenario, disc.mesh[0], disc.mesh[1])?;
        Ok(place_nodes(&patch, &layout, disc.order)?)
    }

    /// Model, loads and monitored node for a discretization.
    pub fn model(&self, disc: &Discretization) -> Result<(ShellModel, LoadSet, usize), BenchError> {
        let mesh = self.mesh(disc)?;
        let mut constraints: Vec<Constraint> = Vec::new();
        for s in &self.supports {
            constraints.extend(apply_symmetry_and_diaphragm(&mesh, s.edge, &s.condition));
        }
        for s in &self.point_supports {
            let node = mesh.nearest_node(s.at[0], s.at[1]);
            constraints.extend(s.dofs.iter().map(|&d| Constraint::fixed(node, d)));
        }
        let loads = LoadSet {
            surface: self.loads.surface,
            edges: self.loads.edges.iter().map(|l| (l.edge, l.force)).collect(),
            points: self
                .loads
                .points
                .iter()
                .map(|p| (mesh.nearest_node(p.at[0], p.at[1]), p.force))
                .collect(),
        };
        let monitor = mesh.nearest_node(self.monitor.at[0], self.monitor.at[1]);
        let model = ShellModel::new(mesh, self.material, disc.formulation, constraints)?.with_mode(disc.mode);
        Ok((model, loads, monitor))
    }

    pub fn solve(&self, disc: &Discretization, config: &SolverConfig) -> Result<CaseSolution, BenchError> {
        let (model, loads, monitor_node) = self.model(disc)?;
        let t = Instant::now();
        let (state, report) = newton_solve(config, &model, &loads)?;
        let seconds = t.elapsed().as_secs_f64();
        let dir = nalgebra::Vector3::from(self.monitor.direction).normalize();
        let displacement = state.u[monitor_node].dot(&dir);
        Ok(CaseSolution {
            normalized: displacement / self.reference,
            displacement,
            model,
            state,
            report,
            monitor_node,
            seconds,
        })
    }

    /// Solver settings with the case's load steps.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            load_steps: self.load_steps,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let r: Vec<f64> = CaseId::ALL.iter().map(|&c| BenchmarkCase::builtin(c).reference).collect();
        assert_eq!(r, vec![-0.25356483, 5.86799, 0.734541, 0.3326847]);
        assert_eq!(BenchmarkCase::builtin(CaseId::Scordelis).load_steps, 1);
    }

    #[test]
    fn case_json_round_trip() {
        for id in CaseId::ALL {
            let c = BenchmarkCase::builtin(id);
            assert_eq!(BenchmarkCase::from_json(&c.to_json().unwrap()).unwrap(), c);
        }
    }

    #[test]
    fn ids_parse() {
        for id in CaseId::ALL {
            assert_eq!(id.to_string().parse::<CaseId>().unwrap(), id);
        }
        assert!("roof".parse::<CaseId>().is_err());
    }

    #[test]
    fn diaphragm_nodes_lose_three_dofs() {
        let case = BenchmarkCase::builtin(CaseId::Scordelis);
        let (model, _, a) = case.model(&Discretization::new(4, [1, 1])).unwrap();
        let node = model.mesh.edge_nodes(Edge::V1)[2];
        let fixed = (0..5).filter(|&c| model.dofs.equation(node, c).is_none()).count();
        assert_eq!(fixed, 3);
        assert!((model.mesh.nodes[a].position.z - 25.0 * 40f64.to_radians().cos()).abs() < 1e-12);
    }
}
