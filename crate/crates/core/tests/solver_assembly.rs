use nalgebra::{DMatrix, DVector, Vector3};
use spectral_shell::element::{element_matrices, Formulation, NodalKinematics, ShellMaterial};
use spectral_shell::geometry::builtin::scordelis_lo;
use spectral_shell::geometry::{place_nodes, Edge, KnotVector, MeshLayout, ShellMesh, SurfacePatch};
use spectral_shell::solver::{
    apply_symmetry_and_diaphragm, assemble, external_loads, newton_solve, Constraint, DofKind,
    EdgeCondition, LinearSolver, LoadSet, ShellModel, SolutionState, SolverConfig, SolverError,
};

fn material() -> ShellMaterial {
    ShellMaterial::new(1.0e4, 0.3, 0.1).unwrap()
}

fn plate(a: f64, b: f64) -> SurfacePatch {
    let k = KnotVector::uniform_open(1, 1).unwrap();
    SurfacePatch::new(
        k.clone(),
        k,
        vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(a, 0.0, 0.0),
            Vector3::new(0.0, b, 0.0),
            Vector3::new(a, b, 0.0),
        ],
        None,
    )
    .unwrap()
}

fn mesh(patch: &SurfacePatch, n: [usize; 2], p: usize) -> ShellMesh {
    place_nodes(patch, &MeshLayout::evenly(patch, n[0], n[1]).unwrap(), p).unwrap()
}

fn clamped_plate(n: [usize; 2], p: usize) -> ShellModel {
    let m = mesh(&plate(2.0, 1.0), n, p);
    let c = apply_symmetry_and_diaphragm(&m, Edge::U0, &EdgeCondition::clamped());
    ShellModel::new(m, material(), Formulation::Semi, c).unwrap()
}

/// Dense global matrix built node block by node block from the element
/// matrices, independent of the skyline scatter.
fn brute_force(model: &ShellModel, state: &SolutionState) -> DMatrix<f64> {
    let kin: Vec<NodalKinematics> = state.kinematics(model);
    let n = model.dofs.total_dofs();
    let mut k = DMatrix::zeros(n, n);
    for e in 0..model.mesh.elements.len() {
        let em = element_matrices(&model.context(e), &kin).unwrap();
        let nodes = &model.mesh.elements[e].nodes;
        for (a, &ga) in nodes.iter().enumerate() {
            for (b, &gb) in nodes.iter().enumerate() {
                for r in 0..model.dofs.width(ga) {
                    for c in 0..model.dofs.width(gb) {
                        k[(model.dofs.offset(ga) + r, model.dofs.offset(gb) + c)] +=
                            em.stiffness[(em.offsets[a] + r, em.offsets[b] + c)];
                    }
                }
            }
        }
    }
    k
}

fn free_part(model: &ShellModel, full: &DMatrix<f64>) -> DMatrix<f64> {
    let free: Vec<usize> = (0..model.dofs.total_dofs())
        .filter(|&d| model.dofs.equation_of(d).is_some())
        .collect();
    DMatrix::from_fn(free.len(), free.len(), |i, j| full[(free[i], free[j])])
}

#[test]
fn single_element_global_is_local_without_constrained_rows() {
    let model = clamped_plate([1, 1], 3);
    let state = SolutionState::reference(&model);
    let asm = assemble(&model, &state).unwrap();
    let em = element_matrices(&model.context(0), &state.kinematics(&model)).unwrap();
    assert_eq!(asm.stiffness.dim(), em.stiffness.nrows() - 4 * 5);
    let reduced = free_part(&model, &em.stiffness);
    let got = asm.stiffness.to_dense();
    for i in 0..reduced.nrows() {
        for j in 0..=i {
            assert_eq!(got[(i, j)], reduced[(i, j)]);
        }
    }
}

#[test]
fn two_element_patch_matches_hand_assembly() {
    let m = mesh(&scordelis_lo(), [2, 1], 4);
    let model = ShellModel::new(m, material(), Formulation::Semi, vec![]).unwrap();
    let mut state = SolutionState::reference(&model);
    for (i, u) in state.u.iter_mut().enumerate() {
        *u = Vector3::new(0.01 * (i as f64).sin(), 0.02 * (i as f64).cos(), 0.005);
    }
    let asm = assemble(&model, &state).unwrap();
    let oracle = brute_force(&model, &state);
    let got = asm.stiffness.to_dense();
    assert!((&got - &oracle).amax() <= 1e-12 * oracle.amax());
    // a node on the shared edge carries contributions of both elements
    let shared = model.mesh.node_id(4, 2);
    let o = model.dofs.offset(shared);
    let kin = state.kinematics(&model);
    let mut sum = 0.0;
    for e in 0..2 {
        let em = element_matrices(&model.context(e), &kin).unwrap();
        let local = model.mesh.elements[e].nodes.iter().position(|&g| g == shared).unwrap();
        sum += em.stiffness[(em.offsets[local], em.offsets[local])];
    }
    assert!((got[(o, o)] - sum).abs() <= 1e-12 * sum.abs());
}

#[test]
fn zero_load_converges_immediately() {
    let model = clamped_plate([1, 1], 4);
    let (state, report) = newton_solve(&SolverConfig::default(), &model, &LoadSet::default()).unwrap();
    assert_eq!(report.iterations_per_step, vec![1; 5]);
    assert!(state.u.iter().all(|u| *u == Vector3::zeros()));
}

#[test]
fn tiny_load_matches_linear_solution() {
    // in-plane shortening grows like w^2 / L, so the load must keep w / L
    // well below the tolerance
    let model = clamped_plate([2, 1], 4);
    let loads = LoadSet {
        edges: vec![(Edge::U1, [0.0, 0.0, 1e-10])],
        ..Default::default()
    };
    let f = model.reduce(&external_loads(&model, &loads).unwrap());
    let k0 = assemble(&model, &SolutionState::reference(&model)).unwrap().stiffness.to_dense();
    let linear = k0.lu().solve(&f).unwrap();
    let cfg = SolverConfig {
        load_steps: 1,
        ..Default::default()
    };
    let (state, _) = newton_solve(&cfg, &model, &loads).unwrap();
    let mut newton = DVector::zeros(model.num_free());
    for (i, u) in state.u.iter().enumerate() {
        for c in 0..3 {
            if let Some(eq) = model.dofs.equation(i, c) {
                newton[eq] = u[c];
            }
        }
    }
    let mut lin_u = DVector::zeros(model.num_free());
    for i in 0..state.u.len() {
        for c in 0..3 {
            if let Some(eq) = model.dofs.equation(i, c) {
                lin_u[eq] = linear[eq];
            }
        }
    }
    let rel = (&newton - &lin_u).norm() / lin_u.norm();
    assert!(rel <= 1e-8, "relative difference {rel:e}");
}

#[test]
fn solves_are_bitwise_reproducible() {
    let model = clamped_plate([2, 2], 3);
    let loads = LoadSet {
        edges: vec![(Edge::U1, [0.0, 0.5, 2.0])],
        surface: Some([0.0, 0.0, -1.0]),
        ..Default::default()
    };
    let cfg = SolverConfig::default();
    let (a, ra) = newton_solve(&cfg, &model, &loads).unwrap();
    let (b, rb) = newton_solve(&cfg, &model, &loads).unwrap();
    let bits = |h: &[spectral_shell::solver::IterationRecord]| {
        h.iter().map(|r| (r.residual_norm.to_bits(), r.energy_norm.to_bits())).collect::<Vec<_>>()
    };
    assert_eq!(bits(&ra.history), bits(&rb.history));
    assert_eq!(a.u, b.u);
}

#[test]
fn dense_and_skyline_solves_agree() {
    let model = clamped_plate([2, 1], 3);
    let loads = LoadSet {
        edges: vec![(Edge::U1, [0.0, 0.0, 2e-3])],
        ..Default::default()
    };
    let run = |linear| {
        let cfg = SolverConfig { linear, ..Default::default() };
        newton_solve(&cfg, &model, &loads).unwrap().0
    };
    let a = run(LinearSolver::Dense);
    let b = run(LinearSolver::SparseDirect);
    let tip = model.mesh.node_id(model.mesh.dims[0] - 1, 0);
    assert!((a.u[tip] - b.u[tip]).norm() < 1e-10 * a.u[tip].norm());
    assert!(a.u[tip].z > 0.0);
}

#[test]
fn unsupported_plate_is_singular() {
    let m = mesh(&plate(1.0, 1.0), [1, 1], 2);
    let model = ShellModel::new(m, material(), Formulation::Semi, vec![]).unwrap();
    let loads = LoadSet {
        points: vec![(0, [0.0, 0.0, 1.0])],
        ..Default::default()
    };
    let r = newton_solve(&SolverConfig::default(), &model, &loads);
    assert!(matches!(r, Err(SolverError::Singular { load_step: 1, iteration: 1, .. })));
}

#[test]
fn iteration_cap_reports_history() {
    let model = clamped_plate([1, 1], 4);
    let loads = LoadSet {
        edges: vec![(Edge::U1, [0.0, 0.0, 50.0])],
        ..Default::default()
    };
    let cfg = SolverConfig {
        load_steps: 1,
        max_iterations: 2,
        ..Default::default()
    };
    match newton_solve(&cfg, &model, &loads) {
        Err(SolverError::NotConverged { history, iterations, .. }) => {
            assert_eq!(iterations, 2);
            assert_eq!(history.len(), 2);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn prescribed_displacement_is_reached() {
    let m = mesh(&plate(2.0, 1.0), [1, 1], 3);
    let mut c = apply_symmetry_and_diaphragm(&m, Edge::U0, &EdgeCondition::clamped());
    for id in m.edge_nodes(Edge::U1) {
        c.push(Constraint {
            node: id,
            dof: DofKind::Translation(0),
            value: 0.01,
        });
    }
    let model = ShellModel::new(m, material(), Formulation::Semi, c).unwrap();
    let (state, _) = newton_solve(&SolverConfig::default(), &model, &LoadSet::default()).unwrap();
    for id in model.mesh.edge_nodes(Edge::U1) {
        assert!((state.u[id].x - 0.01).abs() < 1e-15);
    }
    let mid = model.mesh.node_id(1, 1);
    assert!(state.u[mid].x > 0.0 && state.u[mid].x < 0.01);
}

#[test]
fn scordelis_single_element_p6() {
    let m = mesh(&scordelis_lo(), [1, 1], 6);
    let mut c = apply_symmetry_and_diaphragm(&m, Edge::U0, &EdgeCondition::symmetry(0));
    c.extend(apply_symmetry_and_diaphragm(&m, Edge::V0, &EdgeCondition::symmetry(1)));
    c.extend(apply_symmetry_and_diaphragm(&m, Edge::V1, &EdgeCondition::diaphragm(1)));
    let a = m.node_id(m.dims[0] - 1, 0);
    let model = ShellModel::new(m, ShellMaterial::new(4.32e8, 0.0, 0.25).unwrap(), Formulation::Semi, c).unwrap();
    let loads = LoadSet {
        surface: Some([0.0, 0.0, -90.0]),
        ..Default::default()
    };
    let cfg = SolverConfig {
        load_steps: 1,
        ..Default::default()
    };
    let (state, _) = newton_solve(&cfg, &model, &loads).unwrap();
    let rel = (state.u[a].z + 0.25356483).abs() / 0.25356483;
    assert!(rel < 0.01, "u_z(A) = {}", state.u[a].z);
    for i in 0..state.u.len() {
        assert!((state.director(&model, i).norm() - 1.0).abs() < 1e-14);
    }
}
