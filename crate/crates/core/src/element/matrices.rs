//! Element tangent stiffness, internal forces and loads by GLL quadrature.
//!
//! Integration points coincide with nodes, so at point `Q` only the nodes on
//! the row and column through `Q` have nonzero shape-function derivatives and
//! only `Q` itself has a nonzero value. In [`LoopMode::Cross`] the node loops
//! visit exactly those nodes; [`LoopMode::Full`] visits all of them and adds
//! exact zeros elsewhere, so both modes produce identical matrices.

use std::ops::{Add, AddAssign};

use nalgebra::{DMatrix, DVector, Matrix2, SMatrix, Vector3};
use serde::Serialize;

use super::kinematics::NodalKinematics;
use super::strain::{jacobian_semi, jacobian_semn, shell_strains, Jacobian, StrainVector, StressResultants};
use super::{ElementError, Formulation, LoopMode};
use crate::geometry::{ShellNode, SpectralElement};
use crate::rotation::{m_matrix_with, RotationBasis};
use crate::spectral_basis::{CrossPattern, ShapeTable};

/// Scalar multiplications spent in the stiffness paths.
///
/// `k_e` counts building the B blocks, `C B` and `B^T (C B)`; `k_g` counts
/// the geometric stiffness. Everything else (Jacobian transforms, weighting
/// of `C` and the stresses, internal forces) goes to `overhead`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MultCounter {
    pub k_e: u64,
    pub k_g: u64,
    pub overhead: u64,
}

impl MultCounter {
    pub fn stiffness(&self) -> u64 {
        self.k_e + self.k_g
    }
}

impl AddAssign for MultCounter {
    fn add_assign(&mut self, o: Self) {
        self.k_e += o.k_e;
        self.k_g += o.k_g;
        self.overhead += o.overhead;
    }
}

impl Add for MultCounter {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

/// Closed-form `k_e` and `k_g` counts for one element of order `p` whose
/// nodes all carry five DOFs.
///
/// Per integration point and visited node: 54 multiplications to build the
/// B block and 320 for `C B`; per visited node pair 200 for `B^T (C B)`. The
/// geometric stiffness costs 30 per pair (shape products, the scalar
/// coefficients and the two coupling blocks) and 92 per node (the combined
/// moment vector, `M` and its congruence with `H T3`).
pub fn expected_counts(p: usize, mode: LoopMode) -> MultCounter {
    let nq = ((p + 1) * (p + 1)) as u64;
    let n = match mode {
        LoopMode::Cross => (2 * p + 1) as u64,
        LoopMode::Full => nq,
    };
    MultCounter {
        k_e: nq * (200 * n * n + 374 * n),
        k_g: nq * (30 * n * n + 92 * n),
        overhead: 0,
    }
}

/// Everything an element computation reads.
#[derive(Clone, Copy)]
pub struct ElementContext<'a> {
    pub element: &'a SpectralElement,
    pub nodes: &'a [ShellNode],
    pub table: &'a ShapeTable,
    pub cross: &'a CrossPattern,
    pub constitutive: &'a SMatrix<f64, 8, 8>,
    pub formulation: Formulation,
    pub mode: LoopMode,
}

/// Tangent `k_E + k_G`, internal force `int B^T sigma dA` and counters of one
/// element, in local DOF order (per node: `u_x, u_y, u_z`, then the
/// rotational DOFs).
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub offsets: Vec<usize>,
    pub stiffness: DMatrix<f64>,
    pub internal: DVector<f64>,
    pub counter: MultCounter,
}

impl ElementMatrices {
    /// `f_ext - f_int` for an external load vector in the same layout.
    pub fn residual(&self, external: &DVector<f64>) -> DVector<f64> {
        external - &self.internal
    }
}

/// Kinematic state at one integration point.
struct PointState {
    jac: Jacobian,
    /// Current `x,1`, `x,2`.
    x: [Vector3<f64>; 2],
    /// Current `d,1`, `d,2`.
    dl: [Vector3<f64>; 2],
    strain: StrainVector,
    area: f64,
}

fn element_j2(el: &SpectralElement) -> Matrix2<f64> {
    Matrix2::new(
        0.5 * (el.rect[0][1] - el.rect[0][0]),
        0.0,
        0.0,
        0.5 * (el.rect[1][1] - el.rect[1][0]),
    )
}

fn point_state(
    ctx: &ElementContext,
    kin: &[NodalKinematics],
    q: usize,
) -> Result<PointState, ElementError> {
    let el = ctx.element;
    let t = ctx.table;
    let n = t.n1d();
    let (qi, qj) = (q % n, q / n);
    let gq = el.nodes[q];
    let node_q = &ctx.nodes[gq];

    let mut x_xi = [Vector3::zeros(); 2];
    let mut dr_xi = [Vector3::zeros(); 2];
    let mut u_xi = [Vector3::zeros(); 2];
    let mut dd_xi = [Vector3::zeros(); 2];
    for m in 0..n {
        for (alpha, (g, c)) in [
            (el.nodes[m + qj * n], t.d1(qi, m)),
            (el.nodes[qi + m * n], t.d1(qj, m)),
        ]
        .into_iter()
        .enumerate()
        {
            let node = &ctx.nodes[g];
            u_xi[alpha] += kin[g].u * c;
            dd_xi[alpha] += kin[g].delta_d * c;
            if ctx.formulation == Formulation::Semi {
                x_xi[alpha] += node.position * c;
                dr_xi[alpha] += node.director * c;
            }
        }
    }
    let jac = match ctx.formulation {
        Formulation::Semi => jacobian_semi(&x_xi, &node_q.frame),
        Formulation::Semn => {
            let j2 = element_j2(el);
            for alpha in 0..2 {
                x_xi[alpha] = node_q.tangents[alpha] * j2[(alpha, alpha)];
                dr_xi[alpha] = node_q.director_derivs[alpha] * j2[(alpha, alpha)];
            }
            jacobian_semn(&node_q.tangents, &node_q.frame, &j2)
        }
    }
    .map_err(|e| match e {
        ElementError::DegenerateJacobian { det, .. } => ElementError::DegenerateJacobian {
            element: el.id,
            q,
            det,
        },
        other => other,
    })?;

    let xr = jac.transform_vec(&x_xi[0], &x_xi[1]);
    let dr = jac.transform_vec(&dr_xi[0], &dr_xi[1]);
    let du = jac.transform_vec(&u_xi[0], &u_xi[1]);
    let ddd = jac.transform_vec(&dd_xi[0], &dd_xi[1]);
    let x = [xr[0] + du[0], xr[1] + du[1]];
    let dl = [dr[0] + ddd[0], dr[1] + ddd[1]];
    let strain = shell_strains(&xr, &du, &node_q.director, &kin[gq].delta_d, &dr, &ddd);
    let area = x_xi[0].cross(&x_xi[1]).norm() * t.weight(q);
    Ok(PointState {
        jac,
        x,
        dl,
        strain,
        area,
    })
}

/// B block of one node: 8 rows, `3 + width` columns.
type Block = [[f64; 6]; 8];

/// Cumulative local DOF offsets (`3 + rotational DOFs` per node).
pub fn local_offsets(el: &SpectralElement, kin: &[NodalKinematics]) -> Vec<usize> {
    let mut off = Vec::with_capacity(el.nodes.len() + 1);
    off.push(0);
    for &g in &el.nodes {
        off.push(off[off.len() - 1] + 3 + kin[g].width());
    }
    off
}

/// Fills the B block of a node: `[n1, n2, nv]` are the local derivatives and
/// the value of its shape function at the point.
fn fill_b(bk: &mut Block, ps: &PointState, d: &Vector3<f64>, tk: &RotationBasis, n: [f64; 3]) {
    let [n1, n2, nv] = n;
    let [x1, x2] = ps.x;
    let [d1, d2] = ps.dl;
    let w = tk.width;
    let mut xt1 = [0.0; 3];
    let mut xt2 = [0.0; 3];
    for c in 0..w {
        let col = tk.cols.column(c);
        xt1[c] = x1.dot(&col);
        xt2[c] = x2.dot(&col);
    }
    for c in 0..3 {
        bk[0][c] = n1 * x1[c];
        bk[1][c] = n2 * x2[c];
        bk[2][c] = n1 * x2[c] + n2 * x1[c];
        bk[3][c] = n1 * d1[c];
        bk[4][c] = n2 * d2[c];
        bk[5][c] = n1 * d2[c] + n2 * d1[c];
        bk[6][c] = n1 * d[c];
        bk[7][c] = n2 * d[c];
    }
    for c in 0..w {
        bk[0][3 + c] = 0.0;
        bk[1][3 + c] = 0.0;
        bk[2][3 + c] = 0.0;
        bk[3][3 + c] = n1 * xt1[c];
        bk[4][3 + c] = n2 * xt2[c];
        bk[5][3 + c] = n1 * xt2[c] + n2 * xt1[c];
        bk[6][3 + c] = nv * xt1[c];
        bk[7][3 + c] = nv * xt2[c];
    }
}

/// Strain variation `B dv` at point `q` for a variation `dv` in local DOF
/// order.
pub fn strain_variation(
    ctx: &ElementContext,
    kin: &[NodalKinematics],
    q: usize,
    dv: &[f64],
) -> Result<StrainVector, ElementError> {
    let el = ctx.element;
    let t = ctx.table;
    let offsets = local_offsets(el, kin);
    let ps = point_state(ctx, kin, q)?;
    let d = kin[el.nodes[q]].d;
    let mut out = StrainVector::zeros();
    let mut bk: Block = [[0.0; 6]; 8];
    for (kk, &g) in el.nodes.iter().enumerate() {
        let [n1, n2] = ps.jac.transform(t.deriv1(q, kk), t.deriv2(q, kk));
        fill_b(&mut bk, &ps, &d, &kin[g].t, [n1, n2, t.value(q, kk)]);
        for c in 0..offsets[kk + 1] - offsets[kk] {
            for r in 0..8 {
                out[r] += bk[r][c] * dv[offsets[kk] + c];
            }
        }
    }
    Ok(out)
}

/// Tangent stiffness and internal forces of one element.
pub fn element_matrices(
    ctx: &ElementContext,
    kin: &[NodalKinematics],
) -> Result<ElementMatrices, ElementError> {
    let el = ctx.element;
    let t = ctx.table;
    let nen = t.nodes_per_element();
    let offsets = local_offsets(el, kin);
    let nd = offsets[nen];
    let mut k = DMatrix::<f64>::zeros(nd, nd);
    let mut f = DVector::<f64>::zeros(nd);
    let mut counter = MultCounter::default();

    let all: Vec<usize> = (0..nen).collect();
    // per node: local derivatives, value, B block and C B block (8 x (3 + w))
    let mut nb = vec![[0.0f64; 3]; nen];
    let mut b = vec![[[0.0f64; 6]; 8]; nen];
    let mut cb = vec![[[0.0f64; 6]; 8]; nen];

    for q in 0..nen {
        let ps = point_state(ctx, kin, q)?;
        let sigma: StressResultants = ctx.constitutive * ps.strain;
        let s = sigma * ps.area;
        let cw = ctx.constitutive * ps.area;
        counter.overhead += 8 + 64;
        let [x1, x2] = ps.x;
        let d = kin[el.nodes[q]].d;
        let set: &[usize] = match ctx.mode {
            LoopMode::Cross => ctx.cross.members(q),
            LoopMode::Full => &all,
        };

        for &kk in set {
            let tk = &kin[el.nodes[kk]].t;
            let w = tk.width;
            let [n1, n2] = ps.jac.transform(t.deriv1(q, kk), t.deriv2(q, kk));
            let nv = t.value(q, kk);
            counter.overhead += 4;
            nb[kk] = [n1, n2, nv];

            fill_b(&mut b[kk], &ps, &d, tk, [n1, n2, nv]);
            let bk = &b[kk];
            counter.k_e += (30 + 12 * w) as u64;

            let ncol = 3 + w;
            let cbk = &mut cb[kk];
            for r in 0..8 {
                for c in 0..ncol {
                    let mut acc = 0.0;
                    for m in 0..8 {
                        acc += cw[(r, m)] * bk[m][c];
                    }
                    cbk[r][c] = acc;
                }
            }
            counter.k_e += (64 * ncol) as u64;

            let ok = offsets[kk];
            for c in 0..ncol {
                let mut acc = 0.0;
                for r in 0..8 {
                    acc += bk[r][c] * s[r];
                }
                f[ok + c] += acc;
            }
            counter.overhead += (8 * ncol) as u64;
        }

        // material stiffness B_I^T (C B_K)
        for &ii in set {
            let oi = offsets[ii];
            let ni = offsets[ii + 1] - oi;
            let bi = &b[ii];
            for &kk in set {
                let ok = offsets[kk];
                let nk = offsets[kk + 1] - ok;
                let cbk = &cb[kk];
                for a in 0..ni {
                    for c in 0..nk {
                        let mut acc = 0.0;
                        for r in 0..8 {
                            acc += bi[r][a] * cbk[r][c];
                        }
                        k[(oi + a, ok + c)] += acc;
                    }
                }
                counter.k_e += (8 * ni * nk) as u64;
            }
        }

        // geometric stiffness, coupling blocks
        let (n11, n22, n12) = (s[0], s[1], s[2]);
        let (m11, m22, m12) = (s[3], s[4], s[5]);
        let (q1, q2) = (s[6], s[7]);
        for &ii in set {
            let [ni1, ni2, niv] = nb[ii];
            let ti = &kin[el.nodes[ii]].t;
            let oi = offsets[ii];
            for &kk in set {
                let [nk1, nk2, nkv] = nb[kk];
                let tk = &kin[el.nodes[kk]].t;
                let ok = offsets[kk];
                let s11 = ni1 * nk1;
                let s22 = ni2 * nk2;
                let s12 = ni1 * nk2;
                let s21 = ni2 * nk1;
                let n_hat = n11 * s11 + n22 * s22 + n12 * (s12 + s21);
                let m_hat = m11 * s11 + m22 * s22 + m12 * (s12 + s21);
                let q_hat = q1 * ni1 * nkv + q2 * ni2 * nkv;
                let q_tilde = q1 * niv * nk1 + q2 * niv * nk2;
                for c in 0..3 {
                    k[(oi + c, ok + c)] += n_hat;
                }
                let up = m_hat + q_hat;
                for c in 0..3 {
                    for bcol in 0..tk.width {
                        k[(oi + c, ok + 3 + bcol)] += up * tk.cols[(c, bcol)];
                    }
                }
                let low = m_hat + q_tilde;
                for a in 0..ti.width {
                    for c in 0..3 {
                        k[(oi + 3 + a, ok + c)] += ti.cols[(c, a)] * low;
                    }
                }
                counter.k_g += (18 + 3 * tk.width + 3 * ti.width) as u64;
            }
        }

        // geometric stiffness, rotational diagonal blocks
        for &ii in set {
            let [ni1, ni2, niv] = nb[ii];
            let kn = &kin[el.nodes[ii]];
            let a = m11 * ni1 + m12 * ni2 + q1 * niv;
            let bb = m12 * ni1 + m22 * ni2 + q2 * niv;
            let h = x1 * a + x2 * bb;
            let m = m_matrix_with(&kn.d, &kn.rotation, &kn.m_coefficients, &h);
            let w = kn.ht3.width;
            let mut mh = [[0.0; 3]; 3];
            for r in 0..3 {
                for c in 0..w {
                    let mut acc = 0.0;
                    for l in 0..3 {
                        acc += m[(r, l)] * kn.ht3.cols[(l, c)];
                    }
                    mh[r][c] = acc;
                }
            }
            let oi = offsets[ii] + 3;
            for r in 0..w {
                for c in 0..w {
                    let mut acc = 0.0;
                    for l in 0..3 {
                        acc += kn.ht3.cols[(l, r)] * mh[l][c];
                    }
                    k[(oi + r, oi + c)] += acc;
                }
            }
            counter.k_g += (12 + 50 + 9 * w + 3 * w * w) as u64;
        }
    }
    Ok(ElementMatrices {
        offsets,
        stiffness: k,
        internal: f,
        counter,
    })
}

/// Strains and stresses at one integration point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRecord {
    pub element: usize,
    pub q: usize,
    pub xi1: f64,
    pub xi2: f64,
    pub strain: [f64; 8],
    pub stress: [f64; 8],
}

pub fn quadrature_records(
    ctx: &ElementContext,
    kin: &[NodalKinematics],
) -> Result<Vec<QuadratureRecord>, ElementError> {
    (0..ctx.table.nodes_per_element())
        .map(|q| {
            let ps = point_state(ctx, kin, q)?;
            let sigma = ctx.constitutive * ps.strain;
            let (xi1, xi2) = ctx.table.point(q);
            Ok(QuadratureRecord {
                element: ctx.element.id,
                q,
                xi1,
                xi2,
                strain: ps.strain.into(),
                stress: sigma.into(),
            })
        })
        .collect()
}

/// Element side in the reference square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalEdge {
    /// `xi1 = -1`
    I0,
    /// `xi1 = +1`
    I1,
    /// `xi2 = -1`
    J0,
    /// `xi2 = +1`
    J1,
}

/// Dead loads on an element: a force per unit reference area and forces per
/// unit reference length on element sides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ElementLoads {
    pub surface: Option<Vector3<f64>>,
    pub edges: Vec<(LocalEdge, Vector3<f64>)>,
}

/// Consistent nodal forces of the dead loads, one vector per local node.
pub fn element_loads(
    ctx: &ElementContext,
    loads: &ElementLoads,
) -> Result<Vec<Vector3<f64>>, ElementError> {
    let el = ctx.element;
    let t = ctx.table;
    let n = t.n1d();
    let nen = t.nodes_per_element();
    let mut out = vec![Vector3::zeros(); nen];
    if let Some(p) = loads.surface {
        for (q, f) in out.iter_mut().enumerate() {
            *f += p * reference_area(ctx, q)?;
        }
    }
    let j2 = element_j2(el);
    let w = t.rule().weights();
    for (edge, load) in &loads.edges {
        let (fixed, along) = match edge {
            LocalEdge::I0 => (0, 1),
            LocalEdge::I1 => (n - 1, 1),
            LocalEdge::J0 => (0, 0),
            LocalEdge::J1 => (n - 1, 0),
        };
        let local = |m: usize| if along == 0 { m + fixed * n } else { fixed + m * n };
        for k in 0..n {
            let node = &ctx.nodes[el.nodes[local(k)]];
            let tangent = match ctx.formulation {
                Formulation::Semi => (0..n)
                    .map(|m| ctx.nodes[el.nodes[local(m)]].position * t.d1(k, m))
                    .sum::<Vector3<f64>>(),
                Formulation::Semn => node.tangents[along] * j2[(along, along)],
            };
            out[local(k)] += load * (tangent.norm() * w[k]);
        }
    }
    Ok(out)
}

/// `|X,xi1 x X,xi2| w_Q` in the reference configuration.
fn reference_area(ctx: &ElementContext, q: usize) -> Result<f64, ElementError> {
    let el = ctx.element;
    let t = ctx.table;
    let n = t.n1d();
    let (qi, qj) = (q % n, q / n);
    let x_xi = match ctx.formulation {
        Formulation::Semi => {
            let mut x = [Vector3::zeros(); 2];
            for m in 0..n {
                x[0] += ctx.nodes[el.nodes[m + qj * n]].position * t.d1(qi, m);
                x[1] += ctx.nodes[el.nodes[qi + m * n]].position * t.d1(qj, m);
            }
            x
        }
        Formulation::Semn => {
            let j2 = element_j2(el);
            let node = &ctx.nodes[el.nodes[q]];
            [node.tangents[0] * j2[(0, 0)], node.tangents[1] * j2[(1, 1)]]
        }
    };
    Ok(x_xi[0].cross(&x_xi[1]).norm() * t.weight(q))
}
