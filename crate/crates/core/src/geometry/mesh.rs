//! Spectral element layouts on a patch and exact node placement.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::nurbs::SurfacePatch;
use super::GeometryError;
use crate::element::frame::nodal_frame_with_fallback;
use crate::rotation::NodalFrame;
use crate::spectral_basis::gll_rule;

/// How element borders were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Evenly spaced borders in the patch parameter space.
    Esk,
    /// Borders at the internal CAD knots, spans subdivided as needed.
    Cad,
    /// Borders given explicitly.
    Custom,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Esk => "esk",
            Scenario::Cad => "cad",
            Scenario::Custom => "custom",
        })
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "esk" => Ok(Scenario::Esk),
            "cad" => Ok(Scenario::Cad),
            "custom" => Ok(Scenario::Custom),
            other => Err(format!("unknown scenario `{other}` (expected esk, cad or custom)")),
        }
    }
}

/// Patch boundary: `U0` is `eta1 = 0`, `V1` is `eta2 = 1`, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    U0,
    U1,
    V0,
    V1,
}

impl FromStr for Edge {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "u0" => Ok(Edge::U0),
            "u1" => Ok(Edge::U1),
            "v0" => Ok(Edge::V0),
            "v1" => Ok(Edge::V1),
            other => Err(GeometryError::UnknownEdge(other.to_string())),
        }
    }
}

impl Edge {
    /// Parametric direction running along the edge (0 for `eta1`, 1 for `eta2`).
    pub fn tangent_direction(&self) -> usize {
        match self {
            Edge::U0 | Edge::U1 => 1,
            Edge::V0 | Edge::V1 => 0,
        }
    }
}

/// Axis-aligned tiling of the patch parameter domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshLayout {
    pub borders_u: Vec<f64>,
    pub borders_v: Vec<f64>,
    pub scenario: Scenario,
}

fn even(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    v[n] = hi;
    v
}

/// Splits the spans between `breaks` into `n` elements, the extra elements
/// placed symmetrically (middle span first, then pairs from the outside in).
fn subdivide(breaks: &[f64], n: usize) -> Result<Vec<f64>, GeometryError> {
    let spans = breaks.len() - 1;
    if n < spans {
        return Err(GeometryError::InvalidLayout(format!(
            "{n} elements cannot align with {spans} knot spans"
        )));
    }
    let mut counts = vec![n / spans; spans];
    let mut rem = n % spans;
    if rem % 2 == 1 {
        counts[spans / 2] += 1;
        rem -= 1;
    }
    let mut k = 0;
    while rem > 0 {
        counts[k] += 1;
        counts[spans - 1 - k] += 1;
        rem -= 2;
        k += 1;
    }
    let mut out = vec![breaks[0]];
    for (s, &c) in counts.iter().enumerate() {
        let seg = even(breaks[s], breaks[s + 1], c);
        out.extend_from_slice(&seg[1..]);
    }
    Ok(out)
}

fn check_borders(b: &[f64], lo: f64, hi: f64) -> Result<(), GeometryError> {
    if b.len() < 2 {
        return Err(GeometryError::InvalidLayout("need at least two borders".into()));
    }
    if b.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GeometryError::InvalidLayout("borders must increase strictly".into()));
    }
    if (b[0] - lo).abs() > 1e-12 || (b[b.len() - 1] - hi).abs() > 1e-12 {
        return Err(GeometryError::InvalidLayout(format!(
            "borders must span [{lo}, {hi}]"
        )));
    }
    Ok(())
}

impl MeshLayout {
    pub fn evenly(patch: &SurfacePatch, nu: usize, nv: usize) -> Result<Self, GeometryError> {
        if nu == 0 || nv == 0 {
            return Err(GeometryError::InvalidLayout("element counts must be positive".into()));
        }
        let (u0, u1) = patch.knots_u().domain();
        let (v0, v1) = patch.knots_v().domain();
        Ok(Self {
            borders_u: even(u0, u1, nu),
            borders_v: even(v0, v1, nv),
            scenario: Scenario::Esk,
        })
    }

    pub fn cad(patch: &SurfacePatch, nu: usize, nv: usize) -> Result<Self, GeometryError> {
        Ok(Self {
            borders_u: subdivide(&patch.knots_u().breakpoints(), nu)?,
            borders_v: subdivide(&patch.knots_v().breakpoints(), nv)?,
            scenario: Scenario::Cad,
        })
    }

    pub fn custom(
        patch: &SurfacePatch,
        borders_u: Vec<f64>,
        borders_v: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        let (u0, u1) = patch.knots_u().domain();
        let (v0, v1) = patch.knots_v().domain();
        check_borders(&borders_u, u0, u1)?;
        check_borders(&borders_v, v0, v1)?;
        Ok(Self {
            borders_u,
            borders_v,
            scenario: Scenario::Custom,
        })
    }

    pub fn build(
        patch: &SurfacePatch,
        scenario: Scenario,
        nu: usize,
        nv: usize,
    ) -> Result<Self, GeometryError> {
        match scenario {
            Scenario::Esk => Self::evenly(patch, nu, nv),
            Scenario::Cad => Self::cad(patch, nu, nv),
            Scenario::Custom => Err(GeometryError::InvalidLayout(
                "custom layouts need explicit borders".into(),
            )),
        }
    }

    pub fn elements_u(&self) -> usize {
        self.borders_u.len() - 1
    }

    pub fn elements_v(&self) -> usize {
        self.borders_v.len() - 1
    }
}

/// Node of the spectral mesh with exact geometric data.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellNode {
    pub id: usize,
    pub grid: [usize; 2],
    pub param: [f64; 2],
    pub position: Vector3<f64>,
    /// Exact parametric tangents `X,eta1` and `X,eta2`.
    pub tangents: [Vector3<f64>; 2],
    pub director: Vector3<f64>,
    /// Exact parametric derivatives of the director.
    pub director_derivs: [Vector3<f64>; 2],
    pub frame: NodalFrame,
}

impl ShellNode {
    pub fn intersection(&self) -> bool {
        self.frame.intersection
    }
}

/// Element of order `p` with `(p+1)^2` nodes numbered `i + j (p+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralElement {
    pub id: usize,
    pub order: usize,
    pub nodes: Vec<usize>,
    /// Parametric rectangle `[[u_a, u_b], [v_a, v_b]]`.
    pub rect: [[f64; 2]; 2],
}

/// Conforming spectral mesh on one patch; nodes form a global grid of
/// `dims[0] x dims[1]` points with id `a + b * dims[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellMesh {
    pub order: usize,
    pub dims: [usize; 2],
    pub nodes: Vec<ShellNode>,
    pub elements: Vec<SpectralElement>,
    pub layout: MeshLayout,
}

impl ShellMesh {
    pub fn node_id(&self, a: usize, b: usize) -> usize {
        a + b * self.dims[0]
    }

    /// Node ids along an edge in increasing parameter order.
    pub fn edge_nodes(&self, edge: Edge) -> Vec<usize> {
        let [n1, n2] = self.dims;
        match edge {
            Edge::U0 => (0..n2).map(|b| self.node_id(0, b)).collect(),
            Edge::U1 => (0..n2).map(|b| self.node_id(n1 - 1, b)).collect(),
            Edge::V0 => (0..n1).map(|a| self.node_id(a, 0)).collect(),
            Edge::V1 => (0..n1).map(|a| self.node_id(a, n2 - 1)).collect(),
        }
    }

    /// Node whose parameter is closest to `(u, v)`.
    pub fn nearest_node(&self, u: f64, v: f64) -> usize {
        self.nodes
            .iter()
            .min_by(|a, b| {
                let da = (a.param[0] - u).powi(2) + (a.param[1] - v).powi(2);
                let db = (b.param[0] - u).powi(2) + (b.param[1] - v).powi(2);
                da.total_cmp(&db)
            })
            .map(|n| n.id)
            .unwrap_or(0)
    }

    /// Marks nodes as lying on a shell intersection (six DOFs).
    pub fn mark_intersection(&mut self, ids: &[usize]) {
        for &id in ids {
            self.nodes[id].frame.intersection = true;
        }
    }
}

fn grid_params(borders: &[f64], gll: &[f64], p: usize) -> Vec<f64> {
    let ne = borders.len() - 1;
    (0..=ne * p)
        .map(|a| {
            let e = (a / p).min(ne - 1);
            let i = a - e * p;
            let (lo, hi) = (borders[e], borders[e + 1]);
            if i == 0 {
                lo
            } else if i == p {
                hi
            } else {
                lo + 0.5 * (1.0 + gll[i]) * (hi - lo)
            }
        })
        .collect()
}

/// Places `(p+1)^2` nodes per element at GLL points mapped into each
/// parametric rectangle and evaluates positions, tangents and directors on
/// the exact surface. Nodes on shared element edges are stored once.
pub fn place_nodes(
    patch: &SurfacePatch,
    layout: &MeshLayout,
    p: usize,
) -> Result<ShellMesh, GeometryError> {
    let rule = gll_rule(p).map_err(|e| GeometryError::InvalidLayout(e.to_string()))?;
    let (u0, u1) = patch.knots_u().domain();
    let (v0, v1) = patch.knots_v().domain();
    check_borders(&layout.borders_u, u0, u1)?;
    check_borders(&layout.borders_v, v0, v1)?;
    let us = grid_params(&layout.borders_u, rule.nodes(), p);
    let vs = grid_params(&layout.borders_v, rule.nodes(), p);
    let dims = [us.len(), vs.len()];

    let mut nodes = Vec::with_capacity(dims[0] * dims[1]);
    for (b, &v) in vs.iter().enumerate() {
        for (a, &u) in us.iter().enumerate() {
            let pt = patch.eval(u, v)?;
            let [d, du, dv] = pt
                .director_derivatives()
                .ok_or(GeometryError::DegenerateTangents(u, v))?;
            nodes.push(ShellNode {
                id: a + b * dims[0],
                grid: [a, b],
                param: [u, v],
                position: pt.position,
                tangents: [pt.du, pt.dv],
                director: d,
                director_derivs: [du, dv],
                frame: nodal_frame_with_fallback(&pt.du, &pt.dv, &d),
            });
        }
    }

    let mut elements = Vec::new();
    for ev in 0..layout.elements_v() {
        for eu in 0..layout.elements_u() {
            let mut ids = Vec::with_capacity((p + 1) * (p + 1));
            for j in 0..=p {
                for i in 0..=p {
                    ids.push((eu * p + i) + (ev * p + j) * dims[0]);
                }
            }
            elements.push(SpectralElement {
                id: elements.len(),
                order: p,
                nodes: ids,
                rect: [
                    [layout.borders_u[eu], layout.borders_u[eu + 1]],
                    [layout.borders_v[ev], layout.borders_v[ev + 1]],
                ],
            });
        }
    }
    Ok(ShellMesh {
        order: p,
        dims,
        nodes,
        elements,
        layout: layout.clone(),
    })
}
