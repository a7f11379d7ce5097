//! Jacobians and Green-Lagrange shell strains in the local nodal frame.

use nalgebra::{Matrix2, SVector, Vector3};

use super::ElementError;
use crate::rotation::NodalFrame;

/// `[e11, e22, 2e12, k11, k22, 2k12, g1, g2]`.
pub type StrainVector = SVector<f64, 8>;
/// `[n11, n22, n12, m11, m22, m12, q1, q2]`.
pub type StressResultants = SVector<f64, 8>;

const MIN_DET: f64 = 1e-14;

/// `J[(a, b)] = dX/dxi_a . A_b` with its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian {
    pub j: Matrix2<f64>,
    pub inv: Matrix2<f64>,
    pub det: f64,
}

impl Jacobian {
    fn new(j: Matrix2<f64>) -> Result<Self, ElementError> {
        let det = j.determinant();
        if det.abs() < MIN_DET || !det.is_finite() {
            return Err(ElementError::DegenerateJacobian { element: 0, q: 0, det });
        }
        let inv = Matrix2::new(j[(1, 1)], -j[(0, 1)], -j[(1, 0)], j[(0, 0)]) / det;
        Ok(Self { j, inv, det })
    }

    /// Local derivatives `[N,1, N,2]` from parametric ones `[N,xi1, N,xi2]`.
    pub fn transform(&self, a: f64, b: f64) -> [f64; 2] {
        [
            self.inv[(0, 0)] * a + self.inv[(0, 1)] * b,
            self.inv[(1, 0)] * a + self.inv[(1, 1)] * b,
        ]
    }

    /// Same map applied to vector-valued derivatives.
    pub fn transform_vec(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> [Vector3<f64>; 2] {
        [
            a * self.inv[(0, 0)] + b * self.inv[(0, 1)],
            a * self.inv[(1, 0)] + b * self.inv[(1, 1)],
        ]
    }
}

fn project(t: &[Vector3<f64>; 2], frame: &NodalFrame) -> Matrix2<f64> {
    let a = &frame.reference;
    Matrix2::new(t[0].dot(&a[0]), t[0].dot(&a[1]), t[1].dot(&a[0]), t[1].dot(&a[1]))
}

/// Jacobian of the isoparametric map from the interpolated tangents
/// `X,xi1`, `X,xi2` and the reference nodal axes.
pub fn jacobian_semi(x_xi: &[Vector3<f64>; 2], frame: &NodalFrame) -> Result<Jacobian, ElementError> {
    Jacobian::new(project(x_xi, frame))
}

/// Two-stage Jacobian `J2 J1`: `J1` from exact patch tangents `X,eta`, `J2`
/// the derivative of the element placement `eta(xi)`.
pub fn jacobian_semn(
    x_eta: &[Vector3<f64>; 2],
    frame: &NodalFrame,
    j2: &Matrix2<f64>,
) -> Result<Jacobian, ElementError> {
    let j1 = project(x_eta, frame);
    if j1.determinant().abs() < MIN_DET || j2.determinant().abs() < MIN_DET {
        return Err(ElementError::DegenerateJacobian {
            element: 0,
            q: 0,
            det: j1.determinant() * j2.determinant(),
        });
    }
    Jacobian::new(j2 * j1)
}

/// Membrane, curvature and shear strains along the local axes from the
/// reference derivatives `xr = X,a`, `dr = D,a`, the director `D` and the
/// changes `du = u,a`, `delta_d = d - D`, `dd = (d - D),a`.
///
/// Written in terms of the changes so that small strains carry no
/// cancellation error from the reference terms.
pub fn shell_strains(
    xr: &[Vector3<f64>; 2],
    du: &[Vector3<f64>; 2],
    director: &Vector3<f64>,
    delta_d: &Vector3<f64>,
    dr: &[Vector3<f64>; 2],
    dd: &[Vector3<f64>; 2],
) -> StrainVector {
    let d = director + delta_d;
    let dl = [dr[0] + dd[0], dr[1] + dd[1]];
    StrainVector::from([
        du[0].dot(&(xr[0] + du[0] * 0.5)),
        du[1].dot(&(xr[1] + du[1] * 0.5)),
        xr[0].dot(&du[1]) + du[0].dot(&xr[1]) + du[0].dot(&du[1]),
        du[0].dot(&dl[0]) + xr[0].dot(&dd[0]),
        du[1].dot(&dl[1]) + xr[1].dot(&dd[1]),
        (du[0].dot(&dl[1]) + xr[0].dot(&dd[1])) + (du[1].dot(&dl[0]) + xr[1].dot(&dd[0])),
        du[0].dot(&d) + xr[0].dot(delta_d),
        du[1].dot(&d) + xr[1].dot(delta_d),
    ])
}
