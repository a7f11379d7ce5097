//! Finite rotation machinery for the additive update of nodal rotation vectors.
//!
//! The total rotation `omega` of a node is stored as a global axial vector. The
//! rotated director is always produced as `d = R(omega) D`, so `|d| = 1` holds
//! up to round-off of an orthogonal matrix product regardless of how many
//! updates were applied.
//!
//! All trigonometric quotients switch to their Taylor series below
//! [`SERIES_THRESHOLD`]. Twelve terms in `omega^2` keep the truncation error
//! below 1e-19 at the switch point, where the closed forms are still accurate
//! to about 1e-13.

use nalgebra::{Matrix3, Vector3};

/// Rotation angle below which the series expansions replace the closed forms.
pub const SERIES_THRESHOLD: f64 = 1.0;

/// `|omega|` above which a warning is raised: the rotation vector parametrization
/// becomes singular at `2 pi`.
pub const SINGULARITY_WARNING: f64 = 1.8 * std::f64::consts::PI;

const SIN_OVER_W: [f64; 12] = [
    1.0,
    -0.16666666666666666,
    0.008333333333333333,
    -0.0001984126984126984,
    2.7557319223985893e-06,
    -2.505210838544172e-08,
    1.6059043836821613e-10,
    -7.647163731819816e-13,
    2.8114572543455206e-15,
    -8.22063524662433e-18,
    1.9572941063391263e-20,
    -3.868170170630684e-23,
];
const ONE_MINUS_COS_OVER_W2: [f64; 12] = [
    0.5,
    -0.041666666666666664,
    0.001388888888888889,
    -2.48015873015873e-05,
    2.755731922398589e-07,
    -2.08767569878681e-09,
    1.1470745597729725e-11,
    -4.779477332387385e-14,
    1.5619206968586225e-16,
    -4.110317623312165e-19,
    8.896791392450574e-22,
    -1.6117375710961184e-24,
];
const W_MINUS_SIN_OVER_W3: [f64; 12] = [
    0.16666666666666666,
    -0.008333333333333333,
    0.0001984126984126984,
    -2.7557319223985893e-06,
    2.505210838544172e-08,
    -1.6059043836821613e-10,
    7.647163731819816e-13,
    -2.8114572543455206e-15,
    8.22063524662433e-18,
    -1.9572941063391263e-20,
    3.868170170630684e-23,
    -6.446950284384474e-26,
];
const C3_SERIES: [f64; 12] = [
    0.16666666666666666,
    0.002777777777777778,
    6.613756613756614e-05,
    1.6534391534391535e-06,
    4.17535139757362e-08,
    1.0568380277374986e-09,
    2.6765073061369358e-11,
    6.779360592645165e-13,
    1.717212411255569e-14,
    4.349737397116124e-16,
    1.1018005656720459e-17,
    2.7908929371625045e-19,
];
const C10_BAR_SERIES: [f64; 12] = [
    0.16666666666666666,
    0.005555555555555556,
    0.0001984126984126984,
    6.613756613756614e-06,
    2.08767569878681e-07,
    6.3410281664249915e-09,
    1.873555114295855e-10,
    5.423488474116132e-12,
    1.545491170130012e-13,
    4.349737397116123e-15,
    1.2119806222392504e-16,
    3.3490715245950057e-18,
];
const C11_SERIES: [f64; 12] = [
    -0.002777777777777778,
    -0.00013227513227513228,
    -4.96031746031746e-06,
    -1.670140559029448e-07,
    -5.2841901386874934e-09,
    -1.6059043836821613e-10,
    -4.745552414851616e-12,
    -1.3737699290044552e-13,
    -3.914763657404511e-15,
    -1.1018005656720459e-16,
    -3.069982230878755e-18,
    -8.483296895110721e-20,
];

/// Evaluates `sum_k c[k] w2^k` by Horner's scheme.
fn series(c: &[f64; 12], w2: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * w2 + ck)
}

/// Skew-symmetric matrix with `skew(a) b = a x b`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Coefficients of the second variation `h . Delta delta d` that depend on the
/// rotation angle only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCoefficients {
    pub c3: f64,
    pub c10_bar: f64,
    pub c11: f64,
}

/// Total rotation vector of a node with its trigonometric values cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationState {
    omega: Vector3<f64>,
    norm: f64,
    sin: f64,
    cos: f64,
}

impl Default for RotationState {
    fn default() -> Self {
        Self::zero()
    }
}

impl RotationState {
    pub fn new(omega: Vector3<f64>) -> Self {
        let norm = omega.norm();
        Self {
            omega,
            norm,
            sin: norm.sin(),
            cos: norm.cos(),
        }
    }

    pub fn zero() -> Self {
        Self {
            omega: Vector3::zeros(),
            norm: 0.0,
            sin: 0.0,
            cos: 1.0,
        }
    }

    pub fn omega(&self) -> &Vector3<f64> {
        &self.omega
    }

    pub fn angle(&self) -> f64 {
        self.norm
    }

    pub fn sin(&self) -> f64 {
        self.sin
    }

    pub fn cos(&self) -> f64 {
        self.cos
    }

    /// `sin w / w` and `(1 - cos w) / w^2`.
    fn rodrigues_coefficients(&self) -> (f64, f64) {
        let w = self.norm;
        if w < SERIES_THRESHOLD {
            let w2 = w * w;
            (series(&SIN_OVER_W, w2), series(&ONE_MINUS_COS_OVER_W2, w2))
        } else {
            let half = (0.5 * w).sin();
            (self.sin / w, 2.0 * half * half / (w * w))
        }
    }

    /// `(1 - cos w) / w^2` and `(w - sin w) / w^3`.
    fn h_coefficients(&self) -> (f64, f64) {
        let w = self.norm;
        if w < SERIES_THRESHOLD {
            let w2 = w * w;
            (
                series(&ONE_MINUS_COS_OVER_W2, w2),
                series(&W_MINUS_SIN_OVER_W3, w2),
            )
        } else {
            let half = (0.5 * w).sin();
            (2.0 * half * half / (w * w), (w - self.sin) / (w * w * w))
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let (a, b) = self.rodrigues_coefficients();
        let om = skew(&self.omega);
        Matrix3::identity() + om * a + om * om * b
    }

    pub fn h_matrix(&self) -> Matrix3<f64> {
        let (a, b) = self.h_coefficients();
        let om = skew(&self.omega);
        Matrix3::identity() + om * a + om * om * b
    }

    pub fn m_coefficients(&self) -> MCoefficients {
        m_coefficients(self.norm, self.sin)
    }

    /// `(R - 1) v` without forming `R v - v`, accurate for small rotations.
    pub fn rotation_increment(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let (a, b) = self.rodrigues_coefficients();
        let wv = self.omega.cross(v);
        wv * a + self.omega.cross(&wv) * b
    }
}

/// Angle-dependent coefficients of the M matrix.
pub fn m_coefficients(w: f64, sin: f64) -> MCoefficients {
    if w < SERIES_THRESHOLD {
        let w2 = w * w;
        MCoefficients {
            c3: series(&C3_SERIES, w2),
            c10_bar: series(&C10_BAR_SERIES, w2),
            c11: series(&C11_SERIES, w2),
        }
    } else {
        let half = (0.5 * w).sin();
        // cos w - 1 without cancellation
        let cm1 = -2.0 * half * half;
        let w2 = w * w;
        MCoefficients {
            c3: (w * sin + 2.0 * cm1) / (w2 * cm1),
            c10_bar: (sin - w) / (2.0 * w * cm1),
            c11: (4.0 * cm1 + w2 + w * sin) / (2.0 * w2 * w2 * cm1),
        }
    }
}

/// Rodrigues rotation tensor `R = 1 + sin w / w Omega + (1 - cos w) / w^2 Omega^2`.
pub fn rodrigues(omega: &Vector3<f64>) -> Matrix3<f64> {
    RotationState::new(*omega).rotation_matrix()
}

/// `H = 1 + (1 - cos w) / w^2 Omega + (w - sin w) / w^3 Omega^2`, relating the
/// variation of the axial vector to the spin of the rotated triad.
pub fn h_matrix(omega: &Vector3<f64>) -> Matrix3<f64> {
    RotationState::new(*omega).h_matrix()
}

/// Symmetric matrix `M(h)` with `h . Delta delta d = delta w^T M(h) Delta w`.
pub fn m_matrix(d: &Vector3<f64>, omega: &Vector3<f64>, h: &Vector3<f64>) -> Matrix3<f64> {
    let state = RotationState::new(*omega);
    m_matrix_with(d, &state, &state.m_coefficients(), h)
}

pub(crate) fn m_matrix_with(
    d: &Vector3<f64>,
    state: &RotationState,
    c: &MCoefficients,
    h: &Vector3<f64>,
) -> Matrix3<f64> {
    let omega = state.omega();
    let b = d.cross(h);
    let b_omega = b.dot(omega);
    let t = b * (-c.c3) + omega * (c.c11 * b_omega);
    let c10 = c.c10_bar * b_omega - d.dot(h);
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in i..3 {
            let v = 0.5 * (d[i] * h[j] + h[i] * d[j] + t[i] * omega[j] + omega[i] * t[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m[(i, i)] += c10;
    }
    m
}

/// Local nodal triad: reference axes `A_i`, rotated axes `a_i = R A_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalFrame {
    pub reference: [Vector3<f64>; 3],
    pub current: [Vector3<f64>; 3],
    pub intersection: bool,
}

impl NodalFrame {
    /// Frame in the reference configuration (`a_i = A_i`).
    pub fn new(reference: [Vector3<f64>; 3], intersection: bool) -> Self {
        Self {
            reference,
            current: reference,
            intersection,
        }
    }

    /// Rotational degrees of freedom carried by the node.
    pub fn rotation_dofs(&self) -> usize {
        if self.intersection {
            3
        } else {
            2
        }
    }

    /// Frame rotated by `R`.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        Self {
            reference: self.reference,
            current: [r * self.reference[0], r * self.reference[1], r * self.reference[2]],
            intersection: self.intersection,
        }
    }
}

/// Map from nodal rotational DOFs to increments of the global axial vector.
///
/// Three columns are always stored; only the first [`RotationBasis::width`]
/// are meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationBasis {
    pub cols: Matrix3<f64>,
    pub width: usize,
}

impl RotationBasis {
    pub fn apply(&self, beta: &[f64]) -> Vector3<f64> {
        assert_eq!(beta.len(), self.width, "rotation increment width mismatch");
        let mut out = Vector3::zeros();
        for (k, b) in beta.iter().enumerate() {
            out += self.cols.column(k) * *b;
        }
        out
    }

    pub fn column(&self, k: usize) -> Vector3<f64> {
        self.cols.column(k).into_owned()
    }

    /// `M * basis`, keeping the width.
    pub fn premul(&self, m: &Matrix3<f64>) -> RotationBasis {
        RotationBasis {
            cols: m * self.cols,
            width: self.width,
        }
    }
}

/// `T3 = 1` for intersection nodes, `[a_1, a_2]` otherwise.
pub fn t3_matrix(frame: &NodalFrame) -> RotationBasis {
    if frame.intersection {
        RotationBasis {
            cols: Matrix3::identity(),
            width: 3,
        }
    } else {
        let [a1, a2, _] = frame.current;
        RotationBasis {
            cols: Matrix3::from_columns(&[a1, a2, Vector3::zeros()]),
            width: 2,
        }
    }
}

/// `T = W^T H T3` with `W = skew(d)`, so that `delta d = T delta beta`.
pub fn t_matrix(d: &Vector3<f64>, omega: &Vector3<f64>, frame: &NodalFrame) -> RotationBasis {
    let h = h_matrix(omega);
    t3_matrix(frame).premul(&(skew(d).transpose() * h))
}

/// Additive update `omega <- omega + T3 delta_beta`; returns the new state and
/// the rotated frame.
pub fn update_rotation(
    state: &RotationState,
    delta_beta: &[f64],
    frame: &NodalFrame,
) -> (RotationState, NodalFrame) {
    let t3 = t3_matrix(frame);
    let omega = state.omega() + t3.apply(delta_beta);
    let next = RotationState::new(omega);
    if next.angle() > SINGULARITY_WARNING {
        log::warn!(
            "nodal rotation angle {:.4} rad approaches the 2*pi singularity of the rotation vector",
            next.angle()
        );
    }
    let r = next.rotation_matrix();
    (next, frame.rotated(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn flat_frame() -> NodalFrame {
        NodalFrame::new([Vector3::x(), Vector3::y(), Vector3::z()], false)
    }

    #[test]
    fn zero_rotation_is_identity() {
        assert_eq!(rodrigues(&Vector3::zeros()), Matrix3::identity());
        assert_eq!(h_matrix(&Vector3::zeros()), Matrix3::identity());
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = rodrigues(&Vector3::new(0.0, 0.0, PI / 2.0));
        assert!((r * Vector3::x() - Vector3::y()).norm() < 1e-14);
    }

    #[test]
    fn h_continuous_across_threshold() {
        let w: f64 = SERIES_THRESHOLD;
        let w2 = w * w;
        let closed = [(1.0 - w.cos()) / w2, (w - w.sin()) / (w2 * w)];
        let ser = [
            series(&ONE_MINUS_COS_OVER_W2, w2),
            series(&W_MINUS_SIN_OVER_W3, w2),
        ];
        for (a, b) in closed.iter().zip(ser) {
            assert!(((a - b) / a).abs() < 1e-11, "{a} vs {b}");
        }
        let a = h_matrix(&Vector3::new(0.0, 0.0, 1e-9));
        assert!((a - Matrix3::identity()).norm() < 1e-8);
    }

    #[test]
    fn h_at_pi_matches_high_precision_reference() {
        // (1 - cos pi)/pi^2 and (pi - sin pi)/pi^3 from 40-digit evaluation.
        let om = Vector3::new(0.0, 0.0, PI);
        let h = h_matrix(&om);
        let c1 = 0.2026423672846755428880999;
        let c2 = 0.1013211836423377714439647;
        let s = skew(&om);
        let expect = Matrix3::identity() + s * c1 + s * s * c2;
        assert!((h - expect).norm() < 1e-14);
    }

    #[test]
    fn m_coefficient_limits() {
        let c = m_coefficients(1e-8, (1e-8f64).sin());
        assert!((c.c3 - 1.0 / 6.0).abs() < 1e-15);
        assert!((c.c10_bar - 1.0 / 6.0).abs() < 1e-15);
        assert!((c.c11 + 1.0 / 360.0).abs() < 1e-15);
    }

    #[test]
    fn m_coefficients_match_high_precision_reference() {
        // 40-digit mpmath evaluation of the closed forms.
        let cases = [
            (0.3, 0.1669172035890552266408986, 0.1671682786446871641778122, -0.002789722840354861521262529),
            (1.0, 0.1695122782875480807319806, 0.1724274639787847457543837, -0.002915185691236665022403099),
        ];
        for (w, c3, c10, c11) in cases {
            let c = m_coefficients(w, w.sin());
            assert!((c.c3 - c3).abs() < 1e-14 * c3.abs(), "c3 at {w}");
            assert!((c.c10_bar - c10).abs() < 1e-14 * c10.abs(), "c10 at {w}");
            assert!((c.c11 - c11).abs() < 1e-12 * c11.abs(), "c11 at {w}");
        }
    }

    #[test]
    fn series_and_closed_forms_agree_at_switch() {
        let w = SERIES_THRESHOLD;
        let lo = m_coefficients(w * (1.0 - 1e-14), (w * (1.0 - 1e-14)).sin());
        let hi = m_coefficients(w, w.sin());
        for (a, b) in [(lo.c3, hi.c3), (lo.c10_bar, hi.c10_bar), (lo.c11, hi.c11)] {
            assert!(((a - b) / b).abs() < 1e-11, "{a} vs {b}");
        }
        let s_lo = RotationState::new(Vector3::new(w * (1.0 - 1e-14), 0.0, 0.0));
        let s_hi = RotationState::new(Vector3::new(w, 0.0, 0.0));
        let (a1, b1) = s_lo.rodrigues_coefficients();
        let (a2, b2) = s_hi.rodrigues_coefficients();
        let (c1, d1) = s_lo.h_coefficients();
        let (c2, d2) = s_hi.h_coefficients();
        for (a, b) in [(a1, a2), (b1, b2), (c1, c2), (d1, d2)] {
            assert!(((a - b) / b).abs() < 1e-11);
        }
    }

    #[test]
    fn t3_intersection_is_identity() {
        let f = NodalFrame::new([Vector3::x(), Vector3::y(), Vector3::z()], true);
        let t3 = t3_matrix(&f);
        assert_eq!(t3.width, 3);
        assert_eq!(t3.cols, Matrix3::identity());
    }

    #[test]
    fn t3_regular_undeformed() {
        let t3 = t3_matrix(&flat_frame());
        assert_eq!(t3.width, 2);
        assert_eq!(t3.column(0), Vector3::x());
        assert_eq!(t3.column(1), Vector3::y());
    }

    #[test]
    fn t_matrix_flat_reference() {
        // skew(e3)^T [e1 e2] = [-e2 | e1]
        let t = t_matrix(&Vector3::z(), &Vector3::zeros(), &flat_frame());
        assert!((t.column(0) + Vector3::y()).norm() < 1e-15);
        assert!((t.column(1) - Vector3::x()).norm() < 1e-15);
    }

    #[test]
    fn update_examples() {
        let f = flat_frame();
        let s0 = RotationState::zero();
        let (s, f1) = update_rotation(&s0, &[0.0, 0.0], &f);
        assert_eq!(s, s0);
        assert_eq!(f1.current, f.current);
        let (s, _) = update_rotation(&s0, &[PI / 2.0, 0.0], &f);
        assert!((s.omega() - Vector3::new(PI / 2.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn additive_update_is_path_dependent_but_norm_preserving() {
        let f = flat_frame();
        let d0 = Vector3::z();
        let s0 = RotationState::zero();
        let (s1, f1) = update_rotation(&s0, &[0.4, 0.0], &f);
        let (s2, _) = update_rotation(&s1, &[0.0, 0.5], &f1);
        let (s3, _) = update_rotation(&s0, &[0.4, 0.5], &f);
        assert!((s2.omega() - s3.omega()).norm() > 1e-3);
        assert!(((s2.rotation_matrix() * d0).norm() - 1.0).abs() < 1e-14);
        assert!(((s3.rotation_matrix() * d0).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn second_derivative_of_director_projection() {
        // Hessian of h . R(w) D by central differences against H^T M H.
        let d0 = Vector3::new(0.3, -0.2, 0.9).normalize();
        let h = Vector3::new(0.7, 0.1, -0.4);
        for om in [
            Vector3::new(0.5, -0.8, 0.3),
            Vector3::new(0.05, 0.02, -0.01),
            Vector3::new(1.5, 2.0, -0.7),
        ] {
            let f = |w: &Vector3<f64>| h.dot(&(rodrigues(w) * d0));
            let eps = 1e-4;
            let mut hess = Matrix3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    let mut ei = Vector3::zeros();
                    ei[i] = eps;
                    let mut ej = Vector3::zeros();
                    ej[j] = eps;
                    hess[(i, j)] = (f(&(om + ei + ej)) - f(&(om + ei - ej)) - f(&(om - ei + ej))
                        + f(&(om - ei - ej)))
                        / (4.0 * eps * eps);
                }
            }
            let d = rodrigues(&om) * d0;
            let hm = h_matrix(&om);
            let m = m_matrix(&d, &om, &h);
            assert!((hess - hm.transpose() * m * hm).norm() < 1e-6);
            assert_eq!(m, m.transpose());
        }
    }
}
