//! Bilinearly blended Coons patches from four boundary curves.
//!
//! Curve orientation: `bottom` and `top` run in `u` at `v = 0` and `v = 1`,
//! `left` and `right` run in `v` at `u = 0` and `u = 1`.
//!
//! The blend is carried out on the control nets: linear functions are
//! reproduced exactly by Greville abscissae, so for polynomial boundaries the
//! result is the Coons surface itself written in the common tensor basis.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::nurbs::{CurveFile, KnotVector, NurbsCurve, SurfacePatch};
use super::GeometryError;

const CORNER_TOL: f64 = 1e-10;

/// How weights of rational boundary curves enter the interior of the net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoonsWeights {
    /// Interior control points blended in Euclidean space with unit interior
    /// weights; boundary rows keep the weights of their curves.
    #[default]
    BoundaryOnly,
    /// Weighted control points and weights blended in homogeneous space.
    Homogeneous,
}

/// On-disk form of a Coons construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoonsFile {
    pub top: CurveFile,
    pub bottom: CurveFile,
    pub left: CurveFile,
    pub right: CurveFile,
    #[serde(default)]
    pub weights: CoonsWeights,
}

impl CoonsFile {
    pub fn build(&self) -> Result<SurfacePatch, GeometryError> {
        coons_patch(
            &NurbsCurve::from_file(&self.top)?,
            &NurbsCurve::from_file(&self.bottom)?,
            &NurbsCurve::from_file(&self.left)?,
            &NurbsCurve::from_file(&self.right)?,
            self.weights,
        )
    }
}

fn merged_knots(a: &NurbsCurve, b: &NurbsCurve) -> Result<Vec<f64>, GeometryError> {
    if a.degree() != b.degree() {
        return Err(GeometryError::DegreeMismatch(a.degree(), b.degree()));
    }
    if a.knots().domain() != b.knots().domain() {
        return Err(GeometryError::InvalidKnots(
            "opposite boundary curves span different parameter ranges".into(),
        ));
    }
    let mut out = Vec::new();
    for v in a.knots().breakpoints() {
        let ma = a.knots().values().iter().filter(|&&x| x == v).count();
        let mb = b.knots().values().iter().filter(|&&x| x == v).count();
        out.extend(std::iter::repeat_n(v, ma.max(mb)));
    }
    for v in b.knots().breakpoints() {
        if !out.contains(&v) {
            let mb = b.knots().values().iter().filter(|&&x| x == v).count();
            out.extend(std::iter::repeat_n(v, mb));
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn corner(name: &'static str, a: Vector3<f64>, b: Vector3<f64>) -> Result<(), GeometryError> {
    let gap = (a - b).norm();
    if gap > CORNER_TOL {
        return Err(GeometryError::CornerMismatch { corner: name, gap });
    }
    Ok(())
}

/// Normalized Greville abscissae of a knot vector.
fn greville(k: &KnotVector) -> Vec<f64> {
    let (lo, hi) = k.domain();
    (0..k.count()).map(|i| (k.greville(i) - lo) / (hi - lo)).collect()
}

/// Coons patch through four boundary curves.
pub fn coons_patch(
    top: &NurbsCurve,
    bottom: &NurbsCurve,
    left: &NurbsCurve,
    right: &NurbsCurve,
    weights: CoonsWeights,
) -> Result<SurfacePatch, GeometryError> {
    corner("(0,0)", bottom.start(), left.start())?;
    corner("(1,0)", bottom.end(), right.start())?;
    corner("(0,1)", top.start(), left.end())?;
    corner("(1,1)", top.end(), right.end())?;

    let ku = merged_knots(top, bottom)?;
    let kv = merged_knots(left, right)?;
    let top = top.refined_to(&ku)?;
    let bottom = bottom.refined_to(&ku)?;
    let left = left.refined_to(&kv)?;
    let right = right.refined_to(&kv)?;
    let knots_u = KnotVector::new(ku, top.degree())?;
    let knots_v = KnotVector::new(kv, left.degree())?;
    let (nu, nv) = (knots_u.count(), knots_v.count());
    let r = greville(&knots_u);
    let s = greville(&knots_v);

    // Blends a quantity given on the four boundary nets.
    fn blend<T>(
        nu: usize,
        nv: usize,
        r: &[f64],
        s: &[f64],
        b: &[T],
        t: &[T],
        l: &[T],
        rt: &[T],
    ) -> Vec<T>
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let mut out = Vec::with_capacity(nu * nv);
        for j in 0..nv {
            for i in 0..nu {
                let (ri, sj) = (r[i], s[j]);
                let ruled_v = b[i] * (1.0 - sj) + t[i] * sj;
                let ruled_u = l[j] * (1.0 - ri) + rt[j] * ri;
                let bilinear = b[0] * ((1.0 - ri) * (1.0 - sj))
                    + b[nu - 1] * (ri * (1.0 - sj))
                    + t[0] * ((1.0 - ri) * sj)
                    + t[nu - 1] * (ri * sj);
                out.push(ruled_v + ruled_u - bilinear);
            }
        }
        out
    }

    let (pts, ws) = match weights {
        CoonsWeights::BoundaryOnly => {
            let mut pts = blend(
                nu,
                nv,
                &r,
                &s,
                bottom.control_points(),
                top.control_points(),
                left.control_points(),
                right.control_points(),
            );
            let mut ws = vec![1.0; nu * nv];
            for i in 0..nu {
                ws[i] = bottom.weights()[i];
                ws[(nv - 1) * nu + i] = top.weights()[i];
                pts[i] = bottom.control_points()[i];
                pts[(nv - 1) * nu + i] = top.control_points()[i];
            }
            for j in 0..nv {
                ws[j * nu] = left.weights()[j];
                ws[j * nu + nu - 1] = right.weights()[j];
                pts[j * nu] = left.control_points()[j];
                pts[j * nu + nu - 1] = right.control_points()[j];
            }
            (pts, ws)
        }
        CoonsWeights::Homogeneous => {
            let hom = |c: &NurbsCurve| -> Vec<Vector3<f64>> {
                c.control_points().iter().zip(c.weights()).map(|(p, w)| p * *w).collect()
            };
            let hp = blend(
                nu,
                nv,
                &r,
                &s,
                &hom(&bottom),
                &hom(&top),
                &hom(&left),
                &hom(&right),
            );
            let ws = blend(
                nu,
                nv,
                &r,
                &s,
                bottom.weights(),
                top.weights(),
                left.weights(),
                right.weights(),
            );
            let pts = hp.iter().zip(&ws).map(|(p, w)| p / *w).collect();
            (pts, ws)
        }
    };
    SurfacePatch::new(knots_u, knots_v, pts, Some(ws))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(a: Vector3<f64>, b: Vector3<f64>) -> NurbsCurve {
        NurbsCurve::new(KnotVector::uniform_open(1, 1).unwrap(), vec![a, b], None).unwrap()
    }

    #[test]
    fn unit_square_is_bilinear() {
        let p00 = Vector3::new(0.0, 0.0, 0.0);
        let p10 = Vector3::new(1.0, 0.0, 0.0);
        let p01 = Vector3::new(0.0, 1.0, 0.0);
        let p11 = Vector3::new(1.0, 1.0, 0.0);
        let s = coons_patch(
            &line(p01, p11),
            &line(p00, p10),
            &line(p00, p01),
            &line(p10, p11),
            CoonsWeights::BoundaryOnly,
        )
        .unwrap();
        let c = s.eval(0.5, 0.5).unwrap().position;
        assert!((c - Vector3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn corner_mismatch_is_rejected() {
        let p00 = Vector3::new(0.0, 0.0, 0.0);
        let p10 = Vector3::new(1.0, 0.0, 0.0);
        let p01 = Vector3::new(0.0, 1.0, 0.0);
        let p11 = Vector3::new(1.0, 1.0, 0.0);
        let err = coons_patch(
            &line(p01, p11 + Vector3::new(0.0, 0.0, 1e-6)),
            &line(p00, p10),
            &line(p00, p01),
            &line(p10, p11),
            CoonsWeights::BoundaryOnly,
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::CornerMismatch { corner: "(1,1)", .. }));
    }

    #[test]
    fn degree_mismatch_is_rejected() {
        let p00 = Vector3::new(0.0, 0.0, 0.0);
        let p10 = Vector3::new(1.0, 0.0, 0.0);
        let p01 = Vector3::new(0.0, 1.0, 0.0);
        let p11 = Vector3::new(1.0, 1.0, 0.0);
        let quad = NurbsCurve::new(
            KnotVector::uniform_open(2, 1).unwrap(),
            vec![p01, (p01 + p11) / 2.0, p11],
            None,
        )
        .unwrap();
        let err = coons_patch(
            &quad,
            &line(p00, p10),
            &line(p00, p01),
            &line(p10, p11),
            CoonsWeights::BoundaryOnly,
        )
        .unwrap_err();
        assert_eq!(err, GeometryError::DegreeMismatch(2, 1));
    }
}
