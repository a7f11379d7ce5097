//! Exact geometries of the benchmark shells.

use nalgebra::Vector3;

use super::coons::{coons_patch, CoonsWeights};
use super::nurbs::{KnotVector, NurbsCurve, SurfacePatch};

pub const SCORDELIS_RADIUS: f64 = 25.0;
/// Half length of the roof (the modelled quarter spans `0 <= y <= 25`).
pub const SCORDELIS_HALF_LENGTH: f64 = 25.0;
pub const SCORDELIS_ANGLE_DEG: f64 = 40.0;
pub const HEMISPHERE_RADIUS: f64 = 10.0;
pub const HEMISPHERE_HOLE_DEG: f64 = 18.0;

fn quadratic_open() -> KnotVector {
    KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).expect("static knots")
}

fn linear_open() -> KnotVector {
    KnotVector::new(vec![0.0, 0.0, 1.0, 1.0], 1).expect("static knots")
}

/// Quarter of the Scordelis-Lo roof. `u` runs along the arc from the crown
/// (`x = 0`) to the free edge at 40 degrees, `v` along the axis from midspan
/// (`y = 0`) to the diaphragm (`y = 25`). The cylinder axis is the `y` axis
/// and the crown sits at `z = R`.
pub fn scordelis_lo() -> SurfacePatch {
    let r = SCORDELIS_RADIUS;
    let half = (0.5 * SCORDELIS_ANGLE_DEG).to_radians();
    let full = SCORDELIS_ANGLE_DEG.to_radians();
    let arc = [
        (0.0, r),
        (r * half.tan(), r),
        (r * full.sin(), r * full.cos()),
    ];
    let wa = [1.0, half.cos(), 1.0];
    let mut pts = Vec::new();
    let mut ws = Vec::new();
    for y in [0.0, SCORDELIS_HALF_LENGTH] {
        for (k, (x, z)) in arc.iter().enumerate() {
            pts.push(Vector3::new(*x, y, *z));
            ws.push(wa[k]);
        }
    }
    SurfacePatch::new(quadratic_open(), linear_open(), pts, Some(ws)).expect("static patch")
}

/// Quarter hemisphere of radius 10 with an 18 degree hole at the top. `u` is
/// the azimuth from the `x` axis (0) to the `y` axis (90 degrees), `v` the
/// latitude from the equator (0) to 72 degrees.
pub fn hemisphere() -> SurfacePatch {
    let r = HEMISPHERE_RADIUS;
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let circle = [(1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let wc = [1.0, s2, 1.0];
    let top = (90.0 - HEMISPHERE_HOLE_DEG).to_radians();
    let half = 0.5 * top;
    let meridian = [(r, 0.0), (r, r * half.tan()), (r * top.cos(), r * top.sin())];
    let wm = [1.0, half.cos(), 1.0];
    let mut pts = Vec::new();
    let mut ws = Vec::new();
    for (j, (rho, z)) in meridian.iter().enumerate() {
        for (i, (cx, cy)) in circle.iter().enumerate() {
            pts.push(Vector3::new(cx * rho, cy * rho, *z));
            ws.push(wc[i] * wm[j]);
        }
    }
    SurfacePatch::new(quadratic_open(), quadratic_open(), pts, Some(ws)).expect("static patch")
}

fn cubic(knots: &[f64], pts: &[[f64; 3]], weights: Option<Vec<f64>>) -> NurbsCurve {
    let k = KnotVector::new(knots.to_vec(), 3).expect("static knots");
    NurbsCurve::new(k, pts.iter().map(|p| Vector3::from(*p)).collect(), weights)
        .expect("static curve")
}

/// Boundary curves (top, bottom, left, right) of the free-form Coons surface.
pub fn freeform_curves() -> [NurbsCurve; 4] {
    let k = [0.0, 0.0, 0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0, 1.0];
    let top = [
        [0.0, 0.0, 15.0],
        [11.0 / 9.0, 2.0 / 3.0, 15.0],
        [11.0 / 3.0, 2.0, 15.0],
        [22.0 / 3.0, 4.0, 15.0],
        [88.0 / 9.0, 16.0 / 3.0, 15.0],
        [11.0, 6.0, 15.0],
    ];
    let bottom = [
        [0.0, 0.0, 0.0],
        [5.0, 0.0, 0.0],
        [5.0, 5.0, 0.0],
        [10.0, 5.0, 0.0],
        [10.0, 0.0, 0.0],
        [11.0, 0.0, 0.0],
    ];
    let left = [
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 5.0],
        [0.0, 2.0, 7.0],
        [0.0, 2.0, 10.0],
        [0.0, 0.0, 12.0],
        [0.0, 0.0, 15.0],
    ];
    let right = [
        [11.0, 0.0, 0.0],
        [11.0, 0.0, 8.0 / 3.0],
        [11.0, 2.0 / 9.0, 62.0 / 9.0],
        [11.0, 17.0 / 9.0, 101.0 / 9.0],
        [11.0, 13.0 / 3.0, 41.0 / 3.0],
        [11.0, 6.0, 15.0],
    ];
    [
        cubic(&k, &top, None),
        cubic(&k, &bottom, None),
        cubic(&k, &left, None),
        cubic(&k, &right, None),
    ]
}

/// Boundary curves (top, bottom, left, right) of the rational free-form
/// surface; only the top curve carries non-unit weights.
pub fn freeform_nurbs_curves() -> [NurbsCurve; 4] {
    let k = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
    let top = [[0.0, 4.0, 5.0], [4.972, 7.188, 5.0], [-1.303, 5.255, 5.0], [5.0, 8.0, 5.0]];
    let bottom = [[0.0, 0.0, 0.0], [4.202, 4.150, 0.0], [0.938, -1.546, 0.0], [5.0, 4.0, 0.0]];
    let left = [[0.0, 0.0, 0.0], [0.0, 4.151, 4.202], [0.0, -1.547, 0.938], [0.0, 4.0, 5.0]];
    let right = [[5.0, 4.0, 0.0], [5.0, 8.151, 4.202], [5.0, 2.453, 0.938], [5.0, 8.0, 5.0]];
    [
        cubic(&k, &top, Some(vec![1.0, 1.5, 0.5, 1.0])),
        cubic(&k, &bottom, None),
        cubic(&k, &left, None),
        cubic(&k, &right, None),
    ]
}

pub fn freeform() -> SurfacePatch {
    let [t, b, l, r] = freeform_curves();
    coons_patch(&t, &b, &l, &r, CoonsWeights::BoundaryOnly).expect("static Coons data")
}

pub fn freeform_nurbs(weights: CoonsWeights) -> SurfacePatch {
    let [t, b, l, r] = freeform_nurbs_curves();
    coons_patch(&t, &b, &l, &r, weights).expect("static Coons data")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scordelis_points_lie_on_cylinder() {
        let s = scordelis_lo();
        for k in 0..=20 {
            let u = k as f64 / 20.0;
            let x = s.eval(u, 0.37).unwrap().position;
            assert!(((x.x * x.x + x.z * x.z).sqrt() - 25.0).abs() < 1e-12);
            let d = s.director(u, 0.37).unwrap();
            let radial = Vector3::new(x.x, 0.0, x.z);
            assert!((d.dot(&radial) - 25.0).abs() < 1e-10);
        }
        let edge = s.eval(1.0, 0.0).unwrap().position;
        assert!((edge.x.atan2(edge.z).to_degrees() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn hemisphere_points_lie_on_sphere() {
        let s = hemisphere();
        for k in 0..=10 {
            for l in 0..=10 {
                let x = s.eval(k as f64 / 10.0, l as f64 / 10.0).unwrap().position;
                assert!((x.norm() - 10.0).abs() < 1e-12);
            }
        }
        let top = s.eval(0.0, 1.0).unwrap().position;
        assert!(((top.z / 10.0).asin().to_degrees() - 72.0).abs() < 1e-10);
        assert!((s.eval(0.0, 0.0).unwrap().position - Vector3::new(10.0, 0.0, 0.0)).norm() < 1e-14);
        assert!((s.eval(1.0, 0.0).unwrap().position - Vector3::new(0.0, 10.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn freeform_corners() {
        let s = freeform();
        let c = s.eval(1.0, 1.0).unwrap().position;
        assert!((c - Vector3::new(11.0, 6.0, 15.0)).norm() < 1e-14);
        let s = freeform_nurbs(CoonsWeights::BoundaryOnly);
        let c = s.eval(0.0, 1.0).unwrap().position;
        assert!((c - Vector3::new(0.0, 4.0, 5.0)).norm() < 1e-14);
    }
}
