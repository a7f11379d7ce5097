//! Local nodal triads.

use nalgebra::Vector3;

use crate::rotation::NodalFrame;

const DEGENERATE: f64 = 1e-10;

fn from_first_axis(a1: Vector3<f64>, d: &Vector3<f64>) -> NodalFrame {
    let a2 = d.cross(&a1).normalize();
    NodalFrame::new([a1, a2, *d], false)
}

/// `A1 = G2 x D / |G2 x D|`, `A2 = D x A1`, `A3 = D`. Returns `None` when
/// `G2` is (nearly) parallel to `D` or vanishes.
pub fn nodal_frame(g2: &Vector3<f64>, d: &Vector3<f64>) -> Option<NodalFrame> {
    let len = g2.norm();
    if len == 0.0 {
        return None;
    }
    let c = (g2 / len).cross(d);
    let n = c.norm();
    (n >= DEGENERATE).then(|| from_first_axis(c / n, d))
}

/// Nodal frame falling back to `G1` and then to the global axis most
/// orthogonal to `D` when the tangent `G2` is degenerate.
pub fn nodal_frame_with_fallback(
    g1: &Vector3<f64>,
    g2: &Vector3<f64>,
    d: &Vector3<f64>,
) -> NodalFrame {
    if let Some(f) = nodal_frame(g2, d) {
        return f;
    }
    if let Some(f) = nodal_frame(g1, d) {
        return f;
    }
    let axis = (0..3)
        .map(|k| Vector3::ith(k, 1.0))
        .min_by(|a, b| a.dot(d).abs().total_cmp(&b.dot(d).abs()))
        .unwrap_or_else(Vector3::x);
    nodal_frame(&axis, d).unwrap_or_else(|| NodalFrame::new([Vector3::x(), Vector3::y(), *d], false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormal(f: &NodalFrame) -> bool {
        (0..3).all(|i| {
            (0..3).all(|j| {
                let e = if i == j { 1.0 } else { 0.0 };
                (f.reference[i].dot(&f.reference[j]) - e).abs() < 1e-13
            })
        })
    }

    #[test]
    fn flat_patch_frame() {
        let f = nodal_frame(&Vector3::y(), &Vector3::z()).unwrap();
        assert_eq!(f.reference, [Vector3::x(), Vector3::y(), Vector3::z()]);
        assert!(!f.intersection);
    }

    #[test]
    fn skewed_tangent_gives_orthonormal_triad() {
        let d = Vector3::new(0.2, -0.4, 0.9).normalize();
        let f = nodal_frame(&Vector3::new(1.0, 2.0, 0.3), &d).unwrap();
        assert!(orthonormal(&f));
        assert!(f.reference[0].dot(&d).abs() < 1e-14);
        assert!((f.reference[0].cross(&f.reference[1]) - d).norm() < 1e-14);
    }

    #[test]
    fn fallbacks() {
        let d = Vector3::z();
        assert!(nodal_frame(&Vector3::z(), &d).is_none());
        let f = nodal_frame_with_fallback(&Vector3::x(), &Vector3::z(), &d);
        assert!(orthonormal(&f));
        let f = nodal_frame_with_fallback(&Vector3::zeros(), &Vector3::zeros(), &d);
        assert!(orthonormal(&f));
        assert_eq!(f.reference[2], d);
    }
}
