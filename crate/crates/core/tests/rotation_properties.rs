use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use spectral_shell::rotation::{rodrigues, t_matrix, NodalFrame, RotationState};

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-r..r).prop_map(Vector3::from)
}

fn frame(d: Vector3<f64>) -> NodalFrame {
    let d = d.normalize();
    let a1 = if d.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let a1 = (a1 - d * d.dot(&a1)).normalize();
    NodalFrame::new([a1, d.cross(&a1), d], false)
}

proptest! {
    #[test]
    fn rotation_is_orthogonal(w in vec3(6.0)) {
        let r = rodrigues(&w);
        prop_assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-13);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn axis_is_fixed(w in vec3(6.0)) {
        prop_assert!((rodrigues(&w) * w - w).norm() < 1e-13 * (1.0 + w.norm()));
    }

    #[test]
    fn director_keeps_unit_length(w in vec3(6.0), d in vec3(1.0)) {
        prop_assume!(d.norm() > 0.1);
        let d = d.normalize();
        let s = RotationState::new(w);
        prop_assert!(((s.rotation_matrix() * d).norm() - 1.0).abs() < 1e-14);
        prop_assert!(((d + s.rotation_increment(&d)).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn t_matrix_is_director_derivative(
        w in vec3(2.5),
        d0 in vec3(1.0),
        beta in prop::array::uniform2(-1.0f64..1.0),
    ) {
        prop_assume!(d0.norm() > 0.1);
        let f0 = frame(d0);
        let r = rodrigues(&w);
        let f = f0.rotated(&r);
        let dir = |om: &Vector3<f64>| rodrigues(om) * f0.reference[2];
        let t = t_matrix(&dir(&w), &w, &f);
        let dw = f.current[0] * beta[0] + f.current[1] * beta[1];
        let h = 1e-6;
        let fd = (dir(&(w + dw * h)) - dir(&(w - dw * h))) / (2.0 * h);
        let an = t.apply(&beta);
        prop_assert!((fd - an).norm() < 1e-8 * (1.0 + an.norm()), "fd {} vs {}", fd, an);
    }
}
