//! B-spline basis evaluation and rational curves and surfaces.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Parameters this close outside the knot range are clamped instead of rejected.
const RANGE_SLACK: f64 = 1e-12;

/// Open, non-decreasing knot vector of a given degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    values: Vec<f64>,
    degree: usize,
}

/// Nonzero basis functions at a parameter: `values[k]` belongs to basis
/// function `span - degree + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub span: usize,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl KnotVector {
    pub fn new(values: Vec<f64>, degree: usize) -> Result<Self, GeometryError> {
        if degree == 0 {
            return Err(GeometryError::InvalidKnots("degree must be at least 1".into()));
        }
        if values.len() < 2 * (degree + 1) {
            return Err(GeometryError::InvalidKnots(format!(
                "{} knots cannot carry degree {}",
                values.len(),
                degree
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidKnots("non-finite knot".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(GeometryError::InvalidKnots("knots must be non-decreasing".into()));
        }
        let n = values.len();
        let open_start = values[..=degree].iter().all(|&v| v == values[0]);
        let open_end = values[n - degree - 1..].iter().all(|&v| v == values[n - 1]);
        if !open_start || !open_end {
            return Err(GeometryError::InvalidKnots(format!(
                "end knots must be repeated {} times",
                degree + 1
            )));
        }
        if values[n - 1] <= values[0] {
            return Err(GeometryError::InvalidKnots("empty parameter range".into()));
        }
        Ok(Self { values, degree })
    }

    /// Open knot vector with `spans` equal intervals on [0, 1].
    pub fn uniform_open(degree: usize, spans: usize) -> Result<Self, GeometryError> {
        let spans = spans.max(1);
        let mut v = vec![0.0; degree + 1];
        v.extend((1..spans).map(|k| k as f64 / spans as f64));
        v.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(v, degree)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions.
    pub fn count(&self) -> usize {
        self.values.len() - self.degree - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.values[0], self.values[self.values.len() - 1])
    }

    /// Distinct knot values including both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &v in &self.values {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Greville abscissa of basis function `i`.
    pub fn greville(&self, i: usize) -> f64 {
        let p = self.degree;
        self.values[i + 1..=i + p].iter().sum::<f64>() / p as f64
    }

    fn clamp(&self, t: f64) -> Result<f64, GeometryError> {
        let (lo, hi) = self.domain();
        if t < lo - RANGE_SLACK || t > hi + RANGE_SLACK || t.is_nan() {
            return Err(GeometryError::OutOfRange { value: t, lo, hi });
        }
        Ok(t.clamp(lo, hi))
    }

    /// Index of the knot span containing `t`; the closed right end belongs to
    /// the last nonempty span.
    pub fn find_span(&self, t: f64) -> usize {
        let n = self.count();
        let p = self.degree;
        if t >= self.values[n] {
            return n - 1;
        }
        if t <= self.values[p] {
            return p;
        }
        let (mut lo, mut hi) = (p, n);
        let mut mid = (lo + hi) / 2;
        while t < self.values[mid] || t >= self.values[mid + 1] {
            if t < self.values[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
            mid = (lo + hi) / 2;
        }
        mid
    }
}

/// Nonzero basis functions of `knots` at `t` with first and second derivatives
/// (Cox-de Boor recursion with the derivative table of Piegl and Tiller).
pub fn bspline_basis(knots: &KnotVector, t: f64) -> Result<BasisEval, GeometryError> {
    let t = knots.clamp(t)?;
    let p = knots.degree;
    let u = &knots.values;
    let span = knots.find_span(t);

    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = t - u[span + 1 - j];
        right[j] = u[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let nder = 2.min(p);
    let mut ders = vec![vec![0.0; p + 1]; 3];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nder {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=nder {
        for v in ders[k].iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    let mut it = ders.into_iter();
    Ok(BasisEval {
        span,
        values: it.next().unwrap_or_default(),
        d1: it.next().unwrap_or_default(),
        d2: it.next().unwrap_or_default(),
    })
}

fn check_weights(weights: &[f64]) -> Result<(), GeometryError> {
    match weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        Some(&w) => Err(GeometryError::NonPositiveWeight(w)),
        None => Ok(()),
    }
}

/// Rational B-spline curve.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsCurve {
    knots: KnotVector,
    control_points: Vec<Vector3<f64>>,
    weights: Vec<f64>,
}

/// On-disk form of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<[f64; 3]>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl NurbsCurve {
    pub fn new(
        knots: KnotVector,
        control_points: Vec<Vector3<f64>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self, GeometryError> {
        let n = knots.count();
        if control_points.len() != n {
            return Err(GeometryError::ControlCount {
                expected: n,
                got: control_points.len(),
            });
        }
        let weights = weights.unwrap_or_else(|| vec![1.0; n]);
        if weights.len() != n {
            return Err(GeometryError::ControlCount {
                expected: n,
                got: weights.len(),
            });
        }
        check_weights(&weights)?;
        Ok(Self {
            knots,
            control_points,
            weights,
        })
    }

    pub fn from_file(file: &CurveFile) -> Result<Self, GeometryError> {
        let knots = KnotVector::new(file.knots.clone(), file.degree)?;
        let pts = file.control_points.iter().map(|p| Vector3::from(*p)).collect();
        Self::new(knots, pts, file.weights.clone())
    }

    pub fn to_file(&self) -> CurveFile {
        CurveFile {
            degree: self.knots.degree,
            knots: self.knots.values.clone(),
            control_points: self.control_points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            weights: Some(self.weights.clone()),
        }
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.knots.degree
    }

    pub fn control_points(&self) -> &[Vector3<f64>] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_rational(&self) -> bool {
        self.weights.iter().any(|&w| w != 1.0)
    }

    pub fn start(&self) -> Vector3<f64> {
        self.control_points[0]
    }

    pub fn end(&self) -> Vector3<f64> {
        self.control_points[self.control_points.len() - 1]
    }

    /// Point and first derivative.
    pub fn eval(&self, t: f64) -> Result<(Vector3<f64>, Vector3<f64>), GeometryError> {
        let b = bspline_basis(&self.knots, t)?;
        let p = self.knots.degree;
        let mut a = Vector3::zeros();
        let mut a1 = Vector3::zeros();
        let mut w = 0.0;
        let mut w1 = 0.0;
        for k in 0..=p {
            let idx = b.span - p + k;
            let wk = self.weights[idx];
            a += self.control_points[idx] * (b.values[k] * wk);
            a1 += self.control_points[idx] * (b.d1[k] * wk);
            w += b.values[k] * wk;
            w1 += b.d1[k] * wk;
        }
        let x = a / w;
        Ok((x, (a1 - x * w1) / w))
    }

    /// Inserts knot `t` once without changing the curve.
    pub fn insert_knot(&self, t: f64) -> Result<Self, GeometryError> {
        let t = self.knots.clamp(t)?;
        let p = self.knots.degree;
        let k = self.knots.find_span(t);
        let u = &self.knots.values;
        let hom: Vec<(Vector3<f64>, f64)> = self
            .control_points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| (p * w, w))
            .collect();
        let mut out = Vec::with_capacity(hom.len() + 1);
        for i in 0..=hom.len() {
            if i + p <= k {
                out.push(hom[i]);
            } else if i > k {
                out.push(hom[i - 1]);
            } else {
                let alpha = (t - u[i]) / (u[i + p] - u[i]);
                let (q0, w0) = hom[i - 1];
                let (q1, w1) = hom[i];
                out.push((q0 * (1.0 - alpha) + q1 * alpha, w0 * (1.0 - alpha) + w1 * alpha));
            }
        }
        let mut knots = u.clone();
        knots.insert(k + 1, t);
        let knots = KnotVector::new(knots, p)?;
        let pts = out.iter().map(|(q, w)| q / *w).collect();
        let ws = out.iter().map(|(_, w)| *w).collect();
        Self::new(knots, pts, Some(ws))
    }

    /// Curve refined so that its knot vector contains every knot of `target`
    /// (with at least the same multiplicity).
    pub fn refined_to(&self, target: &[f64]) -> Result<Self, GeometryError> {
        let mut curve = self.clone();
        for &t in target {
            let have = curve.knots.values.iter().filter(|&&v| v == t).count();
            let want = target.iter().filter(|&&v| v == t).count();
            for _ in have..want {
                curve = curve.insert_knot(t)?;
            }
        }
        Ok(curve)
    }
}

/// Position and parametric derivatives of a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub position: Vector3<f64>,
    pub du: Vector3<f64>,
    pub dv: Vector3<f64>,
    pub duu: Vector3<f64>,
    pub duv: Vector3<f64>,
    pub dvv: Vector3<f64>,
}

impl SurfacePoint {
    /// Unit normal `G1 x G2 / |G1 x G2|`.
    pub fn director(&self) -> Option<Vector3<f64>> {
        let n = self.du.cross(&self.dv);
        let len = n.norm();
        (len >= 1e-12).then(|| n / len)
    }

    /// Unit normal with its parametric derivatives.
    pub fn director_derivatives(&self) -> Option<[Vector3<f64>; 3]> {
        let n = self.du.cross(&self.dv);
        let len = n.norm();
        if len < 1e-12 {
            return None;
        }
        let d = n / len;
        let nu = self.duu.cross(&self.dv) + self.du.cross(&self.duv);
        let nv = self.duv.cross(&self.dv) + self.du.cross(&self.dvv);
        let du = (nu - d * d.dot(&nu)) / len;
        let dv = (nv - d * d.dot(&nv)) / len;
        Some([d, du, dv])
    }
}

/// Tensor-product NURBS surface. Control point `(i, j)` is stored at
/// `j * n_u + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatch {
    knots_u: KnotVector,
    knots_v: KnotVector,
    control_points: Vec<Vector3<f64>>,
    weights: Vec<f64>,
}

/// On-disk form of a surface patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchFile {
    pub degree_u: usize,
    pub degree_v: usize,
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    pub control_points: Vec<[f64; 3]>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl SurfacePatch {
    pub fn new(
        knots_u: KnotVector,
        knots_v: KnotVector,
        control_points: Vec<Vector3<f64>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self, GeometryError> {
        let n = knots_u.count() * knots_v.count();
        if control_points.len() != n {
            return Err(GeometryError::ControlCount {
                expected: n,
                got: control_points.len(),
            });
        }
        let weights = weights.unwrap_or_else(|| vec![1.0; n]);
        if weights.len() != n {
            return Err(GeometryError::ControlCount {
                expected: n,
                got: weights.len(),
            });
        }
        check_weights(&weights)?;
        Ok(Self {
            knots_u,
            knots_v,
            control_points,
            weights,
        })
    }

    pub fn from_file(file: &PatchFile) -> Result<Self, GeometryError> {
        let ku = KnotVector::new(file.knots_u.clone(), file.degree_u)?;
        let kv = KnotVector::new(file.knots_v.clone(), file.degree_v)?;
        let pts = file.control_points.iter().map(|p| Vector3::from(*p)).collect();
        Self::new(ku, kv, pts, file.weights.clone())
    }

    pub fn to_file(&self) -> PatchFile {
        PatchFile {
            degree_u: self.knots_u.degree,
            degree_v: self.knots_v.degree,
            knots_u: self.knots_u.values.clone(),
            knots_v: self.knots_v.values.clone(),
            control_points: self.control_points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            weights: Some(self.weights.clone()),
        }
    }

    pub fn knots_u(&self) -> &KnotVector {
        &self.knots_u
    }

    pub fn knots_v(&self) -> &KnotVector {
        &self.knots_v
    }

    pub fn control_points(&self) -> &[Vector3<f64>] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn control_point(&self, i: usize, j: usize) -> Vector3<f64> {
        self.control_points[j * self.knots_u.count() + i]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[j * self.knots_u.count() + i]
    }

    /// Exact rational surface point with first and second derivatives.
    pub fn eval(&self, u: f64, v: f64) -> Result<SurfacePoint, GeometryError> {
        let bu = bspline_basis(&self.knots_u, u)?;
        let bv = bspline_basis(&self.knots_v, v)?;
        let (pu, pv) = (self.knots_u.degree, self.knots_v.degree);
        let nu = self.knots_u.count();

        // homogeneous sums: [A, A_u, A_v, A_uu, A_uv, A_vv] and the same for W
        let mut a = [Vector3::zeros(); 6];
        let mut w = [0.0; 6];
        for l in 0..=pv {
            let j = bv.span - pv + l;
            for k in 0..=pu {
                let i = bu.span - pu + k;
                let idx = j * nu + i;
                let wi = self.weights[idx];
                let pw = self.control_points[idx] * wi;
                let f = [
                    bu.values[k] * bv.values[l],
                    bu.d1[k] * bv.values[l],
                    bu.values[k] * bv.d1[l],
                    bu.d2[k] * bv.values[l],
                    bu.d1[k] * bv.d1[l],
                    bu.values[k] * bv.d2[l],
                ];
                for (s, fs) in f.iter().enumerate() {
                    a[s] += pw * *fs;
                    w[s] += wi * fs;
                }
            }
        }
        if w[0].abs() < 1e-300 {
            return Err(GeometryError::ZeroDenominator(u, v));
        }
        let x = a[0] / w[0];
        let xu = (a[1] - x * w[1]) / w[0];
        let xv = (a[2] - x * w[2]) / w[0];
        let xuu = (a[3] - xu * (2.0 * w[1]) - x * w[3]) / w[0];
        let xuv = (a[4] - xu * w[2] - xv * w[1] - x * w[4]) / w[0];
        let xvv = (a[5] - xv * (2.0 * w[2]) - x * w[5]) / w[0];
        Ok(SurfacePoint {
            position: x,
            du: xu,
            dv: xv,
            duu: xuu,
            duv: xuv,
            dvv: xvv,
        })
    }

    /// Unit director `G1 x G2 / |G1 x G2|`.
    pub fn director(&self, u: f64, v: f64) -> Result<Vector3<f64>, GeometryError> {
        self.eval(u, v)?
            .director()
            .ok_or(GeometryError::DegenerateTangents(u, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn appendix_b_knots() -> KnotVector {
        KnotVector::new(vec![0.0, 0.0, 0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0, 1.0], 3).unwrap()
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(KnotVector::new(vec![0.0, 0.0, 1.0, 0.5, 1.0, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0.0, 0.5, 1.0, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0.0, 1.0], 1).is_err());
    }

    #[test]
    fn endpoint_interpolation() {
        let k = KnotVector::uniform_open(3, 4).unwrap();
        let b = bspline_basis(&k, 0.0).unwrap();
        assert_eq!(b.span, 3);
        assert_eq!(b.values, vec![1.0, 0.0, 0.0, 0.0]);
        let b = bspline_basis(&k, 1.0).unwrap();
        assert!((b.values[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partition_of_unity_and_derivative_sum() {
        let k = appendix_b_knots();
        for s in 0..=40 {
            let t = s as f64 / 40.0;
            let b = bspline_basis(&k, t).unwrap();
            assert!((b.values.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            assert!(b.d1.iter().sum::<f64>().abs() < 1e-13);
            assert!(b.d2.iter().sum::<f64>().abs() < 1e-11);
            assert!(b.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn derivatives_match_finite_differences_at_knot() {
        let k = appendix_b_knots();
        let full = |t: f64| {
            let b = bspline_basis(&k, t).unwrap();
            let mut v = vec![0.0; k.count()];
            for (i, x) in b.values.iter().enumerate() {
                v[b.span - 3 + i] = *x;
            }
            v
        };
        let t = 1.0 / 3.0;
        let h = 1e-6;
        let (fp, fm) = (full(t + h), full(t - h));
        let b = bspline_basis(&k, t).unwrap();
        for i in 0..k.count() {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            let an = if i + 3 >= b.span && i <= b.span { b.d1[i + 3 - b.span] } else { 0.0 };
            assert!((fd - an).abs() < 1e-6, "basis {i}: {fd} vs {an}");
        }
    }

    #[test]
    fn out_of_range_parameter() {
        let k = appendix_b_knots();
        assert!(matches!(bspline_basis(&k, 1.5), Err(GeometryError::OutOfRange { .. })));
        assert!(bspline_basis(&k, 1.0 + 1e-14).is_ok());
    }

    #[test]
    fn knot_insertion_preserves_curve() {
        let k = appendix_b_knots();
        let pts = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 2.0, 0.0),
            Vector3::new(2.0, -1.0, 1.0),
            Vector3::new(3.0, 0.5, 0.0),
            Vector3::new(4.0, 1.0, -1.0),
            Vector3::new(5.0, 0.0, 0.0),
        ];
        let c = NurbsCurve::new(k, pts, Some(vec![1.0, 1.5, 0.7, 1.0, 2.0, 1.0])).unwrap();
        let r = c.insert_knot(0.5).unwrap().insert_knot(1.0 / 3.0).unwrap();
        assert_eq!(r.control_points().len(), 8);
        for s in 0..=20 {
            let t = s as f64 / 20.0;
            let (a, da) = c.eval(t).unwrap();
            let (b, db) = r.eval(t).unwrap();
            assert!((a - b).norm() < 1e-13);
            assert!((da - db).norm() < 1e-11);
        }
    }

    #[test]
    fn flat_patch_director() {
        let ku = KnotVector::uniform_open(1, 1).unwrap();
        let kv = KnotVector::uniform_open(1, 1).unwrap();
        let pts = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(2.0, 0.0, 0.0),
            Vector3::new(0.0, 3.0, 0.0),
            Vector3::new(2.0, 3.0, 0.0),
        ];
        let s = SurfacePatch::new(ku, kv, pts, None).unwrap();
        assert_eq!(s.director(0.3, 0.8).unwrap(), Vector3::z());
        assert_eq!(s.eval(0.5, 0.5).unwrap().position, Vector3::new(1.0, 1.5, 0.0));
    }

    #[test]
    fn degenerate_tangents_are_reported() {
        let ku = KnotVector::uniform_open(1, 1).unwrap();
        let kv = KnotVector::uniform_open(1, 1).unwrap();
        let pts = vec![Vector3::zeros(), Vector3::x(), Vector3::zeros(), Vector3::x()];
        let s = SurfacePatch::new(ku, kv, pts, None).unwrap();
        assert_eq!(s.director(0.5, 0.5), Err(GeometryError::DegenerateTangents(0.5, 0.5)));
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let ku = KnotVector::uniform_open(1, 1).unwrap();
        let pts = vec![Vector3::zeros(), Vector3::x()];
        assert_eq!(
            NurbsCurve::new(ku, pts, Some(vec![1.0, 0.0])),
            Err(GeometryError::NonPositiveWeight(0.0))
        );
    }
}
