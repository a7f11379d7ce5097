//! Direct solvers for the symmetric tangent system.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Pivots below this fraction of the largest diagonal entry are singular.
const PIVOT_TOLERANCE: f64 = 1e-14;

/// Which factorization to use for the reduced system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearSolver {
    /// Dense up to [`DENSE_LIMIT`] equations, skyline above.
    #[default]
    Auto,
    Dense,
    SparseDirect,
}

/// Largest system solved densely by [`LinearSolver::Auto`]. The skyline
/// factorization exploits symmetry and was faster than the dense LU on every
/// shell system measured, down to a few dozen equations.
pub const DENSE_LIMIT: usize = 32;

/// Failure of a factorization: equation index and offending pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPivot {
    pub equation: usize,
    pub pivot: f64,
}

/// Symmetric matrix in variable-band (skyline) storage: row `i` keeps the
/// entries from its first structurally nonzero column up to the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SkylineMatrix {
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineMatrix {
    /// Zero matrix with the given first column of every row.
    pub fn new(first: Vec<usize>) -> Self {
        let mut start = Vec::with_capacity(first.len() + 1);
        start.push(0);
        for (i, &f) in first.iter().enumerate() {
            assert!(f <= i, "row {i} starts right of the diagonal");
            start.push(start[i] + i - f + 1);
        }
        let n = start[first.len()];
        Self {
            first,
            start,
            values: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Stored entries, the profile size.
    pub fn stored(&self) -> usize {
        self.values.len()
    }

    pub fn first(&self, row: usize) -> usize {
        self.first[row]
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        (j >= self.first[i]).then(|| self.start[i] + j - self.first[i])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.index(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to the lower-triangle entry `(i, j)`, `j <= i`.
    ///
    /// # Panics
    /// When `(i, j)` lies outside the profile.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i);
        let k = self.start[i] + j - self.first[i];
        self.values[k] += v;
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[self.start[i]..self.start[i + 1]]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for (k, &v) in self.row(i).iter().enumerate() {
                let j = self.first[i] + k;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut y = DVector::zeros(n);
        for i in 0..n {
            let f = self.first[i];
            let row = self.row(i);
            let mut s = 0.0;
            for (k, &v) in row[..row.len() - 1].iter().enumerate() {
                s += v * x[f + k];
                y[f + k] += v * x[i];
            }
            y[i] += s + row[row.len() - 1] * x[i];
        }
        y
    }

    /// In-place `L D L^T` factorization (unit `L` below the diagonal, `D` on it).
    pub fn factorize(mut self) -> Result<SkylineFactor, SingularPivot> {
        let n = self.dim();
        let max_diag = (0..n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max);
        let tol = PIVOT_TOLERANCE * max_diag.max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            // t_ij = a_ij - sum_k t_ik l_jk, with t_ik = l_ik d_k
            for j in fi..i {
                let fj = self.first[j];
                let m = fi.max(fj);
                let s = {
                    let ri = &self.values[si + m - fi..si + j - fi];
                    let rj = &self.values[self.start[j] + m - fj..self.start[j] + j - fj];
                    dot(ri, rj)
                };
                self.values[si + j - fi] -= s;
            }
            let mut d = self.values[si + i - fi];
            for j in fi..i {
                let t = self.values[si + j - fi];
                let dj = self.values[self.start[j + 1] - 1];
                let l = t / dj;
                d -= t * l;
                self.values[si + j - fi] = l;
            }
            if d.abs() <= tol || !d.is_finite() {
                return Err(SingularPivot { equation: i, pivot: d });
            }
            self.values[si + i - fi] = d;
        }
        Ok(SkylineFactor { m: self })
    }
}

/// Four-way unrolled dot product with a fixed summation order.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// Factorized skyline matrix.
#[derive(Debug, Clone)]
pub struct SkylineFactor {
    m: SkylineMatrix,
}

impl SkylineFactor {
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let m = &self.m;
        let n = m.dim();
        let mut x = b.clone();
        for i in 0..n {
            let f = m.first[i];
            let row = m.row(i);
            x[i] -= dot(&row[..row.len() - 1], &x.as_slice()[f..i]);
        }
        for i in 0..n {
            x[i] /= m.row(i)[i - m.first[i]];
        }
        for i in (0..n).rev() {
            let f = m.first[i];
            let xi = x[i];
            let row = m.row(i);
            for (k, &l) in row[..row.len() - 1].iter().enumerate() {
                x[f + k] -= l * xi;
            }
        }
        x
    }
}

/// Dense LU with partial pivoting; rejects tiny pivots like the skyline path.
fn dense_solve(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, SingularPivot> {
    let max_diag = a.diagonal().amax();
    let tol = PIVOT_TOLERANCE * max_diag.max(f64::MIN_POSITIVE);
    let lu = a.lu();
    if let Some((equation, &pivot)) = lu
        .u()
        .diagonal()
        .iter()
        .enumerate()
        .find(|(_, p)| p.abs() <= tol || !p.is_finite())
    {
        return Err(SingularPivot { equation, pivot });
    }
    lu.solve(b).ok_or(SingularPivot { equation: 0, pivot: 0.0 })
}

impl LinearSolver {
    pub fn uses_dense(self, n: usize) -> bool {
        match self {
            LinearSolver::Auto => n <= DENSE_LIMIT,
            LinearSolver::Dense => true,
            LinearSolver::SparseDirect => false,
        }
    }

    pub fn solve(self, k: SkylineMatrix, b: &DVector<f64>) -> Result<DVector<f64>, SingularPivot> {
        if self.uses_dense(k.dim()) {
            dense_solve(k.to_dense(), b)
        } else {
            Ok(k.factorize()?.solve(b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// SPD banded test matrix with a ragged profile.
    fn sample(n: usize) -> SkylineMatrix {
        let first: Vec<usize> = (0..n).map(|i| i.saturating_sub(1 + (i * 7) % 5)).collect();
        let mut m = SkylineMatrix::new(first.clone());
        for i in 0..n {
            for j in first[i]..i {
                m.add(i, j, ((i * 13 + j * 5) % 11) as f64 / 11.0 - 0.5);
            }
            m.add(i, i, 6.0 + (i % 3) as f64);
        }
        m
    }

    #[test]
    fn skyline_matches_dense_solution() {
        let m = sample(40);
        let dense = m.to_dense();
        let b = DVector::from_fn(40, |i, _| (i as f64).sin());
        let x = m.clone().factorize().unwrap().solve(&b);
        let reference = dense.clone().lu().solve(&b).unwrap();
        assert!((&x - &reference).norm() < 1e-12 * reference.norm());
        assert!((m.mul_vec(&x) - &b).norm() < 1e-12);
        assert!((&dense * &x - &b).norm() < 1e-12);
    }

    #[test]
    fn indefinite_systems_factor() {
        let mut m = SkylineMatrix::new(vec![0, 0]);
        m.add(0, 0, 1.0);
        m.add(1, 0, 2.0);
        m.add(1, 1, 1.0);
        let x = m.factorize().unwrap().solve(&DVector::from_vec(vec![3.0, 3.0]));
        assert!((x - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn singular_pivot_is_located() {
        let mut m = SkylineMatrix::new(vec![0, 0, 2]);
        for (i, j, v) in [(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 2, 3.0)] {
            m.add(i, j, v);
        }
        let e = m.clone().factorize().unwrap_err();
        assert_eq!(e.equation, 1);
        assert!(LinearSolver::Dense.solve(m, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn auto_switches_at_limit() {
        assert!(LinearSolver::Auto.uses_dense(DENSE_LIMIT));
        assert!(!LinearSolver::Auto.uses_dense(DENSE_LIMIT + 1));
    }
}
