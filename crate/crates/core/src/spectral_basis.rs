//! Gauss-Lobatto-Legendre rules, Lagrange shape functions on GLL nodes and the
//! cross pattern of nonzero shape functions at each integration point.
//!
//! Nodes and integration points coincide, so at a quadrature point `Q` only the
//! shape function of node `Q` itself is nonzero and only the nodes on the same
//! grid row or column carry nonzero derivatives.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Highest supported polynomial order.
pub const MAX_ORDER: usize = 24;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("polynomial order {0} outside supported range 1..={MAX_ORDER}")]
    UnsupportedOrder(usize),
}

/// Gauss-Lobatto-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GllRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GllRule {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Strictly increasing nodes, `nodes[0] = -1`, `nodes[p] = 1`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f` on [-1, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre polynomials `P_0..=P_n` at `x` by the three-term recurrence.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 2..=n {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

/// GLL rule of order `p` (p + 1 points).
///
/// Interior nodes are the roots of `P'_p`; they are found by Newton iteration
/// started from the Chebyshev-Gauss-Lobatto points. Weights follow from
/// `w_i = 2 / (p (p + 1) P_p(x_i)^2)`.
pub fn gll_rule(p: usize) -> Result<GllRule, BasisError> {
    if !(1..=MAX_ORDER).contains(&p) {
        return Err(BasisError::UnsupportedOrder(p));
    }
    let n1 = p + 1;
    let pf = p as f64;
    let mut x: Vec<f64> = (0..n1)
        .map(|j| (std::f64::consts::PI * j as f64 / pf).cos())
        .collect();
    for _ in 0..NEWTON_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for xi in x.iter_mut() {
            let leg = legendre_all(p, *xi);
            // Newton step on (1 - x^2) P'_p written through the recurrence.
            let step = (*xi * leg[p] - leg[p - 1]) / (n1 as f64 * leg[p]);
            *xi -= step;
            max_step = max_step.max(step.abs());
        }
        if max_step <= NEWTON_TOL {
            break;
        }
    }
    x.reverse();
    // Enforce the exact endpoints and mirror symmetry.
    x[0] = -1.0;
    x[p] = 1.0;
    for i in 0..n1 / 2 {
        let m = 0.5 * (x[p - i] - x[i]);
        x[i] = -m;
        x[p - i] = m;
    }
    if p % 2 == 0 {
        x[p / 2] = 0.0;
    }
    let mut w: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let lp = legendre_all(p, xi)[p];
            2.0 / (pf * (pf + 1.0) * lp * lp)
        })
        .collect();
    for i in 0..n1 / 2 {
        let m = 0.5 * (w[i] + w[p - i]);
        w[i] = m;
        w[p - i] = m;
    }
    Ok(GllRule {
        order: p,
        nodes: x,
        weights: w,
    })
}

/// 1D Lagrange polynomials through the rule nodes and their derivatives at `xi`.
pub fn lagrange_1d(rule: &GllRule, xi: f64) -> (Vec<f64>, Vec<f64>) {
    let nodes = &rule.nodes;
    let n = nodes.len();
    let mut values = vec![0.0; n];
    let mut derivs = vec![0.0; n];
    for i in 0..n {
        let mut num = 1.0;
        let mut den = 1.0;
        for j in 0..n {
            if j != i {
                num *= xi - nodes[j];
                den *= nodes[i] - nodes[j];
            }
        }
        values[i] = num / den;
        let mut sum = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut prod = 1.0;
            for k in 0..n {
                if k != i && k != j {
                    prod *= xi - nodes[k];
                }
            }
            sum += prod;
        }
        derivs[i] = sum / den;
    }
    (values, derivs)
}

/// Tensor-product shape functions tabulated at the (p+1)^2 GLL points.
///
/// Node and point numbering is row-major in the (xi1, xi2) grid:
/// `I = i + j (p + 1)` where `i` runs along xi1.
#[derive(Debug, Clone)]
pub struct ShapeTable {
    rule: GllRule,
    /// `d1[q * n + i] = l_i'(xi_q)`.
    d1: Vec<f64>,
    values: Vec<f64>,
    derivs1: Vec<f64>,
    derivs2: Vec<f64>,
}

impl ShapeTable {
    fn build(p: usize) -> Result<Self, BasisError> {
        let rule = gll_rule(p)?;
        let n = p + 1;
        let mut l = vec![0.0; n * n];
        let mut d1 = vec![0.0; n * n];
        for q in 0..n {
            let (v, d) = lagrange_1d(&rule, rule.nodes[q]);
            l[q * n..(q + 1) * n].copy_from_slice(&v);
            d1[q * n..(q + 1) * n].copy_from_slice(&d);
        }
        let nen = n * n;
        let mut values = vec![0.0; nen * nen];
        let mut derivs1 = vec![0.0; nen * nen];
        let mut derivs2 = vec![0.0; nen * nen];
        for qj in 0..n {
            for qi in 0..n {
                let q = qi + qj * n;
                for j in 0..n {
                    for i in 0..n {
                        let node = i + j * n;
                        let li = l[qi * n + i];
                        let lj = l[qj * n + j];
                        values[q * nen + node] = li * lj;
                        derivs1[q * nen + node] = d1[qi * n + i] * lj;
                        derivs2[q * nen + node] = li * d1[qj * n + j];
                    }
                }
            }
        }
        Ok(Self {
            rule,
            d1,
            values,
            derivs1,
            derivs2,
        })
    }

    pub fn order(&self) -> usize {
        self.rule.order
    }

    pub fn rule(&self) -> &GllRule {
        &self.rule
    }

    /// Points per direction, p + 1.
    pub fn n1d(&self) -> usize {
        self.rule.order + 1
    }

    /// Nodes per element, (p + 1)^2.
    pub fn nodes_per_element(&self) -> usize {
        self.n1d() * self.n1d()
    }

    /// `l_i'(xi_q)` of the 1D basis.
    pub fn d1(&self, q: usize, i: usize) -> f64 {
        self.d1[q * self.n1d() + i]
    }

    pub fn value(&self, q: usize, node: usize) -> f64 {
        self.values[q * self.nodes_per_element() + node]
    }

    /// `dN_node / dxi1` at point `q`.
    pub fn deriv1(&self, q: usize, node: usize) -> f64 {
        self.derivs1[q * self.nodes_per_element() + node]
    }

    /// `dN_node / dxi2` at point `q`.
    pub fn deriv2(&self, q: usize, node: usize) -> f64 {
        self.derivs2[q * self.nodes_per_element() + node]
    }

    /// Tensor-product GLL weight of point `q`.
    pub fn weight(&self, q: usize) -> f64 {
        let n = self.n1d();
        self.rule.weights[q % n] * self.rule.weights[q / n]
    }

    /// Parametric coordinates of point `q`.
    pub fn point(&self, q: usize) -> (f64, f64) {
        let n = self.n1d();
        (self.rule.nodes[q % n], self.rule.nodes[q / n])
    }

    /// Shape functions and parametric derivatives at an arbitrary point.
    pub fn eval_at(&self, xi1: f64, xi2: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.n1d();
        let (l1, dl1) = lagrange_1d(&self.rule, xi1);
        let (l2, dl2) = lagrange_1d(&self.rule, xi2);
        let nen = n * n;
        let mut v = vec![0.0; nen];
        let mut d1 = vec![0.0; nen];
        let mut d2 = vec![0.0; nen];
        for j in 0..n {
            for i in 0..n {
                let k = i + j * n;
                v[k] = l1[i] * l2[j];
                d1[k] = dl1[i] * l2[j];
                d2[k] = l1[i] * dl2[j];
            }
        }
        (v, d1, d2)
    }
}

/// Shared, immutable shape table for order `p`. Tables are built once per
/// order and reused by every element of that order.
pub fn shape_table_2d(p: usize) -> Result<Arc<ShapeTable>, BasisError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ShapeTable>>>> = OnceLock::new();
    if !(1..=MAX_ORDER).contains(&p) {
        return Err(BasisError::UnsupportedOrder(p));
    }
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&p) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(ShapeTable::build(p)?);
    let mut guard = cache.lock().unwrap();
    Ok(Arc::clone(guard.entry(p).or_insert(table)))
}

/// For every integration point `Q`, the nodes on the same row or column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossPattern {
    order: usize,
    members: Vec<Vec<usize>>,
}

impl CrossPattern {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Members of `eta_Q` in ascending node order.
    pub fn members(&self, q: usize) -> &[usize] {
        &self.members[q]
    }

    pub fn contains(&self, q: usize, node: usize) -> bool {
        self.members[q].binary_search(&node).is_ok()
    }

    pub fn num_points(&self) -> usize {
        self.members.len()
    }
}

pub fn cross_pattern(p: usize) -> Result<CrossPattern, BasisError> {
    if !(1..=MAX_ORDER).contains(&p) {
        return Err(BasisError::UnsupportedOrder(p));
    }
    let n = p + 1;
    let members = (0..n * n)
        .map(|q| {
            let (qi, qj) = (q % n, q / n);
            let mut m: Vec<usize> = (0..n * n)
                .filter(|&node| node % n == qi || node / n == qj)
                .collect();
            m.sort_unstable();
            m
        })
        .collect();
    Ok(CrossPattern { order: p, members })
}
