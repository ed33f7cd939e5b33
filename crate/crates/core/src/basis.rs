//! Polynomial bases on cells and edges.
//!
//! Cell polynomials use scaled monomials `((x - xc) / h)^a ((y - yc) / h)^b`
//! ordered by total degree, then by `a` descending. Edge polynomials are
//! Legendre polynomials of the edge parameter running from -1 at the first
//! endpoint to 1 at the second.
//!
//! High-degree spaces are orthonormalized against the cell quadrature inner
//! product. Instead of transforming the monomial Vandermonde matrix (whose
//! coefficients blow up past degree ~10) each new basis function is built as
//! `x q_j` or `y q_j` for an earlier orthonormal `q_j` and then
//! Gram-Schmidt-orthogonalized. Replaying that recurrence evaluates the basis
//! at arbitrary points without cancellation.

use crate::error::{Error, Result};
use crate::mesh::{Point, Vector};
use crate::quadrature::QuadratureRule;

/// Degree above which cell spaces are orthonormalized.
pub const ORTHONORMAL_ABOVE: usize = 6;

pub fn basis_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Exponents `(a, b)` of the scaled monomial basis of degree `degree`.
pub fn exponents(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree).flat_map(|d| (0..=d).rev().map(move |a| (a, d - a))).collect()
}

#[derive(Clone, Debug)]
pub struct ScaledMonomials {
    pub center: Point,
    pub scale: f64,
    pub degree: usize,
    exps: Vec<(usize, usize)>,
}

impl ScaledMonomials {
    pub fn new(center: Point, scale: f64, degree: usize) -> ScaledMonomials {
        ScaledMonomials { center, scale, degree, exps: exponents(degree) }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    fn powers(&self, p: Point) -> (Vec<f64>, Vec<f64>) {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        (px, py)
    }

    pub fn values(&self, p: Point) -> Vec<f64> {
        let (px, py) = self.powers(p);
        self.exps.iter().map(|&(a, b)| px[a] * py[b]).collect()
    }

    /// Values and gradients of every basis function at `p`.
    pub fn eval(&self, p: Point) -> (Vec<f64>, Vec<Vector>) {
        let (px, py) = self.powers(p);
        let inv = 1.0 / self.scale;
        let values = self.exps.iter().map(|&(a, b)| px[a] * py[b]).collect();
        let grads = self
            .exps
            .iter()
            .map(|&(a, b)| {
                let dx = if a > 0 { a as f64 * px[a - 1] * py[b] * inv } else { 0.0 };
                let dy = if b > 0 { b as f64 * px[a] * py[b - 1] * inv } else { 0.0 };
                Vector::new(dx, dy)
            })
            .collect();
        (values, grads)
    }
}

/// Legendre polynomials `L_0..=L_q` at `s`.
pub fn legendre(q: usize, s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(q + 1);
    out.push(1.0);
    if q >= 1 {
        out.push(s);
    }
    for j in 2..=q {
        let jf = j as f64;
        out.push(((2.0 * jf - 1.0) * s * out[j - 1] - (jf - 1.0) * out[j - 2]) / jf);
    }
    out
}

#[derive(Clone, Debug)]
pub struct EdgeBasis {
    pub start: Point,
    pub end: Point,
    pub degree: usize,
}

impl EdgeBasis {
    pub fn new(start: Point, end: Point, degree: usize) -> EdgeBasis {
        EdgeBasis { start, end, degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn values_at_param(&self, s: f64) -> Vec<f64> {
        legendre(self.degree, s)
    }

    /// Basis values at a point of the edge segment.
    pub fn eval(&self, p: Point) -> Result<Vec<f64>> {
        let d = self.end - self.start;
        let len2 = d.norm_squared();
        let t = (p - self.start).dot(&d) / len2;
        let off = (p - (self.start + d * t)).norm();
        let tol = 1e-12 * len2.sqrt().max(1.0);
        if off > tol || t < -tol || t > 1.0 + tol {
            return Err(Error::Domain { x: p.x, y: p.y });
        }
        Ok(self.values_at_param(2.0 * t - 1.0))
    }

    /// `||L_j||^2` on the edge: `len / (2j + 1)`.
    pub fn mass(&self, j: usize) -> f64 {
        (self.end - self.start).norm() / (2 * j + 1) as f64
    }
}

#[derive(Clone, Debug)]
struct Step {
    parent: usize,
    by_x: bool,
    coeffs: Vec<f64>,
    norm: f64,
}

/// Basis orthonormal in the L2 inner product of a quadrature rule.
#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    center: Point,
    scale: f64,
    degree: usize,
    c0: f64,
    steps: Vec<Step>,
}

impl OrthonormalBasis {
    pub fn new(center: Point, scale: f64, degree: usize, rule: &QuadratureRule) -> Result<OrthonormalBasis> {
        let npts = rule.len();
        let dim = basis_dim(degree);
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let xs: Vec<f64> = rule.points.iter().map(|p| (p.x - center.x) / scale).collect();
        let ys: Vec<f64> = rule.points.iter().map(|p| (p.y - center.y) / scale).collect();

        // Columns hold sqrt(w) * q_j at the quadrature points.
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let measure: f64 = rule.weights.iter().sum();
        if !(measure > 0.0) {
            return Err(Error::Degenerate("empty quadrature rule".into()));
        }
        let c0 = 1.0 / measure.sqrt();
        cols.push(sw.iter().map(|s| s * c0).collect());
        let mut steps = Vec::with_capacity(dim);
        let exps = exponents(degree);
        for &(a, b) in &exps[1..] {
            let (parent, by_x) = if a > 0 {
                (exps.iter().position(|&e| e == (a - 1, b)).unwrap(), true)
            } else {
                (exps.iter().position(|&e| e == (0, b - 1)).unwrap(), false)
            };
            let mult = if by_x { &xs } else { &ys };
            let mut v: Vec<f64> = cols[parent].iter().zip(mult).map(|(q, m)| q * m).collect();
            let start_norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut coeffs = vec![0.0; cols.len()];
            for _pass in 0..2 {
                for (i, q) in cols.iter().enumerate() {
                    let r: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                    coeffs[i] += r;
                    for (vk, qk) in v.iter_mut().zip(q) {
                        *vk -= r * qk;
                    }
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 1e-13 * start_norm) || npts < dim {
                return Err(Error::Conditioning { cell: usize::MAX, degree });
            }
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
            steps.push(Step { parent, by_x, coeffs, norm });
        }
        Ok(OrthonormalBasis { center, scale, degree, c0, steps })
    }

    pub fn dim(&self) -> usize {
        basis_dim(self.degree)
    }

    pub fn eval(&self, p: Point) -> (Vec<f64>, Vec<Vector>) {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        let n = self.dim();
        let mut vals = Vec::with_capacity(n);
        // Gradients with respect to the scaled coordinates.
        let mut grads: Vec<Vector> = Vec::with_capacity(n);
        vals.push(self.c0);
        grads.push(Vector::zeros());
        for step in &self.steps {
            let (m, dm) = if step.by_x { (xi, Vector::new(1.0, 0.0)) } else { (eta, Vector::new(0.0, 1.0)) };
            let mut v = m * vals[step.parent];
            let mut g = grads[step.parent] * m + dm * vals[step.parent];
            for (i, c) in step.coeffs.iter().enumerate() {
                v -= c * vals[i];
                g -= grads[i] * *c;
            }
            vals.push(v / step.norm);
            grads.push(g / step.norm);
        }
        let inv = 1.0 / self.scale;
        grads.iter_mut().for_each(|g| *g *= inv);
        (vals, grads)
    }
}

/// Scalar polynomial space of a given degree on a cell.
#[derive(Clone, Debug)]
pub enum PolySpace {
    Monomial(ScaledMonomials),
    Orthonormal(OrthonormalBasis),
}

impl PolySpace {
    /// Scaled monomials up to [`ORTHONORMAL_ABOVE`], orthonormal above.
    pub fn new(center: Point, scale: f64, degree: usize, rule: &QuadratureRule) -> Result<PolySpace> {
        if degree > ORTHONORMAL_ABOVE {
            Ok(PolySpace::Orthonormal(OrthonormalBasis::new(center, scale, degree, rule)?))
        } else {
            Ok(PolySpace::Monomial(ScaledMonomials::new(center, scale, degree)))
        }
    }

    /// Always orthonormal, whatever the degree.
    pub fn orthonormal(center: Point, scale: f64, degree: usize, rule: &QuadratureRule) -> Result<PolySpace> {
        Ok(PolySpace::Orthonormal(OrthonormalBasis::new(center, scale, degree, rule)?))
    }

    pub fn degree(&self) -> usize {
        match self {
            PolySpace::Monomial(m) => m.degree,
            PolySpace::Orthonormal(o) => o.degree,
        }
    }

    pub fn dim(&self) -> usize {
        basis_dim(self.degree())
    }

    pub fn is_orthonormal(&self) -> bool {
        matches!(self, PolySpace::Orthonormal(_))
    }

    pub fn eval(&self, p: Point) -> (Vec<f64>, Vec<Vector>) {
        match self {
            PolySpace::Monomial(m) => m.eval(p),
            PolySpace::Orthonormal(o) => o.eval(p),
        }
    }

    pub fn values(&self, p: Point) -> Vec<f64> {
        match self {
            PolySpace::Monomial(m) => m.values(p),
            PolySpace::Orthonormal(o) => o.eval(p).0,
        }
    }

    /// Evaluates `sum_i coeffs[i] * phi_i(p)`.
    pub fn combine(&self, coeffs: &[f64], p: Point) -> f64 {
        self.values(p).iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn combine_gradient(&self, coeffs: &[f64], p: Point) -> Vector {
        self.eval(p).1.iter().zip(coeffs).map(|(g, c)| g * *c).sum()
    }

    /// Gram matrix under the quadrature rule.
    pub fn gram(&self, rule: &QuadratureRule) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (&p, &w) in rule.points.iter().zip(&rule.weights) {
            let v = self.values(p);
            for i in 0..n {
                let wi = w * v[i];
                for j in 0..=i {
                    m[(i, j)] += wi * v[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                m[(j, i)] = m[(i, j)];
            }
        }
        m
    }
}
