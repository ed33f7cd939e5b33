//! L2 projections onto cell and edge polynomial spaces.

use nalgebra::{DMatrix, DVector};

use crate::basis::{EdgeBasis, PolySpace};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, Vector};
use crate::quadrature::{cell_rule, edge_rule, EdgeRule, QuadratureRule};

#[derive(Clone, Debug)]
pub enum Target {
    Cell { cell: usize, space: PolySpace },
    Edge { edge: usize, basis: EdgeBasis },
}

#[derive(Clone, Debug)]
pub struct ProjectedFunction {
    pub target: Target,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl ProjectedFunction {
    pub fn eval(&self, p: Point) -> f64 {
        match &self.target {
            Target::Cell { space, .. } => space.combine(&self.coeffs, p),
            Target::Edge { basis, .. } => {
                let d = basis.end - basis.start;
                let s = 2.0 * (p - basis.start).dot(&d) / d.norm_squared() - 1.0;
                basis.values_at_param(s).iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
            }
        }
    }
}

/// Default exactness for projecting data of unknown smoothness.
fn default_exactness(degree: usize) -> usize {
    2 * degree + 4
}

/// Coefficients of the L2 projection of `f` onto `space` under `rule`.
pub fn project_onto(space: &PolySpace, rule: &QuadratureRule, f: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let n = space.dim();
    let mut rhs = DVector::zeros(n);
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let fw = w * f(p);
        for (r, v) in rhs.iter_mut().zip(space.values(p)) {
            *r += fw * v;
        }
    }
    if space.is_orthonormal() {
        return Ok(rhs.as_slice().to_vec());
    }
    solve_gram(space.gram(rule), rhs)
}

/// Componentwise projection of a vector field.
pub fn project_vector_onto(
    space: &PolySpace,
    rule: &QuadratureRule,
    f: impl Fn(Point) -> Vector,
) -> Result<[Vec<f64>; 2]> {
    let n = space.dim();
    let mut rhs = DMatrix::zeros(n, 2);
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let fw = f(p) * w;
        for (i, v) in space.values(p).into_iter().enumerate() {
            rhs[(i, 0)] += fw.x * v;
            rhs[(i, 1)] += fw.y * v;
        }
    }
    if !space.is_orthonormal() {
        let chol = space
            .gram(rule)
            .cholesky()
            .ok_or(Error::Conditioning { cell: usize::MAX, degree: space.degree() })?;
        rhs = chol.solve(&rhs);
    }
    Ok([rhs.column(0).iter().copied().collect(), rhs.column(1).iter().copied().collect()])
}

fn solve_gram(gram: DMatrix<f64>, rhs: DVector<f64>) -> Result<Vec<f64>> {
    let n = gram.nrows();
    let chol = gram.cholesky().ok_or(Error::Conditioning { cell: usize::MAX, degree: n })?;
    Ok(chol.solve(&rhs).as_slice().to_vec())
}

pub fn project_cell(mesh: &Mesh, cell: usize, f: impl Fn(Point) -> f64, degree: usize) -> Result<ProjectedFunction> {
    let c = &mesh.cells[cell];
    let rule = cell_rule(mesh, cell, default_exactness(degree))?;
    let space = PolySpace::new(c.centroid(), c.diameter(), degree, &rule).map_err(|e| relabel(e, cell))?;
    let coeffs = project_onto(&space, &rule, f).map_err(|e| relabel(e, cell))?;
    Ok(ProjectedFunction { target: Target::Cell { cell, space }, degree, coeffs })
}

pub fn project_cell_vector(
    mesh: &Mesh,
    cell: usize,
    f: impl Fn(Point) -> Vector,
    degree: usize,
) -> Result<[ProjectedFunction; 2]> {
    let c = &mesh.cells[cell];
    let rule = cell_rule(mesh, cell, default_exactness(degree))?;
    let space = PolySpace::new(c.centroid(), c.diameter(), degree, &rule).map_err(|e| relabel(e, cell))?;
    let [cx, cy] = project_vector_onto(&space, &rule, f).map_err(|e| relabel(e, cell))?;
    let make = |coeffs| ProjectedFunction { target: Target::Cell { cell, space: space.clone() }, degree, coeffs };
    Ok([make(cx), make(cy)])
}

pub(crate) fn relabel(e: Error, cell: usize) -> Error {
    match e {
        Error::Conditioning { degree, .. } => Error::Conditioning { cell, degree },
        other => other,
    }
}

/// Legendre coefficients of the projection of `f` onto P_q of an edge.
/// The Legendre mass matrix is diagonal, so no solve is needed.
pub fn project_onto_edge(rule: &EdgeRule, q: usize, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let len: f64 = rule.weights.iter().sum();
    let mut coeffs = vec![0.0; q + 1];
    for ((&p, &s), &w) in rule.points.iter().zip(&rule.params).zip(&rule.weights) {
        let fw = w * f(p);
        for (c, l) in coeffs.iter_mut().zip(crate::basis::legendre(q, s)) {
            *c += fw * l;
        }
    }
    for (j, c) in coeffs.iter_mut().enumerate() {
        *c *= (2 * j + 1) as f64 / len;
    }
    coeffs
}

pub fn project_edge(mesh: &Mesh, edge: usize, f: impl Fn(Point) -> f64, q: usize) -> Result<ProjectedFunction> {
    project_edge_with(mesh, edge, f, q, default_exactness(q))
}

pub fn project_edge_with(
    mesh: &Mesh,
    edge: usize,
    f: impl Fn(Point) -> f64,
    q: usize,
    exactness: usize,
) -> Result<ProjectedFunction> {
    let (a, b) = mesh.edge_points(edge);
    let rule = edge_rule(a, b, exactness)?;
    let coeffs = project_onto_edge(&rule, q, f);
    Ok(ProjectedFunction { target: Target::Edge { edge, basis: EdgeBasis::new(a, b, q) }, degree: q, coeffs })
}
