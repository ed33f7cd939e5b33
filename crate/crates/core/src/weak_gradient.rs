//! Discrete weak gradient on a polygonal cell.
//!
//! For a weak function `v = {v0, vb}` with `v0` in P_k(T) and `vb` in P_q on
//! each edge of T, the weak gradient is the unique `g` in [P_r(T)]^2 with
//!
//! ```text
//! (g, phi)_T = -(v0, div phi)_T + <vb, phi . n>_{dT}   for all phi in [P_r(T)]^2.
//! ```
//!
//! Writing `g` in the basis `(psi_i, 0), (0, psi_i)` turns this into
//! `M G = B` with `M` block diagonal (two copies of the scalar Gram of P_r).
//! `G` maps local weak DOFs to gradient coefficients, x-block first.

use nalgebra::{DMatrix, DVector};

use crate::basis::{basis_dim, legendre, PolySpace, ScaledMonomials};
use crate::error::{Error, Result};
use crate::mesh::{Cell, Mesh, Point, Vector};
use crate::problems::Diffusion;
use crate::projection::relabel;
use crate::quadrature::{cell_rule, mesh_edge_rule, QuadratureRule};

/// How the weak-gradient degree `r` is chosen on a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GradientRule {
    /// `r = N + k - 1` on convex N-gons, `r = 2N + k - 1` otherwise.
    Theoretical,
    /// `r = k + m`.
    Offset(usize),
}

impl GradientRule {
    pub fn label(self) -> String {
        match self {
            GradientRule::Theoretical => "theory".to_string(),
            GradientRule::Offset(m) => format!("k+{m}"),
        }
    }
}

impl std::fmt::Display for GradientRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for GradientRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" | "theoretical" => Ok(GradientRule::Theoretical),
            _ => s
                .strip_prefix("k+")
                .and_then(|m| m.parse().ok())
                .map(GradientRule::Offset)
                .ok_or_else(|| Error::Input(format!("unknown r rule '{s}' (expected theory or k+m)"))),
        }
    }
}

pub fn gradient_degree(cell: &Cell, k: usize, rule: GradientRule) -> usize {
    match rule {
        GradientRule::Offset(m) => k + m,
        GradientRule::Theoretical => {
            let n = cell.n_edges();
            if cell.is_convex() {
                n + k - 1
            } else {
                2 * n + k - 1
            }
        }
    }
}

/// Quadrature exactness for cell integrals.
pub fn cell_exactness(r: usize) -> usize {
    2 * r + 2
}

/// Quadrature exactness for edge integrals.
pub fn edge_exactness(r: usize, k: usize, q: usize) -> usize {
    r + k.max(q) + 2
}

/// Local DOF layout: interior P_k coefficients, then P_q Legendre
/// coefficients for each edge in cell-loop order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakFunctionLayout {
    pub cell: usize,
    pub interior: usize,
    pub edges: Vec<usize>,
}

impl WeakFunctionLayout {
    pub fn new(mesh: &Mesh, cell: usize, k: usize, q: usize) -> Self {
        WeakFunctionLayout { cell, interior: basis_dim(k), edges: vec![q + 1; mesh.cells[cell].n_edges()] }
    }

    pub fn total(&self) -> usize {
        self.interior + self.edges.iter().sum::<usize>()
    }

    /// Offset of the first DOF of local edge `i`.
    pub fn edge_offset(&self, i: usize) -> usize {
        self.interior + self.edges[..i].iter().sum::<usize>()
    }
}

#[derive(Clone, Debug)]
pub struct WeakGradientOperator {
    pub cell: usize,
    pub degree: usize,
    pub layout: WeakFunctionLayout,
    /// Scalar basis of P_r(T), orthonormal on the cell.
    pub space: PolySpace,
    /// Scalar Gram matrix of `space` on the cell.
    pub gram: DMatrix<f64>,
    /// `2 dim P_r` by local DOFs.
    pub matrix: DMatrix<f64>,
}

/// Builds the weak gradient matrix of `cell` for P_k / P_q / [P_r]^2.
pub fn weak_gradient_matrix(mesh: &Mesh, cell: usize, k: usize, q: usize, r: usize) -> Result<WeakGradientOperator> {
    let c = &mesh.cells[cell];
    let interior = ScaledMonomials::new(c.centroid(), c.diameter(), k);
    let rule = cell_rule(mesh, cell, cell_exactness(r))?;
    let space = PolySpace::orthonormal(c.centroid(), c.diameter(), r, &rule).map_err(|e| relabel(e, cell))?;
    let layout = WeakFunctionLayout::new(mesh, cell, k, q);
    let nr = space.dim();
    let mut b = DMatrix::zeros(2 * nr, layout.total());

    // -(v0, div phi): div of (psi_i, 0) is d_x psi_i.
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let v0 = interior.values(p);
        let (_, grads) = space.eval(p);
        for (j, vj) in v0.iter().enumerate() {
            let wv = w * vj;
            for (i, g) in grads.iter().enumerate() {
                b[(i, j)] -= wv * g.x;
                b[(nr + i, j)] -= wv * g.y;
            }
        }
    }

    // <vb, phi . n> on each edge, Legendre in the global edge orientation.
    let eq = edge_exactness(r, k, q);
    for (i, &e) in c.edges.iter().enumerate() {
        let side = mesh.edges[e].side_of(cell).expect("edge lists its cells");
        let n = side.normal;
        let erule = mesh_edge_rule(mesh, e, eq)?;
        let off = layout.edge_offset(i);
        for ((&p, &s), &w) in erule.points.iter().zip(&erule.params).zip(&erule.weights) {
            let lv = legendre(q, s);
            let psi = space.values(p);
            for (l, lj) in lv.iter().enumerate() {
                let wl = w * lj;
                for (ii, v) in psi.iter().enumerate() {
                    b[(ii, off + l)] += wl * v * n.x;
                    b[(nr + ii, off + l)] += wl * v * n.y;
                }
            }
        }
    }

    let gram = space.gram(&rule);
    let chol = gram.clone().cholesky().ok_or(Error::Conditioning { cell, degree: r })?;
    let mut matrix = DMatrix::zeros(2 * nr, layout.total());
    let top = chol.solve(&b.rows(0, nr).into_owned());
    let bottom = chol.solve(&b.rows(nr, nr).into_owned());
    matrix.rows_mut(0, nr).copy_from(&top);
    matrix.rows_mut(nr, nr).copy_from(&bottom);
    Ok(WeakGradientOperator { cell, degree: r, layout, space, gram, matrix })
}

impl WeakGradientOperator {
    pub fn dim_r(&self) -> usize {
        self.space.dim()
    }

    /// Gradient coefficients `(x-block, y-block)` of a local weak function.
    pub fn apply(&self, local: &[f64]) -> DVector<f64> {
        &self.matrix * DVector::from_column_slice(local)
    }

    /// Evaluates a gradient coefficient vector at `p`.
    pub fn eval_coeffs(&self, coeffs: &DVector<f64>, p: Point) -> Vector {
        let nr = self.dim_r();
        let v = self.space.values(p);
        let gx: f64 = v.iter().zip(coeffs.rows(0, nr).iter()).map(|(a, b)| a * b).sum();
        let gy: f64 = v.iter().zip(coeffs.rows(nr, nr).iter()).map(|(a, b)| a * b).sum();
        Vector::new(gx, gy)
    }

    /// `K = G^T M_a G`.
    pub fn local_stiffness(&self, a: &Diffusion) -> Result<DMatrix<f64>> {
        a.validate()?;
        let nr = self.dim_r();
        let gx = self.matrix.rows(0, nr);
        let gy = self.matrix.rows(nr, nr);
        let mgx = &self.gram * gx;
        let mgy = &self.gram * gy;
        let t = a.0;
        let mut k = gx.transpose() * (&mgx * t[(0, 0)] + &mgy * t[(0, 1)])
            + gy.transpose() * (&mgx * t[(1, 0)] + &mgy * t[(1, 1)]);
        let asym = (&k - k.transpose()).abs().max();
        let scale = k.abs().max();
        if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Internal(format!(
                "local stiffness of cell {} is not symmetric ({asym:e} vs {scale:e})",
                self.cell
            )));
        }
        let sym = (&k + k.transpose()) * 0.5;
        k.copy_from(&sym);
        Ok(k)
    }

    /// Weak gradient coefficients of an arbitrary pair `{v0, vb}` given as
    /// functions. Integrals are exact when `v0` and `vb` are polynomials of
    /// degree at most `data_degree`.
    pub fn apply_to_functions(
        &self,
        mesh: &Mesh,
        data_degree: usize,
        v0: impl Fn(Point) -> f64,
        vb: impl Fn(Point) -> f64,
    ) -> Result<DVector<f64>> {
        let nr = self.dim_r();
        let r = self.degree;
        let rule = cell_rule(mesh, self.cell, r + data_degree)?;
        let mut rhs = DVector::zeros(2 * nr);
        for (&p, &w) in rule.points.iter().zip(&rule.weights) {
            let f = w * v0(p);
            for (i, g) in self.space.eval(p).1.iter().enumerate() {
                rhs[i] -= f * g.x;
                rhs[nr + i] -= f * g.y;
            }
        }
        for &e in &mesh.cells[self.cell].edges {
            let n = mesh.edges[e].side_of(self.cell).expect("edge lists its cells").normal;
            let erule = mesh_edge_rule(mesh, e, r + data_degree)?;
            for (&p, &w) in erule.points.iter().zip(&erule.weights) {
                let f = w * vb(p);
                for (i, v) in self.space.values(p).iter().enumerate() {
                    rhs[i] += f * v * n.x;
                    rhs[nr + i] += f * v * n.y;
                }
            }
        }
        self.solve_gram(rhs)
    }

    fn solve_gram(&self, rhs: DVector<f64>) -> Result<DVector<f64>> {
        let nr = self.dim_r();
        let chol =
            self.gram.clone().cholesky().ok_or(Error::Conditioning { cell: self.cell, degree: self.degree })?;
        let mut out = DVector::zeros(2 * nr);
        out.rows_mut(0, nr).copy_from(&chol.solve(&rhs.rows(0, nr).into_owned()));
        out.rows_mut(nr, nr).copy_from(&chol.solve(&rhs.rows(nr, nr).into_owned()));
        Ok(out)
    }

    /// Local weak DOFs of `{p, p|dT}` for a polynomial `p` of degree <= k:
    /// interior coefficients by projection, edge coefficients by Q_b.
    pub fn interpolate(
        &self,
        mesh: &Mesh,
        k: usize,
        q: usize,
        v0: impl Fn(Point) -> f64,
        vb: impl Fn(Point) -> f64,
    ) -> Result<Vec<f64>> {
        let c = &mesh.cells[self.cell];
        let rule = cell_rule(mesh, self.cell, cell_exactness(self.degree))?;
        let interior = PolySpace::Monomial(ScaledMonomials::new(c.centroid(), c.diameter(), k));
        let mut out = crate::projection::project_onto(&interior, &rule, &v0).map_err(|e| relabel(e, self.cell))?;
        for &e in &c.edges {
            let erule = mesh_edge_rule(mesh, e, edge_exactness(self.degree, k, q))?;
            out.extend(crate::projection::project_onto_edge(&erule, q, &vb));
        }
        Ok(out)
    }
}

/// Cell quadrature matching the weak-gradient budget.
pub fn operator_rule(mesh: &Mesh, op: &WeakGradientOperator) -> Result<QuadratureRule> {
    cell_rule(mesh, op.cell, cell_exactness(op.degree))
}
