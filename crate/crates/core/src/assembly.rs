//! Global numbering, constraint elimination and assembly of the SPD system.
//!
//! Unknowns are the interior coefficients of every cell followed by the
//! edge coefficients of every non-boundary edge. Boundary edges carry the
//! projected Dirichlet data. An interface edge carries one shared unknown
//! `w_b`; the trace seen from region one is `w_b + Q_b g_D`, the trace
//! seen from region two is `w_b`. Test functions are single valued.

use std::path::Path;

use nalgebra::DVector;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;

use crate::basis::{basis_dim, ScaledMonomials};
use crate::error::{Error, Result};
use crate::mesh::{EdgeTag, Mesh, Point, Region};
use crate::problems::ProblemSpec;
use crate::projection::project_onto_edge;
use crate::quadrature::{cell_rule, mesh_edge_rule};
use crate::weak_gradient::{
    cell_exactness, edge_exactness, gradient_degree, weak_gradient_matrix, GradientRule, WeakGradientOperator,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeDofs {
    /// Interior edge; offset of its first unknown.
    Free(usize),
    /// Outer boundary edge with eliminated Dirichlet values.
    Dirichlet,
    /// Interface edge; offset of the shared unknown `w_b`.
    Interface(usize),
}

impl EdgeDofs {
    pub fn offset(self) -> Option<usize> {
        match self {
            EdgeDofs::Free(o) | EdgeDofs::Interface(o) => Some(o),
            EdgeDofs::Dirichlet => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    pub k: usize,
    pub q: usize,
    pub interior: Vec<usize>,
    pub edges: Vec<EdgeDofs>,
    pub n_free: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, k: usize, q: usize) -> Result<DofMap> {
        if k < q {
            return Err(Error::Parameter(format!("edge degree q={q} exceeds interior degree k={k}")));
        }
        let nk = basis_dim(k);
        let interior: Vec<usize> = (0..mesh.n_cells()).map(|c| c * nk).collect();
        let mut next = nk * mesh.n_cells();
        let edges = mesh
            .edges
            .iter()
            .map(|e| match e.tag {
                EdgeTag::Boundary => EdgeDofs::Dirichlet,
                tag => {
                    let off = next;
                    next += q + 1;
                    if tag == EdgeTag::Interface {
                        EdgeDofs::Interface(off)
                    } else {
                        EdgeDofs::Free(off)
                    }
                }
            })
            .collect();
        Ok(DofMap { k, q, interior, edges, n_free: next })
    }

    pub fn interior_dim(&self) -> usize {
        basis_dim(self.k)
    }

    pub fn edge_dim(&self) -> usize {
        self.q + 1
    }

    /// Global unknown of each local DOF of `cell`, `None` where eliminated.
    pub fn local_indices(&self, mesh: &Mesh, cell: usize) -> Vec<Option<usize>> {
        let nk = self.interior_dim();
        let mut out: Vec<Option<usize>> = (0..nk).map(|i| Some(self.interior[cell] + i)).collect();
        for &e in &mesh.cells[cell].edges {
            match self.edges[e].offset() {
                Some(o) => out.extend((0..=self.q).map(|j| Some(o + j))),
                None => out.extend(std::iter::repeat_n(None, self.q + 1)),
            }
        }
        out
    }
}

/// Weak gradient operators of every cell for a fixed `(k, q, r rule)`.
#[derive(Clone, Debug)]
pub struct Discretization<'m> {
    pub mesh: &'m Mesh,
    pub k: usize,
    pub q: usize,
    pub rule: GradientRule,
    pub dofs: DofMap,
    pub operators: Vec<WeakGradientOperator>,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m Mesh, k: usize, q: usize, rule: GradientRule) -> Result<Discretization<'m>> {
        let dofs = DofMap::new(mesh, k, q)?;
        let operators = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| weak_gradient_matrix(mesh, c, k, q, gradient_degree(&mesh.cells[c], k, rule)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Discretization { mesh, k, q, rule, dofs, operators })
    }

    pub fn interior_basis(&self, cell: usize) -> ScaledMonomials {
        let c = &self.mesh.cells[cell];
        ScaledMonomials::new(c.centroid(), c.diameter(), self.k)
    }

    /// Checks that every cell lies in the region its label claims.
    pub fn check_fitted(&self, problem: &ProblemSpec) -> Result<()> {
        for (id, cell) in self.mesh.cells.iter().enumerate() {
            for t in self.mesh.triangle_points(id) {
                let c = Point::from((t[0].coords + t[1].coords + t[2].coords) / 3.0);
                if problem.interface.region_of(c) != cell.region {
                    return Err(Error::Assembly(format!(
                        "cell {id} is labelled region {} but reaches into region {} at ({}, {})",
                        cell.region.id(),
                        problem.interface.region_of(c).id(),
                        c.x,
                        c.y
                    )));
                }
            }
        }
        Ok(())
    }

    /// Projected Dirichlet data on boundary edges and projected jump data
    /// on interface edges, indexed by edge.
    pub fn constraints(&self, problem: &ProblemSpec) -> Result<Constraints> {
        let mesh = self.mesh;
        let values = (0..mesh.n_edges())
            .into_par_iter()
            .map(|e| {
                let edge = &mesh.edges[e];
                let side = &edge.sides[0];
                let region = mesh.cells[side.cell].region;
                let r = self.operators[side.cell].degree;
                let rule = mesh_edge_rule(mesh, e, edge_exactness(r, self.k, self.q))?;
                Ok(match edge.tag {
                    EdgeTag::Boundary => Some(project_onto_edge(&rule, self.q, |p| (problem.boundary)(p, region))),
                    EdgeTag::Interface => Some(project_onto_edge(&rule, self.q, |p| (problem.jump)(p))),
                    EdgeTag::Interior => None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Constraints { values })
    }

    /// Known (eliminated) part of the local trial vector of `cell`.
    pub fn local_known(&self, constraints: &Constraints, cell: usize) -> Vec<f64> {
        let c = &self.mesh.cells[cell];
        let mut out = vec![0.0; self.dofs.interior_dim()];
        for &e in &c.edges {
            let edge = &self.mesh.edges[e];
            let applies = match edge.tag {
                EdgeTag::Boundary => true,
                EdgeTag::Interface => c.region == Region::One,
                EdgeTag::Interior => false,
            };
            match (&constraints.values[e], applies) {
                (Some(v), true) => out.extend_from_slice(v),
                _ => out.extend(std::iter::repeat_n(0.0, self.q + 1)),
            }
        }
        out
    }

    /// Local trial vector of `cell` from the free unknowns `x`.
    pub fn local_solution(&self, constraints: &Constraints, x: &[f64], cell: usize) -> Vec<f64> {
        let mut out = self.local_known(constraints, cell);
        for (v, idx) in out.iter_mut().zip(self.dofs.local_indices(self.mesh, cell)) {
            if let Some(i) = idx {
                *v += x[i];
            }
        }
        out
    }

    /// Per-cell local vectors of the discrete solution.
    pub fn expand(&self, constraints: &Constraints, x: &[f64]) -> WeakFunction {
        WeakFunction { locals: (0..self.mesh.n_cells()).map(|c| self.local_solution(constraints, x, c)).collect() }
    }

    /// Local vector of a test function `v` in the free space.
    pub fn local_test(&self, v: &[f64], cell: usize) -> Vec<f64> {
        self.dofs.local_indices(self.mesh, cell).into_iter().map(|i| i.map_or(0.0, |i| v[i])).collect()
    }

    pub fn assemble(&self, problem: &ProblemSpec) -> Result<GlobalSystem> {
        self.check_fitted(problem)?;
        let constraints = self.constraints(problem)?;
        let mesh = self.mesh;
        let locals = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| self.cell_contribution(problem, &constraints, c))
            .collect::<Result<Vec<_>>>()?;

        let n = self.dofs.n_free;
        let mut coo = CooMatrix::new(n, n);
        let mut rhs = DVector::zeros(n);
        for local in locals {
            for (i, j, v) in local.entries {
                coo.push(i, j, v);
            }
            for (i, v) in local.rhs {
                rhs[i] += v;
            }
        }
        let matrix = CsrMatrix::from(&coo);
        let system = GlobalSystem { matrix, rhs, constraints };
        system.check_symmetry()?;
        Ok(system)
    }

    fn cell_contribution(&self, problem: &ProblemSpec, constraints: &Constraints, c: usize) -> Result<CellContribution> {
        let mesh = self.mesh;
        let cell = &mesh.cells[c];
        let op = &self.operators[c];
        let kt = op.local_stiffness(problem.coefficient(cell.region))?;
        let idx = self.dofs.local_indices(mesh, c);
        let known = DVector::from_vec(self.local_known(constraints, c));
        let lifted = &kt * &known;

        let mut load = vec![0.0; idx.len()];
        let basis = self.interior_basis(c);
        let rule = cell_rule(mesh, c, cell_exactness(op.degree))?;
        for (&p, &w) in rule.points.iter().zip(&rule.weights) {
            let fw = w * (problem.source)(p, cell.region);
            for (l, v) in load.iter_mut().zip(basis.values(p)) {
                *l += fw * v;
            }
        }
        // Flux-jump data, counted once per interface edge from region one.
        if cell.region == Region::One {
            for (i, &e) in cell.edges.iter().enumerate() {
                if mesh.edges[e].tag == EdgeTag::Interface {
                    let rule = mesh_edge_rule(mesh, e, edge_exactness(op.degree, self.k, self.q))?;
                    let gn = project_onto_edge(&rule, self.q, |p| (problem.flux_jump)(p));
                    let off = op.layout.edge_offset(i);
                    let len = rule.measure();
                    // <g_N, L_j> = coefficient_j * |e| / (2j + 1) in the Legendre basis.
                    for (j, g) in gn.iter().enumerate() {
                        load[off + j] += g * len / (2 * j + 1) as f64;
                    }
                }
            }
        }

        let mut entries = Vec::new();
        let mut rhs = Vec::new();
        for (a, ia) in idx.iter().enumerate() {
            let Some(i) = *ia else { continue };
            rhs.push((i, load[a] - lifted[a]));
            for (b, ib) in idx.iter().enumerate() {
                if let Some(j) = *ib {
                    entries.push((i, j, kt[(a, b)]));
                }
            }
        }
        Ok(CellContribution { entries, rhs })
    }
}

struct CellContribution {
    entries: Vec<(usize, usize, f64)>,
    rhs: Vec<(usize, f64)>,
}

/// Eliminated edge data: `Q_b g` on boundary edges, `Q_b g_D` on interface
/// edges, `None` on interior edges.
#[derive(Clone, Debug)]
pub struct Constraints {
    pub values: Vec<Option<Vec<f64>>>,
}

/// Per-cell local DOF vectors; interface traces are double valued.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakFunction {
    pub locals: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct GlobalSystem {
    pub matrix: CsrMatrix<f64>,
    pub rhs: DVector<f64>,
    pub constraints: Constraints,
}

impl GlobalSystem {
    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    /// `max |A - A^T|` relative to `max |A|`.
    pub fn asymmetry(&self) -> f64 {
        let a = &self.matrix;
        let mut scale = 0.0f64;
        let mut diff = 0.0f64;
        for (i, j, &v) in a.triplet_iter() {
            scale = scale.max(v.abs());
            let t = match a.get_entry(j, i) {
                Some(nalgebra_sparse::SparseEntry::NonZero(t)) => *t,
                _ => 0.0,
            };
            diff = diff.max((v - t).abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            diff / scale
        }
    }

    pub fn check_symmetry(&self) -> Result<()> {
        let asym = self.asymmetry();
        if asym > 1e-12 {
            return Err(Error::Internal(format!("assembled matrix is not symmetric (relative {asym:e})")));
        }
        Ok(())
    }

    /// Sorted `(row, col)` pattern, for structural comparisons.
    pub fn pattern(&self) -> (Vec<usize>, Vec<usize>) {
        (self.matrix.row_offsets().to_vec(), self.matrix.col_indices().to_vec())
    }

    pub fn export_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        nalgebra_sparse::io::save_to_matrix_market_file(&self.matrix, path)?;
        Ok(())
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.rhs - &self.matrix * x
    }
}
