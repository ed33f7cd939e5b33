//! Error functionals, norms, convergence rates, point evaluation and table
//! output.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::assembly::{Discretization, WeakFunction};
use crate::basis::PolySpace;
use crate::error::{Error, Result};
use crate::mesh::{Point, Region};
use crate::problems::{Diffusion, ExactSolution, ProblemSpec};
use crate::projection::{project_onto, project_onto_edge};
use crate::quadrature::{cell_rule, mesh_edge_rule};
use crate::weak_gradient::{cell_exactness, edge_exactness};

/// `Q_h u`: interior and edge projections of `u` taken from each cell's own
/// region, so interface traces are double valued.
pub fn interpolate(disc: &Discretization, u: &(dyn Fn(Point, Region) -> f64 + Sync)) -> Result<WeakFunction> {
    let mesh = disc.mesh;
    let locals = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cell = &mesh.cells[c];
            let op = &disc.operators[c];
            let region = cell.region;
            let rule = cell_rule(mesh, c, cell_exactness(op.degree))?;
            let space = PolySpace::Monomial(disc.interior_basis(c));
            let mut out = project_onto(&space, &rule, |p| u(p, region))
                .map_err(|e| crate::projection::relabel(e, c))?;
            for &e in &cell.edges {
                let erule = mesh_edge_rule(mesh, e, edge_exactness(op.degree, disc.k, disc.q) + 4)?;
                out.extend(project_onto_edge(&erule, disc.q, |p| u(p, region)));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeakFunction { locals })
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorRecord {
    /// `(sum_T |Q_0 u - u_0|_T^2)^(1/2)`.
    pub l2: f64,
    /// `(sum_T |a grad(Q_0 u - u_0)|_T^2)^(1/2)`.
    pub h1: f64,
    /// `(sum_T (a grad e_0, grad e_0)_T)^(1/2)`.
    pub h1_half: f64,
    /// `|||Q_h u - u_h|||`.
    pub energy: f64,
}

fn local_diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `(a G v, G v)_T` on one cell.
fn local_energy(disc: &Discretization, a: &Diffusion, cell: usize, local: &[f64]) -> f64 {
    let op = &disc.operators[cell];
    let g = op.apply(local);
    let nr = op.dim_r();
    let gx = g.rows(0, nr);
    let gy = g.rows(nr, nr);
    let mx = &op.gram * gx;
    let my = &op.gram * gy;
    let t = a.0;
    t[(0, 0)] * gx.dot(&mx) + t[(0, 1)] * gx.dot(&my) + t[(1, 0)] * gy.dot(&mx) + t[(1, 1)] * gy.dot(&my)
}

pub fn energy_norm(disc: &Discretization, coefficient: &[Diffusion; 2], v: &WeakFunction) -> f64 {
    let parts: Vec<f64> = (0..disc.mesh.n_cells())
        .into_par_iter()
        .map(|c| local_energy(disc, &coefficient[disc.mesh.cells[c].region as usize], c, &v.locals[c]))
        .collect();
    parts.iter().sum::<f64>().max(0.0).sqrt()
}

/// `(sum_T (a grad v_0, grad v_0)_T + h_T^-1 |v_0 - v_b|_dT^2)^(1/2)`.
pub fn discrete_h1_norm(disc: &Discretization, coefficient: &[Diffusion; 2], v: &WeakFunction) -> Result<f64> {
    let mesh = disc.mesh;
    let parts = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cell = &mesh.cells[c];
            let a = &coefficient[cell.region as usize];
            let op = &disc.operators[c];
            let basis = disc.interior_basis(c);
            let nk = basis.dim();
            let local = &v.locals[c];
            let rule = cell_rule(mesh, c, 2 * disc.k)?;
            let mut s = 0.0;
            for (&p, &w) in rule.points.iter().zip(&rule.weights) {
                let (_, grads) = basis.eval(p);
                let g = grads.iter().zip(&local[..nk]).fold(crate::mesh::Vector::zeros(), |acc, (g, c)| acc + g * *c);
                s += w * g.dot(&a.apply(g));
            }
            let mut b = 0.0;
            for (i, &e) in cell.edges.iter().enumerate() {
                let erule = mesh_edge_rule(mesh, e, 2 * disc.k.max(disc.q))?;
                let off = op.layout.edge_offset(i);
                for ((&p, &t), &w) in erule.points.iter().zip(&erule.params).zip(&erule.weights) {
                    let v0: f64 = basis.values(p).iter().zip(&local[..nk]).map(|(x, y)| x * y).sum();
                    let vb: f64 =
                        crate::basis::legendre(disc.q, t).iter().zip(&local[off..]).map(|(x, y)| x * y).sum();
                    b += w * (v0 - vb).powi(2);
                }
            }
            Ok(s + b / cell.diameter())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

pub fn compute_errors(disc: &Discretization, problem: &ProblemSpec, uh: &WeakFunction) -> Result<ErrorRecord> {
    let exact: &ExactSolution = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::Unsupported(format!("problem '{}' has no exact solution", problem.name)))?;
    let qh = interpolate(disc, exact.u.as_ref())?;
    errors_against(disc, problem, &qh, uh)
}

/// Errors of `uh` measured against a reference weak function `qh`.
pub fn errors_against(
    disc: &Discretization,
    problem: &ProblemSpec,
    qh: &WeakFunction,
    uh: &WeakFunction,
) -> Result<ErrorRecord> {
    let mesh = disc.mesh;
    let parts = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cell = &mesh.cells[c];
            let a = problem.coefficient(cell.region);
            let d = local_diff(&qh.locals[c], &uh.locals[c]);
            let basis = disc.interior_basis(c);
            let nk = basis.dim();
            let rule = cell_rule(mesh, c, 2 * disc.k)?;
            let (mut l2, mut h1, mut half) = (0.0, 0.0, 0.0);
            for (&p, &w) in rule.points.iter().zip(&rule.weights) {
                let (vals, grads) = basis.eval(p);
                let v: f64 = vals.iter().zip(&d[..nk]).map(|(x, y)| x * y).sum();
                let g = grads.iter().zip(&d[..nk]).fold(crate::mesh::Vector::zeros(), |acc, (g, c)| acc + g * *c);
                let ag = a.apply(g);
                l2 += w * v * v;
                h1 += w * ag.norm_squared();
                half += w * g.dot(&ag);
            }
            let energy = local_energy(disc, a, c, &d);
            Ok([l2, h1, half, energy])
        })
        .collect::<Result<Vec<[f64; 4]>>>()?;
    let mut sums = [0.0; 4];
    for p in parts {
        for (s, v) in sums.iter_mut().zip(p) {
            *s += v;
        }
    }
    let [l2, h1, half, energy] = sums.map(|s: f64| s.max(0.0).sqrt());
    Ok(ErrorRecord { l2, h1, h1_half: half, energy })
}

/// Value of the interior polynomial of the cell containing `p` (lowest cell
/// id on shared boundaries).
pub fn point_eval(disc: &Discretization, uh: &WeakFunction, p: Point) -> Result<f64> {
    let c = disc.mesh.locate(p).ok_or(Error::Domain { x: p.x, y: p.y })?;
    let basis = disc.interior_basis(c);
    Ok(basis.values(p).iter().zip(&uh.locals[c]).map(|(a, b)| a * b).sum())
}

/// `rate_i = log(e_{i-1}/e_i) / log(h_{i-1}/h_i)`; the first entry is `None`.
pub fn convergence_rates(errors: &[f64], h: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() != h.len() {
        return Err(Error::Input(format!("{} errors for {} mesh sizes", errors.len(), h.len())));
    }
    let mut out = vec![None; errors.len().min(1)];
    for i in 1..errors.len() {
        let ratio = h[i - 1] / h[i];
        if (ratio - 2.0).abs() > 1e-6 {
            return Err(Error::UndefinedRate(format!("mesh size ratio {ratio} between levels {} and {i}", i - 1)));
        }
        out.push(Some((errors[i - 1] / errors[i]).ln() / ratio.ln()));
    }
    Ok(out)
}

/// C-style `%.6e`, e.g. `2.210000e-03`.
pub fn format_sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.6e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// One refinement level of a study.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub level: u32,
    pub h: f64,
    pub dofs: usize,
    pub errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyMeta {
    pub problem: String,
    pub lambda: f64,
    pub k: usize,
    pub q: usize,
    pub r_rule: String,
    pub mesh: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub meta: StudyMeta,
    /// Short names of the error columns, e.g. `l2`.
    pub columns: Vec<String>,
    pub records: Vec<LevelRecord>,
}

impl StudyResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| r.errors[i]).collect())
    }

    pub fn rates(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let errs = self.column(name).ok_or_else(|| Error::Input(format!("no column '{name}'")))?;
        let h: Vec<f64> = self.records.iter().map(|r| r.h).collect();
        convergence_rates(&errs, &h)
    }

    /// Rate between the last two levels.
    pub fn final_rate(&self, name: &str) -> Result<f64> {
        self.rates(name)?
            .last()
            .copied()
            .flatten()
            .ok_or_else(|| Error::UndefinedRate("fewer than two levels".into()))
    }

    fn all_rates(&self) -> Result<Vec<Vec<Option<f64>>>> {
        self.columns.iter().map(|c| self.rates(c)).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let rates = self.all_rates()?;
        let mut out = String::from("level,h,dofs");
        for c in &self.columns {
            write!(out, ",e_{c},rate_{c}").unwrap();
        }
        out.push('\n');
        for (i, r) in self.records.iter().enumerate() {
            write!(out, "{},{},{}", r.level, format_sci(r.h), r.dofs).unwrap();
            for (j, e) in r.errors.iter().enumerate() {
                let rate = rates[j][i].map(format_sci).unwrap_or_default();
                write!(out, ",{},{rate}", format_sci(*e)).unwrap();
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_markdown(&self) -> Result<String> {
        let rates = self.all_rates()?;
        let m = &self.meta;
        let mut out = format!(
            "### {} lambda={} k={} q={} r={} mesh={}\n\n| level |",
            m.problem,
            format_sci(m.lambda),
            m.k,
            m.q,
            m.r_rule,
            m.mesh
        );
        for c in &self.columns {
            write!(out, " e_{c} | rate |").unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---|---|".repeat(self.columns.len()));
        out.push('\n');
        for (i, r) in self.records.iter().enumerate() {
            write!(out, "| {} |", r.level).unwrap();
            for (j, e) in r.errors.iter().enumerate() {
                let rate = rates[j][i].map(|v| format!("{v:.1}")).unwrap_or_default();
                write!(out, " {} | {rate} |", short_sci(*e)).unwrap();
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Three significant digits in `0.xyzE+nn` form.
pub fn short_sci(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mut exp = v.abs().log10().floor() as i32 + 1;
    let mut mant = v / 10f64.powi(exp);
    if (mant.abs() * 1000.0).round() >= 1000.0 {
        exp += 1;
        mant /= 10.0;
    }
    format!("{mant:.3}E{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}
