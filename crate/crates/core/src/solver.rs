//! Jacobi-preconditioned conjugate gradients, with dense Cholesky for small
//! systems.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest system the dense path accepts.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// PCG, falling back to dense Cholesky on small systems if PCG fails.
    Auto,
    Pcg,
    Dense,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveMethod::Auto => "auto",
            SolveMethod::Pcg => "pcg",
            SolveMethod::Dense => "dense",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    /// Defaults to `50 sqrt(n)`.
    pub max_iter: Option<usize>,
    pub method: SolveMethod,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-12, max_iter: None, method: SolveMethod::Auto }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: DVector<f64>,
    pub iterations: usize,
    /// `|b - A x| / |b|`, recomputed from the returned solution.
    pub residual: f64,
    /// `eps | |A| |x| | / |b|`: the residual that rounding `x` to working
    /// precision alone produces. PCG accepts a residual within a small
    /// multiple of this when the tolerance lies below it.
    pub floor: f64,
    pub method: SolveMethod,
}

/// Row-parallel `y = A x`; each row is summed sequentially, so the result
/// does not depend on the thread count.
pub fn spmv(a: &CsrMatrix<f64>, x: &DVector<f64>, y: &mut DVector<f64>) {
    let offsets = a.row_offsets();
    let cols = a.col_indices();
    let vals = a.values();
    y.as_mut_slice().par_iter_mut().enumerate().with_min_len(256).for_each(|(i, yi)| {
        let mut s = 0.0;
        for idx in offsets[i]..offsets[i + 1] {
            s += vals[idx] * x[cols[idx]];
        }
        *yi = s;
    });
}

/// `b - A x` with each row accumulated in doubled precision (error-free
/// product and sum transformations), so the result is accurate even when
/// it is far smaller than the terms being cancelled.
pub fn residual(a: &CsrMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    residual_and_magnitude(a, b, x).0
}

/// The accurate residual and the row sums `sum_j |a_ij x_j|`.
fn residual_and_magnitude(a: &CsrMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let offsets = a.row_offsets();
    let cols = a.col_indices();
    let vals = a.values();
    let mut r = DVector::zeros(b.len());
    let mut m = DVector::zeros(b.len());
    r.as_mut_slice()
        .par_iter_mut()
        .zip(m.as_mut_slice().par_iter_mut())
        .enumerate()
        .with_min_len(256)
        .for_each(|(i, (ri, mi))| {
            let (mut s, mut c, mut mag) = (b[i], 0.0, 0.0);
            for idx in offsets[i]..offsets[i + 1] {
                let p = -vals[idx] * x[cols[idx]];
                let pe = (-vals[idx]).mul_add(x[cols[idx]], -p);
                let t = s + p;
                let z = t - s;
                c += (s - (t - z)) + (p - z) + pe;
                s = t;
                mag += p.abs();
            }
            *ri = s + c;
            *mi = mag;
        });
    (r, m)
}

/// Relative residual and precision floor of `x`.
fn relative_residual(a: &CsrMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> (f64, f64) {
    let (r, m) = residual_and_magnitude(a, b, x);
    let bn = b.norm();
    let scale = if bn == 0.0 { 1.0 } else { bn };
    (r.norm() / scale, f64::EPSILON * m.norm() / scale)
}

/// Multiple of the precision floor PCG accepts.
const FLOOR_FACTOR: f64 = 8.0;

pub fn solve_spd(a: &CsrMatrix<f64>, b: &DVector<f64>, opts: &SolverOptions) -> Result<SolveReport> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Input(format!("matrix is {}x{}, right side has {n} rows", a.nrows(), a.ncols())));
    }
    if !b.iter().all(|v| v.is_finite()) {
        return Err(Error::Input("right side is not finite".into()));
    }
    match opts.method {
        SolveMethod::Pcg => pcg(a, b, opts),
        SolveMethod::Dense => dense_cholesky(a, b),
        SolveMethod::Auto => match pcg(a, b, opts) {
            Err(Error::NotConverged { .. }) if n <= DENSE_LIMIT => dense_cholesky(a, b),
            other => other,
        },
    }
}

/// Restarts from the accurately computed residual when the recursive
/// residual has drifted below the tolerance but `b - A x` has not.
const MAX_RESTARTS: usize = 5;

pub fn pcg(a: &CsrMatrix<f64>, b: &DVector<f64>, opts: &SolverOptions) -> Result<SolveReport> {
    pcg_observed(a, b, opts, |_, _| {})
}

/// PCG calling `observe(iteration, x)` after every update of the iterate.
pub fn pcg_observed(
    a: &CsrMatrix<f64>,
    b: &DVector<f64>,
    opts: &SolverOptions,
    mut observe: impl FnMut(usize, &DVector<f64>),
) -> Result<SolveReport> {
    let n = b.len();
    let max_iter = opts.max_iter.unwrap_or_else(|| ((50.0 * (n as f64).sqrt()).ceil() as usize).max(50));
    let bn = b.norm();
    let mut x = DVector::zeros(n);
    if bn == 0.0 {
        return Ok(SolveReport { solution: x, iterations: 0, residual: 0.0, floor: 0.0, method: SolveMethod::Pcg });
    }
    let mut diag = DVector::zeros(n);
    for (i, j, &v) in a.triplet_iter() {
        if i == j {
            diag[i] = v;
        }
    }
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Indefinite { iteration: 0, curvature: diag[i] });
    }
    let inv = diag.map(|d| 1.0 / d);

    let mut r = b.clone();
    let mut ap = DVector::zeros(n);
    let mut total = 0;
    let mut rel = 1.0;
    let mut previous = f64::INFINITY;
    for restart in 0..=MAX_RESTARTS {
        let mut z = r.component_mul(&inv);
        let mut p = z.clone();
        let mut rz = r.dot(&z);
        loop {
            if total == max_iter {
                return Err(Error::NotConverged { iterations: max_iter, residual: rel });
            }
            total += 1;
            spmv(a, &p, &mut ap);
            let curvature = p.dot(&ap);
            if !(curvature > 0.0) {
                return Err(Error::Indefinite { iteration: total, curvature });
            }
            let alpha = rz / curvature;
            x.axpy(alpha, &p, 1.0);
            observe(total, &x);
            r.axpy(-alpha, &ap, 1.0);
            rel = r.norm() / bn;
            if rel <= opts.tol {
                break;
            }
            z = r.component_mul(&inv);
            let rz_new = r.dot(&z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.axpy(1.0, &z, beta);
        }
        let (res, mag) = residual_and_magnitude(a, b, &x);
        r = res;
        rel = r.norm() / bn;
        let floor = f64::EPSILON * mag.norm() / bn;
        let stalled = rel > 0.5 * previous || restart == MAX_RESTARTS;
        if rel <= opts.tol || (stalled && rel <= FLOOR_FACTOR * floor) {
            return Ok(SolveReport { solution: x, iterations: total, residual: rel, floor, method: SolveMethod::Pcg });
        }
        previous = rel;
    }
    Err(Error::NotConverged { iterations: total, residual: rel })
}

pub fn to_dense(a: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, &v) in a.triplet_iter() {
        d[(i, j)] += v;
    }
    d
}

pub fn dense_cholesky(a: &CsrMatrix<f64>, b: &DVector<f64>) -> Result<SolveReport> {
    let n = b.len();
    if n > DENSE_LIMIT {
        return Err(Error::Unsupported(format!("dense solve limited to {DENSE_LIMIT} unknowns, got {n}")));
    }
    let chol = to_dense(a).cholesky().ok_or(Error::Indefinite { iteration: 0, curvature: f64::NAN })?;
    let solution = chol.solve(b);
    let (residual, floor) = relative_residual(a, b, &solution);
    Ok(SolveReport { solution, iterations: 0, residual, floor, method: SolveMethod::Dense })
}
