//! Quadrature on triangles, polygons and segments, exact to a requested
//! polynomial degree.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss-Legendre
//! rules, so any exactness can be requested. Polygons are integrated through
//! their ear-clipping triangulation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::mesh::{cross, Mesh, Point};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> GaussLegendre {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Cached `n`-point rule.
    pub fn get(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.read().unwrap().get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(GaussLegendre::compute(n.max(1)));
        cache.write().unwrap().entry(n).or_insert(rule).clone()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = x;
    for j in 2..=n {
        let j = j as f64;
        let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, w)| w * f(p)).sum()
    }

    fn append(&mut self, other: QuadratureRule) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }
}

/// Collapsed rule on the reference triangle (0,0), (1,0), (0,1).
fn reference_triangle(exactness: usize) -> Arc<Vec<(f64, f64, f64)>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Vec<(f64, f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.read().unwrap().get(&exactness) {
        return rule.clone();
    }
    let n = (exactness + 2).div_ceil(2);
    let gl = GaussLegendre::get(n);
    let mut rule = Vec::with_capacity(n * n);
    for (&su, &wu) in gl.nodes.iter().zip(&gl.weights) {
        let u = 0.5 * (su + 1.0);
        for (&sv, &wv) in gl.nodes.iter().zip(&gl.weights) {
            let v = 0.5 * (sv + 1.0);
            // x = u, y = v (1 - u), dx dy = (1 - u) du dv
            rule.push((u, v * (1.0 - u), 0.25 * wu * wv * (1.0 - u)));
        }
    }
    let rule = Arc::new(rule);
    cache.write().unwrap().entry(exactness).or_insert(rule).clone()
}

pub fn triangle_rule(tri: [Point; 3], exactness: usize) -> Result<QuadratureRule> {
    let [a, b, c] = tri;
    let jac = cross(b - a, c - a);
    let scale = (b - a).norm_squared().max((c - a).norm_squared());
    if !(jac.abs() > 1e-14 * scale) {
        return Err(Error::Degenerate(format!("triangle {a:?} {b:?} {c:?}")));
    }
    let reference = reference_triangle(exactness);
    let (points, weights) = reference
        .iter()
        .map(|&(x, y, w)| (a + (b - a) * x + (c - a) * y, w * jac.abs()))
        .unzip();
    Ok(QuadratureRule { points, weights, exactness })
}

/// Union of triangle rules over a triangulation.
pub fn polygon_rule(triangles: &[[Point; 3]], exactness: usize) -> Result<QuadratureRule> {
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), exactness };
    for &t in triangles {
        rule.append(triangle_rule(t, exactness)?);
    }
    Ok(rule)
}

pub fn cell_rule(mesh: &Mesh, cell: usize, exactness: usize) -> Result<QuadratureRule> {
    polygon_rule(&mesh.triangle_points(cell), exactness)
}

/// Gauss rule on a segment. `params` holds the reference coordinate in
/// [-1, 1] of each point, -1 at `start`.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub points: Vec<Point>,
    pub params: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl EdgeRule {
    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, w)| w * f(p)).sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn edge_rule(start: Point, end: Point, exactness: usize) -> Result<EdgeRule> {
    let len = (end - start).norm();
    if !(len > 0.0) {
        return Err(Error::Degenerate(format!("zero-length edge at {start:?}")));
    }
    let gl = GaussLegendre::get((exactness + 1).div_ceil(2));
    let mid = start + (end - start) * 0.5;
    let half = (end - start) * 0.5;
    Ok(EdgeRule {
        points: gl.nodes.iter().map(|&s| mid + half * s).collect(),
        params: gl.nodes.clone(),
        weights: gl.weights.iter().map(|w| w * 0.5 * len).collect(),
        exactness,
    })
}

pub fn mesh_edge_rule(mesh: &Mesh, edge: usize, exactness: usize) -> Result<EdgeRule> {
    let (a, b) = mesh.edge_points(edge);
    edge_rule(a, b, exactness)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    fn reference() -> [Point; 3] {
        [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
    }

    #[test]
    fn gauss_legendre_small_rules() {
        let g = GaussLegendre::get(2);
        assert!((g.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g.weights[0] - 1.0).abs() < 1e-15);
        let g = GaussLegendre::get(3);
        assert_eq!(g.nodes[1], 0.0);
        assert!((g.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn reference_triangle_moments() {
        let r = triangle_rule(reference(), 0).unwrap();
        assert!((r.measure() - 0.5).abs() < 1e-15);
        let r = triangle_rule(reference(), 1).unwrap();
        assert!((r.integrate(|p| p.x) - 1.0 / 6.0).abs() < 1e-15);
        let r = triangle_rule(reference(), 8).unwrap();
        let exact = factorial(3) * factorial(5) / factorial(10);
        assert!(((r.integrate(|p| p.x.powi(3) * p.y.powi(5)) - exact) / exact).abs() < 1e-13);
    }

    #[test]
    fn degenerate_triangle_fails() {
        let t = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)];
        assert!(triangle_rule(t, 2).is_err());
    }

    #[test]
    fn unit_square_second_moment() {
        let tris = [
            [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0)],
            [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)],
        ];
        let r = polygon_rule(&tris, 2).unwrap();
        assert!((r.measure() - 1.0).abs() < 1e-15);
        assert!((r.integrate(|p| p.x * p.x) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn edge_rules() {
        let r = edge_rule(Point::new(0.0, 0.0), Point::new(3.0, 4.0), 0).unwrap();
        assert!((r.measure() - 5.0).abs() < 1e-15);
        let r = edge_rule(Point::new(0.0, 0.0), Point::new(1.0, 0.0), 1).unwrap();
        assert!((r.integrate(|p| p.x) - 0.5).abs() < 1e-15);
        assert!(edge_rule(Point::new(1.0, 1.0), Point::new(1.0, 1.0), 2).is_err());
    }

    #[test]
    fn legendre_normalization_on_edge() {
        let (a, b) = (Point::new(0.5, -1.0), Point::new(2.0, 1.0));
        let len = (b - a).norm();
        let r = edge_rule(a, b, 6).unwrap();
        let l3 = |s: f64| 0.5 * (5.0 * s * s * s - 3.0 * s);
        let v: f64 = r.params.iter().zip(&r.weights).map(|(&s, w)| w * l3(s) * l3(s)).sum();
        assert!((v - 2.0 / 7.0 * len / 2.0).abs() < 1e-14);
    }

    #[test]
    fn high_order_rule_is_accurate() {
        // 200-point rule integrates x^398 on [-1,1] exactly.
        let g = GaussLegendre::get(200);
        let v: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(398)).sum();
        assert!((v - 2.0 / 399.0).abs() < 1e-13);
        assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }
}
