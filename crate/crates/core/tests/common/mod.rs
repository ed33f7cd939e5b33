//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use weakgal::mesh::{Mesh, Point};

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn beta(p: usize, s: usize) -> f64 {
    // p! s! / (p + s + 1)!
    1.0 / ((p + s + 1) as f64 * binomial(p + s, s))
}

/// `int_0^1 x(t)^m y(t)^n dt` along the segment from `a` to `b`, expanded
/// in Bernstein form so no cancellation occurs between large terms.
pub fn segment_moment(a: Point, b: Point, m: usize, n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..=m {
        let cx = binomial(m, i) * a.x.powi((m - i) as i32) * b.x.powi(i as i32);
        for j in 0..=n {
            let cy = binomial(n, j) * a.y.powi((n - j) as i32) * b.y.powi(j as i32);
            s += cx * cy * beta(m + n - i - j, i + j);
        }
    }
    s
}

/// `int_P x^i y^j` over a counter-clockwise polygon by Green's theorem,
/// `int_P x^i y^j = oint x^(i+1) y^j / (i+1) dy`.
pub fn polygon_moment(poly: &[Point], i: usize, j: usize) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for e in 0..n {
        let (a, b) = (poly[e], poly[(e + 1) % n]);
        s += (b.y - a.y) * segment_moment(a, b, i + 1, j);
    }
    s / (i + 1) as f64
}

/// Legendre polynomials `P_0 .. P_q` at `s` by the three-term recurrence.
pub fn legendre(q: usize, s: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    if q >= 1 {
        out.push(s);
    }
    for n in 1..q {
        let n_ = n as f64;
        out.push(((2.0 * n_ + 1.0) * s * out[n] - n_ * out[n - 1]) / (n_ + 1.0));
    }
    out
}

/// 8-point Gauss-Legendre nodes and weights on [-1, 1] (tabulated).
pub const GAUSS8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.5255324099163290, 0.3137066458778873),
    (-0.1834346424956498, 0.3626837833783620),
    (0.1834346424956498, 0.3626837833783620),
    (0.5255324099163290, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

/// Tensor Gauss rule on an axis-aligned box, exact to degree 15 per axis.
pub fn box_rule(x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<(Point, f64)> {
    let mut out = Vec::new();
    for &(sx, wx) in &GAUSS8 {
        for &(sy, wy) in &GAUSS8 {
            let p = Point::new(x0 + (sx + 1.0) * 0.5 * (x1 - x0), y0 + (sy + 1.0) * 0.5 * (y1 - y0));
            out.push((p, wx * wy * 0.25 * (x1 - x0) * (y1 - y0)));
        }
    }
    out
}

/// Gauss rule on a segment, exact to degree 15.
pub fn segment_rule(a: Point, b: Point) -> Vec<(Point, f64, f64)> {
    let len = (b - a).norm();
    GAUSS8.iter().map(|&(s, w)| (a + (b - a) * ((s + 1.0) * 0.5), s, w * 0.5 * len)).collect()
}

/// Outward unit normal of local edge `i` of a counter-clockwise loop.
pub fn outward_normal(poly: &[Point], i: usize) -> weakgal::mesh::Vector {
    let d = poly[(i + 1) % poly.len()] - poly[i];
    weakgal::mesh::Vector::new(d.y, -d.x) / d.norm()
}

/// Scaled monomial values `((x-c)/h)^a ((y-c)/h)^b` in the library's
/// exponent order (total degree, then descending `a`).
pub fn scaled_monomials(c: Point, h: f64, degree: usize, p: Point) -> Vec<f64> {
    let (x, y) = ((p.x - c.x) / h, (p.y - c.y) / h);
    let mut out = Vec::new();
    for d in 0..=degree {
        for a in (0..=d).rev() {
            out.push(x.powi(a as i32) * y.powi((d - a) as i32));
        }
    }
    out
}

/// Reference edge parameter in [-1, 1] of `p` on mesh edge `e`, measured
/// from the edge's first endpoint.
pub fn edge_param(mesh: &Mesh, e: usize, p: Point) -> f64 {
    let a = mesh.vertices[mesh.edges[e].endpoints[0]];
    let b = mesh.vertices[mesh.edges[e].endpoints[1]];
    2.0 * (p - a).dot(&(b - a)) / (b - a).norm_squared() - 1.0
}

pub fn unit_square() -> Mesh {
    let v = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
    Mesh::build(v, vec![vec![0, 1, 2, 3]], vec![weakgal::Region::One]).unwrap()
}
