use super::{cross, Point};
use crate::error::{Error, Result};

/// Ear-clipping triangulation of a simple counterclockwise polygon.
///
/// Returns `n - 2` positively oriented triangles as local vertex indices.
/// Collinear vertices are allowed; they are never clipped as zero-area ears.
pub fn triangulate_polygon(points: &[Point]) -> Result<Vec<[usize; 3]>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Triangulation(format!("polygon with {n} vertices")));
    }
    let mut scale: f64 = 0.0;
    for p in points {
        scale = scale.max((p - points[0]).norm());
    }
    let eps = 1e-13 * scale * scale;

    let mut ring: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n - 2);
    while ring.len() > 3 {
        let m = ring.len();
        let ear = (0..m).find(|&i| {
            let (a, b, c) = (ring[(i + m - 1) % m], ring[i], ring[(i + 1) % m]);
            let (pa, pb, pc) = (points[a], points[b], points[c]);
            if cross(pb - pa, pc - pb) <= eps {
                return false;
            }
            ring.iter().all(|&j| {
                if j == a || j == b || j == c {
                    return true;
                }
                let p = points[j];
                // Blocked by anything in the closed triangle.
                !(cross(pb - pa, p - pa) >= -eps && cross(pc - pb, p - pb) >= -eps && cross(pa - pc, p - pc) >= -eps)
            })
        });
        let Some(i) = ear else {
            return Err(Error::Triangulation(format!("no ear left among {m} vertices")));
        };
        out.push([ring[(i + m - 1) % m], ring[i], ring[(i + 1) % m]]);
        ring.remove(i);
    }
    let [a, b, c] = [ring[0], ring[1], ring[2]];
    if cross(points[b] - points[a], points[c] - points[b]) <= eps {
        return Err(Error::Triangulation("final triangle is degenerate".into()));
    }
    out.push([a, b, c]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(p: &[Point], t: [usize; 3]) -> f64 {
        0.5 * cross(p[t[1]] - p[t[0]], p[t[2]] - p[t[0]])
    }

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn convex_quadrilateral() {
        let p = pts(&[(0.0, 0.0), (2.0, 0.0), (2.5, 1.0), (0.0, 1.5)]);
        let tris = triangulate_polygon(&p).unwrap();
        assert_eq!(tris.len(), 2);
        let total: f64 = tris.iter().map(|&t| area(&p, t)).sum();
        // Shoelace: 0.5 * (2*1 - 0 + 2.5*1.5 - 0 + 0 - 0) = 2.875
        assert!((total - 2.875).abs() < 1e-15);
    }

    #[test]
    fn l_shaped_hexagon() {
        let p = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]);
        let tris = triangulate_polygon(&p).unwrap();
        assert_eq!(tris.len(), 4);
        assert!(tris.iter().all(|&t| area(&p, t) > 0.0));
        let total: f64 = tris.iter().map(|&t| area(&p, t)).sum();
        assert!((total - 3.0).abs() < 1e-12 * 3.0);
    }

    #[test]
    fn triangle_with_points_on_every_side() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (1.0, 1.0), (0.0, 2.0), (0.0, 1.0)]);
        let tris = triangulate_polygon(&p).unwrap();
        assert_eq!(tris.len(), 4);
        let total: f64 = tris.iter().map(|&t| area(&p, t)).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn all_collinear_fails() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert!(triangulate_polygon(&p).is_err());
    }
}
