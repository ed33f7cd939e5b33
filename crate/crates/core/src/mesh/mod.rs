//! Polygonal meshes of a planar domain split into two material regions.
//!
//! Cells are simple counterclockwise polygons, convex or not. Edges are
//! derived from the cell loops; two cells share an edge exactly when their
//! loops contain the same vertex pair in opposite directions. Hanging nodes
//! are not representable: a split point on a shared side must appear in both
//! loops, which turns the coarser cell into a polygon with collinear vertices.

mod generate;
mod io;
mod triangulate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_mesh, generate_mesh_with_divisions, Interface, MeshFamily};
pub use io::MeshFile;
pub use triangulate::triangulate_polygon;

pub type Point = nalgebra::Point2<f64>;
pub type Vector = nalgebra::Vector2<f64>;

/// Material region of a cell. Region one is the side the interface normal
/// `n1` points away from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Region {
    One,
    Two,
}

impl Region {
    pub fn id(self) -> u8 {
        match self {
            Region::One => 1,
            Region::Two => 2,
        }
    }
}

impl TryFrom<u8> for Region {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Region::One),
            2 => Ok(Region::Two),
            other => Err(Error::Input(format!("region id must be 1 or 2, got {other}"))),
        }
    }
}

impl From<Region> for u8 {
    fn from(r: Region) -> u8 {
        r.id()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeTag {
    Interior,
    Boundary,
    Interface,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellMetrics {
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
    pub n_edges: usize,
    pub convex: bool,
}

#[derive(Clone, Debug)]
pub struct Cell {
    /// Counterclockwise vertex loop.
    pub vertices: Vec<usize>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1]`.
    pub edges: Vec<usize>,
    pub region: Region,
    pub metrics: CellMetrics,
    /// Ear-clipping triangulation, global vertex ids, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
}

impl Cell {
    pub fn area(&self) -> f64 {
        self.metrics.area
    }

    pub fn centroid(&self) -> Point {
        self.metrics.centroid
    }

    pub fn diameter(&self) -> f64 {
        self.metrics.diameter
    }

    pub fn n_edges(&self) -> usize {
        self.metrics.n_edges
    }

    pub fn is_convex(&self) -> bool {
        self.metrics.convex
    }
}

/// One incident cell of an edge.
#[derive(Clone, Copy, Debug)]
pub struct EdgeSide {
    pub cell: usize,
    /// Position of the edge in the cell loop.
    pub local: usize,
    /// Whether the cell loop runs from `endpoints[0]` to `endpoints[1]`.
    pub aligned: bool,
    /// Unit normal pointing out of `cell`.
    pub normal: Vector,
}

#[derive(Clone, Debug)]
pub struct Edge {
    /// Global orientation of the edge; edge bases are parametrized from the
    /// first endpoint to the second.
    pub endpoints: [usize; 2],
    pub sides: Vec<EdgeSide>,
    pub tag: EdgeTag,
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.tag == EdgeTag::Boundary
    }

    pub fn is_interface(&self) -> bool {
        self.tag == EdgeTag::Interface
    }

    pub fn side_of(&self, cell: usize) -> Option<&EdgeSide> {
        self.sides.iter().find(|s| s.cell == cell)
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<Cell>,
    pub edges: Vec<Edge>,
}

/// Area, centroid, diameter and convexity of a polygon.
pub fn cell_metrics(points: &[Point]) -> Result<CellMetrics> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("polygon with {n} vertices")));
    }
    // Shift to the first vertex so the shoelace sums stay well scaled.
    let o = points[0];
    let mut twice_area = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = points[i] - o;
        let q = points[(i + 1) % n] - o;
        let cross = p.x * q.y - q.x * p.y;
        twice_area += cross;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    let area = 0.5 * twice_area;
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diameter = diameter.max((points[i] - points[j]).norm());
        }
    }
    if !(area.abs() > 1e-14 * diameter * diameter) {
        return Err(Error::Degenerate(format!("polygon area {area:e}")));
    }
    let centroid = Point::new(o.x + cx / (3.0 * twice_area), o.y + cy / (3.0 * twice_area));
    let tol = -1e-14 * diameter * diameter;
    let convex = (0..n).all(|i| {
        let a = points[(i + n - 1) % n];
        let b = points[i];
        let c = points[(i + 1) % n];
        cross(b - a, c - b) >= tol
    });
    Ok(CellMetrics { area, centroid, diameter, n_edges: n, convex })
}

pub(crate) fn cross(a: Vector, b: Vector) -> f64 {
    a.x * b.y - a.y * b.x
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point, tol: f64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d.abs() <= tol
            && p.x >= a.x.min(b.x) - tol.sqrt()
            && p.x <= a.x.max(b.x) + tol.sqrt()
            && p.y >= a.y.min(b.y) - tol.sqrt()
            && p.y <= a.y.max(b.y) + tol.sqrt()
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn is_simple(points: &[Point], scale: f64) -> bool {
    let n = points.len();
    let tol = 1e-13 * scale * scale;
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        // Consecutive edges may only meet at the shared vertex.
        let c = points[(i + 2) % n];
        if cross(b - a, c - b).abs() <= tol && (b - a).dot(&(c - b)) < 0.0 {
            return false;
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(a, b, points[j], points[(j + 1) % n], tol) {
                return false;
            }
        }
    }
    true
}

fn segments_overlap(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d = a1 - a0;
    let len2 = d.norm_squared();
    let tol = 1e-12 * len2;
    if cross(d, b0 - a0).abs() > tol || cross(d, b1 - a0).abs() > tol {
        return false;
    }
    let t0 = d.dot(&(b0 - a0)) / len2;
    let t1 = d.dot(&(b1 - a0)) / len2;
    let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
    hi.min(1.0) - lo.max(0.0) > 1e-9
}

impl Mesh {
    /// Builds a mesh from counterclockwise vertex loops, deriving edges, tags
    /// and per-cell metrics.
    pub fn build(vertices: Vec<Point>, loops: Vec<Vec<usize>>, regions: Vec<Region>) -> Result<Mesh> {
        if loops.len() != regions.len() {
            return Err(Error::Input(format!(
                "{} cell loops but {} region ids",
                loops.len(),
                regions.len()
            )));
        }
        let mut cells = Vec::with_capacity(loops.len());
        for (c, (lp, region)) in loops.into_iter().zip(regions).enumerate() {
            if let Some(&bad) = lp.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Input(format!("cell {c} references missing vertex {bad}")));
            }
            let pts: Vec<Point> = lp.iter().map(|&v| vertices[v]).collect();
            let metrics = cell_metrics(&pts)?;
            if metrics.area <= 0.0 {
                return Err(Error::Orientation { cell: c, area: metrics.area });
            }
            if !is_simple(&pts, metrics.diameter) {
                return Err(Error::NotSimple { cell: c });
            }
            let triangles = triangulate_polygon(&pts)
                .map_err(|e| Error::Triangulation(format!("cell {c}: {e}")))?
                .into_iter()
                .map(|t| [lp[t[0]], lp[t[1]], lp[t[2]]])
                .collect();
            cells.push(Cell { vertices: lp, edges: Vec::new(), region, metrics, triangles });
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        for (c, cell) in cells.iter_mut().enumerate() {
            let n = cell.vertices.len();
            for i in 0..n {
                let a = cell.vertices[i];
                let b = cell.vertices[(i + 1) % n];
                if a == b {
                    return Err(Error::Degenerate(format!("cell {c} repeats vertex {a}")));
                }
                let key = (a.min(b), a.max(b));
                let (pa, pb) = (vertices[a], vertices[b]);
                let d = pb - pa;
                let length = d.norm();
                let normal = Vector::new(d.y, -d.x) / length;
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        endpoints: [a, b],
                        sides: Vec::with_capacity(2),
                        tag: EdgeTag::Boundary,
                        length,
                    });
                    edges.len() - 1
                });
                let edge = &mut edges[id];
                let aligned = edge.endpoints[0] == a;
                if let Some(prev) = edge.sides.first() {
                    if prev.aligned == aligned {
                        return Err(Error::Topology(format!(
                            "cells {} and {c} traverse edge ({a}, {b}) in the same direction",
                            prev.cell
                        )));
                    }
                }
                if edge.sides.len() == 2 {
                    return Err(Error::Topology(format!(
                        "edge ({a}, {b}) is shared by more than two cells"
                    )));
                }
                edge.sides.push(EdgeSide { cell: c, local: i, aligned, normal });
                cell.edges.push(id);
            }
        }

        for edge in &mut edges {
            edge.tag = match edge.sides.as_slice() {
                [_] => EdgeTag::Boundary,
                [s, t] if cells[s.cell].region != cells[t.cell].region => EdgeTag::Interface,
                _ => EdgeTag::Interior,
            };
        }

        let mesh = Mesh { vertices, cells, edges };
        mesh.check_conformity()?;
        Ok(mesh)
    }

    /// Single-cell edges must not overlap one another; an overlap means a
    /// shared side is split differently in its two incident loops.
    fn check_conformity(&self) -> Result<()> {
        let mut open: Vec<(usize, f64, f64)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_boundary())
            .map(|(i, e)| {
                let (p, q) = (self.vertices[e.endpoints[0]], self.vertices[e.endpoints[1]]);
                (i, p.x.min(q.x), p.x.max(q.x))
            })
            .collect();
        open.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (n, &(i, _, hi)) in open.iter().enumerate() {
            let ei = &self.edges[i];
            let (a0, a1) = (self.vertices[ei.endpoints[0]], self.vertices[ei.endpoints[1]]);
            for &(j, lo, _) in &open[n + 1..] {
                if lo > hi + 1e-12 {
                    break;
                }
                let ej = &self.edges[j];
                let (b0, b1) = (self.vertices[ej.endpoints[0]], self.vertices[ej.endpoints[1]]);
                if segments_overlap(a0, a1, b0, b1) {
                    return Err(Error::Conformity(format!(
                        "edges {:?} and {:?} overlap without matching vertices",
                        ei.endpoints, ej.endpoints
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn edge_points(&self, e: usize) -> (Point, Point) {
        let [a, b] = self.edges[e].endpoints;
        (self.vertices[a], self.vertices[b])
    }

    pub fn triangle_points(&self, c: usize) -> Vec<[Point; 3]> {
        self.cells[c]
            .triangles
            .iter()
            .map(|t| [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]])
            .collect()
    }

    /// Mesh size: the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter()).fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area()).sum()
    }

    pub fn count_tag(&self, tag: EdgeTag) -> usize {
        self.edges.iter().filter(|e| e.tag == tag).count()
    }

    /// Lowest-numbered cell containing `p` (boundary points included).
    pub fn locate(&self, p: Point) -> Option<usize> {
        self.cells.iter().position(|cell| {
            let tol = 1e-12 * cell.diameter();
            let c = cell.centroid();
            if (p - c).norm() > cell.diameter() + tol {
                return false;
            }
            cell.triangles.iter().any(|t| {
                let [a, b, d] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
                let scale = tol * cell.diameter();
                cross(b - a, p - a) >= -scale && cross(d - b, p - b) >= -scale && cross(a - d, p - d) >= -scale
            })
        })
    }
}
