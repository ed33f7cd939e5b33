//! Structured meshes of (-1, 1)^2 fitted to one of two interfaces.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{Mesh, Point, Region, Vector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeshFamily {
    /// Squares cut by the SW-NE diagonal.
    UniformTriangle,
    UniformSquare,
    /// Each square cut by a staircase polyline into two congruent
    /// nonconvex cells with one reflex vertex each.
    ZigzagHexagon,
}

impl MeshFamily {
    pub const ALL: [MeshFamily; 3] = [MeshFamily::UniformTriangle, MeshFamily::UniformSquare, MeshFamily::ZigzagHexagon];

    pub fn name(self) -> &'static str {
        match self {
            MeshFamily::UniformTriangle => "uniform_triangle",
            MeshFamily::UniformSquare => "uniform_square",
            MeshFamily::ZigzagHexagon => "zigzag_hexagon",
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeshFamily::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown mesh family '{s}'")))
    }
}

/// Location of the material interface inside (-1, 1)^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interface {
    /// The line x = 0; region one is x < 0.
    LineX0,
    /// The boundary of (-1/3, 1/3)^2; region one is the inner square.
    SquareThird,
}

impl Interface {
    pub fn name(self) -> &'static str {
        match self {
            Interface::LineX0 => "line_x0",
            Interface::SquareThird => "square_third",
        }
    }

    pub fn region_of(self, p: Point) -> Region {
        let inside = match self {
            Interface::LineX0 => p.x < 0.0,
            Interface::SquareThird => p.x.abs() < 1.0 / 3.0 && p.y.abs() < 1.0 / 3.0,
        };
        if inside {
            Region::One
        } else {
            Region::Two
        }
    }

    /// Grid divisions per axis at a refinement level.
    pub fn divisions(self, level: u32) -> usize {
        match self {
            Interface::LineX0 => 1 << level,
            Interface::SquareThird => 3 << level,
        }
    }

    pub fn check_divisions(self, n: usize) -> Result<()> {
        let ok = match self {
            Interface::LineX0 => n >= 2 && n % 2 == 0,
            Interface::SquareThird => n >= 6 && n % 6 == 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Alignment(format!("{} needs a grid count divisible by {}, got {n}", self.name(), match self {
                Interface::LineX0 => 2,
                Interface::SquareThird => 6,
            })))
        }
    }

    /// `count` points spread along the interface, each paired with the unit
    /// normal pointing out of region one.
    pub fn samples(self, count: usize) -> Vec<(Point, Vector)> {
        match self {
            Interface::LineX0 => (0..count)
                .map(|i| {
                    let y = -1.0 + 2.0 * (i as f64 + 0.5) / count as f64;
                    (Point::new(0.0, y), Vector::new(1.0, 0.0))
                })
                .collect(),
            Interface::SquareThird => {
                let t = 1.0 / 3.0;
                (0..count)
                    .map(|i| {
                        let s = 4.0 * (i as f64 + 0.5) / count as f64;
                        let side = s.floor() as usize;
                        let u = -t + 2.0 * t * s.fract();
                        match side {
                            0 => (Point::new(u, -t), Vector::new(0.0, -1.0)),
                            1 => (Point::new(t, u), Vector::new(1.0, 0.0)),
                            2 => (Point::new(-u, t), Vector::new(0.0, 1.0)),
                            _ => (Point::new(-t, -u), Vector::new(-1.0, 0.0)),
                        }
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Interface {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line_x0" => Ok(Interface::LineX0),
            "square_third" => Ok(Interface::SquareThird),
            _ => Err(Error::Input(format!("unknown interface '{s}'"))),
        }
    }
}

/// Generates the mesh of `family` at `level` (n = 2^level divisions per
/// axis, or 3 * 2^level for the square interface).
pub fn generate_mesh(family: MeshFamily, level: u32, interface: Interface) -> Result<Mesh> {
    if level < 1 {
        return Err(Error::Alignment(format!("level must be at least 1, got {level}")));
    }
    generate_mesh_with_divisions(family, interface.divisions(level), interface)
}

/// Vertices live on a lattice with spacing h/2 in x and h/3 in y so the
/// zigzag split points are shared exactly between neighbours.
struct Lattice {
    n: usize,
    ids: HashMap<(usize, usize), usize>,
    points: Vec<Point>,
}

impl Lattice {
    fn vertex(&mut self, i2: usize, j3: usize) -> usize {
        let n = self.n as f64;
        let points = &mut self.points;
        *self.ids.entry((i2, j3)).or_insert_with(|| {
            points.push(Point::new(-1.0 + i2 as f64 / n, -1.0 + 2.0 * j3 as f64 / (3.0 * n)));
            points.len() - 1
        })
    }

    fn cell(&mut self, keys: &[(usize, usize)]) -> Vec<usize> {
        keys.iter().map(|&(i, j)| self.vertex(i, j)).collect()
    }
}

pub fn generate_mesh_with_divisions(family: MeshFamily, n: usize, interface: Interface) -> Result<Mesh> {
    interface.check_divisions(n)?;
    let mut lat = Lattice { n, ids: HashMap::new(), points: Vec::new() };
    let mut loops = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (2 * i, 3 * j);
            match family {
                MeshFamily::UniformSquare => {
                    loops.push(lat.cell(&[(x, y), (x + 2, y), (x + 2, y + 3), (x, y + 3)]));
                }
                MeshFamily::UniformTriangle => {
                    loops.push(lat.cell(&[(x, y), (x + 2, y), (x + 2, y + 3)]));
                    loops.push(lat.cell(&[(x, y), (x + 2, y + 3), (x, y + 3)]));
                }
                MeshFamily::ZigzagHexagon => {
                    loops.push(lat.cell(&[
                        (x, y),
                        (x + 2, y),
                        (x + 2, y + 1),
                        (x + 2, y + 2),
                        (x + 1, y + 2),
                        (x + 1, y + 1),
                        (x, y + 1),
                    ]));
                    loops.push(lat.cell(&[
                        (x, y + 1),
                        (x + 1, y + 1),
                        (x + 1, y + 2),
                        (x + 2, y + 2),
                        (x + 2, y + 3),
                        (x, y + 3),
                        (x, y + 2),
                    ]));
                }
            }
        }
    }
    let regions = loops
        .iter()
        .map(|lp| {
            let pts: Vec<Point> = lp.iter().map(|&v| lat.points[v]).collect();
            super::cell_metrics(&pts).map(|m| interface.region_of(m.centroid))
        })
        .collect::<Result<Vec<_>>>()?;
    Mesh::build(lat.points, loops, regions)
}
