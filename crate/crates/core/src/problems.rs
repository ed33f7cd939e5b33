//! Interface problems `-div(a grad u) = f` on (-1,1)^2 with a coefficient
//! that is constant on each of two regions.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Matrix2;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::mesh::{Interface, Point, Region, Vector};

/// Symmetric positive definite diffusion tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diffusion(pub Matrix2<f64>);

impl Diffusion {
    pub fn scalar(value: f64) -> Diffusion {
        Diffusion(Matrix2::from_diagonal_element(value))
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.0;
        let scale = a.abs().max();
        if !a.iter().all(|v| v.is_finite()) {
            return Err(Error::Input(format!("diffusion tensor has non-finite entries: {a:?}")));
        }
        if (a[(0, 1)] - a[(1, 0)]).abs() > 1e-14 * scale {
            return Err(Error::Input(format!("diffusion tensor is not symmetric: {a:?}")));
        }
        if !(a[(0, 0)] > 0.0 && a.determinant() > 0.0) {
            return Err(Error::Input(format!("diffusion tensor is not positive definite: {a:?}")));
        }
        Ok(())
    }

    pub fn apply(&self, v: Vector) -> Vector {
        self.0 * v
    }

    /// Symmetric square root.
    pub fn sqrt(&self) -> Diffusion {
        let eig = self.0.symmetric_eigen();
        let d = Matrix2::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        Diffusion(eig.eigenvectors * d * eig.eigenvectors.transpose())
    }

    /// Largest absolute entry.
    pub fn magnitude(&self) -> f64 {
        self.0.abs().max()
    }
}

pub type Field = Arc<dyn Fn(Point, Region) -> f64 + Send + Sync>;
pub type GradientField = Arc<dyn Fn(Point, Region) -> Vector + Send + Sync>;
pub type InterfaceData = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ExactSolution {
    pub u: Field,
    pub grad: GradientField,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub interface: Interface,
    /// Coefficient of region one and region two.
    pub coefficient: [Diffusion; 2],
    pub source: Field,
    /// Dirichlet data on the outer boundary, evaluated with the region of
    /// the adjacent cell.
    pub boundary: Field,
    /// Prescribed jump `u|_1 - u|_2` on the interface.
    pub jump: InterfaceData,
    /// Prescribed flux jump `a_1 grad u_1 . n_1 + a_2 grad u_2 . n_2`.
    pub flux_jump: InterfaceData,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("interface", &self.interface)
            .field("coefficient", &self.coefficient)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

fn zero_field() -> Field {
    Arc::new(|_, _| 0.0)
}

fn zero_data() -> InterfaceData {
    Arc::new(|_| 0.0)
}

impl ProblemSpec {
    pub fn coefficient(&self, region: Region) -> &Diffusion {
        &self.coefficient[region as usize]
    }

    /// All data zero: the discrete solution must vanish.
    pub fn homogeneous(interface: Interface, coefficient: [Diffusion; 2]) -> ProblemSpec {
        ProblemSpec {
            name: "zero".into(),
            interface,
            coefficient,
            source: zero_field(),
            boundary: zero_field(),
            jump: zero_data(),
            flux_jump: zero_data(),
            exact: Some(ExactSolution { u: zero_field(), grad: Arc::new(|_, _| Vector::zeros()) }),
        }
    }

    /// Adds a constant to the source while keeping the exact solution, so
    /// the pair no longer matches.
    pub fn with_source_offset(&self, delta: f64) -> ProblemSpec {
        let mut out = self.clone();
        let f = self.source.clone();
        out.source = Arc::new(move |p, r| f(p, r) + delta);
        out.name = format!("{}+{delta}", self.name);
        out
    }

    /// Multiplies all data and the exact solution by `c`.
    pub fn scaled(&self, c: f64) -> ProblemSpec {
        let mut out = self.clone();
        let f = self.source.clone();
        out.source = Arc::new(move |p, r| c * f(p, r));
        let g = self.boundary.clone();
        out.boundary = Arc::new(move |p, r| c * g(p, r));
        let gd = self.jump.clone();
        out.jump = Arc::new(move |p| c * gd(p));
        let gn = self.flux_jump.clone();
        out.flux_jump = Arc::new(move |p| c * gn(p));
        out.exact = self.exact.as_ref().map(|ex| {
            let (u, grad) = (ex.u.clone(), ex.grad.clone());
            ExactSolution { u: Arc::new(move |p, r| c * u(p, r)), grad: Arc::new(move |p, r| grad(p, r) * c) }
        });
        out
    }
}

pub const LIBRARY: [&str; 3] = ["test1", "test2", "test3"];

/// The built-in problems. Region one is `x < 0` for `test1` and the inner
/// square `(-1/3, 1/3)^2` for `test2` and `test3`.
pub fn problem_library(name: &str, lambda: f64) -> Result<ProblemSpec> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    let l = lambda;
    match name {
        "test1" => {
            let u: Field = Arc::new(move |p: Point, r| {
                let (x, y) = (p.x, p.y);
                match r {
                    Region::One => (1.0 + x) * (1.0 - y * y) * (1.0 - x / l),
                    Region::Two => (1.0 - x) * (1.0 - y * y) * (1.0 + l * x),
                }
            });
            let grad: GradientField = Arc::new(move |p: Point, r| {
                let (x, y) = (p.x, p.y);
                let s = 1.0 - y * y;
                match r {
                    // d/dx (1+x)(1-x/l) = 1 - 1/l - 2x/l
                    Region::One => Vector::new(
                        s * (1.0 - 1.0 / l - 2.0 * x / l),
                        -2.0 * y * (1.0 + x) * (1.0 - x / l),
                    ),
                    // d/dx (1-x)(1+l x) = l - 1 - 2 l x
                    Region::Two => Vector::new(s * (l - 1.0 - 2.0 * l * x), -2.0 * y * (1.0 - x) * (1.0 + l * x)),
                }
            });
            let f: Field = Arc::new(move |p: Point, r| {
                let (x, y) = (p.x, p.y);
                match r {
                    Region::One => -2.0 * x * x + (2.0 * l - 2.0) * x - 2.0 * y * y + 2.0 * l + 2.0,
                    Region::Two => (-2.0 * x * x - 2.0 * y * y + 2.0 * x + 2.0) * l - 2.0 * x + 2.0,
                }
            });
            Ok(ProblemSpec {
                name: name.into(),
                interface: Interface::LineX0,
                coefficient: [Diffusion::scalar(l), Diffusion::scalar(1.0)],
                source: f,
                boundary: zero_field(),
                jump: zero_data(),
                flux_jump: zero_data(),
                exact: Some(ExactSolution { u, grad }),
            })
        }
        "test2" => {
            let bump = |t: f64| (1.0 - t * t) * (1.0 - 9.0 * t * t);
            let dbump = |t: f64| 4.0 * t * (9.0 * t * t - 5.0);
            let scale = move |r| if r == Region::One { 1.0 } else { 1.0 / l };
            let u: Field = Arc::new(move |p: Point, r| scale(r) * bump(p.x) * bump(p.y));
            let grad: GradientField = Arc::new(move |p: Point, r| {
                Vector::new(dbump(p.x) * bump(p.y), bump(p.x) * dbump(p.y)) * scale(r)
            });
            let f: Field = Arc::new(|p: Point, _| {
                let (x2, y2) = (p.x * p.x, p.y * p.y);
                -4.0 * (243.0 * x2 * x2 * y2 + 243.0 * x2 * y2 * y2
                    - 45.0 * x2 * x2
                    - 540.0 * x2 * y2
                    - 45.0 * y2 * y2
                    + 77.0 * x2
                    + 77.0 * y2
                    - 10.0)
            });
            Ok(ProblemSpec {
                name: name.into(),
                interface: Interface::SquareThird,
                coefficient: [Diffusion::scalar(1.0), Diffusion::scalar(l)],
                source: f,
                boundary: zero_field(),
                jump: zero_data(),
                flux_jump: zero_data(),
                exact: Some(ExactSolution { u, grad }),
            })
        }
        "test3" => Ok(ProblemSpec {
            name: name.into(),
            interface: Interface::SquareThird,
            coefficient: [Diffusion::scalar(1.0), Diffusion::scalar(l)],
            source: Arc::new(|_, _| 1.0),
            boundary: zero_field(),
            jump: zero_data(),
            flux_jump: zero_data(),
            exact: None,
        }),
        _ => Err(Error::Input(format!("unknown problem '{name}' (expected one of {})", LIBRARY.join(", ")))),
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerificationReport {
    pub samples: [usize; 2],
    pub max_residual: f64,
    pub max_jump: f64,
    pub max_flux_jump: f64,
    pub max_boundary: f64,
}

const FD_STEP: f64 = 1e-4;
const PDE_TOL: f64 = 1e-6;
const INTERFACE_TOL: f64 = 1e-9;
const BOUNDARY_TOL: f64 = 1e-12;

/// Checks the exact solution against the data: the PDE by finite
/// differences on a 40x40 sample grid, the interface conditions, and the
/// boundary values.
pub fn verify_exact_solution(problem: &ProblemSpec) -> Result<VerificationReport> {
    let ex = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::Unsupported(format!("problem '{}' has no exact solution", problem.name)))?;
    let mut report = VerificationReport::default();
    let n = 40;
    let h = FD_STEP;
    for i in 0..n {
        for j in 0..n {
            let p = Point::new(-1.0 + (i as f64 + 0.5) * 2.0 / n as f64, -1.0 + (j as f64 + 0.5) * 2.0 / n as f64);
            let r = problem.interface.region_of(p);
            let u = |dx: f64, dy: f64| (ex.u)(Point::new(p.x + dx, p.y + dy), r);
            let c = u(0.0, 0.0);
            let uxx = (u(h, 0.0) - 2.0 * c + u(-h, 0.0)) / (h * h);
            let uyy = (u(0.0, h) - 2.0 * c + u(0.0, -h)) / (h * h);
            let uxy = (u(h, h) - u(h, -h) - u(-h, h) + u(-h, -h)) / (4.0 * h * h);
            let a = problem.coefficient(r).0;
            let lhs = -(a[(0, 0)] * uxx + (a[(0, 1)] + a[(1, 0)]) * uxy + a[(1, 1)] * uyy);
            let f = (problem.source)(p, r);
            let res = (lhs - f).abs();
            let scale = 1.0 + f.abs() + problem.coefficient(r).magnitude() * c.abs();
            if res > PDE_TOL * scale {
                return Err(Error::Transcription(format!(
                    "PDE residual {res:e} at ({}, {}) in region {}",
                    p.x,
                    p.y,
                    r.id()
                )));
            }
            report.samples[r as usize] += 1;
            report.max_residual = report.max_residual.max(res / scale);
        }
    }
    for (p, n1) in problem.interface.samples(200) {
        let (u1, u2) = ((ex.u)(p, Region::One), (ex.u)(p, Region::Two));
        let jump = (u1 - u2 - (problem.jump)(p)).abs();
        let flux1 = problem.coefficient(Region::One).apply((ex.grad)(p, Region::One)).dot(&n1);
        let flux2 = problem.coefficient(Region::Two).apply((ex.grad)(p, Region::Two)).dot(&-n1);
        let flux = (flux1 + flux2 - (problem.flux_jump)(p)).abs();
        if jump > INTERFACE_TOL || flux > INTERFACE_TOL {
            return Err(Error::Transcription(format!(
                "interface mismatch at ({}, {}): jump {jump:e}, flux {flux:e}",
                p.x, p.y
            )));
        }
        report.max_jump = report.max_jump.max(jump);
        report.max_flux_jump = report.max_flux_jump.max(flux);
    }
    for i in 0..100 {
        let t = -1.0 + 2.0 * (i as f64 + 0.5) / 100.0;
        for p in [Point::new(t, -1.0), Point::new(1.0, t), Point::new(-t, 1.0), Point::new(-1.0, -t)] {
            let r = problem.interface.region_of(p);
            let err = ((ex.u)(p, r) - (problem.boundary)(p, r)).abs();
            if err > BOUNDARY_TOL {
                return Err(Error::Transcription(format!("boundary mismatch {err:e} at ({}, {})", p.x, p.y)));
            }
            report.max_boundary = report.max_boundary.max(err);
        }
    }
    Ok(report)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoefficientValue {
    Scalar(f64),
    Tensor([[f64; 2]; 2]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionConfig {
    a: CoefficientValue,
    f: String,
    u: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemConfig {
    name: Option<String>,
    interface: String,
    g: Option<String>,
    g_d: Option<String>,
    g_n: Option<String>,
    region1: RegionConfig,
    region2: RegionConfig,
}

fn parse_field(text: &str, what: &str) -> Result<Expr> {
    Expr::parse(text).map_err(|e| Error::Config(format!("{what}: {e}")))
}

fn pair_field(e: [Expr; 2]) -> Field {
    Arc::new(move |p: Point, r: Region| e[r as usize].eval(p.x, p.y))
}

impl ProblemSpec {
    /// Reads a problem from TOML:
    ///
    /// ```toml
    /// name = "custom"
    /// interface = "line_x0"        # or "square_third"
    /// g = "0"                      # boundary data, defaults to u or 0
    /// g_d = "0"                    # interface jump, default 0
    /// g_n = "0"                    # flux jump, default 0
    /// [region1]
    /// a = 2.0                      # or [[2, 0], [0, 1]]
    /// f = "-2*(x^2 + y^2)"
    /// u = "x^2*y^2"                # optional, both regions or neither
    /// [region2]
    /// a = 1.0
    /// f = "..."
    /// ```
    pub fn from_toml(text: &str) -> Result<ProblemSpec> {
        let cfg: ProblemConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let interface: Interface = cfg.interface.parse()?;
        let coeff = |c: &CoefficientValue, which: &str| -> Result<Diffusion> {
            let d = match c {
                CoefficientValue::Scalar(v) => Diffusion::scalar(*v),
                CoefficientValue::Tensor(m) => Diffusion(Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])),
            };
            d.validate().map_err(|e| Error::Config(format!("{which}.a: {e}")))?;
            Ok(d)
        };
        let coefficient = [coeff(&cfg.region1.a, "region1")?, coeff(&cfg.region2.a, "region2")?];
        let source = pair_field([parse_field(&cfg.region1.f, "region1.f")?, parse_field(&cfg.region2.f, "region2.f")?]);
        let exact = match (&cfg.region1.u, &cfg.region2.u) {
            (Some(u1), Some(u2)) => Some([parse_field(u1, "region1.u")?, parse_field(u2, "region2.u")?]),
            (None, None) => None,
            _ => return Err(Error::Config("u must be given for both regions or neither".into())),
        };
        let boundary = match (&cfg.g, &exact) {
            (Some(g), _) => {
                let e = parse_field(g, "g")?;
                pair_field([e.clone(), e])
            }
            (None, Some(u)) => pair_field(u.clone()),
            (None, None) => zero_field(),
        };
        let data = |text: &Option<String>, what: &str| -> Result<InterfaceData> {
            Ok(match text {
                Some(t) => {
                    let e = parse_field(t, what)?;
                    Arc::new(move |p: Point| e.eval(p.x, p.y))
                }
                None => zero_data(),
            })
        };
        let exact = exact.map(|u| {
            let grad = [
                [u[0].derivative(Var::X), u[0].derivative(Var::Y)],
                [u[1].derivative(Var::X), u[1].derivative(Var::Y)],
            ];
            ExactSolution {
                u: pair_field(u),
                grad: Arc::new(move |p: Point, r: Region| {
                    let [gx, gy] = &grad[r as usize];
                    Vector::new(gx.eval(p.x, p.y), gy.eval(p.x, p.y))
                }),
            }
        });
        Ok(ProblemSpec {
            name: cfg.name.unwrap_or_else(|| "custom".into()),
            interface,
            coefficient,
            source,
            boundary,
            jump: data(&cfg.g_d, "g_d")?,
            flux_jump: data(&cfg.g_n, "g_n")?,
            exact,
        })
    }

    pub fn load_toml(path: impl AsRef<Path>) -> Result<ProblemSpec> {
        ProblemSpec::from_toml(&std::fs::read_to_string(path)?)
    }
}
