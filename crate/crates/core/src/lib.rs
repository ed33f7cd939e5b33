//! Stabilizer-free weak Galerkin finite elements for elliptic interface
//! problems `-div(a grad u) = f` on polygonal meshes, including nonconvex
//! cells.
//!
//! A typical run builds a mesh, a [`assembly::Discretization`] for degrees
//! `(k, q)` and a gradient rule, assembles and solves:
//!
//! ```no_run
//! use weakgal::{generate_mesh, problem_library, solve_on, GradientRule, MeshFamily, SolverOptions};
//!
//! let problem = problem_library("test1", 1e3).unwrap();
//! let mesh = generate_mesh(MeshFamily::ZigzagHexagon, 3, problem.interface).unwrap();
//! let solved = solve_on(&mesh, &problem, 1, 1, GradientRule::Offset(2), &SolverOptions::default()).unwrap();
//! let errors = weakgal::postprocess::compute_errors(&solved.disc, &problem, &solved.solution).unwrap();
//! println!("{:e}", errors.l2);
//! ```

pub mod assembly;
pub mod basis;
pub mod error;
pub mod expr;
pub mod mesh;
pub mod postprocess;
pub mod problems;
pub mod projection;
pub mod quadrature;
pub mod solver;
pub mod study;
pub mod weak_gradient;

pub use assembly::{Discretization, DofMap, GlobalSystem, WeakFunction};
pub use error::{Error, Result};
pub use mesh::{generate_mesh, Interface, Mesh, MeshFamily, Point, Region};
pub use problems::{problem_library, Diffusion, ProblemSpec};
pub use solver::{solve_spd, SolveMethod, SolverOptions};
pub use study::{preset, run_study, solve_on, StudyConfig};
pub use weak_gradient::GradientRule;
