//! Convergence studies: mesh sweep, solve, error tables and exports.

use std::fs;
use std::path::{Path, PathBuf};

use crate::assembly::{Discretization, GlobalSystem, WeakFunction};
use crate::error::{Error, Result};
use crate::mesh::{generate_mesh, Mesh, MeshFamily, Point};
use crate::postprocess::{compute_errors, format_sci, point_eval, LevelRecord, StudyMeta, StudyResult};
use crate::problems::{problem_library, ProblemSpec};
use crate::solver::{solve_spd, SolveReport, SolverOptions};
use crate::weak_gradient::GradientRule;

/// Degree of the reference solution for problems without an exact solution.
pub const REFERENCE_DEGREE: usize = 4;

/// Points where problems without an exact solution are compared.
pub const PROBE_POINTS: [(f64, f64); 2] = [(0.0, 0.0), (2.0 / 3.0, 2.0 / 3.0)];

#[derive(Clone, Debug)]
pub enum ProblemSource {
    Library(String),
    /// A fully specified problem; the lambda sweep does not apply.
    Custom(ProblemSpec),
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub problem: ProblemSource,
    pub lambdas: Vec<f64>,
    pub k: usize,
    pub q: usize,
    pub r_rule: GradientRule,
    pub mesh: MeshFamily,
    pub levels: Vec<u32>,
    pub solver: SolverOptions,
    pub out: Option<PathBuf>,
    pub export_mesh: bool,
    pub export_matrix: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            problem: ProblemSource::Library("test1".into()),
            lambdas: vec![1e-3, 1.0, 1e3],
            k: 1,
            q: 1,
            r_rule: GradientRule::Offset(2),
            mesh: MeshFamily::ZigzagHexagon,
            levels: vec![2, 3, 4],
            solver: SolverOptions::default(),
            out: None,
            export_mesh: false,
            export_matrix: false,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Config("level list is empty".into()));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("levels must be strictly ascending, got {:?}", self.levels)));
        }
        if self.levels[0] < 1 {
            return Err(Error::Config("levels start at 1".into()));
        }
        if self.k < self.q {
            return Err(Error::Config(format!("q={} exceeds k={}", self.q, self.k)));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if let ProblemSource::Library(name) = &self.problem {
            if self.lambdas.is_empty() {
                return Err(Error::Config("lambda list is empty".into()));
            }
            for &l in &self.lambdas {
                problem_library(name, l).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::Config(format!("solver tolerance must be positive, got {}", self.solver.tol)));
        }
        Ok(())
    }

    /// Concrete problems of the sweep with their lambda.
    pub fn problems(&self) -> Result<Vec<(Option<f64>, ProblemSpec)>> {
        match &self.problem {
            ProblemSource::Library(name) => {
                self.lambdas.iter().map(|&l| Ok((Some(l), problem_library(name, l)?))).collect()
            }
            ProblemSource::Custom(spec) => Ok(vec![(None, spec.clone())]),
        }
    }
}

/// Degree, r rule, mesh family, lambda set and levels of the reference
/// studies `table1` .. `table15`. Triangle level `l` has `3 * 2^l`
/// divisions per axis, so the coarsest reference triangle grid is level 2.
pub fn preset(name: &str) -> Result<StudyConfig> {
    let n: usize = name
        .strip_prefix("table")
        .and_then(|s| s.parse().ok())
        .filter(|n| (1..=15).contains(n))
        .ok_or_else(|| Error::Config(format!("unknown preset '{name}' (expected table1 .. table15)")))?;
    let (problem, k, offset, mesh, first) = match n {
        1..=6 => ("test1", (n - 1) % 3 + 1, if n <= 3 { 2 } else { 3 }, MeshFamily::ZigzagHexagon, [4, 3, 2][(n - 1) % 3]),
        7..=9 => ("test2", n - 6, 2, MeshFamily::ZigzagHexagon, [3, 2, 2][n - 7]),
        10..=12 => ("test2", n - 9, 3, MeshFamily::ZigzagHexagon, [3, 3, 2][n - 10]),
        _ => ("test3", n - 12, 1, MeshFamily::UniformTriangle, 2),
    };
    Ok(StudyConfig {
        problem: ProblemSource::Library(problem.into()),
        lambdas: vec![1e-3, 1.0, 1e3],
        k,
        q: k,
        r_rule: GradientRule::Offset(offset),
        mesh,
        levels: vec![first, first + 1, first + 2],
        ..StudyConfig::default()
    })
}

/// Everything produced by one assemble-and-solve.
pub struct Solved<'m> {
    pub disc: Discretization<'m>,
    pub system: GlobalSystem,
    pub report: SolveReport,
    pub solution: WeakFunction,
}

pub fn solve_on<'m>(
    mesh: &'m Mesh,
    problem: &ProblemSpec,
    k: usize,
    q: usize,
    rule: GradientRule,
    solver: &SolverOptions,
) -> Result<Solved<'m>> {
    let disc = Discretization::new(mesh, k, q, rule)?;
    let system = disc.assemble(problem)?;
    let report = solve_spd(&system.matrix, &system.rhs, solver)?;
    let solution = disc.expand(&system.constraints, report.solution.as_slice());
    Ok(Solved { disc, system, report, solution })
}

fn context(e: Error, problem: &str, lambda: Option<f64>, level: u32) -> Error {
    let lambda = lambda.map_or("-".to_string(), format_sci);
    Error::Assembly(format!("{problem}, lambda={lambda}, level {level}: {e}"))
}

/// Output file stem of one study.
pub fn file_stem(meta: &StudyMeta) -> String {
    let lambda = if meta.lambda.is_nan() { String::new() } else { format!("_lambda{}", format_sci(meta.lambda)) };
    format!("{}{lambda}_k{}_q{}_r{}_{}", meta.problem, meta.k, meta.q, meta.r_rule.replace('+', ""), meta.mesh)
}

/// Runs every lambda of the sweep over all levels. With an output directory,
/// writes one CSV and one markdown table per lambda, plus optional mesh and
/// matrix exports.
pub fn run_study(config: &StudyConfig) -> Result<Vec<StudyResult>> {
    config.validate()?;
    let mut results = Vec::new();
    for (lambda, problem) in config.problems()? {
        let result = if problem.exact.is_some() {
            run_with_exact(config, lambda, &problem)?
        } else {
            run_with_reference(config, lambda, &problem)?
        };
        if let Some(dir) = &config.out {
            write_outputs(dir, &result)?;
        }
        results.push(result);
    }
    Ok(results)
}

fn meta(config: &StudyConfig, lambda: Option<f64>, problem: &ProblemSpec) -> StudyMeta {
    StudyMeta {
        problem: problem.name.clone(),
        lambda: lambda.unwrap_or(f64::NAN),
        k: config.k,
        q: config.q,
        r_rule: config.r_rule.label(),
        mesh: config.mesh.name().to_string(),
    }
}

fn export(config: &StudyConfig, meta: &StudyMeta, level: u32, mesh: &Mesh, system: &GlobalSystem) -> Result<()> {
    let Some(dir) = &config.out else { return Ok(()) };
    fs::create_dir_all(dir)?;
    let stem = format!("{}_level{level}", file_stem(meta));
    if config.export_mesh {
        mesh.save_json(dir.join(format!("{}_{}_level{level}_mesh.json", meta.mesh, meta.problem)))?;
    }
    if config.export_matrix {
        system.export_matrix_market(dir.join(format!("{stem}.mtx")))?;
    }
    Ok(())
}

fn run_with_exact(config: &StudyConfig, lambda: Option<f64>, problem: &ProblemSpec) -> Result<StudyResult> {
    let meta = meta(config, lambda, problem);
    let mut records = Vec::new();
    for &level in &config.levels {
        let run = || -> Result<LevelRecord> {
            let mesh = generate_mesh(config.mesh, level, problem.interface)?;
            let solved = solve_on(&mesh, problem, config.k, config.q, config.r_rule, &config.solver)?;
            export(config, &meta, level, &mesh, &solved.system)?;
            let e = compute_errors(&solved.disc, problem, &solved.solution)?;
            Ok(LevelRecord {
                level,
                h: mesh.h(),
                dofs: solved.system.n(),
                errors: vec![e.l2, e.h1, e.energy, e.h1_half],
            })
        };
        records.push(run().map_err(|e| context(e, &problem.name, lambda, level))?);
    }
    Ok(StudyResult { meta, columns: vec!["l2".into(), "h1".into(), "energy".into(), "h1_half".into()], records })
}

/// Point errors against a degree-4 solution on the finest level.
fn run_with_reference(config: &StudyConfig, lambda: Option<f64>, problem: &ProblemSpec) -> Result<StudyResult> {
    let meta = meta(config, lambda, problem);
    let finest = *config.levels.last().expect("validated");
    let probes: Vec<Point> = PROBE_POINTS.iter().map(|&(x, y)| Point::new(x, y)).collect();
    let reference = (|| -> Result<Vec<f64>> {
        let mesh = generate_mesh(config.mesh, finest, problem.interface)?;
        let k = REFERENCE_DEGREE;
        let solved = solve_on(&mesh, problem, k, k, config.r_rule, &config.solver)?;
        probes.iter().map(|&p| point_eval(&solved.disc, &solved.solution, p)).collect()
    })()
    .map_err(|e| context(e, &problem.name, lambda, finest))?;

    let mut records = Vec::new();
    for &level in &config.levels {
        let run = || -> Result<LevelRecord> {
            let mesh = generate_mesh(config.mesh, level, problem.interface)?;
            let solved = solve_on(&mesh, problem, config.k, config.q, config.r_rule, &config.solver)?;
            export(config, &meta, level, &mesh, &solved.system)?;
            let errors = probes
                .iter()
                .zip(&reference)
                .map(|(&p, &u4)| Ok((point_eval(&solved.disc, &solved.solution, p)? - u4).abs()))
                .collect::<Result<Vec<f64>>>()?;
            Ok(LevelRecord { level, h: mesh.h(), dofs: solved.system.n(), errors })
        };
        records.push(run().map_err(|e| context(e, &problem.name, lambda, level))?);
    }
    Ok(StudyResult { meta, columns: vec!["p0".into(), "p1".into()], records })
}

pub fn write_outputs(dir: &Path, result: &StudyResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let stem = file_stem(&result.meta);
    fs::write(dir.join(format!("{stem}.csv")), result.to_csv()?)?;
    fs::write(dir.join(format!("{stem}.md")), result.to_markdown()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_bind_reference_settings() {
        let t1 = preset("table1").unwrap();
        assert_eq!((t1.k, t1.r_rule, t1.levels.clone()), (1, GradientRule::Offset(2), vec![4, 5, 6]));
        let t6 = preset("table6").unwrap();
        assert_eq!((t6.k, t6.r_rule, t6.levels.clone()), (3, GradientRule::Offset(3), vec![2, 3, 4]));
        let t8 = preset("table8").unwrap();
        assert_eq!((t8.k, t8.levels.clone()), (2, vec![2, 3, 4]));
        let t11 = preset("table11").unwrap();
        assert_eq!((t11.k, t11.r_rule, t11.levels[0]), (2, GradientRule::Offset(3), 3));
        let t15 = preset("table15").unwrap();
        assert_eq!((t15.k, t15.r_rule, t15.mesh), (3, GradientRule::Offset(1), MeshFamily::UniformTriangle));
        assert!(preset("table16").is_err());
        assert!(preset("tableX").is_err());
        for n in 1..=15 {
            preset(&format!("table{n}")).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn validation_messages() {
        let mut c = StudyConfig { levels: vec![], ..Default::default() };
        assert!(c.validate().unwrap_err().to_string().contains("empty"));
        c.levels = vec![3, 2];
        assert!(c.validate().is_err());
        c.levels = vec![2, 3];
        c.q = 2;
        assert!(c.validate().is_err());
        c.q = 1;
        c.lambdas = vec![0.0];
        assert!(c.validate().is_err());
    }
}
