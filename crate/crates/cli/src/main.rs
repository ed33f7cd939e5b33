use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use weakgal::solver::SolveMethod;
use weakgal::study::{file_stem, ProblemSource};
use weakgal::{preset, run_study, GradientRule, MeshFamily, ProblemSpec, StudyConfig};

/// Convergence studies for weak Galerkin interface problems.
#[derive(Parser, Debug)]
#[command(name = "weakgal", version)]
struct Args {
    /// Start from a reference study setup (table1 .. table15); other flags override it.
    #[arg(long)]
    preset: Option<String>,
    /// Built-in problem: test1, test2 or test3.
    #[arg(long, conflicts_with = "problem_file")]
    problem: Option<String>,
    /// TOML problem description (see README).
    #[arg(long)]
    problem_file: Option<PathBuf>,
    /// Comma-separated coefficient contrasts.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Interior polynomial degree.
    #[arg(long)]
    k: Option<usize>,
    /// Edge polynomial degree (defaults to k).
    #[arg(long)]
    q: Option<usize>,
    /// Weak gradient degree: theory, k+1, k+2, k+3, ...
    #[arg(long)]
    r_rule: Option<String>,
    /// uniform_triangle, uniform_square or zigzag_hexagon.
    #[arg(long)]
    mesh: Option<String>,
    /// Level range `a..b` (inclusive) or a single level.
    #[arg(long)]
    levels: Option<String>,
    /// Output directory for CSV and markdown tables.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Write each mesh as JSON.
    #[arg(long)]
    export_mesh: bool,
    /// Write each system matrix in Matrix Market format.
    #[arg(long)]
    export_matrix: bool,
    /// Relative residual tolerance of the linear solver.
    #[arg(long)]
    tol: Option<f64>,
    /// auto, pcg or dense.
    #[arg(long, default_value = "auto")]
    solver: String,
    /// PCG iteration cap (default 50 sqrt(n)).
    #[arg(long)]
    max_iter: Option<usize>,
}

fn parse_levels(text: &str) -> Result<Vec<u32>> {
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (text.trim(), text.trim()),
    };
    let a: u32 = a.parse().with_context(|| format!("bad level '{a}'"))?;
    let b: u32 = b.parse().with_context(|| format!("bad level '{b}'"))?;
    if b < a {
        bail!("empty level range {text}");
    }
    Ok((a..=b).collect())
}

fn build_config(args: &Args) -> Result<StudyConfig> {
    let mut config = match &args.preset {
        Some(name) => preset(name)?,
        None => StudyConfig { levels: vec![4, 5, 6], ..StudyConfig::default() },
    };
    if let Some(name) = &args.problem {
        config.problem = ProblemSource::Library(name.clone());
    }
    if let Some(path) = &args.problem_file {
        let spec = ProblemSpec::load_toml(path).with_context(|| format!("reading {}", path.display()))?;
        config.problem = ProblemSource::Custom(spec);
    }
    if let Some(l) = &args.lambda {
        config.lambdas = l.clone();
    }
    if let Some(k) = args.k {
        config.k = k;
        config.q = k;
    }
    if let Some(q) = args.q {
        config.q = q;
    }
    if let Some(r) = &args.r_rule {
        config.r_rule = r.parse::<GradientRule>()?;
    }
    if let Some(m) = &args.mesh {
        config.mesh = m.parse::<MeshFamily>()?;
    }
    if let Some(l) = &args.levels {
        config.levels = parse_levels(l)?;
    }
    if let Some(t) = args.tol {
        config.solver.tol = t;
    }
    config.solver.max_iter = args.max_iter;
    config.solver.method = match args.solver.as_str() {
        "auto" => SolveMethod::Auto,
        "pcg" => SolveMethod::Pcg,
        "dense" => SolveMethod::Dense,
        other => bail!("unknown solver '{other}' (expected auto, pcg or dense)"),
    };
    config.out = Some(args.out.clone());
    config.export_mesh = args.export_mesh;
    config.export_matrix = args.export_matrix;
    config.validate()?;
    Ok(config)
}

fn run(args: &Args) -> Result<()> {
    let config = build_config(args)?;
    let results = run_study(&config)?;
    for result in &results {
        println!("{}", result.to_markdown()?);
        println!("wrote {}", args.out.join(format!("{}.csv", file_stem(&result.meta))).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
