//! One test per acceptance criterion; each prints a PASS or FAIL line.

mod common;

use std::time::Instant;

use common::{edge_param, legendre, outward_normal, polygon_moment, scaled_monomials, segment_moment, segment_rule};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakgal::mesh::{generate_mesh, EdgeTag, Interface, MeshFamily, Point};
use weakgal::postprocess::{compute_errors, discrete_h1_norm, energy_norm, StudyResult};
use weakgal::problems::{problem_library, Diffusion, ProblemSpec};
use weakgal::quadrature::{cell_rule, edge_rule, triangle_rule};
use weakgal::solver::{solve_spd, SolveMethod, SolverOptions};
use weakgal::study::{preset, run_study, solve_on, ProblemSource, StudyConfig};
use weakgal::weak_gradient::{gradient_degree, weak_gradient_matrix};
use weakgal::{Discretization, GradientRule, WeakFunction};

fn verdict(n: u32, title: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("criterion {n:2} PASS: {title}");
    } else {
        println!("criterion {n:2} FAIL: {title}");
        for f in failures {
            println!("    {f}");
        }
        panic!("criterion {n} failed: {}", failures.join("; "));
    }
}

fn centered(poly: &[Point]) -> (Point, f64) {
    let c = poly.iter().fold(Point::origin(), |acc, p| acc + p.coords / poly.len() as f64);
    (c, poly.iter().map(|p| (p - c).norm()).fold(0.0, f64::max))
}

fn monomial_sweep(rule: &weakgal::quadrature::QuadratureRule, poly: &[Point], degree: usize) -> f64 {
    let (c, s) = centered(poly);
    let local: Vec<Point> = poly.iter().map(|p| Point::from((p - c) / s)).collect();
    let area = polygon_moment(&local, 0, 0);
    let mut worst = 0.0f64;
    for d in 0..=degree {
        for i in 0..=d {
            let exact = polygon_moment(&local, i, d - i) * s * s;
            let q = rule.integrate(|p| ((p.x - c.x) / s).powi(i as i32) * ((p.y - c.y) / s).powi((d - i) as i32));
            worst = worst.max((q - exact).abs() / exact.abs().max(area * s * s));
        }
    }
    worst
}

#[test]
fn criterion_01_quadrature_exactness() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let tri = [Point::new(0.1, -0.3), Point::new(1.7, 0.2), Point::new(0.4, 1.1)];
    let mesh = generate_mesh(MeshFamily::ZigzagHexagon, 2, Interface::LineX0).unwrap();
    for d in 0..=24 {
        let e = monomial_sweep(&triangle_rule(tri, d).unwrap(), &tri, d);
        if e >= 1e-11 {
            failures.push(format!("triangle degree {d}: {e:e}"));
        }
        for c in [0, 11] {
            let e = monomial_sweep(&cell_rule(&mesh, c, d).unwrap(), &mesh.cell_points(c), d);
            if e >= 1e-11 {
                failures.push(format!("zigzag cell {c} degree {d}: {e:e}"));
            }
        }
        let (a, b) = (Point::new(-0.4, 0.25), Point::new(0.35, 0.9));
        let len = (b - a).norm();
        let rule = edge_rule(a, b, d).unwrap();
        for i in 0..=d {
            let exact = len * segment_moment(a, b, i, d - i);
            let q = rule.integrate(|p| p.x.powi(i as i32) * p.y.powi((d - i) as i32));
            if (q - exact).abs() >= 1e-11 * exact.abs().max(len) {
                failures.push(format!("edge degree {d} x^{i}: {q} vs {exact}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    verdict(1, "quadrature exact to declared degree on triangles, zigzag cells and edges", &failures);
}

#[test]
fn criterion_02_weak_gradient_definition() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut pairs = 0usize;
    for family in MeshFamily::ALL {
        let mesh = generate_mesh(family, 2, Interface::LineX0).unwrap();
        for _ in 0..5 {
            let cell = rng.random_range(0..mesh.n_cells());
            let c = &mesh.cells[cell];
            let poly = mesh.cell_points(cell);
            for (k, rule) in [(1, GradientRule::Offset(2)), (2, GradientRule::Offset(1)), (1, GradientRule::Theoretical)] {
                let r = gradient_degree(c, k, rule);
                if r + k > 15 {
                    continue; // beyond the tabulated edge rule of the oracle
                }
                let op = weak_gradient_matrix(&mesh, cell, k, k, r).unwrap();
                let nr = op.dim_r();
                let nd = op.layout.total();
                let nk = (k + 1) * (k + 2) / 2;
                // raw test monomials x^a y^b and their derivatives
                let exps: Vec<(i32, i32)> = (0..=r as i32).flat_map(|d| (0..=d).map(move |a| (a, d - a))).collect();
                let nt = exps.len();
                let mono = |p: Point| -> Vec<f64> { exps.iter().map(|&(a, b)| p.x.powi(a) * p.y.powi(b)).collect() };
                let dmono = |p: Point, comp: usize| -> Vec<f64> {
                    exps.iter()
                        .map(|&(a, b)| match comp {
                            0 if a > 0 => a as f64 * p.x.powi(a - 1) * p.y.powi(b),
                            1 if b > 0 => b as f64 * p.x.powi(a) * p.y.powi(b - 1),
                            _ => 0.0,
                        })
                        .collect()
                };
                let qrule = cell_rule(&mesh, cell, 2 * r + k + 2).unwrap();
                for comp in 0..2 {
                    // lhs[t, dof] = (G e_dof, phi_t e_comp)_T
                    let mut proj = DMatrix::zeros(nt, nr);
                    let mut rhs = DMatrix::zeros(nt, nd);
                    for (&p, &w) in qrule.points.iter().zip(&qrule.weights) {
                        let m = mono(p);
                        let psi = op.space.values(p);
                        let v0 = scaled_monomials(c.centroid(), c.diameter(), k, p);
                        let dm = dmono(p, comp);
                        for t in 0..nt {
                            for (i, s) in psi.iter().enumerate() {
                                proj[(t, i)] += w * m[t] * s;
                            }
                            for j in 0..nk {
                                rhs[(t, j)] -= w * v0[j] * dm[t];
                            }
                        }
                    }
                    for i in 0..poly.len() {
                        let n = outward_normal(&poly, i);
                        let nc = [n.x, n.y][comp];
                        let off = op.layout.edge_offset(i);
                        for (p, _, w) in segment_rule(poly[i], poly[(i + 1) % poly.len()]) {
                            let l = legendre(k, edge_param(&mesh, c.edges[i], p));
                            let m = mono(p);
                            for t in 0..nt {
                                for (j, lj) in l.iter().enumerate() {
                                    rhs[(t, off + j)] += w * lj * m[t] * nc;
                                }
                            }
                        }
                    }
                    let lhs = proj * op.matrix.rows(comp * nr, nr);
                    pairs += nt * nd;
                    let err = (&lhs - &rhs).abs().max();
                    if err >= 1e-10 {
                        failures.push(format!("{family} cell {cell} k={k} r={r} component {comp}: {err:e}"));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    println!("    {pairs} (DOF, test) pairs checked in {secs:.1} s");
    if secs >= 30.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    failures.truncate(10);
    verdict(2, "weak gradient satisfies its defining identity", &failures);
}

#[test]
fn criterion_03_polynomial_gradients_exact() {
    let mut failures = Vec::new();
    for family in [MeshFamily::UniformTriangle, MeshFamily::UniformSquare, MeshFamily::ZigzagHexagon] {
        let mesh = generate_mesh(family, 1, Interface::LineX0).unwrap();
        for rule in [GradientRule::Theoretical, GradientRule::Offset(2)] {
            for cell in [0, mesh.n_cells() - 1] {
                let k = 1;
                let r = gradient_degree(&mesh.cells[cell], k, rule);
                let op = weak_gradient_matrix(&mesh, cell, k, k, r).unwrap();
                let convex = mesh.cells[cell].is_convex();
                for d in 1..=(r + 1) {
                    for a in 0..=d {
                        let b = d - a;
                        let p = |x: Point| x.x.powi(a as i32) * x.y.powi(b as i32);
                        let g = op.apply_to_functions(&mesh, d, p, p).unwrap();
                        for x in mesh.cell_points(cell) {
                            let x = Point::from((x.coords + mesh.cells[cell].centroid().coords) * 0.5);
                            let w = op.eval_coeffs(&g, x);
                            let gx = if a > 0 { a as f64 * x.x.powi(a as i32 - 1) * x.y.powi(b as i32) } else { 0.0 };
                            let gy = if b > 0 { b as f64 * x.x.powi(a as i32) * x.y.powi(b as i32 - 1) } else { 0.0 };
                            let err = (w.x - gx).abs().max((w.y - gy).abs());
                            if err >= 1e-9 {
                                failures.push(format!("{family} convex={convex} {rule} x^{a}y^{b}: {err:e}"));
                            }
                        }
                    }
                }
            }
        }
    }
    failures.dedup();
    verdict(3, "weak gradient of polynomials with deg grad <= r is exact", &failures);
}

#[test]
fn criterion_04_patch_test() {
    let problem = ProblemSpec::from_toml(
        r#"
        interface = "line_x0"
        [region1]
        a = 1.0
        f = "0"
        u = "x + y"
        [region2]
        a = 1.0
        f = "0"
        u = "x + y"
        "#,
    )
    .unwrap();
    let mut failures = Vec::new();
    for family in MeshFamily::ALL {
        let mesh = generate_mesh(family, 2, Interface::LineX0).unwrap();
        for rule in [GradientRule::Theoretical, GradientRule::Offset(2)] {
            let s = solve_on(&mesh, &problem, 1, 1, rule, &SolverOptions::default()).unwrap();
            let e = compute_errors(&s.disc, &problem, &s.solution).unwrap();
            println!("    {family} {rule}: L2 error {:e}", e.l2);
            if e.l2 >= 1e-9 {
                failures.push(format!("{family} {rule}: {:e}", e.l2));
            }
        }
    }
    verdict(4, "linear solution reproduced on every family", &failures);
}

#[test]
fn criterion_05_systems_are_spd_and_uniquely_solvable() {
    let mut failures = Vec::new();
    for n in 1..=15 {
        let config = preset(&format!("table{n}")).unwrap();
        let level = config.levels[0];
        for (lambda, problem) in config.problems().unwrap() {
            let mesh = generate_mesh(config.mesh, level, problem.interface).unwrap();
            let disc = Discretization::new(&mesh, config.k, config.q, config.r_rule).unwrap();
            let system = match disc.assemble(&problem) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("table{n} lambda={lambda:?}: {e}"));
                    continue;
                }
            };
            if system.asymmetry() > 1e-12 {
                failures.push(format!("table{n} lambda={lambda:?}: asymmetry {:e}", system.asymmetry()));
            }
            let opts = SolverOptions { method: SolveMethod::Pcg, ..Default::default() };
            if let Err(e) = solve_spd(&system.matrix, &system.rhs, &opts) {
                failures.push(format!("table{n} lambda={lambda:?}: {e}"));
            }
        }
    }
    for (interface, family) in [(Interface::LineX0, MeshFamily::ZigzagHexagon), (Interface::SquareThird, MeshFamily::UniformTriangle)] {
        let zero = ProblemSpec::homogeneous(interface, [Diffusion::scalar(1e3), Diffusion::scalar(1.0)]);
        let mesh = generate_mesh(family, 2, interface).unwrap();
        let s = solve_on(&mesh, &zero, 2, 2, GradientRule::Offset(2), &SolverOptions::default()).unwrap();
        if s.solution.locals.iter().flatten().any(|&v| v != 0.0) {
            failures.push(format!("{family}: zero data gave a nonzero solution"));
        }
    }
    verdict(5, "preset systems symmetric and solvable, zero data gives zero", &failures);
}

/// Final-level L2 and H1 rates against `(k + 1, k)`.
fn check_orders(results: &[StudyResult], tol: f64, failures: &mut Vec<String>) {
    for r in results {
        let k = r.meta.k as f64;
        let l2 = r.final_rate("l2").unwrap();
        let h1 = r.final_rate("h1").unwrap();
        println!(
            "    {} lambda={:e} k={} r={} levels {:?}: L2 rate {l2:.2}, H1 rate {h1:.2}",
            r.meta.problem,
            r.meta.lambda,
            r.meta.k,
            r.meta.r_rule,
            r.records.iter().map(|x| x.level).collect::<Vec<_>>()
        );
        if (l2 - (k + 1.0)).abs() > tol || (h1 - k).abs() > tol {
            failures.push(format!("{} lambda={:e} k={}: rates {l2:.2} / {h1:.2}", r.meta.problem, r.meta.lambda, r.meta.k));
        }
    }
}

fn orders_for(tables: &[&str], levels: Option<Vec<u32>>, rule: Option<GradientRule>) -> Vec<String> {
    let mut failures = Vec::new();
    for t in tables {
        let mut config = preset(t).unwrap();
        if let Some(l) = &levels {
            config.levels = l.clone();
        }
        if let Some(r) = rule {
            config.r_rule = r;
        }
        check_orders(&run_study(&config).unwrap(), 0.25, &mut failures);
    }
    failures
}

#[test]
fn criterion_06_orders_test1() {
    let failures = orders_for(&["table1", "table2"], None, None);
    verdict(6, "test1 zigzag r=k+2 rates (k+1, k) for k=1,2 and three contrasts", &failures);
}

#[test]
fn criterion_07_orders_test2() {
    let failures = orders_for(&["table7", "table8"], None, None);
    verdict(7, "test2 zigzag r=k+2 final rates (k+1, k)", &failures);
}

#[test]
fn criterion_08_orders_with_larger_r() {
    let failures = orders_for(&["table4", "table5"], None, Some(GradientRule::Offset(3)));
    verdict(8, "test1 zigzag r=k+3 rates (k+1, k)", &failures);
}

#[test]
fn criterion_09_point_errors_test3() {
    let mut failures = Vec::new();
    for t in ["table13", "table14"] {
        let config = StudyConfig { lambdas: vec![1.0], ..preset(t).unwrap() };
        for r in run_study(&config).unwrap() {
            let k = r.meta.k as f64;
            for probe in ["p0", "p1"] {
                let rate = r.final_rate(probe).unwrap();
                println!("    k={} {probe}: errors {:?}, final rate {rate:.2}", r.meta.k, r.column(probe).unwrap());
                if rate < k + 0.5 {
                    failures.push(format!("k={} {probe}: rate {rate:.2}", r.meta.k));
                }
            }
        }
    }
    verdict(9, "test3 point errors against a degree-4 reference decay at rate >= k+1/2", &failures);
}

#[test]
fn criterion_10_norm_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let unit = [Diffusion::scalar(1.0), Diffusion::scalar(1.0)];
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for level in 2..=5 {
        let mesh = generate_mesh(MeshFamily::ZigzagHexagon, level, Interface::LineX0).unwrap();
        let disc = Discretization::new(&mesh, 1, 1, GradientRule::Offset(2)).unwrap();
        let (mut l, mut h) = (f64::INFINITY, 0.0f64);
        for _ in 0..100 {
            let x: Vec<f64> = (0..disc.dofs.n_free).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = WeakFunction { locals: (0..mesh.n_cells()).map(|c| disc.local_test(&x, c)).collect() };
            let ratio = energy_norm(&disc, &unit, &v) / discrete_h1_norm(&disc, &unit, &v).unwrap();
            l = l.min(ratio);
            h = h.max(ratio);
        }
        println!("    level {level}: ratio in [{l:.3}, {h:.3}]");
        lo = lo.min(l);
        hi = hi.max(h);
    }
    let failures = if lo > 0.0 && hi / lo < 50.0 { vec![] } else { vec![format!("C/c = {}", hi / lo)] };
    verdict(10, "energy norm and discrete H1 norm equivalent with C/c < 50", &failures);
}

#[test]
fn criterion_11_negative_control() {
    let mut failures = Vec::new();
    let config = StudyConfig { lambdas: vec![1.0], ..preset("table1").unwrap() };
    let problem = problem_library("test1", 1.0).unwrap().with_source_offset(1.0);
    let config = StudyConfig { problem: ProblemSource::Custom(problem), ..config };
    for r in run_study(&config).unwrap() {
        let (l2, h1) = (r.final_rate("l2").unwrap(), r.final_rate("h1").unwrap());
        println!("    corrupted source: L2 rate {l2:.2}, H1 rate {h1:.2}");
        if l2 >= 0.5 || h1 >= 0.5 {
            failures.push(format!("rates {l2:.2} / {h1:.2} did not degrade"));
        }
    }
    // the interface is still respected; only the data is wrong
    assert!(generate_mesh(MeshFamily::ZigzagHexagon, 1, Interface::LineX0)
        .unwrap()
        .edges
        .iter()
        .any(|e| e.tag == EdgeTag::Interface));
    verdict(11, "corrupted source destroys convergence", &failures);
}
