use weakgal::mesh::{generate_mesh, Interface, MeshFamily, Point, Region};
use weakgal::problems::{problem_library, verify_exact_solution, Diffusion, ProblemSpec};
use weakgal::{Discretization, Error, GradientRule};

const LAMBDAS: [f64; 5] = [1e-3, 0.1, 1.0, 10.0, 1e3];

#[test]
fn library_solutions_satisfy_their_data() {
    for name in ["test1", "test2"] {
        for l in LAMBDAS {
            let report = verify_exact_solution(&problem_library(name, l).unwrap())
                .unwrap_or_else(|e| panic!("{name} lambda={l}: {e}"));
            assert!(report.samples[0] > 0 && report.samples[1] > 0);
        }
    }
}

#[test]
fn perturbed_source_is_caught() {
    for name in ["test1", "test2"] {
        let bad = problem_library(name, 1.0).unwrap().with_source_offset(1.0);
        assert!(matches!(verify_exact_solution(&bad), Err(Error::Transcription(_))), "{name}");
    }
}

#[test]
fn line_interface_fluxes_match_from_both_sides() {
    // a du/dx on x = 0 equals (lambda - 1)(1 - y^2) from either side.
    let h = 1e-6;
    for l in LAMBDAS {
        let p = problem_library("test1", l).unwrap();
        let ex = p.exact.as_ref().unwrap();
        for y in [-0.7, 0.0, 0.4] {
            let expected = (l - 1.0) * (1.0 - y * y);
            let d1 = ((ex.u)(Point::new(0.0, y), Region::One) - (ex.u)(Point::new(-h, y), Region::One)) / h;
            let d2 = ((ex.u)(Point::new(h, y), Region::Two) - (ex.u)(Point::new(0.0, y), Region::Two)) / h;
            let tol = 1e-5 * (1.0 + l.max(1.0 / l));
            assert!((l * d1 - expected).abs() < tol, "region one, lambda={l}");
            assert!((d2 - expected).abs() < tol, "region two, lambda={l}");
        }
    }
}

#[test]
fn library_solutions_vanish_on_the_boundary() {
    for name in ["test1", "test2"] {
        for l in LAMBDAS {
            let p = problem_library(name, l).unwrap();
            let ex = p.exact.as_ref().unwrap();
            for i in 0..=50 {
                let t = -1.0 + 2.0 * i as f64 / 50.0;
                for q in [Point::new(t, -1.0), Point::new(1.0, t), Point::new(t, 1.0), Point::new(-1.0, t)] {
                    let r = p.interface.region_of(q);
                    assert!((ex.u)(q, r).abs() < 1e-12, "{name} at {q:?}");
                }
            }
        }
    }
}

#[test]
fn unit_contrast_matches_homogeneous_operator() {
    let mesh = generate_mesh(MeshFamily::ZigzagHexagon, 2, Interface::LineX0).unwrap();
    let disc = Discretization::new(&mesh, 1, 1, GradientRule::Offset(2)).unwrap();
    let a = disc.assemble(&problem_library("test1", 1.0).unwrap()).unwrap();
    let one = Diffusion::scalar(1.0);
    let b = disc.assemble(&ProblemSpec::homogeneous(Interface::LineX0, [one.clone(), one])).unwrap();
    assert_eq!(a.pattern(), b.pattern());
    assert_eq!(a.matrix.values(), b.matrix.values());
}

#[test]
fn toml_problem_matches_library_problem() {
    let text = r#"
        name = "quadratic"
        interface = "square_third"
        [region1]
        a = [[2.0, 0.0], [0.0, 2.0]]
        f = "-4*(2 - 0)"
        u = "x^2 + y^2"
        [region2]
        a = 2.0
        f = "-8"
        u = "x^2 + y^2"
    "#;
    let p = ProblemSpec::from_toml(text).unwrap();
    assert_eq!(p.name, "quadratic");
    verify_exact_solution(&p).unwrap();
    let g = (p.exact.as_ref().unwrap().grad)(Point::new(0.5, -0.25), Region::Two);
    assert!((g.x - 1.0).abs() < 1e-15 && (g.y + 0.5).abs() < 1e-15);
    assert!(ProblemSpec::from_toml("interface = \"line_x0\"").is_err());
    assert!(ProblemSpec::from_toml(&text.replace("a = 2.0", "a = -2.0")).is_err());
}

#[test]
fn nonpositive_contrast_is_rejected() {
    for l in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(problem_library("test1", l).is_err());
    }
    assert!(problem_library("test9", 1.0).is_err());
}
