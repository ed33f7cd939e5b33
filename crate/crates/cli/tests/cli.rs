use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn weakgal(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakgal"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

const SMALL: [&str; 8] = ["--problem", "test1", "--lambda", "1", "--k", "1", "--levels", "1..2"];

#[test]
fn small_study_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = weakgal(&SMALL, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("| level | e_l2 | rate |"));
    let stem = "test1_lambda1.000000e+00_k1_q1_rk2_zigzag_hexagon";
    let csv = fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap();
    assert!(csv.starts_with("level,h,dofs,e_l2,rate_l2"));
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join(format!("{stem}.md")).exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(weakgal(&SMALL, a.path()).status.success());
    assert!(weakgal(&SMALL, b.path()).status.success());
    let name = "test1_lambda1.000000e+00_k1_q1_rk2_zigzag_hexagon.csv";
    assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
}

#[test]
fn bad_arguments_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["--levels", "4..2"],
        vec!["--problem", "test9"],
        vec!["--lambda", "-1"],
        vec!["--k", "1", "--q", "2"],
        vec!["--preset", "table99"],
        vec!["--mesh", "hexagons"],
        vec!["--solver", "lu"],
        vec!["--r-rule", "k-1"],
    ] {
        let out = weakgal(&args, dir.path());
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{args:?}");
    }
}

#[test]
fn problem_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("patch.toml");
    fs::write(
        &file,
        "name = \"patch\"\ninterface = \"line_x0\"\n[region1]\na = 1.0\nf = \"0\"\nu = \"x + y\"\n\
         [region2]\na = 1.0\nf = \"0\"\nu = \"x + y\"\n",
    )
    .unwrap();
    let out = weakgal(&["--problem-file", file.to_str().unwrap(), "--levels", "1..2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("patch_k1_q1_rk2_zigzag_hexagon.csv")).unwrap();
    let l2: f64 = csv.lines().nth(2).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(l2 < 1e-9, "patch error {l2}");
}

#[test]
fn exports_matrix_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--problem", "test1", "--lambda", "1", "--levels", "1", "--export-matrix", "--export-mesh"];
    let out = weakgal(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<String> =
        fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    let mtx = names.iter().find(|n| n.ends_with(".mtx")).expect("matrix written");
    let text = fs::read_to_string(dir.path().join(mtx)).unwrap();
    assert!(text.to_lowercase().starts_with("%%matrixmarket matrix coordinate real"));
    let mesh = names.iter().find(|n| n.ends_with("_mesh.json")).expect("mesh written");
    let mesh = weakgal::Mesh::load_json(dir.path().join(mesh)).unwrap();
    assert_eq!(mesh.n_cells(), 8);
}
