use std::path::Path;
use std::process::{Command, Output};

fn curlcurl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curlcurl")).args(args).output().expect("binary runs")
}

fn write_cube_mesh(path: &Path) {
    let mesh = curlcurl_core::cases::unit_cube(1, curlcurl_core::mesh::BoundaryTag::Dirichlet);
    let file = std::fs::File::create(path).unwrap();
    curlcurl_core::mesh::write_mesh(&mesh, std::io::BufWriter::new(file)).unwrap();
}

#[test]
fn run_writes_reproducible_tables() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let res = curlcurl(&[
            "run", "--case", "cube-smooth", "--N", "1", "--degree", "1", "--levels", "2", "--estimator", "sweep",
            "--out", out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("case,estimator,degree,level,h,ndofs,error"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..4], &["cube-smooth", "sweep", "1", "0"]);
    assert_eq!(text.lines().count(), 3);
    let timings = std::fs::read_to_string(dir.path().join("a.csv.timings.csv")).unwrap();
    assert_eq!(timings.lines().count(), 3);
    let marked = std::fs::read_to_string(dir.path().join("a.csv.marked.csv")).unwrap();
    assert!(marked.lines().count() > 1);
}

#[test]
fn file_case_and_check_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("cube.mesh");
    write_cube_mesh(&mesh);
    let res = curlcurl(&["check-mesh", mesh.to_str().unwrap()]);
    assert!(res.status.success());
    let out = String::from_utf8(res.stdout).unwrap();
    assert!(out.contains("tets 6") && out.contains("edges 19"), "{out}");

    let csv = dir.path().join("file.csv");
    let res = curlcurl(&[
        "run", "--case", "file", "--mesh", mesh.to_str().unwrap(), "--out", csv.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    // no exact solution: error columns stay empty
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6], "");
}

#[test]
fn bad_mesh_file_reports_line_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("bad.mesh");
    std::fs::write(&mesh, "tetmesh 1\nvertices 2\n0 0 0\n1 x 0\n").unwrap();
    let res = curlcurl(&["check-mesh", mesh.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn invalid_configuration_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let res = curlcurl(&["run", "--case", "cube-smooth", "--theta", "1.5", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    let res = curlcurl(&["run", "--case", "file", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    let res = curlcurl(&["run", "--case", "nowhere", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let res = Command::new(env!("CARGO_BIN_EXE_curlcurl"))
        .env("CURLCURL_THREADS", "0")
        .args(["check-mesh", "missing.mesh"])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn patch_experiment_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("stab.csv");
    let res = Command::new(env!("CARGO_BIN_EXE_curlcurl"))
        .env("CURLCURL_THREADS", "1")
        .args(["patch-experiment", "--degrees", "0..1", "--enrich", "1", "--seed", "7", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], "interior");
        let ratio: f64 = cols[8].parse().unwrap();
        assert!(ratio >= 1.0 - 1e-10);
    }
}
