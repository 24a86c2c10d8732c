use std::path::Path;
use std::process::{Command, Output};

fn pwvem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwvem")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn even_p_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = pwvem(dir.path(), &["--experiment", "table1", "--p", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p = 2m+1"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "experiment = patch\nwavenumber = 3\n").unwrap();
    let o = pwvem(dir.path(), &["--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("wavenumber"));
}

#[test]
fn flags_override_config_and_out_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# patch run\nexperiment = patch\nk = 20\nmesh = structured:2\n").unwrap();
    let o = pwvem(dir.path(), &["--config", "run.cfg", "--k", "40"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let resolved = std::fs::read_to_string(dir.path().join("out/config.txt")).unwrap();
    assert!(resolved.contains("k = 40\n"), "{resolved}");
    let rows = csv_rows(&dir.path().join("out/patch.csv"));
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert_eq!(row[2], "40");
        assert!(row[6].parse::<f64>().unwrap() < 1e-8, "{row:?}");
    }
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--experiment", "voronoi_h", "--mesh", "voronoi:16,32", "--p", "7", "--seed", "5", "--out", "a"];
    assert!(pwvem(dir.path(), &args).status.success());
    let again = pwvem(dir.path(), &["--config", "a/config.txt", "--out", "b"]);
    assert!(again.status.success(), "{}", stderr(&again));
    let a = std::fs::read(dir.path().join("a/voronoi_h.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/voronoi_h.csv")).unwrap();
    assert_eq!(a, b);
    let rows = csv_rows(&dir.path().join("a/voronoi_h.csv"));
    assert_eq!(rows[0][7], "-");
    assert!(rows[1][7].parse::<f64>().is_ok());
    assert!(rows[0][10].starts_with("voronoi:16:seed=5"));
}

#[test]
fn table1_has_one_row_per_mesh_and_variant() {
    let dir = tempfile::tempdir().unwrap();
    let o = pwvem(dir.path(), &["--experiment", "table1", "--out", "t"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("t/table1.csv"));
    assert_eq!(rows.len(), 12);
    let pwvem_h2 = rows.iter().find(|r| r[1] == "PWVEM" && r[10] == "structured:4").unwrap();
    let e: f64 = pwvem_h2[6].parse().unwrap();
    assert!(e / 1.0990e-2 < 3.0 && 1.0990e-2 / e < 3.0, "{e}");
    for variant in ["PUM", "GRAD", "PWVEM"] {
        assert!(dir.path().join(format!("t/plots/table1_{variant}_p13.dat")).exists());
    }
}

#[test]
fn pollution_derives_k_from_the_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let o = pwvem(dir.path(), &["--experiment", "pollution", "--mesh", "voronoi:8,16"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for row in csv_rows(&dir.path().join("out/pollution.csv")) {
        let (k, h): (f64, f64) = (row[2].parse().unwrap(), row[4].parse().unwrap());
        assert!((k * h - 3.0).abs() < 1e-8, "{row:?}");
    }
    let o = pwvem(dir.path(), &["--experiment", "pollution", "--k", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mesh_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = pwvem::mesh::make_voronoi::<f64>(12, 3, 2).unwrap();
    pwvem::mesh::write_mesh(&mesh, dir.path().join("cells.mesh")).unwrap();
    let o = pwvem(dir.path(), &["--experiment", "patch", "--mesh", "cells.mesh", "--exact", "planewave"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/patch.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][10], "file:cells.mesh");
    let o = pwvem(dir.path(), &["--experiment", "patch", "--mesh", "missing.mesh"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn infsup_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = pwvem(dir.path(), &["--experiment", "infsup", "--cells", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/infsup.csv"));
    assert_eq!(rows.len(), 5);
    for row in rows {
        let hk: f64 = row[2].parse().unwrap();
        let beta: f64 = row[3].parse().unwrap();
        assert!((0.1..=1.0).contains(&hk) && beta > 0.0);
    }
}
