use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mslab_core::report::ExperimentReport;

fn mslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mslab")).args(args).env("MSLAB_THREADS", "1").output().expect("runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn lists_the_suite() {
    let o = mslab(&["list"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 11);
}

#[test]
fn run_writes_reports_and_reruns_compare_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"tripod-suite": {"triangles": 40}}"#);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let o = mslab(&["run", "--experiment", "tripod-suite", "--config", &cfg, "--seed", "3", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("PASS tripod-suite"));
    }
    let json = out_a.join("tripod-suite.json");
    let r = ExperimentReport::from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(r.inputs.seed, 3);
    assert_eq!(r.inputs.parameters["triangles"], 40);
    assert!(fs::read_to_string(out_a.join("tripod-suite.csv")).unwrap().starts_with("series,index,value\n"));

    let b = out_b.join("tripod-suite.json");
    let o = mslab(&["compare", json.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 differing fields"));

    // a perturbed scalar above tolerance fails the comparison
    let mut p = r.clone();
    *p.outputs.scalars.get_mut("max_distortion").unwrap() *= 1.01;
    let pert = dir.path().join("perturbed.json");
    fs::write(&pert, p.to_json().unwrap()).unwrap();
    let o = mslab(&["compare", json.to_str().unwrap(), pert.to_str().unwrap(), "--tol", "0.005"]);
    assert_eq!(o.status.code(), Some(1));
    let o = mslab(&[
        "compare",
        json.to_str().unwrap(),
        pert.to_str().unwrap(),
        "--field-tol",
        "outputs.scalars.max_distortion=0.02",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn failing_assertions_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // K = 1 is below every filling's area ratio
    let cfg = write_config(dir.path(), r#"{"filling-suite": {"triangles": 5, "k": 1.0}}"#);
    let o = mslab(&["run", "--experiment", "filling-suite", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("failed area_ratio"));
}

#[test]
fn errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mslab(&["run", "--experiment", "no-such", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown experiment"));

    let cfg = write_config(dir.path(), r#"{"coarea": {"gird": 8}}"#);
    let o = mslab(&["run", "--experiment", "coarea", "--config", &cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid config"));

    let cfg = write_config(dir.path(), r#"{"coarea": {"grid": 3}}"#);
    let o = mslab(&["run", "--experiment", "coarea", "--config", &cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_and_modulus_of_a_square() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("sq.json");
    let o = mslab(&["gen", "euclid-square", "--n", "4", "--out", mesh.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    // vertex (i, j) of the 4×4 grid is j·5 + i
    let v = |i: usize, j: usize| j * 5 + i;
    let quad = serde_json::json!({
        "faces": null,
        "sides": [
            (0..=4).map(|j| v(0, j)).collect::<Vec<_>>(),
            (0..=4).map(|i| v(i, 0)).collect::<Vec<_>>(),
            (0..=4).map(|j| v(4, j)).collect::<Vec<_>>(),
            (0..=4).map(|i| v(i, 4)).collect::<Vec<_>>(),
        ]
    });
    let qp = dir.path().join("quad.json");
    fs::write(&qp, quad.to_string()).unwrap();
    let o = mslab(&["modulus", "--mesh", mesh.to_str().unwrap(), "--quad", qp.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((r["product"].as_f64().unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn embed_triangle_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("t.svg");
    let o = mslab(&["embed-triangle", "--lengths", "3,4,5", "--svg", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(d["max_expand"].as_f64().unwrap() <= 4.0);
    assert!(fs::read_to_string(svg).unwrap().contains("<svg"));
}
