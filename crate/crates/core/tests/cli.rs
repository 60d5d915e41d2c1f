//! The `dec-lab` binary end to end.

use std::process::{Command, Output};

fn dec_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dec-lab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generated_mesh_reports_its_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p2.decmesh");
    let path = path.to_str().unwrap();
    assert!(dec_lab(&["mesh", "gen", "--family", "pentagon", "--level", "2", "--out", path]).status.success());
    let report = dec_lab(&["mesh", "report", "--input", path]);
    let text = stdout(&report);
    assert!(text.contains("simplices 51 130 80"), "{text}");
    assert!(text.contains("boundary vertices 20"));
    assert!(text.contains("well_centered Strict"));

    let refined = dec_lab(&["mesh", "refine", "--input", path, "--family", "pentagon", "--level", "2"]);
    assert!(stdout(&refined).contains("vertices 181"));
}

#[test]
fn deterministic_studies_are_byte_identical() {
    let args = ["study", "convergence", "--family", "pentagon", "--levels", "4", "--format", "csv", "--deterministic"];
    let (a, b) = (dec_lab(&args), dec_lab(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv = stdout(&a);
    assert!(csv.starts_with("level,h,err_max,rate_max,err_h1,rate_h1,err_l2,rate_l2,iters,seconds"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn vertex_cap_stops_the_study_but_keeps_finished_rows() {
    let out = dec_lab(&["study", "convergence", "--levels", "6", "--max-vertices", "300", "--format", "csv"]);
    assert!(!out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("level 4"));
}

#[test]
fn solve_writes_a_solution_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.txt");
    let out = dec_lab(&["solve", "--family", "cube", "--problem", "linear3d", "--level", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let dump = std::fs::read_to_string(&path).unwrap();
    assert!(dump.starts_with("# mesh cube problem linear3d level 1"));
    assert_eq!(dump.lines().count(), 1 + 125);
}

#[test]
fn consistency_study_renders_svg() {
    let out = dec_lab(&["study", "consistency", "--levels", "3", "--degree", "1", "--format", "svg", "--deterministic"]);
    let svg = stdout(&out);
    assert!(svg.starts_with("<svg") && svg.contains("data-slope=\"1\""));
}

#[test]
fn unknown_family_is_a_usage_error() {
    let out = dec_lab(&["mesh", "gen", "--family", "torus"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("torus"));
}
