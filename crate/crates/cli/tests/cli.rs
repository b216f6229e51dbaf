use std::path::PathBuf;
use std::process::{Command, Output};

use lsl::mesh::Mesh;
use lsl::space_form::SpaceForm;
use lsl::surface::Grid;
use serde_json::Value;

fn lsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsl")).args(args).output().expect("binary runs")
}

fn lsl_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsl")).args(args).env("LSL_THREADS", threads).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

#[test]
fn harmonic_member_is_stationary() {
    let r = json(&lsl(&["classify", "--space", "r41", "--family", "i_lambda", "--lambda", "harmonic:z1^2-z2^2"]));
    assert_eq!(r["flags"]["stationary"], true);
    assert_eq!(r["samples"], 64 * 64);
}

#[test]
fn zero_member_is_totally_umbilic() {
    let r = json(&lsl(&["classify", "--space", "r41", "--family", "i_lambda", "--lambda", "zero"]));
    assert_eq!(r["flags"]["totally_umbilic"], true);
}

#[test]
fn bad_configuration_exits_2() {
    for args in [
        &["classify", "--space", "s41", "--family", "j?"][..],
        &["classify", "--space", "x41", "--family", "i_lambda"],
        &["classify", "--space", "r41", "--family", "i_lambda", "--grid", "3"],
        &["classify", "--space", "r41", "--family", "i_lambda", "--fd-step", "0.5"],
        &["classify", "--space", "r41", "--family", "i_lambda", "--lambda", "cosh"],
        &["classify", "--space", "s41", "--family", "i_c_lambda", "--c", "2"],
        &["verify", "bogus"],
        &["verify", "conformal", "--space", "h41"],
        &["audit"],
        &["no-such-command"],
    ] {
        let out = lsl(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn lifted_classification_agrees() {
    let out = lsl(&["classify", "--space", "r41", "--family", "i_lambda", "--lambda", "fn:z1^2", "--grid", "16", "--lifts"]);
    let r = json(&out);
    assert_eq!(r["lifts"]["all_agree"], true);
    assert_eq!(r["lifts"]["rows"].as_array().unwrap().len(), 8);
}

#[test]
fn prop31_suite_passes() {
    let r = json(&lsl(&["verify", "prop31", "--grid", "24"]));
    assert_eq!(r["pass"], true);
    assert_eq!(r["checks"].as_array().unwrap().len(), 6 * 3 * 8);
}

#[test]
fn integrability_on_de_sitter_space() {
    let r = json(&lsl(&["verify", "integrability", "--space", "s41"]));
    assert_eq!(r["pass"], true);
    assert_eq!(r["checks"][0]["value"], 0.0);
}

#[test]
fn tension_threshold_on_de_sitter_space() {
    let r = json(&lsl(&["verify", "tension", "--lambdaG", "12", "--space", "s41", "--grid", "16"]));
    assert_eq!(r["pass"], true);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.ends_with("harmonic")), "{names:?}");
}

#[test]
fn deformed_plane_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sin.csv");
    let p = path.to_str().unwrap();
    let out = lsl(&["deform", "--space", "r41", "--family", "i_lambda", "--lambda", "fn:sin(z1)", "--grid", "12", "--out", p]);
    assert!(out.status.success());
    let grid = Grid::square(-1.0, 1.0, 12).unwrap();
    let mesh = Mesh::read_csv(std::fs::File::open(&path).unwrap(), SpaceForm::Minkowski, grid).unwrap();
    assert_eq!(mesh.vertices.len(), 144);
    assert!(mesh.max_l_minus() < 1e-5);
}

#[test]
fn zero_deformation_is_the_base_mesh() {
    let args = |cmd: &'static str| vec![cmd, "--space", "s41", "--family", "i_c_lambda", "--c", "0.5", "--grid", "8"];
    let base: Mesh = serde_json::from_value(json(&lsl(&args("build")))).unwrap();
    let moved: Mesh = serde_json::from_value(json(&lsl(&args("deform")))).unwrap();
    assert!(base.max_position_diff(&moved).unwrap() < 1e-12);
}

#[test]
fn audit_reports_per_point_rows() {
    let r = json(&lsl(&["audit", "--chart", "conformal", "--expect", "oplus"]));
    assert_eq!(r["pass"], true);
    let pts = r["points"].as_array().unwrap();
    assert!(!pts.is_empty());
    assert_eq!(pts[0]["oplus"].as_array().unwrap().len(), 2);
    assert_eq!(pts[0]["og"].as_array().unwrap().len(), 4);
    assert!(r["og_sup"].as_f64().unwrap() > 1e-3);
}

#[test]
fn failed_expectation_exits_1() {
    assert_eq!(lsl(&["audit", "--chart", "conformal", "--expect", "og"]).status.code(), Some(1));
    assert_eq!(lsl(&["audit", "--chart", "product", "--expect", "oplus"]).status.code(), Some(1));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["classify", "--space", "h41", "--family", "j_c_lambda", "--c", "2", "--lambda", "y:0.1,0,0", "--lifts"];
    let a = lsl_env(&args, "1");
    let b = lsl_env(&args, "4");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = ["verify", "prop31", "--grid", "12", "--seed", "9"];
    assert_eq!(lsl_env(&v, "1").stdout, lsl_env(&v, "3").stdout);
}

#[test]
fn thread_cap_is_validated() {
    let out = lsl_env(&["verify", "stereographic"], "zero");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn documented_input_files() {
    let r = json(&lsl(&["classify", "--spec", &data("family_spec.json")]));
    assert_eq!(r["flags"]["pos_semi_umbilic"], true);
    assert_eq!(r["flags"]["pos_semi_stationary"], false);
    let r = json(&lsl(&["classify", "--chart", &data("lattice_chart.json")]));
    assert_eq!(r["flags"]["pos_semi_umbilic"], true);
    let r = json(&lsl(&["audit", "--metric", &data("metric_lattice.json"), "--expect", "oplus"]));
    assert_eq!(r["pass"], true);
}
